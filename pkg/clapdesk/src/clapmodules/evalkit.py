# evalkit -- downstream protocols and metrics: temporal IoU, temporal
#            non-maximum suppression, average precision and the mAP
#            suite, the linear probe with its sliding-window localizer,
#            few-shot episodes, text grounding and the foreground/
#            background feature distance analysis
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass
import json
import math

import numpy as np
import scipy.linalg
from scipy.special import softmax

from basemodules.datatypesupport import AbstractDataType
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, Callable, Natural, \
                                    NaturalList, ObjectList, Optional, \
                                    RandomGenerator, Real, RealList, \
                                    RealMatrix, RealVector, String, \
                                    StringMap, Tuple
from basemodules.utf8file import UTF8File

from .clap_businesstypes import EpisodeSpec, EvaluationConfig, \
                                GroundingConfig, Objective, ProbeConfig, \
                                Region, SgdConfig, WindowConfig
from .clap_errors import DataError, EpisodeError, InputError
from .corpus import SplitManifest, TimedCaption
from .language import encodeText, TextDescription, TextEncoderTable, \
                      TextOrigin
from .losses import ClassificationLabels, classificationLoss
from .model import embedText, ModelState
from .numkit import AffineLayer, LayerStack, SgdOptimizer, \
                    StandardizeLayer

#====================
# TYPES
#====================

@dataclass(frozen=True, repr=False)
class TemporalInterval (AbstractDataType):
    """A time interval [tStart, tEnd] in seconds"""

    tStart : Real
    tEnd   : Real

    #--------------------

    def __post_init__ (self):
        if not self.tStart < self.tEnd:
            raise InputError("interval start must precede its end: %r"
                             % ((self.tStart, self.tEnd),))

    #--------------------

    @property
    def length (self) -> Real:
        return self.tEnd - self.tStart

#--------------------

@dataclass(frozen=True, repr=False)
class Detection (AbstractDataType):
    """A scored class interval in a video"""

    videoIdentifier : String
    interval        : TemporalInterval
    classId         : Natural
    score           : Real

    #--------------------

    def __post_init__ (self):
        if not math.isfinite(self.score):
            raise InputError("detection score must be finite")

#--------------------

@dataclass(frozen=True, repr=False)
class GroundTruthSegment (AbstractDataType):
    """An annotated class interval in a video"""

    videoIdentifier : String
    interval        : TemporalInterval
    classId         : Natural

#====================
# METRICS
#====================

def tiou (a : TemporalInterval,
          b : TemporalInterval) -> Real:
    """Returns the temporal intersection over union of <a> and <b>"""

    intersection = min(a.tEnd, b.tEnd) - max(a.tStart, b.tStart)

    if intersection <= 0:
        result = 0.0
    else:
        union = max(a.tEnd, b.tEnd) - min(a.tStart, b.tStart)
        result = intersection / union

    return result

#--------------------

def nms (detectionList : ObjectList,
         threshold : Real) -> ObjectList:
    """Returns the detections kept by greedy suppression in order of
       descending score (ties: earlier start, then input order); a
       detection is dropped when its tIoU with a kept one exceeds
       <threshold>"""

    orderedList = sorted(enumerate(detectionList),
                         key=lambda x: (-x[1].score, x[1].interval.tStart,
                                        x[0]))
    result = []

    for _, detection in orderedList:
        if all(tiou(detection.interval, kept.interval) <= threshold
               for kept in result):
            result.append(detection)

    return result

#--------------------

def averagePrecision (detectionList : ObjectList,
                      groundTruthList : ObjectList,
                      threshold : Real) -> Real:
    """Returns the all-point interpolated average precision of
       <detectionList> against <groundTruthList> at tIoU <threshold>;
       detections are matched greedily in descending score order to
       the best overlapping unmatched ground truth of the same video
       and class; without ground truth the result is 0"""

    groundTruthCount = len(groundTruthList)

    if groundTruthCount == 0:
        Logging.trace("--: AP undefined without ground truth, using 0")
        return 0.0

    keyToIndexListMap = {}

    for i, groundTruth in enumerate(groundTruthList):
        key = (groundTruth.videoIdentifier, groundTruth.classId)
        keyToIndexListMap.setdefault(key, []).append(i)

    orderedList = sorted(enumerate(detectionList),
                         key=lambda x: (-x[1].score, x[0]))
    isMatched = [ False ] * groundTruthCount
    isTruePositiveList = []

    for _, detection in orderedList:
        key = (detection.videoIdentifier, detection.classId)
        bestIndex, bestOverlap = None, -1.0

        for i in keyToIndexListMap.get(key, []):
            overlap = tiou(detection.interval, groundTruthList[i].interval)

            if not isMatched[i] and overlap >= threshold \
               and overlap > bestOverlap:
                bestIndex, bestOverlap = i, overlap

        if bestIndex is not None:
            isMatched[bestIndex] = True

        isTruePositiveList.append(bestIndex is not None)

    truePositiveCount = np.cumsum(isTruePositiveList, dtype=np.float64)
    rankVector = np.arange(1, len(isTruePositiveList) + 1, dtype=np.float64)
    precisionVector = np.concatenate(([0.0], truePositiveCount / rankVector,
                                      [0.0]))
    recallVector = np.concatenate(([0.0],
                                   truePositiveCount / groundTruthCount,
                                   [1.0]))

    for i in range(len(precisionVector) - 2, -1, -1):
        precisionVector[i] = max(precisionVector[i], precisionVector[i + 1])

    return math.fsum((recallVector[i + 1] - recallVector[i])
                     * precisionVector[i + 1]
                     for i in range(len(recallVector) - 1))

#--------------------

def thresholdList (amapGrid : String) -> RealList:
    """Returns the tIoU thresholds of the average mAP: the full grid
       0.05:0.05:0.95 or its upper half 0.5:0.05:0.95"""

    lowIndex = 1 if amapGrid == "full" else 10
    return [ round(0.05 * k, 2) for k in range(lowIndex, 20) ]

#--------------------

def mapSuite (detectionList : ObjectList,
              groundTruthList : ObjectList,
              amapGrid : String = "full") -> StringMap:
    """Returns mAP at 0.5, 0.75 and 0.95, the average mAP over the
       threshold grid and the per-class AP at 0.5; mAP averages AP
       over the classes present in the ground truth"""

    classIdList = sorted(set(groundTruth.classId
                             for groundTruth in groundTruthList))
    classToDetectionListMap = { classId : [] for classId in classIdList }
    classToGroundTruthListMap = { classId : [] for classId in classIdList }

    for detection in detectionList:
        if detection.classId in classToDetectionListMap:
            classToDetectionListMap[detection.classId].append(detection)

    for groundTruth in groundTruthList:
        classToGroundTruthListMap[groundTruth.classId].append(groundTruth)

    gridList = thresholdList(amapGrid)
    thresholdToMapMap = {}
    classToApMap = {}

    for threshold in sorted(set(gridList) | { 0.5, 0.75, 0.95 }):
        apMap = { classId
                  : averagePrecision(classToDetectionListMap[classId],
                                     classToGroundTruthListMap[classId],
                                     threshold)
                  for classId in classIdList }
        thresholdToMapMap[threshold] = \
            (0.0 if len(classIdList) == 0
             else math.fsum(apMap.values()) / len(classIdList))

        if threshold == 0.5:
            classToApMap = apMap

    result = {
        "mAP@0.5"  : thresholdToMapMap[0.5],
        "mAP@0.75" : thresholdToMapMap[0.75],
        "mAP@0.95" : thresholdToMapMap[0.95],
        "AmAP"     : math.fsum(thresholdToMapMap[t] for t in gridList)
                     / len(gridList),
        "perClassAP@0.5" : { str(classId) : ap
                             for classId, ap in classToApMap.items() }
    }

    return result

#====================
# WINDOW SCORING
#====================

def _prefixSum (matrix : RealMatrix) -> RealMatrix:
    """Returns the prefix sums along axis 0 with a leading zero row"""

    return np.concatenate((np.zeros((1,) + matrix.shape[1:]),
                           np.cumsum(matrix, axis=0)))

#--------------------

def flankLength (windowLength : Natural,
                 contextRatio : Real) -> Natural:
    """Returns the length of each context flank of a window"""

    return max(1, round(contextRatio * windowLength))

#--------------------

def _windowSums (prefixMatrix : RealMatrix,
                 duration : Natural,
                 windowLength : Natural,
                 contextRatio : Real) -> Tuple:
    """Returns for all window starts with the given length the sums of
       the inner seconds and of both flanks (restricted to the video)
       together with the flank length"""

    startVector = np.arange(duration - windowLength + 1)
    endVector = startVector + windowLength
    flank = flankLength(windowLength, contextRatio)
    leftVector = np.maximum(startVector - flank, 0)
    rightVector = np.minimum(endVector + flank, duration)

    innerSum = prefixMatrix[endVector] - prefixMatrix[startVector]
    flankSum = ((prefixMatrix[startVector] - prefixMatrix[leftVector])
                + (prefixMatrix[rightVector] - prefixMatrix[endVector]))
    return startVector, innerSum, flankSum, flank

#--------------------

def localizeVideo (videoIdentifier : String,
                   foregroundVector : RealVector,
                   classScoreMatrix : RealMatrix,
                   classIdList : NaturalList,
                   windowCfg : WindowConfig) -> ObjectList:
    """Returns the detections of a video from its per-second foreground
       probabilities and class probabilities (columns corresponding to
       <classIdList>): every window of every configured scale gets per
       class the score mean foreground x mean class probability x
       (1 - contextWeight x mean foreground of the flanks), where
       seconds outside the video count as background; the best
       windows per class go through NMS and the top detections over
       all classes are returned"""

    duration = len(foregroundVector)
    foregroundPrefix = _prefixSum(foregroundVector)
    classPrefix = _prefixSum(classScoreMatrix)
    classToCandidateListMap = { classId : [] for classId in classIdList }

    for windowLength in windowCfg.windowScaleList:
        if windowLength > duration:
            continue

        startVector, innerForeground, flankForeground, flank = \
            _windowSums(foregroundPrefix, duration, windowLength,
                        windowCfg.contextRatio)
        _, innerClass, _, _ = _windowSums(classPrefix, duration,
                                          windowLength,
                                          windowCfg.contextRatio)
        contextFactor = (1.0 - windowCfg.contextWeight
                         * flankForeground / (2 * flank))
        scoreMatrix = ((innerForeground / windowLength * contextFactor)
                       [:, None] * innerClass / windowLength)

        for j, classId in enumerate(classIdList):
            candidateList = classToCandidateListMap[classId]

            for i, start in enumerate(startVector):
                candidateList.append((float(scoreMatrix[i, j]), int(start),
                                      int(start) + windowLength))

    result = []

    for classId in classIdList:
        candidateList = sorted(classToCandidateListMap[classId],
                               key=lambda x: (-x[0], x[1], x[2]))
        candidateList = candidateList[:windowCfg.preNmsCount]
        detectionList = [ Detection(videoIdentifier,
                                    TemporalInterval(tStart, tEnd),
                                    classId, score)
                          for score, tStart, tEnd in candidateList ]
        result.extend(nms(detectionList, windowCfg.nmsThreshold))

    result.sort(key=lambda d: (-d.score, d.classId, d.interval.tStart,
                               d.interval.tEnd))
    return result[:windowCfg.topDetectionCount]

#====================
# LINEAR PROBE
#====================

class LinearProbe:
    """A region and class classifier on frozen per-second features:
       the features are standardized with the training statistics and
       two affine heads are fitted by full-batch gradient descent on
       the classification loss"""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    def _makeHead (self,
                   mean : RealVector,
                   variance : RealVector,
                   outputDimension : Natural,
                   name : String) -> LayerStack:
        """Returns a head stack (fixed standardization + zero affine
           map) in eval mode"""

        dimension = len(mean)
        standardizeLayer = StandardizeLayer(dimension)
        standardizeLayer.runningMean = mean.copy()
        standardizeLayer.runningVariance = variance.copy()
        affineLayer = AffineLayer(np.zeros((outputDimension, dimension)))
        result = LayerStack([standardizeLayer, affineLayer], name)
        result.setTrainingMode(False)
        return result

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    def __init__ (self,
                  classCount : Natural):
        self.classCount = classCount
        self._classHead  = None
        self._regionHead = None

    #--------------------

    def fit (self,
             featureMap : StringMap,
             videoList : ObjectList,
             probeCfg : ProbeConfig):
        """Fits the probe on all seconds of the videos in <videoList>
           with their features from <featureMap>"""

        Logging.trace(">>: videos = %d, steps = %d",
                      len(videoList), probeCfg.stepCount)

        if len(videoList) == 0:
            raise DataError("linear probe needs training videos")

        featureMatrix = np.vstack([ featureMap[video.identifier]
                                    for video in videoList ])
        classLabelVector = np.concatenate([ video.classLabelVector()
                                            for video in videoList ])
        regionLabelVector = np.where(classLabelVector >= 0,
                                     Region.foreground, Region.background)
        labels = ClassificationLabels(regionLabelVector, classLabelVector)

        mean = featureMatrix.mean(axis=0)
        variance = featureMatrix.var(axis=0)
        self._classHead = self._makeHead(mean, variance, self.classCount,
                                         "probeClass")
        self._regionHead = self._makeHead(mean, variance, 2, "probeRegion")

        sgdConfig = SgdConfig(probeCfg.learningRate, probeCfg.learningRate,
                              1.0, 1)
        headMap = { "class" : self._classHead, "region" : self._regionHead }
        parameterNameList = ("1.weight", "1.bias")
        groupToParameterMap = {
            "heads" : { headName + "." + name : head.parameterMap()[name]
                        for headName, head in headMap.items()
                        for name in parameterNameList } }

        for _ in range(probeCfg.stepCount):
            classLogitMatrix, classTape = \
                self._classHead.forward(featureMatrix, False)
            regionLogitMatrix, regionTape = \
                self._regionHead.forward(featureMatrix, False)
            _, classGradient, regionGradient = \
                classificationLoss(classLogitMatrix, regionLogitMatrix,
                                   labels)
            _, classGradientMap = self._classHead.backward(classTape,
                                                           classGradient)
            _, regionGradientMap = self._regionHead.backward(regionTape,
                                                             regionGradient)
            headToGradientMap = { "class"  : classGradientMap,
                                  "region" : regionGradientMap }
            groupToGradientMap = {
                "heads" : { headName + "." + name : gradientMap[name]
                            for headName, gradientMap
                            in headToGradientMap.items()
                            for name in parameterNameList } }
            SgdOptimizer.step(groupToParameterMap, groupToGradientMap, 0,
                              sgdConfig)
            self._classHead.markParametersChanged()
            self._regionHead.markParametersChanged()

        Logging.trace("<<")

    #--------------------

    def predict (self,
                 featureMatrix : RealMatrix) -> Tuple:
        """Returns per row the foreground probability and the class
           probabilities"""

        classLogitMatrix, _ = self._classHead.forward(featureMatrix, False)
        regionLogitMatrix, _ = self._regionHead.forward(featureMatrix, False)
        regionProbabilityMatrix = softmax(regionLogitMatrix, axis=1)
        return (regionProbabilityMatrix[:, Region.foreground],
                softmax(classLogitMatrix, axis=1))

#====================
# PROTOCOLS
#====================

def groundTruthSegmentList (videoList : ObjectList,
                            classIdSet : Optional[set] = None) -> ObjectList:
    """Returns the foreground segments of <videoList> (restricted to
       <classIdSet> when given) as ground truth"""

    return [ GroundTruthSegment(video.identifier,
                                TemporalInterval(segment.tStart,
                                                 segment.tEnd),
                                segment.classId)
             for video in videoList
             for segment in video.foregroundSegmentList
             if classIdSet is None or segment.classId in classIdSet ]

#--------------------

def localizeTal (featureMap : StringMap,
                 videoList : ObjectList,
                 probe : LinearProbe,
                 windowCfg : WindowConfig) -> ObjectList:
    """Returns the detections of all videos in <videoList> scored by
       the fitted <probe>"""

    result = []
    classIdList = list(range(probe.classCount))

    for video in videoList:
        foregroundVector, classProbabilityMatrix = \
            probe.predict(featureMap[video.identifier])
        result.extend(localizeVideo(video.identifier, foregroundVector,
                                    classProbabilityMatrix, classIdList,
                                    windowCfg))

    return result

#--------------------

def talProtocol (featureMap : StringMap,
                 corpus : ObjectList,
                 manifest : SplitManifest,
                 windowCfg : WindowConfig,
                 probeCfg : ProbeConfig,
                 evaluationCfg : EvaluationConfig) -> Tuple:
    """Fits the linear probe on the training videos, localizes the
       actions of the validation videos and returns the mAP report
       and the detections"""

    Logging.trace(">>: videos = %d", len(corpus))

    idToVideoMap = { video.identifier : video for video in corpus }
    trainVideoList = [ idToVideoMap[i] for i in manifest.trainVideoIdList ]
    validationVideoList = [ idToVideoMap[i]
                            for i in manifest.validationVideoIdList ]

    probe = LinearProbe(manifest.classCount)
    probe.fit(featureMap, trainVideoList, probeCfg)
    detectionList = localizeTal(featureMap, validationVideoList, probe,
                                windowCfg)
    report = mapSuite(detectionList,
                      groundTruthSegmentList(validationVideoList),
                      evaluationCfg.amapGrid)
    report["videoCount"] = len(validationVideoList)
    report["detectionCount"] = len(detectionList)

    Logging.trace("<<: AmAP = %.6f", report["AmAP"])
    return report, detectionList

#--------------------

def _unitRows (matrix : RealMatrix) -> RealMatrix:
    """Returns the rows of <matrix> scaled to unit norm; zero rows
       stay zero"""

    norms = np.linalg.norm(matrix, axis=-1, keepdims=True)
    return matrix / np.maximum(norms, 1e-12)

#--------------------

def _classVideoList (corpus : ObjectList,
                     classId : Natural) -> ObjectList:
    return [ video for video in corpus
             if any(segment.classId == classId
                    for segment in video.foregroundSegmentList) ]

#--------------------

def fewshotEpisode (featureMap : StringMap,
                    corpus : ObjectList,
                    episodeSpec : EpisodeSpec,
                    episodeIndex : Natural,
                    windowCfg : WindowConfig,
                    evaluationCfg : EvaluationConfig) -> StringMap:
    """Runs one episode: draws <shotCount> support videos per novel
       class, builds the class prototypes from their foreground
       features and a background prototype from their background
       features, scores the seconds of all remaining videos of novel
       classes by a cosine softmax and localizes the novel actions"""

    novelClassList = episodeSpec.novelClassList
    rng = np.random.default_rng([episodeSpec.seed, episodeIndex])
    supportIdSet = set()
    prototypeList = []
    backgroundFeatureList = []

    for classId in novelClassList:
        candidateList = sorted(_classVideoList(corpus, classId),
                               key=lambda video: video.identifier)

        if len(candidateList) < episodeSpec.shotCount:
            message = ("novel class %d has %d videos, %d shots needed"
                       % (classId, len(candidateList),
                          episodeSpec.shotCount))
            Logging.traceError(message)
            raise EpisodeError(message)

        selection = rng.choice(len(candidateList), episodeSpec.shotCount,
                               replace=False)
        classFeatureList = []

        for index in sorted(selection.tolist()):
            video = candidateList[index]
            supportIdSet.add(video.identifier)
            featureMatrix = featureMap[video.identifier]
            labelVector = video.classLabelVector()
            classFeatureList.append(featureMatrix[labelVector == classId])
            backgroundFeatureList.append(featureMatrix[labelVector < 0])

        prototypeList.append(np.vstack(classFeatureList).mean(axis=0))

    backgroundMatrix = np.vstack(backgroundFeatureList)
    backgroundPrototype = (backgroundMatrix.mean(axis=0)
                           if len(backgroundMatrix) > 0
                           else np.zeros_like(prototypeList[0]))
    prototypeMatrix = _unitRows(np.vstack(prototypeList
                                          + [backgroundPrototype]))

    novelClassSet = set(novelClassList)
    queryVideoList = [ video for video in corpus
                       if video.identifier not in supportIdSet
                       and any(segment.classId in novelClassSet
                               for segment in video.foregroundSegmentList) ]
    detectionList = []

    for video in queryVideoList:
        similarityMatrix = (_unitRows(featureMap[video.identifier])
                            @ prototypeMatrix.T
                            / episodeSpec.fewshotTemperature)
        probabilityMatrix = softmax(similarityMatrix, axis=1)
        foregroundVector = 1.0 - probabilityMatrix[:, -1]
        classProbabilityMatrix = softmax(similarityMatrix[:, :-1], axis=1)
        detectionList.extend(localizeVideo(video.identifier,
                                           foregroundVector,
                                           classProbabilityMatrix,
                                           novelClassList, windowCfg))

    result = mapSuite(detectionList,
                      groundTruthSegmentList(queryVideoList, novelClassSet),
                      evaluationCfg.amapGrid)
    result["episode"] = episodeIndex
    result["queryVideoCount"] = len(queryVideoList)
    return result

#--------------------

def fewshotProtocol (featureMap : StringMap,
                     corpus : ObjectList,
                     episodeSpec : EpisodeSpec,
                     windowCfg : WindowConfig,
                     evaluationCfg : EvaluationConfig) -> StringMap:
    """Returns the per-episode mAP suites over the novel classes of
       <episodeSpec> together with their means and sample standard
       deviations"""

    Logging.trace(">>: episodes = %d, shots = %d",
                  episodeSpec.episodeCount, episodeSpec.shotCount)

    if len(episodeSpec.novelClassList) == 0:
        raise EpisodeError("few-shot episodes need novel classes")

    episodeList = [ fewshotEpisode(featureMap, corpus, episodeSpec, e,
                                   windowCfg, evaluationCfg)
                    for e in range(episodeSpec.episodeCount) ]
    result = { "episodes" : episodeList,
               "novelClassList" : episodeSpec.novelClassList,
               "shotCount" : episodeSpec.shotCount }

    for key in ("mAP@0.5", "mAP@0.75", "mAP@0.95", "AmAP"):
        valueList = [ episode[key] for episode in episodeList ]
        result[key] = math.fsum(valueList) / len(valueList)
        result[key + ".std"] = (float(np.std(valueList, ddof=1))
                                if len(valueList) > 1 else 0.0)

    Logging.trace("<<: AmAP = %.6f", result["AmAP"])
    return result

#--------------------

def _captionSecondRange (caption : TimedCaption,
                         duration : Natural) -> Tuple:
    """Returns the whole seconds [first, last) covered by <caption>"""

    first = max(0, int(math.floor(caption.tStart)))
    last = min(duration, int(math.ceil(caption.tEnd)))
    return first, max(last, first + 1)

#--------------------

def fitTextMap (featureMap : StringMap,
                videoList : ObjectList,
                table : TextEncoderTable,
                ridge : Real) -> RealMatrix:
    """Returns the ridge regression map M (textDimension x
       featureDimension) with x_t M approximating the mean foreground
       feature of the caption seconds, fitted on the captions of
       <videoList>"""

    Logging.trace(">>: videos = %d, ridge = %g", len(videoList), ridge)

    textRowList = []
    featureRowList = []

    for video in videoList:
        featureMatrix = featureMap[video.identifier]
        foregroundMask = video.foregroundMask()

        for caption in video.captionList:
            first, last = _captionSecondRange(caption, video.duration)
            mask = foregroundMask[first:last]
            secondFeatureMatrix = featureMatrix[first:last]

            if np.any(mask):
                secondFeatureMatrix = secondFeatureMatrix[mask]

            description = TextDescription(caption.text, TextOrigin.caption,
                                          True)
            textRowList.append(encodeText(description, table))
            featureRowList.append(secondFeatureMatrix.mean(axis=0))

    if len(textRowList) == 0:
        raise DataError("fitting the text map needs captions")

    textMatrix = np.vstack(textRowList)
    targetMatrix = np.vstack(featureRowList)
    gramMatrix = textMatrix.T @ textMatrix \
                 + ridge * np.eye(textMatrix.shape[1])
    result = scipy.linalg.solve(gramMatrix, textMatrix.T @ targetMatrix,
                                assume_a="pos")

    Logging.trace("<<: %r", result.shape)
    return result

#--------------------

def rankWindows (featureMatrix : RealMatrix,
                 queryVector : RealVector,
                 embedProc : Callable,
                 groundingCfg : GroundingConfig) -> ObjectList:
    """Returns the (interval, score) pairs of all windows after NMS in
       descending score order; a window scores the cosine between the
       query and the embedding of its mean feature minus contextWeight
       times the cosine for its flanks, where seconds outside the video
       contribute nothing; <embedProc> maps mean feature rows to unit
       embedding rows; when no configured scale fits the video, the
       whole video is the only window"""

    duration = featureMatrix.shape[0]
    prefixMatrix = _prefixSum(featureMatrix)
    candidateList = []
    windowLengthList = [ windowLength
                         for windowLength in groundingCfg.windowScaleList
                         if windowLength <= duration ]

    if len(windowLengthList) == 0 and duration > 0:
        Logging.trace("--: no window scale fits, using whole video")
        windowLengthList = [ duration ]

    for windowLength in windowLengthList:
        startVector, innerSum, flankSum, flank = \
            _windowSums(prefixMatrix, duration, windowLength,
                        groundingCfg.contextRatio)
        innerCosine = embedProc(innerSum / windowLength) @ queryVector
        scoreVector = innerCosine

        if groundingCfg.contextWeight > 0.0:
            endVector = startVector + windowLength
            insideCount = (np.minimum(endVector + flank, duration) - endVector
                           + startVector
                           - np.maximum(startVector - flank, 0))
            flankMean = flankSum / np.maximum(insideCount, 1)[:, None]
            flankCosine = np.where(insideCount > 0,
                                   embedProc(flankMean) @ queryVector, 0.0)
            scoreVector = (innerCosine - groundingCfg.contextWeight
                           * insideCount / (2 * flank) * flankCosine)

        for start, score in zip(startVector.tolist(), scoreVector.tolist()):
            candidateList.append((score, start, start + windowLength))

    candidateList.sort(key=lambda x: (-x[0], x[1], x[2]))
    detectionList = [ Detection("", TemporalInterval(tStart, tEnd), 0,
                                score)
                      for score, tStart, tEnd in candidateList ]
    return [ (detection.interval, detection.score)
             for detection in nms(detectionList,
                                  groundingCfg.nmsThreshold) ]

#--------------------

def _windowEmbedProc (state : ModelState,
                      projectionIsUsed : Boolean) -> Callable:
    """Returns the function mapping mean feature rows of windows to
       unit rows: through the video projection of <state> (eval mode)
       or in feature space"""

    def embedThroughProjection (matrix : RealMatrix) -> RealMatrix:
        state.setTrainingMode(False)
        return _unitRows(state.projectionVideo.forward(matrix, False)[0])

    return embedThroughProjection if projectionIsUsed else _unitRows

#--------------------

def groundText (featureMatrix : RealMatrix,
                state : ModelState,
                query : TextDescription,
                groundingCfg : GroundingConfig,
                textMap : Optional[RealMatrix] = None) -> ObjectList:
    """Returns the ranked intervals of the video with per-second
       features <featureMatrix> for <query>; windows are embedded with
       the video projection of <state> or, when <textMap> is given,
       compared in feature space with the mapped text"""

    if textMap is None:
        queryVector = embedText(state, query)
    else:
        queryVector = _unitRows(encodeText(query, state.textTable)
                                @ textMap)

    embedProc = _windowEmbedProc(state, textMap is None)
    return rankWindows(featureMatrix, queryVector, embedProc, groundingCfg)

#--------------------

def _groundingMetrics (overlapList : RealList,
                       groundingCfg : GroundingConfig) -> StringMap:
    result = { "recall@%g" % threshold :
                   (sum(1 for x in overlapList if x >= threshold)
                    / len(overlapList))
               for threshold in groundingCfg.recallThresholdList }
    result["mIoU"] = math.fsum(overlapList) / len(overlapList)
    return result

#--------------------

def groundingProtocol (featureMap : StringMap,
                       state : ModelState,
                       corpus : ObjectList,
                       manifest : SplitManifest,
                       groundingCfg : GroundingConfig,
                       seed : Natural = 0) -> StringMap:
    """Grounds every caption of the validation videos in its video and
       returns top-1 recall at the configured tIoU thresholds and the
       mean IoU, also for random query embeddings as baseline"""

    Logging.trace(">>: mode = %s", groundingCfg.textMapMode)

    idToVideoMap = { video.identifier : video for video in corpus }
    mode = groundingCfg.textMapMode

    if mode == "auto":
        isTac = (state.metadataMap.get("objective") == Objective.tac)
        mode = "fitted" if isTac else "projection"

    textMap = None

    if mode == "fitted":
        textMap = fitTextMap(featureMap,
                             [ idToVideoMap[i]
                               for i in manifest.trainVideoIdList ],
                             state.textTable, groundingCfg.ridge)

    rng = np.random.default_rng([seed, 6])
    overlapList = []
    baselineOverlapList = []

    for identifier in manifest.validationVideoIdList:
        video = idToVideoMap[identifier]
        featureMatrix = featureMap[identifier]

        for caption in video.captionList:
            query = TextDescription(caption.text, TextOrigin.caption, True)
            groundTruth = TemporalInterval(caption.tStart, caption.tEnd)
            rankingList = groundText(featureMatrix, state, query,
                                     groundingCfg, textMap)
            overlapList.append(tiou(rankingList[0][0], groundTruth))

            dimension = (state.dimensions.embeddingDimension
                         if textMap is None else featureMatrix.shape[1])
            randomVector = _unitRows(rng.standard_normal(dimension))
            embedProc = _windowEmbedProc(state, textMap is None)

            baselineList = rankWindows(featureMatrix, randomVector,
                                       embedProc, groundingCfg)
            baselineOverlapList.append(tiou(baselineList[0][0],
                                            groundTruth))

    if len(overlapList) == 0:
        raise DataError("grounding needs captions in validation videos")

    result = _groundingMetrics(overlapList, groundingCfg)
    result["queryCount"] = len(overlapList)
    result["textMapMode"] = mode
    result["randomBaseline"] = _groundingMetrics(baselineOverlapList,
                                                 groundingCfg)

    Logging.trace("<<: %r", result)
    return result

#--------------------

def featureDistanceAnalysis (featureMap : StringMap,
                             corpus : ObjectList,
                             rng : RandomGenerator,
                             binCount : Natural) -> StringMap:
    """Returns per video the difference between the foreground-to-
       background and the foreground-to-foreground L2 distances of two
       random foreground seconds and one random background second, with
       histogram and summary statistics; videos with fewer than two
       foreground or no background seconds are skipped and counted"""

    Logging.trace(">>: videos = %d", len(corpus))

    differenceList = []
    skippedCount = 0

    for video in corpus:
        featureMatrix = featureMap[video.identifier]
        foregroundMask = video.foregroundMask()
        foregroundIndexVector = np.flatnonzero(foregroundMask)
        backgroundIndexVector = np.flatnonzero(~foregroundMask)

        if len(foregroundIndexVector) < 2 \
           or len(backgroundIndexVector) < 1:
            skippedCount += 1
            continue

        first, second = rng.choice(foregroundIndexVector, 2, replace=False)
        background = rng.choice(backgroundIndexVector)
        foregroundDistance = np.linalg.norm(featureMatrix[first]
                                            - featureMatrix[second])
        backgroundDistance = np.linalg.norm(featureMatrix[first]
                                            - featureMatrix[background])
        differenceList.append(float(backgroundDistance
                                    - foregroundDistance))

    countVector, edgeVector = np.histogram(differenceList, bins=binCount)
    isEmpty = (len(differenceList) == 0)
    result = {
        "differences"   : differenceList,
        "skippedCount"  : skippedCount,
        "median"        : 0.0 if isEmpty
                          else float(np.median(differenceList)),
        "mean"          : 0.0 if isEmpty
                          else math.fsum(differenceList)
                               / len(differenceList),
        "positiveShare" : 0.0 if isEmpty
                          else (sum(1 for x in differenceList if x > 0)
                                / len(differenceList)),
        "histogram"     : { "counts" : countVector.tolist(),
                            "edges"  : edgeVector.tolist() }
    }

    Logging.trace("<<: median = %r, skipped = %d",
                  result["median"], skippedCount)
    return result

#====================
# OUTPUT FILES
#====================

def writeHistogramCsv (histogramMap : StringMap,
                       fileName : String):
    """Writes the histogram as CSV with columns bin_left, bin_right and
       count"""

    countList = histogramMap["counts"]
    edgeList = histogramMap["edges"]
    lineList = [ "bin_left,bin_right,count" ]
    lineList += [ "%r,%r,%d" % (edgeList[i], edgeList[i + 1], count)
                  for i, count in enumerate(countList) ]

    with UTF8File(fileName, "wt") as file:
        file.writelines(lineList)

#--------------------

def writeDetections (detectionList : ObjectList,
                     fileName : String):
    """Writes one JSON line per detection"""

    lineList = [ json.dumps({ "video_id" : detection.videoIdentifier,
                              "t_start"  : detection.interval.tStart,
                              "t_end"    : detection.interval.tEnd,
                              "class_id" : detection.classId,
                              "score"    : detection.score },
                            sort_keys=True)
                 for detection in detectionList ]

    with UTF8File(fileName, "wt") as file:
        file.writelines(lineList)

#--------------------

def writeReport (reportMap : StringMap,
                 fileName : String):
    """Writes <reportMap> as pretty-printed JSON with sorted keys"""

    with UTF8File(fileName, "wt") as file:
        file.write(json.dumps(reportMap, sort_keys=True, indent=2) + "\n")
