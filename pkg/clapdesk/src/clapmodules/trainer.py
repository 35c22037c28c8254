# trainer -- the post-pre-training loop: batch composition from
#            sampled clips and their descriptions, objective
#            evaluation, two-group SGD updates with step decay,
#            JSONL step logs, checkpoints and feature extraction
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass, field
import json
import math
import time

import numpy as np

from basemodules.operatingsystem import OperatingSystem
from basemodules.simpleassertion import Assertion
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Natural, ObjectList, Optional, \
                                    RandomGenerator, Real, RealMatrix, \
                                    String, StringList, StringMap, Tuple
from basemodules.utf8file import UTF8File

from .clap_businesstypes import codeVersion, ModelDimensions, Objective, \
                                Region, TrainConfig
from .clap_errors import ConfigurationError, InputError, \
                         MissingArtifactError, NumericError, ParseError
from .corpus import ClipSampler, idListChecksum, SamplingMode, \
                    SplitManifest
from .language import describeClip, encodeTextBatch, TextEncoderTable
from .losses import ClassificationLabels, ContrastiveBatch, LossReport, \
                    totalLoss
from .model import backwardBatch, CheckpointFile, embedFeatures, \
                   forwardBatch, initModel, ModelState, \
                   textTableChecksum, thetaVChecksum
from .numkit import SgdOptimizer

#====================
# TYPES
#====================

class TrainingSplit:
    """The video selections available for post-pre-training"""

    train = "train"
    base  = "base"
    all   = "all"

    allList = (train, base, all)

#--------------------

@dataclass(frozen=True, eq=False)
class TrainingBatch:
    """The clips of one step with their descriptions, raw and text
       features and classification labels"""

    clipList        : ObjectList
    descriptionList : ObjectList
    rawMatrix       : RealMatrix
    textMatrix      : RealMatrix
    labels          : ClassificationLabels

#--------------------

@dataclass
class TrainLog:
    """The step records (loss terms and learning rates per step) and
       the epoch summaries of a training run"""

    stepRecordList   : ObjectList = field(default_factory=list)
    epochSummaryList : ObjectList = field(default_factory=list)

    #--------------------

    def epochMeanLossList (self) -> list:
        """Returns the mean total loss per epoch"""

        return [ summary["meanLoss"] for summary in self.epochSummaryList ]

    #--------------------

    def learningRateTrace (self, groupName : String) -> list:
        """Returns the learning rate of <groupName> per step"""

        return [ record["learningRates"][groupName]
                 for record in self.stepRecordList ]

#====================
# LOCAL FEATURES
#====================

def _jsonNumber (x : Optional[Real]) -> object:
    return x if x is None or math.isfinite(x) else repr(x)

#--------------------

def _parameterNormMap (state : ModelState) -> StringMap:
    """Returns the parameter norms; non-finite norms become strings"""

    return { name : _jsonNumber(float(np.linalg.norm(value)))
             for name, value in sorted(state.parameterMap().items()) }

#--------------------

def _writeDiagnosticDump (fileName : String,
                          epoch : Natural,
                          step : Natural,
                          batch : TrainingBatch,
                          report : Optional[LossReport],
                          state : ModelState,
                          message : String):
    """Writes the diagnostic dump of an offending batch"""

    Logging.trace(">>: %r", fileName)

    dumpMap = {
        "epoch"   : epoch,
        "step"    : step,
        "message" : message,
        "clips"   : [ { "videoId" : clip.videoIdentifier,
                        "tStart"  : clip.tStart,
                        "tEnd"    : clip.tEnd }
                      for clip in batch.clipList ],
        "texts"   : [ description.text
                      for description in batch.descriptionList ],
        "losses"  : (None if report is None
                     else { name : (value if isinstance(value, str)
                                    else _jsonNumber(value))
                            for name, value in report.termMap().items() }),
        "parameterNorms" : _parameterNormMap(state)
    }

    text = json.dumps(dumpMap, sort_keys=True, indent=2)

    with UTF8File(fileName, "wt") as file:
        file.write(text + "\n")

    Logging.trace("<<")

#====================
# EXPORTED FEATURES
#====================

def selectTrainingVideos (corpus : ObjectList,
                          manifest : SplitManifest,
                          split : String) -> ObjectList:
    """Returns the videos of <corpus> used for training under <split>:
       the training split, its base-class part or all videos"""

    Logging.trace(">>: split = %r", split)

    if split not in TrainingSplit.allList:
        raise InputError("unknown training split %r" % split)

    if split == TrainingSplit.all:
        result = list(corpus)
    else:
        idSet = set(manifest.trainVideoIdList if split == TrainingSplit.train
                    else manifest.baseTrainVideoIdList)
        result = [ video for video in corpus if video.identifier in idSet ]

    if len(result) == 0:
        raise ConfigurationError("no videos in training split %r" % split)

    Logging.trace("<<: %d videos", len(result))
    return result

#--------------------

def derivedStepsPerEpoch (corpus : ObjectList,
                          cfg : TrainConfig) -> Natural:
    """Returns the configured steps per epoch or, when that is 0, the
       number of batches covering all sampled clips of an epoch"""

    if cfg.stepsPerEpoch > 0:
        result = cfg.stepsPerEpoch
    else:
        segmentCount = sum(len(video.segmentList) for video in corpus)
        result = max(1, math.ceil(segmentCount * cfg.clipsPerSegment
                                  / cfg.batchSize))

    return result

#--------------------

def buildBatch (corpus : ObjectList,
                cfg : TrainConfig,
                rng : RandomGenerator,
                actionNameList : StringList,
                textTable : TextEncoderTable) -> TrainingBatch:
    """Returns a batch of <cfg.batchSize> clips: each draw takes a
       uniformly chosen video with segments, samples its clips in train
       mode and keeps one of them at random; every clip is described
       under the prompt policy of the objective"""

    Logging.trace(">>: batchSize = %d", cfg.batchSize)

    samplableList = [ video for video in corpus
                      if len(video.segmentList) > 0 ]

    if len(samplableList) == 0:
        raise ConfigurationError("cannot build a batch from a corpus"
                                 " without segments")

    if Objective.contrastiveTerm(cfg.objective) is not None \
       and not any(len(video.foregroundSegmentList) > 0
                   for video in corpus):
        raise ConfigurationError("contrastive objective %s needs"
                                 " foreground segments" % cfg.objective)

    policy = cfg.promptPolicy
    clipList = []
    descriptionList = []

    while len(clipList) < cfg.batchSize:
        video = samplableList[int(rng.integers(len(samplableList)))]
        sampleList = ClipSampler.sampleClips(video, cfg.clipsPerSegment,
                                             SamplingMode.train, rng)
        clip = sampleList[int(rng.integers(len(sampleList)))]
        clipList.append(clip)
        descriptionList.append(describeClip(clip, video, policy, rng,
                                            actionNameList))

    rawMatrix = np.array([ clip.rawFeature for clip in clipList ],
                         dtype=np.float64)

    if cfg.trainJitterScale > 0.0:
        rawMatrix = rawMatrix + (cfg.trainJitterScale
                                 * rng.standard_normal(rawMatrix.shape))

    textMatrix = encodeTextBatch(descriptionList, textTable)
    labels = ClassificationLabels(
        np.array([ Region.foreground if clip.isForeground
                   else Region.background for clip in clipList ]),
        np.array([ clip.classId if clip.isForeground else -1
                   for clip in clipList ]))

    result = TrainingBatch(clipList, descriptionList, rawMatrix,
                           textMatrix, labels)
    Logging.trace("<<: foreground = %d",
                  int(np.sum(labels.regionLabelVector)))
    return result

#--------------------

def trainStep (state : ModelState,
               batch : TrainingBatch,
               cfg : TrainConfig,
               epoch : Natural) -> Tuple:
    """Runs forward pass, loss, backward pass and SGD update of
       <batch>; returns the loss report and the learning rates"""

    objective = cfg.objective
    isContrastive = (Objective.contrastiveTerm(objective) is not None)
    hasClassification = Objective.hasClassificationTerm(objective)

    record = forwardBatch(state, batch.rawMatrix,
                          batch.textMatrix if isContrastive else None,
                          hasClassification)
    contrastiveBatch = None

    if isContrastive:
        contrastiveBatch = ContrastiveBatch(
            record.videoEmbeddingMatrix, record.textEmbeddingMatrix,
            batch.labels.regionLabelVector == Region.foreground,
            [ description.text for description in batch.descriptionList ])

    report, gradients = \
        totalLoss(objective, state.temperature, contrastiveBatch,
                  record.classLogitMatrix, record.regionLogitMatrix,
                  batch.labels, cfg.maskedLossIsForegroundNormalized,
                  cfg.dedupeNegatives)
    groupToGradientMap = \
        backwardBatch(state, record, gradients.videoEmbeddingGradient,
                      gradients.textEmbeddingGradient,
                      gradients.classLogitGradient,
                      gradients.regionLogitGradient)
    learningRateMap = SgdOptimizer.step(state.groupToParameterMap(),
                                        groupToGradientMap, epoch,
                                        cfg.sgdConfig)
    state.markParametersChanged()
    return report, learningRateMap

#--------------------

def train (corpus : ObjectList,
           cfg : TrainConfig,
           dimensions : ModelDimensions,
           actionNameList : StringList,
           checkpointFilePath : String,
           metadataMap : StringMap = None) -> Tuple:
    """Post-pre-trains a fresh model on <corpus> under <cfg> and
       returns the final model state and the training log; the final
       checkpoint is always written to <checkpointFilePath>, epoch
       checkpoints every <cfg.checkpointCadence> epochs; a non-finite
       loss or gradient writes a diagnostic dump and raises a numeric
       error"""

    Logging.trace(">>: objective = %s, videos = %d, epochs = %d,"
                  " seed = %d", cfg.objective, len(corpus),
                  cfg.epochCount, cfg.seed)

    state = initModel(dimensions, cfg.temperature, cfg.seed)
    state.metadataMap.update(metadataMap or {})
    state.metadataMap.update({
        "codeVersion"         : codeVersion,
        "objective"           : cfg.objective,
        "seed"                : cfg.seed,
        "trainingIdChecksum"  : idListChecksum([ video.identifier
                                                 for video in corpus ])
    })

    initialTextTableChecksum = textTableChecksum(state)
    rng = np.random.default_rng([cfg.seed, 5])
    stepsPerEpoch = derivedStepsPerEpoch(corpus, cfg)
    dumpFilePath = OperatingSystem.derivedFilePath(checkpointFilePath,
                                                   "-nandump", ".json")
    trainLog = TrainLog()
    step = 0

    for epoch in range(cfg.epochCount):
        startTime = time.perf_counter()
        lossList = []

        for _ in range(stepsPerEpoch):
            batch = buildBatch(corpus, cfg, rng, actionNameList,
                               state.textTable)

            try:
                report, learningRateMap = trainStep(state, batch, cfg,
                                                    epoch)
            except NumericError as e:
                _writeDiagnosticDump(dumpFilePath, epoch, step, batch,
                                     None, state, e.message)
                raise NumericError("%s at epoch %d, step %d; dump in %s"
                                   % (e.message, epoch, step,
                                      dumpFilePath),
                                   dumpFilePath)

            lossList.append(report.totalValue)
            trainLog.stepRecordList.append({
                "step"          : step,
                "epoch"         : epoch,
                "losses"        : report.termMap(),
                "learningRates" : learningRateMap
            })
            Logging.trace("--: epoch %d, step %d, loss %.6f",
                          epoch, step, report.totalValue)
            step += 1

        meanLoss = math.fsum(lossList) / len(lossList)
        trainLog.epochSummaryList.append({
            "epoch"       : epoch,
            "meanLoss"    : meanLoss,
            "stepCount"   : len(lossList),
            "wallSeconds" : time.perf_counter() - startTime
        })
        OperatingSystem.showMessageOnConsole("epoch %d: mean loss %.6f"
                                             % (epoch, meanLoss))

        isLastEpoch = (epoch == cfg.epochCount - 1)

        if cfg.checkpointCadence > 0 and not isLastEpoch \
           and (epoch + 1) % cfg.checkpointCadence == 0:
            epochFilePath = \
                OperatingSystem.derivedFilePath(checkpointFilePath,
                                                "-epoch%02d" % (epoch + 1),
                                                ".json")
            CheckpointFile.save(state, epochFilePath)

    Assertion.post(textTableChecksum(state) == initialTextTableChecksum,
                   "text table must stay frozen")
    state.metadataMap["thetaVChecksum"] = thetaVChecksum(state)
    CheckpointFile.save(state, checkpointFilePath)

    Logging.trace("<<: final epoch loss = %r",
                  trainLog.epochMeanLossList()[-1:])
    return state, trainLog

#--------------------

def writeTrainLog (trainLog : TrainLog,
                   fileName : String):
    """Writes one JSON line per step and one per epoch summary; wall
       clock times are left out so that logs of identical runs are
       identical"""

    Logging.trace(">>: %r", fileName)

    lineList = [ json.dumps(dict(record, kind="step"), sort_keys=True)
                 for record in trainLog.stepRecordList ]
    lineList += [ json.dumps({ "kind"      : "epoch",
                               "epoch"     : summary["epoch"],
                               "meanLoss"  : summary["meanLoss"],
                               "stepCount" : summary["stepCount"] },
                             sort_keys=True)
                  for summary in trainLog.epochSummaryList ]

    with UTF8File(fileName, "wt") as file:
        file.writelines(lineList)

    Logging.trace("<<")

#--------------------

def extractFeatures (state : ModelState,
                     corpus : ObjectList) -> StringMap:
    """Returns the map from video id to the per-second video encoder
       features h_v (eval mode) in corpus order; the video encoder
       parameters stay unchanged"""

    Logging.trace(">>: videos = %d", len(corpus))

    checksum = thetaVChecksum(state)
    result = { video.identifier : embedFeatures(state,
                                                video.clipFeatureMatrix)
               for video in corpus }
    Assertion.post(thetaVChecksum(state) == checksum,
                   "video encoder must stay fixed during extraction")

    Logging.trace("<<")
    return result

#====================

class FeatureFile:
    """Reads and writes per-video feature tables as JSONL with one
       object {"video_id", "features"} per video"""

    #--------------------

    @classmethod
    def load (cls,
              fileName : String) -> StringMap:
        """Returns the map from video id to feature matrix in file
           order"""

        Logging.trace(">>: %r", fileName)

        if not OperatingSystem.hasFile(fileName):
            raise MissingArtifactError("feature file not found: %s"
                                       % fileName)

        with UTF8File(fileName, "rt") as file:
            lineList = file.readlines()

        result = {}
        dimension = None

        for lineNumber, line in enumerate(lineList, start=1):
            if line.strip() == "":
                continue

            try:
                lineMap = json.loads(line)
                videoIdentifier = lineMap["video_id"]
                featureMatrix = np.array(lineMap["features"],
                                         dtype=np.float64)
            except json.JSONDecodeError as e:
                raise ParseError(fileName, lineNumber, e.msg)
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(fileName, lineNumber,
                                 "malformed feature record: %s" % e)

            if featureMatrix.ndim != 2 \
               or (dimension is not None
                   and featureMatrix.shape[1] != dimension):
                raise ParseError(fileName, lineNumber,
                                 "bad feature matrix shape %r"
                                 % (featureMatrix.shape,))

            dimension = featureMatrix.shape[1]
            result[videoIdentifier] = featureMatrix

        Logging.trace("<<: %d videos", len(result))
        return result

    #--------------------

    @classmethod
    def save (cls,
              videoIdToFeatureMap : StringMap,
              fileName : String):
        """Writes <videoIdToFeatureMap> to <fileName>"""

        Logging.trace(">>: %r", fileName)

        lineList = [ json.dumps({ "video_id" : videoIdentifier,
                                  "features" : featureMatrix.tolist() },
                                sort_keys=True)
                     for videoIdentifier, featureMatrix
                     in videoIdToFeatureMap.items() ]

        with UTF8File(fileName, "wt") as file:
            file.writelines(lineList)

        Logging.trace("<<")
