# corpus -- synthetic untrimmed-video corpora: generation from class
#           prototypes, clip sampling per segment, JSONL persistence,
#           class name files and the train/validation and few-shot
#           class split manifest
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass
import hashlib
import json
import math

import numpy as np

from basemodules.datatypesupport import AbstractDataType
from basemodules.operatingsystem import OperatingSystem
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, BooleanVector, Natural, \
                                    NaturalList, NaturalVector, \
                                    Object, ObjectList, Optional, \
                                    RandomGenerator, Real, RealMatrix, \
                                    RealVector, String, StringList, \
                                    StringMap
from basemodules.utf8file import UTF8File

from .clap_businesstypes import GeneratorConfig, SplitConfig
from .clap_errors import DataError, InputError, MissingArtifactError, \
                         ParseError

#====================
# TYPES
#====================

@dataclass(frozen=True, repr=False)
class Segment (AbstractDataType):
    """A contiguous span [tStart, tEnd) of a video in whole seconds;
       <classId> is None for background"""

    tStart  : Natural
    tEnd    : Natural
    classId : Optional[Natural] = None

    #--------------------

    @property
    def isForeground (self) -> Boolean:
        return self.classId is not None

    #--------------------

    @property
    def length (self) -> Natural:
        return self.tEnd - self.tStart

#--------------------

@dataclass(frozen=True, repr=False)
class TimedCaption (AbstractDataType):
    """A caption text with its time interval in seconds"""

    tStart : Real
    tEnd   : Real
    text   : String

#--------------------

@dataclass(frozen=True, eq=False)
class UntrimmedVideo:
    """A timeline of one raw feature vector per second with its
       segments (foreground and background spans partitioning the
       timeline) and timed captions"""

    identifier        : String
    duration          : Natural
    clipFeatureMatrix : RealMatrix
    segmentList       : tuple
    captionList       : tuple
    primaryClass      : Natural

    #--------------------

    def __repr__ (self) -> String:
        return ("UntrimmedVideo(%s, duration = %d, segments = %d,"
                " captions = %d)"
                % (self.identifier, self.duration,
                   len(self.segmentList), len(self.captionList)))

    #--------------------

    @property
    def foregroundSegmentList (self) -> ObjectList:
        return [ segment for segment in self.segmentList
                 if segment.isForeground ]

    #--------------------

    def classLabelVector (self) -> NaturalVector:
        """Returns per second the class id of the covering foreground
           segment or -1 for background"""

        result = np.full(self.duration, -1, dtype=np.int64)

        for segment in self.foregroundSegmentList:
            result[segment.tStart:segment.tEnd] = segment.classId

        return result

    #--------------------

    def foregroundMask (self) -> BooleanVector:
        """Returns per second whether it lies in a foreground segment"""

        return self.classLabelVector() >= 0

#--------------------

@dataclass(frozen=True, eq=False)
class ClipSample:
    """A one second clip of a video with its raw feature"""

    videoIdentifier : String
    tStart          : Natural
    tEnd            : Natural
    rawFeature      : RealVector
    isForeground    : Boolean
    classId         : Optional[Natural]

    #--------------------

    def __repr__ (self) -> String:
        return ("ClipSample(%s, [%d, %d], fg = %r, class = %r)"
                % (self.videoIdentifier, self.tStart, self.tEnd,
                   self.isForeground, self.classId))

#--------------------

class SamplingMode:
    """Clip sampling modes"""

    train = "train"
    eval  = "eval"

    allList = (train, eval)

#--------------------

@dataclass(frozen=True, repr=False)
class SplitManifest (AbstractDataType):
    """The train/validation video split, the few-shot class partition,
       the base-class training videos and the checksums of all lists"""

    classCount            : Natural
    trainVideoIdList      : StringList
    validationVideoIdList : StringList
    baseClassList         : NaturalList
    validationClassList   : NaturalList
    testClassList         : NaturalList
    baseTrainVideoIdList  : StringList

    # the attribute names carrying lists
    listNameList = ("trainVideoIdList", "validationVideoIdList",
                    "baseClassList", "validationClassList",
                    "testClassList", "baseTrainVideoIdList")

    #--------------------

    @property
    def novelClassList (self) -> NaturalList:
        return sorted(self.validationClassList + self.testClassList)

    #--------------------

    def checksumMap (self) -> StringMap:
        """Returns the map from list names to their checksums"""

        return { name : idListChecksum(getattr(self, name))
                 for name in self.listNameList }

#====================
# EXPORTED FUNCTIONS
#====================

def idListChecksum (idList : ObjectList) -> String:
    """Returns the SHA-256 hex digest of the newline-joined sorted
       string forms of the ids in <idList>"""

    text = "\n".join(sorted(str(x) for x in idList))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

#====================
# GENERATION
#====================

class CorpusGenerator:
    """Generates corpora of synthetic untrimmed videos: every class
       has a unit prototype in raw feature space; foreground seconds
       scatter around their class prototype, background seconds
       around a shared background prototype shifted by a per-video
       offset and a share of the primary class prototype; captions
       are drawn from class specific vocabulary shards"""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _captionText (cls,
                      rng : RandomGenerator,
                      classId : Natural,
                      cfg : GeneratorConfig) -> String:
        """Returns a caption of <cfg.captionLength> tokens; each token
           stems from the shard of <classId> with probability
           <cfg.classWordShare>, otherwise from the filler shard"""

        shardCount = cfg.classCount + 1
        fillerShard = cfg.classCount
        tokenList = []

        for _ in range(cfg.captionLength):
            isClassWord = rng.random() < cfg.classWordShare
            shard = classId if isClassWord else fillerShard
            shardSize = len(range(shard, cfg.vocabularySize, shardCount))
            tokenIndex = shard + shardCount * int(rng.integers(shardSize))
            tokenList.append("w%04d" % tokenIndex)

        return " ".join(tokenList)

    #--------------------

    @classmethod
    def _layoutSegments (cls,
                         rng : RandomGenerator,
                         duration : Natural,
                         primaryClass : Natural,
                         cfg : GeneratorConfig) -> ObjectList:
        """Returns the segment list partitioning [0, <duration>): the
           actions are separated by at least one background second and
           at least one background second exists overall"""

        actionCount = min(cfg.maximumActionCount,
                          1 + int(rng.poisson(cfg.extraActionMean)))
        lengthList = [ int(x) for x in
                       rng.integers(cfg.minimumActionSeconds,
                                    cfg.maximumActionSeconds + 1,
                                    size=actionCount) ]

        while (len(lengthList) > 1
               and sum(lengthList) + len(lengthList) - 1 >= duration):
            lengthList.pop()

        actionCount = len(lengthList)
        classList = []

        for _ in range(actionCount):
            isPrimary = rng.random() < cfg.primaryClassProbability
            otherClass = int(rng.integers(cfg.classCount))
            classList.append(primaryClass if isPrimary else otherClass)

        spareSeconds = duration - sum(lengthList) - (actionCount - 1)
        gapList = [ int(x) for x in
                    rng.multinomial(spareSeconds,
                                    [1.0 / (actionCount + 1)]
                                    * (actionCount + 1)) ]

        for i in range(1, actionCount):
            gapList[i] += 1

        result = []
        t = 0

        for i in range(actionCount + 1):
            if gapList[i] > 0:
                result.append(Segment(t, t + gapList[i]))
                t += gapList[i]

            if i < actionCount:
                result.append(Segment(t, t + lengthList[i], classList[i]))
                t += lengthList[i]

        return result

    #--------------------

    @classmethod
    def _makePrototypes (cls,
                         cfg : GeneratorConfig) -> tuple:
        """Returns the unit class prototypes (one row per class) and
           the unit background prototype"""

        rng = np.random.default_rng([cfg.seed, 0])
        classPrototypeMatrix = rng.standard_normal((cfg.classCount,
                                                    cfg.rawDimension))
        classPrototypeMatrix /= np.linalg.norm(classPrototypeMatrix,
                                               axis=1)[:, None]
        backgroundPrototype = rng.standard_normal(cfg.rawDimension)
        backgroundPrototype /= np.linalg.norm(backgroundPrototype)
        return classPrototypeMatrix, backgroundPrototype

    #--------------------

    @classmethod
    def _makeVideo (cls,
                    videoIndex : Natural,
                    cfg : GeneratorConfig,
                    classPrototypeMatrix : RealMatrix,
                    backgroundPrototype : RealVector) -> UntrimmedVideo:
        """Generates video <videoIndex> from its own random stream"""

        rng = np.random.default_rng([cfg.seed, 1, videoIndex])
        dimension = cfg.rawDimension

        lowDuration  = round(cfg.meanDuration * (1.0 - cfg.durationSpread))
        highDuration = round(cfg.meanDuration * (1.0 + cfg.durationSpread))
        duration = int(rng.integers(lowDuration, highDuration + 1))
        primaryClass = int(rng.integers(cfg.classCount))
        segmentList = cls._layoutSegments(rng, duration, primaryClass, cfg)

        offsetVector = (cfg.backgroundOffsetScale / math.sqrt(dimension)
                        * rng.standard_normal(dimension))
        backgroundCenter = (backgroundPrototype + offsetVector
                            + cfg.backgroundClassLeak
                              * classPrototypeMatrix[primaryClass])
        noiseMatrix = rng.standard_normal((duration, dimension))
        featureMatrix = np.empty((duration, dimension))

        for segment in segmentList:
            span = slice(segment.tStart, segment.tEnd)

            if segment.isForeground:
                center = classPrototypeMatrix[segment.classId]
                noiseScale = cfg.foregroundNoise
            else:
                center = backgroundCenter
                noiseScale = cfg.backgroundNoise

            featureMatrix[span] = (center + noiseScale / math.sqrt(dimension)
                                   * noiseMatrix[span])

        captionList = []

        for segment in segmentList:
            if segment.isForeground \
               and rng.random() < cfg.captionCoverage:
                text = cls._captionText(rng, segment.classId, cfg)
                tStart, tEnd = float(segment.tStart), float(segment.tEnd)

                if cfg.captionJitter > 0.0:
                    shiftStart, shiftEnd = \
                        cfg.captionJitter * rng.standard_normal(2)
                    jitteredStart = max(0.0, tStart + shiftStart)
                    jitteredEnd   = min(float(duration), tEnd + shiftEnd)

                    if jitteredStart < jitteredEnd:
                        tStart, tEnd = jitteredStart, jitteredEnd

                captionList.append(TimedCaption(tStart, tEnd, text))

        return UntrimmedVideo("v%05d" % videoIndex, duration,
                              featureMatrix, tuple(segmentList),
                              tuple(captionList), primaryClass)

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def generateCorpus (cls,
                        cfg : GeneratorConfig) -> ObjectList:
        """Returns the list of videos generated for <cfg>; each video
           has its own random stream derived from the seed and its
           index, so the result is independent of generation order"""

        Logging.trace(">>: %r", cfg)

        classPrototypeMatrix, backgroundPrototype = \
            cls._makePrototypes(cfg)
        result = [ cls._makeVideo(i, cfg, classPrototypeMatrix,
                                  backgroundPrototype)
                   for i in range(cfg.videoCount) ]

        Logging.trace("<<: %d videos", len(result))
        return result

#====================
# SAMPLING
#====================

class ClipSampler:
    """Samples one second clips from the segments of a video"""

    #--------------------

    @classmethod
    def evalOffsetList (cls,
                        segmentLength : Natural,
                        clipCount : Natural) -> NaturalList:
        """Returns the uniformly spaced clip offsets floor(i * len / n)
           within a segment of <segmentLength> seconds"""

        return [ (i * segmentLength) // clipCount
                 for i in range(clipCount) ]

    #--------------------

    @classmethod
    def sampleClips (cls,
                     video : UntrimmedVideo,
                     clipsPerSegment : Natural,
                     mode : String,
                     rng : RandomGenerator = None) -> ObjectList:
        """Returns <clipsPerSegment> clips for every segment of
           <video> in time order; train mode draws seeded random
           seconds (without replacement when the segment is long
           enough), eval mode places them uniformly and consumes no
           random numbers"""

        if clipsPerSegment < 1:
            raise InputError("clipsPerSegment must be positive: %r"
                             % clipsPerSegment)

        if mode not in SamplingMode.allList:
            raise InputError("unknown sampling mode %r" % mode)

        result = []

        for segment in sorted(video.segmentList, key=lambda s: s.tStart):
            segmentLength = segment.length

            if mode == SamplingMode.eval:
                offsetList = cls.evalOffsetList(segmentLength,
                                                clipsPerSegment)
            elif segmentLength >= clipsPerSegment:
                offsetList = rng.choice(segmentLength, clipsPerSegment,
                                        replace=False).tolist()
            else:
                offsetList = rng.integers(0, segmentLength,
                                          size=clipsPerSegment).tolist()

            for offset in offsetList:
                t = segment.tStart + int(offset)
                result.append(ClipSample(video.identifier, t, t + 1,
                                         video.clipFeatureMatrix[t],
                                         segment.isForeground,
                                         segment.classId))

        return result

#====================
# VALIDATION
#====================

class CorpusValidator:
    """Checks the structural invariants of untrimmed videos"""

    #--------------------

    @classmethod
    def problemList (cls,
                     video : UntrimmedVideo,
                     classCount : Optional[Natural] = None) -> StringList:
        """Returns descriptions of all invariant violations of
           <video> (empty when valid); class ids are only checked
           against <classCount> when it is given"""

        result = []
        featureMatrix = video.clipFeatureMatrix

        if video.duration < 1:
            result.append("duration must be positive")

        if featureMatrix.ndim != 2 \
           or featureMatrix.shape[0] != video.duration:
            result.append("feature rows differ from duration")
        elif not np.all(np.isfinite(featureMatrix)):
            result.append("non-finite clip features")

        previousEnd = 0

        for segment in sorted(video.segmentList, key=lambda s: s.tStart):
            if not (0 <= segment.tStart < segment.tEnd <= video.duration):
                result.append("segment [%r, %r] outside video"
                              % (segment.tStart, segment.tEnd))
            elif segment.tStart < previousEnd:
                result.append("overlapping segment at %r" % segment.tStart)

            previousEnd = max(previousEnd, segment.tEnd)

        foregroundSecondCount = sum(segment.length
                                    for segment in video.foregroundSegmentList)
        hasBackground = any(not segment.isForeground
                            for segment in video.segmentList)

        if foregroundSecondCount < video.duration and not hasBackground:
            result.append("no background second although foreground"
                          " does not cover the video")

        if classCount is not None:
            for segment in video.foregroundSegmentList:
                if not 0 <= segment.classId < classCount:
                    result.append("class id %r outside [0, %d)"
                                  % (segment.classId, classCount))

            if not 0 <= video.primaryClass < classCount:
                result.append("primary class %r outside [0, %d)"
                              % (video.primaryClass, classCount))

        for caption in video.captionList:
            if not caption.tStart < caption.tEnd:
                result.append("caption interval not increasing")

            if caption.text.strip() == "":
                result.append("empty caption text")

        return result

#====================
# PERSISTENCE
#====================

class CorpusFile:
    """Reads and writes corpora as JSONL with one video per line"""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _integralSecond (cls,
                         value : Object,
                         fileName : String,
                         lineNumber : Natural,
                         name : String) -> Natural:
        """Returns <value> as an integer number of seconds"""

        isOkay = (isinstance(value, (int, float))
                  and not isinstance(value, bool)
                  and math.isfinite(value) and value == int(value))

        if not isOkay:
            raise ParseError(fileName, lineNumber,
                             "%s must be a whole second: %r" % (name, value))

        return int(value)

    #--------------------

    @classmethod
    def _videoFromMap (cls,
                       videoMap : StringMap,
                       fileName : String,
                       lineNumber : Natural,
                       classCount : Optional[Natural]) -> UntrimmedVideo:
        """Converts the decoded line <videoMap> to a video"""

        requiredKeyList = ("id", "duration_s", "primary_class",
                           "clip_features", "segments", "captions")

        if not isinstance(videoMap, dict):
            raise ParseError(fileName, lineNumber, "line is not an object")

        for key in requiredKeyList:
            if key not in videoMap:
                raise ParseError(fileName, lineNumber,
                                 "missing key %r" % key)

        try:
            featureMatrix = np.array(videoMap["clip_features"],
                                     dtype=np.float64)
            segmentList = tuple(
                Segment(cls._integralSecond(s["t_start"], fileName,
                                            lineNumber, "t_start"),
                        cls._integralSecond(s["t_end"], fileName,
                                            lineNumber, "t_end"),
                        None if s["class_id"] is None
                        else int(s["class_id"]))
                for s in videoMap["segments"])
            captionList = tuple(TimedCaption(float(c["t_start"]),
                                             float(c["t_end"]),
                                             str(c["text"]))
                                for c in videoMap["captions"])
            video = UntrimmedVideo(str(videoMap["id"]),
                                   int(videoMap["duration_s"]),
                                   featureMatrix, segmentList,
                                   captionList,
                                   int(videoMap["primary_class"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(fileName, lineNumber,
                             "malformed video entry: %s" % e)

        problemList = CorpusValidator.problemList(video, classCount)

        if len(problemList) > 0:
            raise ParseError(fileName, lineNumber, problemList[0])

        return video

    #--------------------

    @classmethod
    def _videoToMap (cls,
                     video : UntrimmedVideo) -> StringMap:
        return {
            "id"            : video.identifier,
            "duration_s"    : video.duration,
            "primary_class" : video.primaryClass,
            "clip_features" : video.clipFeatureMatrix.tolist(),
            "segments"      : [ { "t_start"  : float(s.tStart),
                                  "t_end"    : float(s.tEnd),
                                  "class_id" : s.classId }
                                for s in video.segmentList ],
            "captions"      : [ { "t_start" : c.tStart,
                                  "t_end"   : c.tEnd,
                                  "text"    : c.text }
                                for c in video.captionList ]
        }

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def load (cls,
              fileName : String,
              classCount : Optional[Natural] = None) -> ObjectList:
        """Reads a corpus from JSONL file <fileName>; malformed lines
           and class ids outside [0, <classCount>) (when given) raise
           a parse error naming the line"""

        Logging.trace(">>: %r", fileName)

        if not OperatingSystem.hasFile(fileName):
            raise MissingArtifactError("corpus file not found: %s"
                                       % fileName)

        with UTF8File(fileName, "rt") as file:
            lineList = file.readlines()

        result = []
        rawDimension = None

        for lineNumber, line in enumerate(lineList, start=1):
            if line.strip() == "":
                continue

            try:
                videoMap = json.loads(line)
            except json.JSONDecodeError as e:
                Logging.traceError("%s:%d: %s", fileName, lineNumber, e.msg)
                raise ParseError(fileName, lineNumber, e.msg)

            video = cls._videoFromMap(videoMap, fileName, lineNumber,
                                      classCount)
            currentDimension = video.clipFeatureMatrix.shape[1]

            if rawDimension is not None and currentDimension != rawDimension:
                raise ParseError(fileName, lineNumber,
                                 "feature dimension %d differs from %d"
                                 % (currentDimension, rawDimension))

            rawDimension = currentDimension
            result.append(video)

        Logging.trace("<<: %d videos", len(result))
        return result

    #--------------------

    @classmethod
    def save (cls,
              corpus : ObjectList,
              fileName : String):
        """Writes <corpus> to JSONL file <fileName>"""

        Logging.trace(">>: fileName = %r, videos = %d",
                      fileName, len(corpus))

        lineList = [ json.dumps(cls._videoToMap(video), sort_keys=True)
                     for video in corpus ]

        with UTF8File(fileName, "wt") as file:
            file.writelines(lineList)

        Logging.trace("<<")

#--------------------

class ClassNameFile:
    """Reads and writes the class vocabulary as JSON list of names
       indexed by class id"""

    #--------------------

    @classmethod
    def load (cls,
              fileName : String) -> StringList:
        """Returns the class name list in <fileName>"""

        Logging.trace(">>: %r", fileName)

        if not OperatingSystem.hasFile(fileName):
            raise MissingArtifactError("class name file not found: %s"
                                       % fileName)

        with UTF8File(fileName, "rt") as file:
            text = file.read()

        try:
            result = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(fileName, e.lineno, e.msg)

        isOkay = (isinstance(result, list)
                  and all(isinstance(x, str) and x.strip() > ""
                          for x in result))

        if not isOkay:
            raise ParseError(fileName, 1,
                             "expected a list of non-empty names")

        Logging.trace("<<: %r", result)
        return result

    #--------------------

    @classmethod
    def save (cls,
              classNameList : StringList,
              fileName : String):
        """Writes <classNameList> to <fileName>"""

        Logging.trace(">>: %r", fileName)

        with UTF8File(fileName, "wt") as file:
            file.write(json.dumps(list(classNameList), indent=2) + "\n")

        Logging.trace("<<")

#--------------------

class SplitManifestHandler:
    """Makes, reads and writes split manifests"""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _partitionClasses (cls,
                           rng : RandomGenerator,
                           classCount : Natural,
                           cfg : SplitConfig) -> tuple:
        """Returns the sorted base, validation and test class lists"""

        permutation = [ int(x) for x in rng.permutation(classCount) ]
        baseCount = round(cfg.baseClassFraction * classCount)
        baseCount = max(1, min(baseCount, classCount - 1)) \
                    if classCount > 1 else classCount
        validationCount = round(cfg.validationClassFraction * classCount)
        validationCount = min(validationCount, classCount - baseCount)

        baseClassList = sorted(permutation[:baseCount])
        validationClassList = \
            sorted(permutation[baseCount:baseCount + validationCount])
        testClassList = sorted(permutation[baseCount + validationCount:])
        return baseClassList, validationClassList, testClassList

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def make (cls,
              corpus : ObjectList,
              classCount : Natural,
              cfg : SplitConfig,
              seed : Natural) -> SplitManifest:
        """Returns the split manifest of <corpus> with <classCount>
           classes: a seeded train/validation video split and a
           seeded base/validation/test class partition; base training
           videos are the training videos whose actions all belong to
           base classes"""

        Logging.trace(">>: videos = %d, classes = %d, seed = %d",
                      len(corpus), classCount, seed)

        rng = np.random.default_rng([seed, 2])
        videoCount = len(corpus)
        permutation = [ int(x) for x in rng.permutation(videoCount) ]
        trainCount = round(cfg.trainVideoFraction * videoCount)

        if videoCount >= 2:
            trainCount = max(1, min(trainCount, videoCount - 1))

        trainIndexSet = set(permutation[:trainCount])
        trainVideoIdList = sorted(corpus[i].identifier
                                  for i in trainIndexSet)
        validationVideoIdList = sorted(corpus[i].identifier
                                       for i in range(videoCount)
                                       if i not in trainIndexSet)

        baseClassList, validationClassList, testClassList = \
            cls._partitionClasses(rng, classCount, cfg)
        baseClassSet = set(baseClassList)
        baseTrainVideoIdList = sorted(
            corpus[i].identifier for i in trainIndexSet
            if all(segment.classId in baseClassSet
                   for segment in corpus[i].foregroundSegmentList))

        result = SplitManifest(classCount, trainVideoIdList,
                               validationVideoIdList, baseClassList,
                               validationClassList, testClassList,
                               baseTrainVideoIdList)
        Logging.trace("<<: %r", result)
        return result

    #--------------------

    @classmethod
    def load (cls,
              fileName : String) -> SplitManifest:
        """Reads a manifest from <fileName> and verifies its checksums"""

        Logging.trace(">>: %r", fileName)

        if not OperatingSystem.hasFile(fileName):
            raise MissingArtifactError("split manifest not found: %s"
                                       % fileName)

        with UTF8File(fileName, "rt") as file:
            text = file.read()

        try:
            manifestMap = json.loads(text)
            result = SplitManifest(
                int(manifestMap["classCount"]),
                *[ list(manifestMap[name])
                   for name in SplitManifest.listNameList ])
            storedChecksumMap = manifestMap["checksums"]
        except json.JSONDecodeError as e:
            raise ParseError(fileName, e.lineno, e.msg)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(fileName, 1, "malformed manifest: %s" % e)

        if storedChecksumMap != result.checksumMap():
            Logging.traceError("checksum mismatch in %s", fileName)
            raise DataError("split manifest %s has inconsistent checksums"
                            % fileName)

        Logging.trace("<<: %r", result)
        return result

    #--------------------

    @classmethod
    def save (cls,
              manifest : SplitManifest,
              fileName : String):
        """Writes <manifest> including its checksums to <fileName>"""

        Logging.trace(">>: %r", fileName)

        manifestMap = { name : list(getattr(manifest, name))
                        for name in SplitManifest.listNameList }
        manifestMap["classCount"] = manifest.classCount
        manifestMap["checksums"]  = manifest.checksumMap()

        with UTF8File(fileName, "wt") as file:
            file.write(json.dumps(manifestMap, sort_keys=True, indent=2)
                       + "\n")

        Logging.trace("<<")
