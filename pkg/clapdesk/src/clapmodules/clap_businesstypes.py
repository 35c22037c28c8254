# clap_businesstypes -- simple business types used across the
#                       language-action pre-training modules:
#
#                         - Objective and PromptVariant
#                         - GeneratorConfig and SplitConfig
#                         - ModelDimensions
#                         - SgdConfig, PromptPolicy and TrainConfig
#                         - WindowConfig, GroundingConfig, ProbeConfig,
#                           EpisodeSpec and EvaluationConfig
#                         - GlobalSettings
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass

from basemodules.datatypesupport import AbstractDataType, specialField
from basemodules.simplelogging import Logging_Level
from basemodules.simpletypes import Boolean, Natural, NaturalList, \
                                    Optional, Real, RealList, String
from basemodules.validitychecker import ValidityChecker

from .clap_errors import ConfigurationError

#====================

# version of the code recorded in every report and checkpoint
codeVersion = "1.0.0"

#====================

class Region:
    """Region labels of clips"""

    background = 0
    foreground = 1

#====================

class PromptVariant:
    """The policies for describing clips in text: mixed prompts and
       captions, prompts only, or prompts for background and mixed
       descriptions for foreground"""

    clap           = "clap"
    promptOnly     = "promptOnly"
    clapDagger     = "clapDagger"

    allList = (clap, promptOnly, clapDagger)

#====================

class Objective:
    """The training objectives: classification only, classification
       plus plain or masked contrastive loss, and masked contrastive
       loss only"""

    tac        = "tac"
    clapClip   = "clap-clip"
    clapMask   = "clap-mask"
    clap       = "clap"
    clapDagger = "clap-dagger"
    clapNoCls  = "clap-no-cls"

    allList = (tac, clapClip, clapMask, clap, clapDagger, clapNoCls)

    # the roster of the ablation matrix
    ablationList = (tac, clapClip, clapMask, clap, clapDagger)

    # objective -> (contrastive term, has classification term,
    #               prompt variant)
    _objectiveToDataMap = {
        tac        : (None,   True,  PromptVariant.promptOnly),
        clapClip   : ("clip", True,  PromptVariant.promptOnly),
        clapMask   : ("mask", True,  PromptVariant.promptOnly),
        clap       : ("mask", True,  PromptVariant.clap),
        clapDagger : ("mask", True,  PromptVariant.clapDagger),
        clapNoCls  : ("mask", False, PromptVariant.clap)
    }

    #--------------------

    @classmethod
    def check (cls,
               objective : String):
        """Raises a configuration error when <objective> is unknown"""

        ValidityChecker.isElement(objective, "objective", cls.allList,
                                  True, ConfigurationError)

    #--------------------

    @classmethod
    def contrastiveTerm (cls,
                         objective : String) -> Optional[String]:
        """Returns 'clip', 'mask' or None for <objective>"""

        cls.check(objective)
        return cls._objectiveToDataMap[objective][0]

    #--------------------

    @classmethod
    def hasClassificationTerm (cls,
                               objective : String) -> Boolean:
        """Tells whether <objective> contains the region/class
           classification loss"""

        cls.check(objective)
        return cls._objectiveToDataMap[objective][1]

    #--------------------

    @classmethod
    def promptVariant (cls,
                       objective : String) -> String:
        """Returns the prompt variant used for <objective>"""

        cls.check(objective)
        return cls._objectiveToDataMap[objective][2]

#====================
# CONFIGURATION GROUPS
#====================

@dataclass(frozen=True, repr=False)
class GeneratorConfig (AbstractDataType):
    """Parameters of the synthetic untrimmed-video generator"""

    videoCount              : Natural = specialField(200, "PN")
    classCount              : Natural = specialField(10, "PN")
    rawDimension            : Natural = specialField(32, "PN")
    meanDuration            : Natural = specialField(48, "PN")
    durationSpread          : Real    = specialField(0.5, "OPEN")
    extraActionMean         : Real    = specialField(0.8, "NNR")
    maximumActionCount      : Natural = specialField(3, "PN")
    minimumActionSeconds    : Natural = specialField(4, "PN")
    maximumActionSeconds    : Natural = specialField(16, "PN")
    foregroundNoise         : Real    = specialField(0.35, "PR")
    backgroundNoise         : Real    = specialField(0.35, "PR")
    backgroundOffsetScale   : Real    = specialField(0.3, "NNR")
    backgroundClassLeak     : Real    = specialField(0.3, "NNR")
    captionCoverage         : Real    = specialField(0.6, "PROB")
    captionLength           : Natural = specialField(6, "PN")
    captionJitter           : Real    = specialField(0.0, "NNR")
    classWordShare          : Real    = specialField(0.5, "PROB")
    vocabularySize          : Natural = specialField(200, "PN")
    primaryClassProbability : Real    = specialField(1.0, "PROB")
    seed                    : Natural = specialField(7, "N", "corpusSeed")

    #--------------------

    def __post_init__ (self):
        durationLowBound = round(self.meanDuration
                                 * (1.0 - self.durationSpread))
        checkList = (
            (self.minimumActionSeconds <= self.maximumActionSeconds,
             "minimumActionSeconds must not exceed maximumActionSeconds"),
            (self.vocabularySize >= 2 * (self.classCount + 1),
             "vocabularySize must be at least 2 * (classCount + 1)"),
            (durationLowBound >= self.maximumActionSeconds + 1,
             "shortest videos must exceed maximumActionSeconds")
        )

        for condition, message in checkList:
            ValidityChecker.isValid(condition, message, True,
                                    ConfigurationError)

#--------------------

@dataclass(frozen=True, repr=False)
class SplitConfig (AbstractDataType):
    """Parameters of the split manifest: train/validation videos and
       base/validation/test classes"""

    trainVideoFraction      : Real = specialField(0.667, "OPEN")
    baseClassFraction       : Real = specialField(0.8, "OPEN")
    validationClassFraction : Real = specialField(0.1, "OPEN")

    #--------------------

    def __post_init__ (self):
        ValidityChecker.isValid(self.baseClassFraction
                                + self.validationClassFraction < 1.0,
                                "class fractions must leave test classes",
                                True, ConfigurationError)

#--------------------

@dataclass(frozen=True, repr=False)
class ModelDimensions (AbstractDataType):
    """Dimensions of the dual encoder"""

    rawDimension        : Natural = specialField(32, "PN")
    hiddenDimension     : Natural = specialField(64, "PN")
    featureDimension    : Natural = specialField(32, "PN")
    embeddingDimension  : Natural = specialField(16, "PN")
    textDimension       : Natural = specialField(24, "PN")
    classCount          : Natural = specialField(10, "PN")
    encoderBlockCount   : Natural = specialField(2, "PN")
    projectionPairCount : Natural = specialField(1, "PN")
    vocabularyHashSize  : Natural = specialField(4096, "PN")

#--------------------

@dataclass(frozen=True, repr=False)
class SgdConfig (AbstractDataType):
    """Learning rates of the backbone and head parameter groups with
       multiplicative step decay: lr(e) = base * gamma^floor(e/k)"""

    backboneLearningRate : Real    = specialField(1e-4, "PR")
    headLearningRate     : Real    = specialField(2e-2, "PR")
    decayGamma           : Real    = specialField(0.01, "UNIT")
    decayEveryEpochs     : Natural = specialField(2, "PN")

    #--------------------

    def learningRate (self,
                      groupName : String,
                      epoch : Natural) -> Real:
        """Returns the learning rate of parameter group <groupName>
           ('backbone' or 'heads') in <epoch>"""

        baseRate = (self.backboneLearningRate if groupName == "backbone"
                    else self.headLearningRate)
        return baseRate * self.decayGamma ** (epoch // self.decayEveryEpochs)

#--------------------

@dataclass(frozen=True, repr=False)
class PromptPolicy (AbstractDataType):
    """How clips are described in text"""

    captionProbability : Real   = 0.5
    variant            : String = PromptVariant.clap

    #--------------------

    def __post_init__ (self):
        ValidityChecker.isReal(self.captionProbability,
                               "captionProbability", "[0,1]", True,
                               ConfigurationError)
        ValidityChecker.isElement(self.variant, "variant",
                                  PromptVariant.allList, True,
                                  ConfigurationError)

#--------------------

@dataclass(frozen=True, repr=False)
class TrainConfig (AbstractDataType):
    """Settings of the post-pre-training loop"""

    objective          : String  = specialField(Objective.clap, "S")
    epochCount         : Natural = specialField(8, "PN")
    batchSize          : Natural = specialField(32, "PN")
    clipsPerSegment    : Natural = specialField(5, "PN")
    captionProbability : Real    = specialField(0.5, "PROB")
    temperature        : Real    = specialField(0.07, "PR")
    seed               : Natural = specialField(0, "N")
    checkpointCadence  : Natural = specialField(0, "N")
    stepsPerEpoch      : Natural = specialField(0, "N")
    dedupeNegatives    : Boolean = specialField(False, "B")
    trainJitterScale   : Real    = specialField(0.0, "NNR")
    maskedLossIsForegroundNormalized : Boolean = specialField(False, "B")
    sgdConfig          : SgdConfig = SgdConfig()

    #--------------------

    def __post_init__ (self):
        Objective.check(self.objective)

        if Objective.contrastiveTerm(self.objective) is not None:
            ValidityChecker.isValid(self.batchSize >= 2,
                                    "batchSize must be at least 2 for"
                                    + " contrastive objectives",
                                    True, ConfigurationError)

    #--------------------

    @property
    def promptPolicy (self) -> PromptPolicy:
        """The prompt policy forced by the objective"""

        return PromptPolicy(self.captionProbability,
                            Objective.promptVariant(self.objective))

#--------------------

@dataclass(frozen=True, repr=False)
class WindowConfig (AbstractDataType):
    """Sliding-window localizer settings for action localization and
       few-shot localization"""

    windowScaleList    : NaturalList = specialField([1, 2, 4, 8, 16], "NL")
    contextWeight      : Real        = specialField(0.0, "PROB")
    contextRatio       : Real        = specialField(0.25, "NNR")
    nmsThreshold       : Real        = specialField(0.4, "PROB")
    preNmsCount        : Natural     = specialField(50, "PN")
    topDetectionCount  : Natural     = specialField(100, "PN")

#--------------------

@dataclass(frozen=True, repr=False)
class GroundingConfig (AbstractDataType):
    """Settings of video-language grounding"""

    windowScaleList     : NaturalList = \
        specialField(list(range(1, 17)), "NL", "groundingWindowScaleList")
    contextWeight       : Real = \
        specialField(0.0, "PROB", "groundingContextWeight")
    contextRatio        : Real = \
        specialField(0.25, "NNR", "groundingContextRatio")
    nmsThreshold        : Real = \
        specialField(0.5, "PROB", "groundingNmsThreshold")
    recallThresholdList : RealList = \
        specialField([0.5, 0.7], "RL", "groundingRecallThresholdList")
    textMapMode         : String = \
        specialField("auto", "S", "groundingTextMapMode")
    ridge               : Real = specialField(0.01, "PR", "groundingRidge")

    textMapModeList = ("auto", "projection", "fitted")

    #--------------------

    def __post_init__ (self):
        ValidityChecker.isElement(self.textMapMode, "groundingTextMapMode",
                                  self.textMapModeList, True,
                                  ConfigurationError)

#--------------------

@dataclass(frozen=True, repr=False)
class ProbeConfig (AbstractDataType):
    """Settings of the linear region/class probe"""

    stepCount    : Natural = specialField(200, "PN", "probeStepCount")
    learningRate : Real    = specialField(0.5, "PR", "probeLearningRate")

#--------------------

@dataclass(frozen=True, repr=False)
class EpisodeSpec (AbstractDataType):
    """Few-shot episodes: class partitions, shots per class, episode
       count and seed"""

    shotCount           : Natural = specialField(5, "PN")
    episodeCount        : Natural = specialField(20, "PN")
    seed                : Natural = specialField(0, "N")
    fewshotTemperature  : Real    = specialField(0.1, "PR")
    baseClassList       : NaturalList = ()
    validationClassList : NaturalList = ()
    testClassList       : NaturalList = ()

    #--------------------

    def __post_init__ (self):
        baseSet = set(self.baseClassList)
        validationSet = set(self.validationClassList)
        testSet = set(self.testClassList)
        isDisjoint = (baseSet.isdisjoint(validationSet)
                      and baseSet.isdisjoint(testSet)
                      and validationSet.isdisjoint(testSet))
        ValidityChecker.isValid(isDisjoint,
                                "class partitions must be disjoint",
                                True, ConfigurationError)

    #--------------------

    @property
    def novelClassList (self) -> NaturalList:
        """The classes unseen in post-pre-training"""

        return sorted(set(self.validationClassList)
                      | set(self.testClassList))

#--------------------

@dataclass(frozen=True, repr=False)
class EvaluationConfig (AbstractDataType):
    """Settings of metrics and the feature-quality analysis"""

    amapGrid          : String  = specialField("full", "S")
    histogramBinCount : Natural = specialField(20, "PN")

    amapGridList = ("full", "activitynet")

    #--------------------

    def __post_init__ (self):
        ValidityChecker.isElement(self.amapGrid, "amapGrid",
                                  self.amapGridList, True,
                                  ConfigurationError)

#--------------------

@dataclass(frozen=True, repr=False)
class GlobalSettings (AbstractDataType):
    """Program-wide settings"""

    loggingFilePath    : String  = specialField("", "S")
    loggingLevel       : String  = specialField("standard", "S")
    ablationSeedCount  : Natural = specialField(5, "PN")

    #--------------------

    def __post_init__ (self):
        levelNameList = [ name.lower() for name in Logging_Level.nameList() ]
        ValidityChecker.isElement(str(self.loggingLevel).lower(),
                                  "loggingLevel",
                                  levelNameList, True, ConfigurationError)

#====================

# the configuration groups in the order of their appearance in the
# effective configuration
configurationGroupList = (GlobalSettings, GeneratorConfig, SplitConfig,
                          ModelDimensions, SgdConfig, TrainConfig,
                          WindowConfig, GroundingConfig, ProbeConfig,
                          EpisodeSpec, EvaluationConfig)
