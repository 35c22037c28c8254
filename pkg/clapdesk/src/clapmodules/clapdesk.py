# clapdesk -- command line program wiring corpus generation, language-
#             action post-pre-training, feature extraction and the
#             downstream evaluations together; every command reads the
#             effective configuration and writes machine-readable
#             artifacts
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import argparse
import dataclasses
import math
import sys

import numpy as np

from basemodules.operatingsystem import OperatingSystem
from basemodules.programerror import ProgramError
from basemodules.simplelogging import Logging, Logging_Level
from basemodules.simpletypes import Callable, Natural, Object, \
                                    ObjectList, Optional, String, \
                                    StringList, StringMap, Tuple
from basemodules.utf8file import UTF8File
from basemodules.validitychecker import ValidityChecker

from .clap_businesstypes import codeVersion, Objective
from .clap_configurationdatahandler import ClapConfigurationData
from .clap_errors import DataError, MissingArtifactError
from .corpus import ClassNameFile, CorpusFile, CorpusGenerator, \
                    CorpusValidator, SplitManifest, SplitManifestHandler
from .evalkit import featureDistanceAnalysis, fewshotProtocol, \
                     groundingProtocol, talProtocol, writeDetections, \
                     writeHistogramCsv, writeReport
from .language import classNameList
from .model import CheckpointFile, ModelState
from .trainer import extractFeatures, FeatureFile, \
                     selectTrainingVideos, train, TrainingSplit, \
                     writeTrainLog

#====================

_programName = "clapdesk"

# file name used for disabling logging
lowerCasedNullLoggingFileName = "none"

# the columns of the ablation table
ablationColumnList = ("variant", "task", "seed", "mAP@0.5", "mAP@0.75",
                      "mAP@0.95", "AmAP", "recall@0.5", "recall@0.7",
                      "mIoU", "status")

# the tasks of the ablation matrix
ablationTaskList = ("tal", "fewshot", "grounding")

#====================
# TYPE DEFINITIONS
#====================

class _CommandLineOptions:
    """This module handles command line options and checks them."""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _makeCommonOptionParser (cls) -> argparse.ArgumentParser:
        """Returns the parser for the options accepted before and
           after the command name; unset options leave no attribute"""

        p = argparse.ArgumentParser(add_help=False,
                                    argument_default=argparse.SUPPRESS)
        p.add_argument("--config", dest="configurationFilePath",
                       help="relaxed JSON configuration file")
        p.add_argument("--set", action="append", dest="settingList",
                       metavar="KEY=VALUE",
                       help=("overrides a configuration value"
                             + " (may be repeated)"))
        p.add_argument("--print-config", action="store_true",
                       dest="configIsPrinted",
                       help="prints the effective configuration and stops")
        p.add_argument("-l", "--loggingFilePath",
                       help="logging file ('none' disables logging)")
        return p

    #--------------------

    @classmethod
    def _addCorpusOptions (cls,
                           p : argparse.ArgumentParser,
                           checkpointIsNeeded : bool):
        """Adds the corpus, manifest and (when <checkpointIsNeeded>)
           checkpoint and feature options to subparser <p>"""

        p.add_argument("--corpus", required=True, dest="corpusFilePath",
                       help="corpus file (JSONL)")
        p.add_argument("--manifest", dest="manifestFilePath",
                       help=("split manifest (default:"
                             + " <corpus stem>-manifest.json)"))

        if checkpointIsNeeded:
            p.add_argument("--checkpoint", required=True,
                           dest="checkpointFilePath",
                           help="model checkpoint")
            p.add_argument("--features", dest="featureFilePath",
                           help=("feature file from 'extract' (default:"
                                 + " features are extracted from the"
                                 + " checkpoint)"))

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def checkArguments (cls,
                        argumentList : argparse.Namespace):
        """Checks whether command line options given in <argumentList>
           are okay"""

        Logging.trace(">>")

        configurationFilePath = getattr(argumentList,
                                        "configurationFilePath", None)
        loggingFilePath = getattr(argumentList, "loggingFilePath", None)

        if configurationFilePath is not None \
           and not OperatingSystem.hasFile(configurationFilePath):
            raise MissingArtifactError("configuration file not found: %s"
                                       % configurationFilePath)

        if loggingFilePath is not None:
            if loggingFilePath.lower() != lowerCasedNullLoggingFileName:
                ValidityChecker.isWritableFile(loggingFilePath,
                                               "loggingFilePath")

        for name in ("corpusFilePath", "checkpointFilePath",
                     "featureFilePath", "manifestFilePath"):
            filePath = getattr(argumentList, name, None)

            if filePath is not None and not OperatingSystem.hasFile(filePath):
                Logging.traceError("missing %s %r", name, filePath)
                raise MissingArtifactError("%s not found: %s"
                                           % (name, filePath))

        isPrintOnly = getattr(argumentList, "configIsPrinted", False)
        ValidityChecker.isValid(argumentList.command is not None
                                or isPrintOnly,
                                "a command is required")

        Logging.trace("<<")

    #--------------------

    @classmethod
    def read (cls,
              argumentList : StringList = None) -> argparse.Namespace:
        """Reads the command line options from <argumentList> (or the
           program arguments when not set) and returns them"""

        Logging.trace(">>: %r", argumentList)

        commonParser = cls._makeCommonOptionParser()
        programDescription = ("Generates synthetic untrimmed videos,"
                              + " post-pre-trains video features with"
                              + " language-action contrastive losses and"
                              + " evaluates them on action localization,"
                              + " few-shot localization and grounding")
        p = argparse.ArgumentParser(prog=_programName,
                                    description=programDescription,
                                    parents=[commonParser])
        subparsers = p.add_subparsers(dest="command")

        sp = subparsers.add_parser("gen-data", parents=[commonParser],
                                   help="generates corpus and manifest")
        sp.add_argument("--out", required=True, dest="outputFilePath",
                        help="corpus file to be written (JSONL)")

        sp = subparsers.add_parser("train", parents=[commonParser],
                                   help="post-pre-trains a model")
        cls._addCorpusOptions(sp, False)
        sp.add_argument("--objective", choices=Objective.allList,
                        help="training objective (default: from config)")
        sp.add_argument("--split", choices=TrainingSplit.allList,
                        default=TrainingSplit.train,
                        help="videos used for training")
        sp.add_argument("--classes", dest="classFilePath",
                        help=("class name file (default:"
                              + " <corpus stem>-classes.json)"))
        sp.add_argument("--out", required=True, dest="outputFilePath",
                        help="checkpoint file to be written")

        sp = subparsers.add_parser("extract", parents=[commonParser],
                                   help="extracts per-second features")
        cls._addCorpusOptions(sp, True)
        sp.add_argument("--out", required=True, dest="outputFilePath",
                        help="feature file to be written (JSONL)")

        for command, helpText in \
            (("eval-tal",         "evaluates action localization"),
             ("eval-fewshot",     "evaluates few-shot localization"),
             ("eval-grounding",   "evaluates text grounding"),
             ("analyze-features", "analyzes feature distances")):
            sp = subparsers.add_parser(command, parents=[commonParser],
                                       help=helpText)
            cls._addCorpusOptions(sp, True)
            sp.add_argument("--out", required=True, dest="outputFilePath",
                            help="report file to be written (JSON)")

            if command == "eval-tal":
                sp.add_argument("--detections", dest="detectionFilePath",
                                help="detections file to be written")
            elif command == "analyze-features":
                sp.add_argument("--histogram", dest="histogramFilePath",
                                help=("histogram CSV (default:"
                                      + " <report stem>-histogram.csv)"))

        sp = subparsers.add_parser("repro-ablation", parents=[commonParser],
                                   help="runs the variant/task matrix")
        sp.add_argument("--out", required=True, dest="outputDirectoryPath",
                        help="directory for corpus, checkpoints and table")

        result = p.parse_args(argumentList)

        Logging.trace("<<: %r", result)
        return result

#====================

class _Provenance:
    """Services for tagging artifacts with their origin"""

    #--------------------

    @classmethod
    def reportMap (cls,
                   configData : ClapConfigurationData,
                   state : Optional[ModelState] = None) -> StringMap:
        """Returns the provenance entries of a report: configuration
           hash and code version and (when <state> is set) the
           checkpoint metadata"""

        result = { "configHash"  : configData.configHash(),
                   "codeVersion" : codeVersion }

        if state is not None:
            result["checkpoint"] = dict(state.metadataMap)

        return result

#====================

class _Artifacts:
    """Services for locating and loading the input artifacts of a
       command"""

    #--------------------

    @classmethod
    def checkpointTrainingSplit (cls,
                                 state : ModelState,
                                 manifest : SplitManifest) -> String:
        """Returns the name of the manifest list the checkpoint has
           been trained on ('baseTrainVideoIdList' when the
           training videos show base classes only, otherwise
           'trainVideoIdList' or '' when none matches)"""

        checksum = state.metadataMap.get("trainingIdChecksum")
        checksumMap = manifest.checksumMap()
        result = ""

        for name in ("baseTrainVideoIdList", "trainVideoIdList"):
            if checksumMap[name] == checksum:
                result = name
                break

        return result

    #--------------------

    @classmethod
    def classFilePath (cls,
                       corpusFilePath : String,
                       givenFilePath : Optional[String] = None) -> String:
        """Returns the class name file belonging to <corpusFilePath>"""

        return (givenFilePath if givenFilePath is not None
                else OperatingSystem.derivedFilePath(corpusFilePath,
                                                     "-classes", ".json"))

    #--------------------

    @classmethod
    def featureMap (cls,
                    argumentList : argparse.Namespace,
                    state : ModelState,
                    corpus : ObjectList) -> StringMap:
        """Returns the per-video features from the feature file given
           in <argumentList> or extracted from <state>"""

        featureFilePath = getattr(argumentList, "featureFilePath", None)

        if featureFilePath is None:
            result = extractFeatures(state, corpus)
        else:
            result = FeatureFile.load(featureFilePath)
            missingIdList = [ video.identifier for video in corpus
                              if video.identifier not in result ]

            if len(missingIdList) > 0:
                raise DataError("feature file %s lacks videos %s"
                                % (featureFilePath,
                                   ", ".join(missingIdList[:5])))

        return result

    #--------------------

    @classmethod
    def manifestFilePath (cls,
                          corpusFilePath : String,
                          givenFilePath : Optional[String] = None) -> String:
        """Returns the split manifest belonging to <corpusFilePath>"""

        return (givenFilePath if givenFilePath is not None
                else OperatingSystem.derivedFilePath(corpusFilePath,
                                                     "-manifest", ".json"))

    #--------------------

    @classmethod
    def readCorpusAndManifest (cls,
                               argumentList : argparse.Namespace) -> Tuple:
        """Returns corpus and split manifest named in <argumentList>"""

        Logging.trace(">>")

        corpusFilePath = argumentList.corpusFilePath
        manifestFilePath = \
            cls.manifestFilePath(corpusFilePath,
                                 argumentList.manifestFilePath)
        manifest = SplitManifestHandler.load(manifestFilePath)
        corpus = CorpusFile.load(corpusFilePath, manifest.classCount)

        idSet = { video.identifier for video in corpus }
        unknownIdList = [ identifier for identifier
                          in (manifest.trainVideoIdList
                              + manifest.validationVideoIdList)
                          if identifier not in idSet ]

        if len(unknownIdList) > 0:
            raise DataError("manifest %s names videos not in corpus: %s"
                            % (manifestFilePath,
                               ", ".join(unknownIdList[:5])))

        Logging.trace("<<")
        return corpus, manifest

#====================

class _CommandProcessor:
    """Executes the single commands of the program"""

    _configData : ClapConfigurationData = None
    _argumentList : argparse.Namespace = None

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _loadEvaluationInputs (cls) -> Tuple:
        """Returns corpus, manifest, model state and feature map for an
           evaluation command"""

        argumentList = cls._argumentList
        corpus, manifest = _Artifacts.readCorpusAndManifest(argumentList)
        state = CheckpointFile.load(argumentList.checkpointFilePath)
        featureMap = _Artifacts.featureMap(argumentList, state, corpus)
        return corpus, manifest, state, featureMap

    #--------------------

    @classmethod
    def _writeReport (cls,
                      reportMap : StringMap,
                      state : Optional[ModelState] = None):
        """Adds provenance to <reportMap> and writes it to the output
           file"""

        reportMap.update(_Provenance.reportMap(cls._configData, state))
        writeReport(reportMap, cls._argumentList.outputFilePath)
        OperatingSystem.showMessageOnConsole("report written to %s"
                                             % cls._argumentList
                                                  .outputFilePath)

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def processAnalyzeFeatures (cls):
        """Writes the foreground/background distance analysis and its
           histogram"""

        Logging.trace(">>")

        corpus, _, state, featureMap = cls._loadEvaluationInputs()
        evaluationCfg = cls._configData.evaluationConfig()
        seed = cls._configData.trainConfig().seed
        rng = np.random.default_rng([seed, 7])
        report = featureDistanceAnalysis(featureMap, corpus, rng,
                                         evaluationCfg.histogramBinCount)

        histogramFilePath = cls._argumentList.histogramFilePath

        if histogramFilePath is None:
            histogramFilePath = \
                OperatingSystem.derivedFilePath(cls._argumentList
                                                   .outputFilePath,
                                                "-histogram", ".csv")

        writeHistogramCsv(report["histogram"], histogramFilePath)
        cls._writeReport(report, state)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def processEvalFewshot (cls):
        """Evaluates few-shot localization on the novel classes; the
           checkpoint must have been trained on base-class videos
           only"""

        Logging.trace(">>")

        argumentList = cls._argumentList
        corpus, manifest = _Artifacts.readCorpusAndManifest(argumentList)
        state = CheckpointFile.load(argumentList.checkpointFilePath)
        splitName = _Artifacts.checkpointTrainingSplit(state, manifest)

        if splitName != "baseTrainVideoIdList":
            message = ("checkpoint %s has not been trained on the"
                       " base-class videos of the manifest"
                       % argumentList.checkpointFilePath)
            Logging.traceError(message)
            raise DataError(message)

        featureMap = _Artifacts.featureMap(argumentList, state, corpus)
        episodeSpec = \
            cls._configData.episodeSpec(manifest.baseClassList,
                                        manifest.validationClassList,
                                        manifest.testClassList)
        report = fewshotProtocol(featureMap, corpus, episodeSpec,
                                 cls._configData.windowConfig(),
                                 cls._configData.evaluationConfig())
        cls._writeReport(report, state)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def processEvalGrounding (cls):
        """Evaluates text grounding on the captions of the validation
           videos"""

        Logging.trace(">>")

        corpus, manifest, state, featureMap = cls._loadEvaluationInputs()
        seed = cls._configData.trainConfig().seed
        report = groundingProtocol(featureMap, state, corpus, manifest,
                                   cls._configData.groundingConfig(),
                                   seed)
        cls._writeReport(report, state)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def processEvalTal (cls):
        """Evaluates temporal action localization with the linear probe
           and optionally writes the detections"""

        Logging.trace(">>")

        corpus, manifest, state, featureMap = cls._loadEvaluationInputs()
        report, detectionList = \
            talProtocol(featureMap, corpus, manifest,
                        cls._configData.windowConfig(),
                        cls._configData.probeConfig(),
                        cls._configData.evaluationConfig())

        detectionFilePath = cls._argumentList.detectionFilePath

        if detectionFilePath is not None:
            writeDetections(detectionList, detectionFilePath)

        cls._writeReport(report, state)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def processExtract (cls):
        """Writes the per-second video features of all corpus videos"""

        Logging.trace(">>")

        argumentList = cls._argumentList
        corpus, _ = _Artifacts.readCorpusAndManifest(argumentList)
        state = CheckpointFile.load(argumentList.checkpointFilePath)
        featureMap = extractFeatures(state, corpus)
        FeatureFile.save(featureMap, argumentList.outputFilePath)
        OperatingSystem.showMessageOnConsole("features written to %s"
                                             % argumentList.outputFilePath)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def processGenData (cls):
        """Generates the corpus and writes it together with the class
           names and the split manifest"""

        Logging.trace(">>")

        configData = cls._configData
        corpusFilePath = cls._argumentList.outputFilePath
        generatorCfg = configData.generatorConfig()
        ValidityChecker.isWritableFile(corpusFilePath, "--out")

        corpus = CorpusGenerator.generateCorpus(generatorCfg)

        for video in corpus:
            problemList = CorpusValidator.problemList(video,
                                                      generatorCfg.classCount)

            if len(problemList) > 0:
                raise DataError("generated video %s is invalid: %s"
                                % (video.identifier,
                                   "; ".join(problemList)))

        manifest = SplitManifestHandler.make(corpus,
                                             generatorCfg.classCount,
                                             configData.splitConfig(),
                                             generatorCfg.seed)
        CorpusFile.save(corpus, corpusFilePath)
        ClassNameFile.save(classNameList(generatorCfg.classCount),
                           _Artifacts.classFilePath(corpusFilePath))
        SplitManifestHandler.save(manifest,
                                  _Artifacts.manifestFilePath(corpusFilePath))
        OperatingSystem.showMessageOnConsole("%d videos written to %s"
                                             % (len(corpus),
                                                corpusFilePath))

        Logging.trace("<<")

    #--------------------

    @classmethod
    def processReproAblation (cls):
        """Runs the ablation matrix into the output directory"""

        Logging.trace(">>")
        _AblationRunner.run(cls._configData,
                            cls._argumentList.outputDirectoryPath)
        Logging.trace("<<")

    #--------------------

    @classmethod
    def processTrain (cls):
        """Post-pre-trains a model on the selected videos and writes
           checkpoint and training log"""

        Logging.trace(">>")

        argumentList = cls._argumentList
        configData = cls._configData
        checkpointFilePath = argumentList.outputFilePath
        ValidityChecker.isWritableFile(checkpointFilePath, "--out")

        actionNameList = \
            ClassNameFile.load(_Artifacts.classFilePath(
                                   argumentList.corpusFilePath,
                                   argumentList.classFilePath))
        corpus = CorpusFile.load(argumentList.corpusFilePath,
                                 len(actionNameList))

        if argumentList.split == TrainingSplit.all:
            trainingVideoList = corpus
        else:
            manifestFilePath = \
                _Artifacts.manifestFilePath(argumentList.corpusFilePath,
                                            argumentList.manifestFilePath)
            manifest = SplitManifestHandler.load(manifestFilePath)
            trainingVideoList = selectTrainingVideos(corpus, manifest,
                                                     argumentList.split)

        metadataMap = { "configHash" : configData.configHash(),
                        "split"      : argumentList.split }
        _, trainLog = train(trainingVideoList, configData.trainConfig(),
                            configData.modelDimensions(), actionNameList,
                            checkpointFilePath, metadataMap)
        writeTrainLog(trainLog,
                      OperatingSystem.derivedFilePath(checkpointFilePath,
                                                      "-trainlog", ".jsonl"))
        OperatingSystem.showMessageOnConsole("checkpoint written to %s"
                                             % checkpointFilePath)

        Logging.trace("<<")

#====================

class _AblationRunner:
    """Runs every ablation variant on every downstream task for a
       series of seeds and writes the comparison table; the corpus is
       generated once, the seeds vary initialization, sampling and
       episodes; a failing cell is recorded and the run goes on"""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _aggregateRowList (cls,
                           rowList : ObjectList) -> ObjectList:
        """Returns per variant and task the rows with the means and
           sample standard deviations over all successful seeds"""

        result = []
        metricNameList = ablationColumnList[3:-1]

        for variant in Objective.ablationList:
            for task in ablationTaskList:
                cellRowList = [ row for row in rowList
                                if row["variant"] == variant
                                and row["task"] == task ]
                okRowList = [ row for row in cellRowList
                              if row["status"] == "ok" ]
                status = "%d/%d ok" % (len(okRowList), len(cellRowList))
                meanRow = { "variant" : variant, "task" : task,
                            "seed" : "mean", "status" : status }
                stdRow = dict(meanRow, seed="std")

                for name in metricNameList:
                    valueList = [ row[name] for row in okRowList
                                  if row.get(name) is not None ]

                    if len(valueList) > 0:
                        meanRow[name] = math.fsum(valueList) / len(valueList)

                    if len(valueList) > 1:
                        stdRow[name] = float(np.std(valueList, ddof=1))

                result.extend((meanRow, stdRow))

        return result

    #--------------------

    @classmethod
    def _csvLine (cls,
                  row : StringMap) -> String:
        """Returns <row> as CSV line; missing values are empty"""

        fieldList = []

        for name in ablationColumnList:
            value = row.get(name)

            if value is None:
                field = ""
            elif isinstance(value, float):
                field = repr(value)
            else:
                field = str(value).replace(",", ";")

            fieldList.append(field)

        return ",".join(fieldList)

    #--------------------

    @classmethod
    def _runCell (cls,
                  rowList : ObjectList,
                  variant : String,
                  task : String,
                  seed : Natural,
                  evaluationProc : Callable):
        """Runs <evaluationProc> for one cell of the matrix and appends
           its row to <rowList>; a program error marks the cell as
           failed"""

        Logging.trace(">>: variant = %s, task = %s, seed = %d",
                      variant, task, seed)

        row = { "variant" : variant, "task" : task, "seed" : seed }

        try:
            reportMap = evaluationProc()
            row.update({ name : reportMap.get(name)
                         for name in ablationColumnList[3:-1] })
            row["status"] = "ok"
        except ProgramError as e:
            Logging.traceError("cell failed: %s", e.message)
            row["status"] = "failed: %s" % type(e).__name__
            OperatingSystem.showMessageOnConsole("%s/%s/seed %d failed: %s"
                                                 % (variant, task, seed,
                                                    e.message))

        rowList.append(row)
        Logging.trace("<<: %r", row["status"])

    #--------------------

    @classmethod
    def _trainedFeatures (cls,
                          configData : ClapConfigurationData,
                          corpus : ObjectList,
                          manifest : SplitManifest,
                          variant : String,
                          seed : Natural,
                          split : String,
                          checkpointFilePath : String) -> Tuple:
        """Trains <variant> with <seed> on <split> and returns state
           and extracted features"""

        trainCfg = dataclasses.replace(configData.trainConfig(),
                                       objective=variant, seed=seed)
        trainingVideoList = selectTrainingVideos(corpus, manifest, split)
        metadataMap = { "configHash" : configData.configHash(),
                        "split"      : split }
        actionNameList = classNameList(manifest.classCount)
        state, _ = train(trainingVideoList, trainCfg,
                         configData.modelDimensions(), actionNameList,
                         checkpointFilePath, metadataMap)
        return state, extractFeatures(state, corpus)

    #--------------------

    @classmethod
    def _runVariantSeed (cls,
                         configData : ClapConfigurationData,
                         corpus : ObjectList,
                         manifest : SplitManifest,
                         variant : String,
                         seed : Natural,
                         checkpointDirectoryPath : String,
                         windowCfg : Object,
                         evaluationCfg : Object,
                         groundingCfg : Object,
                         episodeSpec : Object,
                         rowList : ObjectList):
        """Runs all tasks of <variant> for <seed>; localization and
           grounding use a model trained on the training videos,
           few-shot one trained on the base-class videos"""

        checkpointStem = OperatingSystem.joinPath(checkpointDirectoryPath,
                                                  "%s-seed%d" % (variant,
                                                                 seed))
        trainedDataMap = {}

        def trainedData (split : String) -> Tuple:
            if split not in trainedDataMap:
                trainedDataMap[split] = \
                    cls._trainedFeatures(configData, corpus, manifest,
                                         variant, seed, split,
                                         "%s-%s.json" % (checkpointStem,
                                                         split))

            return trainedDataMap[split]

        def evaluateTal () -> StringMap:
            _, featureMap = trainedData(TrainingSplit.train)
            report, _ = talProtocol(featureMap, corpus, manifest, windowCfg,
                                    configData.probeConfig(), evaluationCfg)
            return report

        def evaluateFewshot () -> StringMap:
            _, featureMap = trainedData(TrainingSplit.base)
            return fewshotProtocol(featureMap, corpus,
                                   dataclasses.replace(episodeSpec,
                                                       seed=seed),
                                   windowCfg, evaluationCfg)

        def evaluateGrounding () -> StringMap:
            state, featureMap = trainedData(TrainingSplit.train)
            return groundingProtocol(featureMap, state, corpus, manifest,
                                     groundingCfg, seed)

        for task, evaluationProc in (("tal",       evaluateTal),
                                     ("fewshot",   evaluateFewshot),
                                     ("grounding", evaluateGrounding)):
            cls._runCell(rowList, variant, task, seed, evaluationProc)

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def run (cls,
             configData : ClapConfigurationData,
             outputDirectoryPath : String):
        """Generates the corpus into <outputDirectoryPath>, runs the
           matrix and writes 'ablation.csv' and 'ablation-report.json'
           there"""

        Logging.trace(">>: %r", outputDirectoryPath)

        OperatingSystem.makeDirectory(outputDirectoryPath)
        checkpointDirectoryPath = \
            OperatingSystem.joinPath(outputDirectoryPath, "checkpoints")
        OperatingSystem.makeDirectory(checkpointDirectoryPath)

        generatorCfg = configData.generatorConfig()
        corpus = CorpusGenerator.generateCorpus(generatorCfg)
        manifest = SplitManifestHandler.make(corpus,
                                             generatorCfg.classCount,
                                             configData.splitConfig(),
                                             generatorCfg.seed)
        corpusFilePath = OperatingSystem.joinPath(outputDirectoryPath,
                                                  "corpus.jsonl")
        CorpusFile.save(corpus, corpusFilePath)
        SplitManifestHandler.save(manifest,
                                  _Artifacts.manifestFilePath(corpusFilePath))

        baseSeed = configData.trainConfig().seed
        seedCount = configData.globalSettings().ablationSeedCount
        seedList = [ baseSeed + k for k in range(seedCount) ]
        windowCfg = configData.windowConfig()
        evaluationCfg = configData.evaluationConfig()
        groundingCfg = configData.groundingConfig()
        episodeSpec = configData.episodeSpec(manifest.baseClassList,
                                             manifest.validationClassList,
                                             manifest.testClassList)
        rowList = []

        for variant in Objective.ablationList:
            for seed in seedList:
                OperatingSystem.showMessageOnConsole("ablation: %s, seed %d"
                                                     % (variant, seed))
                cls._runVariantSeed(configData, corpus, manifest, variant,
                                    seed, checkpointDirectoryPath,
                                    windowCfg, evaluationCfg,
                                    groundingCfg, episodeSpec, rowList)

        rowList = sorted(rowList,
                         key=lambda row: (Objective.ablationList
                                          .index(row["variant"]),
                                          ablationTaskList.index(row["task"]),
                                          row["seed"]))
        rowList += cls._aggregateRowList(rowList)
        lineList = [ ",".join(ablationColumnList) ]
        lineList += [ cls._csvLine(row) for row in rowList ]
        tableFilePath = OperatingSystem.joinPath(outputDirectoryPath,
                                                 "ablation.csv")

        with UTF8File(tableFilePath, "wt") as file:
            file.writelines(lineList)

        reportMap = _Provenance.reportMap(configData)
        reportMap.update({ "seedList"    : seedList,
                           "variantList" : list(Objective.ablationList),
                           "taskList"    : list(ablationTaskList),
                           "failedCellCount" :
                               sum(1 for row in rowList
                                   if row["status"].startswith("failed")) })
        writeReport(reportMap,
                    OperatingSystem.joinPath(outputDirectoryPath,
                                             "ablation-report.json"))
        OperatingSystem.showMessageOnConsole("ablation table written to %s"
                                             % tableFilePath)

        Logging.trace("<<")

#--------------------
#--------------------

def initialize (argumentList : StringList = None) -> Tuple:
    """Initializes the program from <argumentList>; returns the
       effective configuration and the parsed options"""

    Logging.trace(">>")

    options = _CommandLineOptions.read(argumentList)
    _CommandLineOptions.checkArguments(options)

    # set logging file path from command line (if available)
    loggingFilePath = getattr(options, "loggingFilePath", None)

    if loggingFilePath is not None:
        if loggingFilePath.lower() != lowerCasedNullLoggingFileName:
            Logging.setFileName(loggingFilePath, False)
        else:
            Logging.setEnabled(False)

    configData = ClapConfigurationData()
    configurationFilePath = getattr(options, "configurationFilePath", None)

    if configurationFilePath is not None:
        configData.readFile(configurationFilePath)

    for setting in getattr(options, "settingList", None) or []:
        configData.applyOverride(setting)

    if getattr(options, "objective", None) is not None:
        configData.set("objective", options.objective)

    configData.checkValidity()

    if loggingFilePath is None:
        # get path from configuration
        loggingFilePath = configData.get("loggingFilePath")

        if loggingFilePath == "":
            Logging.setEnabled(False)
        else:
            Logging.setFileName(loggingFilePath, True)

    loggingLevel = Logging_Level.fromString(configData.get("loggingLevel"))
    Logging.setLevel(loggingLevel)

    _CommandProcessor._configData = configData
    _CommandProcessor._argumentList = options

    Logging.trace("<<: command = %r", options.command)
    return configData, options

#--------------------

def main (argumentList : StringList = None) -> Natural:
    """Main program for clapdesk; returns the process exit code"""

    Logging.initialize()
    Logging.setLevel(Logging_Level.verbose)
    Logging.setTracingWithTime(True, 3)
    Logging.trace(">>")

    commandToProcMap = {
        "analyze-features" : _CommandProcessor.processAnalyzeFeatures,
        "eval-fewshot"     : _CommandProcessor.processEvalFewshot,
        "eval-grounding"   : _CommandProcessor.processEvalGrounding,
        "eval-tal"         : _CommandProcessor.processEvalTal,
        "extract"          : _CommandProcessor.processExtract,
        "gen-data"         : _CommandProcessor.processGenData,
        "repro-ablation"   : _CommandProcessor.processReproAblation,
        "train"            : _CommandProcessor.processTrain
    }

    try:
        configData, options = initialize(argumentList)

        if getattr(options, "configIsPrinted", False):
            sys.stdout.write(configData.canonicalText(True) + "\n")
        else:
            commandToProcMap[options.command]()

        exitCode = 0
    except ProgramError as e:
        Logging.traceError("%s: %s", type(e).__name__, e.message)
        sys.stderr.write("%s: ERROR - %s\n" % (_programName, e.message))
        exitCode = e.exitCode
    except Exception as e:
        Logging.traceError("unexpected %s: %s", type(e).__name__, e)
        sys.stderr.write("%s: ERROR - unexpected %s: %s\n"
                         % (_programName, type(e).__name__, e))
        exitCode = 1

    Logging.trace("<<: exitCode = %d", exitCode)
    Logging.finalize()
    return exitCode

#--------------------

if __name__ == "__main__":
    sys.exit(main())
