# test_evalkit -- tests for the metrics, the sliding-window localizer,
#                 the linear probe and the evaluation protocols
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import dataclasses
import json

import numpy as np
import numpy.testing as npt
import pytest

from basemodules.utf8file import UTF8File
from clapmodules.clap_businesstypes import EpisodeSpec, EvaluationConfig, \
                                          GroundingConfig, Objective, \
                                          ProbeConfig, WindowConfig
from clapmodules import evalkit
from clapmodules.clap_errors import DataError, EpisodeError, InputError
from clapmodules.corpus import Segment
from clapmodules.evalkit import Detection, GroundTruthSegment, \
                                LinearProbe, TemporalInterval, \
                                averagePrecision, featureDistanceAnalysis, \
                                fewshotProtocol, fitTextMap, flankLength, \
                                groundingProtocol, localizeVideo, mapSuite, \
                                nms, rankWindows, talProtocol, \
                                thresholdList, tiou, writeDetections, \
                                writeHistogramCsv, writeReport
from clapmodules.model import initModel
from clapmodules.trainer import extractFeatures

#====================

def _interval (tStart, tEnd) -> TemporalInterval:
    return TemporalInterval(tStart, tEnd)

#--------------------

def _detection (tStart, tEnd, score, classId=0, videoIdentifier="v0"):
    return Detection(videoIdentifier, _interval(tStart, tEnd), classId,
                     score)

#--------------------

def _groundTruth (tStart, tEnd, classId=0, videoIdentifier="v0"):
    return GroundTruthSegment(videoIdentifier, _interval(tStart, tEnd),
                              classId)

#--------------------

def _rawFeatureMap (corpus):
    return { video.identifier : video.clipFeatureMatrix for video in corpus }

#--------------------

def _unitRows (matrix):
    return matrix / np.linalg.norm(matrix, axis=-1, keepdims=True)

#--------------------

def _episodeSpec (manifest, **kwargs):
    return EpisodeSpec(baseClassList=tuple(manifest.baseClassList),
                       validationClassList=tuple(manifest
                                                 .validationClassList),
                       testClassList=tuple(manifest.testClassList),
                       **kwargs)

#--------------------

def _plainWindowScore (foregroundVector, classScoreMatrix, classIdList,
                       detection):
    """mean foreground x mean class probability over the detection"""

    tStart = int(detection.interval.tStart)
    tEnd = int(detection.interval.tEnd)
    column = classIdList.index(detection.classId)
    return (foregroundVector[tStart:tEnd].mean()
            * classScoreMatrix[tStart:tEnd, column].mean())

#--------------------

def _bestWindowCosine (featureMatrix, queryVector, embedProc,
                       windowScaleList):
    duration = featureMatrix.shape[0]
    result = -np.inf

    for windowLength in windowScaleList:
        if windowLength <= duration:
            meanMatrix = np.array([ featureMatrix[s:s + windowLength]
                                    .mean(axis=0)
                                    for s in range(duration - windowLength
                                                   + 1) ])
            result = max(result,
                         float(np.max(embedProc(meanMatrix)
                                      @ queryVector)))

    return result

#--------------------

def _recordCalls (monkeypatch, functionName):
    """Replaces the evalkit function <functionName> by a wrapper that
       records its positional arguments and results"""

    callList = []
    originalProc = getattr(evalkit, functionName)

    def recordingProc (*argumentList):
        result = originalProc(*argumentList)
        callList.append((argumentList, result))
        return result

    monkeypatch.setattr(evalkit, functionName, recordingProc)
    return callList

#====================

class TestMetrics:

    def test_tiou (self):
        npt.assert_allclose(tiou(_interval(0, 2), _interval(1, 3)), 1 / 3)
        assert tiou(_interval(0, 2), _interval(2, 3)) == 0.0
        assert tiou(_interval(1, 4), _interval(1, 4)) == 1.0

    #--------------------

    def test_emptyIntervalIsRejected (self):
        with pytest.raises(InputError):
            TemporalInterval(2.0, 2.0)

        with pytest.raises(InputError):
            _detection(0, 1, float("nan"))

    #--------------------

    def test_falsePositiveBeforeHit (self):
        detectionList = [_detection(5, 7, 0.9), _detection(0, 2, 0.8)]
        npt.assert_allclose(averagePrecision(detectionList,
                                             [_groundTruth(0, 2)], 0.5),
                            0.5)

    #--------------------

    def test_duplicateHitsCountOnce (self):
        detectionList = [_detection(0, 2, 0.9), _detection(0, 2, 0.8)]
        npt.assert_allclose(averagePrecision(detectionList,
                                             [_groundTruth(0, 2)], 0.5),
                            1.0)

    #--------------------

    def test_matchingRespectsVideoAndClass (self):
        groundTruthList = [_groundTruth(0, 2)]

        assert averagePrecision([_detection(0, 2, 0.9, classId=1)],
                                groundTruthList, 0.5) == 0.0
        assert averagePrecision([_detection(0, 2, 0.9,
                                            videoIdentifier="v1")],
                                groundTruthList, 0.5) == 0.0
        assert averagePrecision([_detection(0, 2, 0.9)], [], 0.5) == 0.0

    #--------------------

    def test_thresholdGrids (self):
        fullList = thresholdList("full")
        upperList = thresholdList("activitynet")

        assert len(fullList) == 19
        assert fullList[0] == 0.05 and fullList[-1] == 0.95
        assert len(upperList) == 10
        assert upperList[0] == 0.5

    #--------------------

    def test_mapSuite (self):
        groundTruthList = [_groundTruth(0, 4, 0), _groundTruth(6, 8, 1)]
        detectionList = [_detection(0, 4, 0.9, 0), _detection(6, 8, 0.1, 2)]
        report = mapSuite(detectionList, groundTruthList)

        assert set(report) == { "mAP@0.5", "mAP@0.75", "mAP@0.95", "AmAP",
                                "perClassAP@0.5" }
        assert report["perClassAP@0.5"] == { "0" : 1.0, "1" : 0.0 }
        npt.assert_allclose(report["mAP@0.5"], 0.5)
        npt.assert_allclose(report["AmAP"], 0.5)

        perfectReport = mapSuite(detectionList[:1], groundTruthList[:1],
                                 "activitynet")
        npt.assert_allclose(perfectReport["AmAP"], 1.0)

    #--------------------

    def test_nmsKeepsBestOfOverlaps (self):
        detectionList = [_detection(1, 4, 0.8), _detection(6, 8, 0.7),
                         _detection(0, 4, 0.9)]
        keptList = nms(detectionList, 0.4)

        assert [ (d.interval.tStart, d.interval.tEnd) for d in keptList ] \
               == [(0, 4), (6, 8)]
        assert len(nms(detectionList, 1.0)) == 3

#====================

class TestLocalizer:

    def test_flankLength (self):
        assert flankLength(1, 0.25) == 1
        assert flankLength(4, 0.25) == 1
        assert flankLength(16, 0.25) == 4
        assert flankLength(3, 0.0) == 1

    #--------------------

    def test_actionIsFound (self):
        foregroundVector = np.zeros(12)
        foregroundVector[4:8] = 1.0
        classScoreMatrix = np.ones((12, 1))
        windowCfg = WindowConfig(windowScaleList=[2, 4, 8],
                                 contextWeight=0.5)

        detectionList = localizeVideo("v0", foregroundVector,
                                      classScoreMatrix, [7], windowCfg)
        best = detectionList[0]

        assert (best.interval.tStart, best.interval.tEnd) == (4, 8)
        npt.assert_allclose(best.score, 1.0)
        assert all(d.classId == 7 for d in detectionList)
        assert all(d.score <= best.score for d in detectionList)

    #--------------------

    def test_contextPenalizesPartialWindows (self):
        foregroundVector = np.zeros(12)
        foregroundVector[4:8] = 1.0
        windowCfg = WindowConfig(windowScaleList=[2], contextWeight=0.5,
                                 nmsThreshold=1.0, topDetectionCount=100)
        detectionList = localizeVideo("v0", foregroundVector,
                                      np.ones((12, 1)), [0], windowCfg)
        startToScoreMap = { d.interval.tStart : d.score
                            for d in detectionList }

        npt.assert_allclose(startToScoreMap[4], 0.75)
        npt.assert_allclose(startToScoreMap[5], 0.5)

    #--------------------

    def test_tooShortVideoGivesNoDetections (self):
        windowCfg = WindowConfig(windowScaleList=[16])
        assert localizeVideo("v0", np.ones(5), np.ones((5, 2)), [0, 1],
                             windowCfg) == []

    #--------------------

    def test_detectionCountIsCapped (self, rng):
        windowCfg = WindowConfig(windowScaleList=[1, 2], nmsThreshold=1.0,
                                 preNmsCount=50, topDetectionCount=7)
        detectionList = localizeVideo("v0", rng.random(30),
                                      rng.random((30, 3)), [0, 1, 2],
                                      windowCfg)
        assert len(detectionList) == 7

    #--------------------

    def test_defaultScoreIsForegroundTimesClass (self):
        detectionList = localizeVideo("v0", np.full(12, 0.8),
                                      np.full((12, 1), 0.5), [0],
                                      WindowConfig(windowScaleList=[4]))

        assert len(detectionList) > 0
        npt.assert_allclose([ d.score for d in detectionList ], 0.4)

    #--------------------

    def test_defaultScoresMatchPlainFormula (self, rng):
        foregroundVector = rng.random(10)
        classScoreMatrix = rng.random((10, 2))
        windowCfg = WindowConfig(windowScaleList=[1, 3], nmsThreshold=1.0)
        detectionList = localizeVideo("v0", foregroundVector,
                                      classScoreMatrix, [3, 5], windowCfg)

        assert len(detectionList) == 2 * (10 + 8)

        for detection in detectionList:
            npt.assert_allclose(detection.score,
                                _plainWindowScore(foregroundVector,
                                                  classScoreMatrix, [3, 5],
                                                  detection))

#====================

class TestGroundingWindows:

    def _featureMatrix (self):
        featureMatrix = np.tile([0.0, 1.0], (10, 1))
        featureMatrix[3:6] = [1.0, 0.0]
        return featureMatrix

    #--------------------

    def test_withoutContext (self):
        groundingCfg = GroundingConfig(windowScaleList=[1, 2, 3, 4],
                                       contextWeight=0.0)
        rankingList = rankWindows(self._featureMatrix(),
                                  np.array([1.0, 0.0]), _unitRows,
                                  groundingCfg)
        interval, score = rankingList[0]

        assert (interval.tStart, interval.tEnd) == (3, 4)
        npt.assert_allclose(score, 1.0)

    #--------------------

    def test_contextSelectsWholeAction (self):
        groundingCfg = GroundingConfig(windowScaleList=[1, 2, 3, 4],
                                       contextWeight=0.5)
        rankingList = rankWindows(self._featureMatrix(),
                                  np.array([1.0, 0.0]), _unitRows,
                                  groundingCfg)
        interval, score = rankingList[0]

        assert (interval.tStart, interval.tEnd) == (3, 6)
        npt.assert_allclose(score, 1.0)
        assert all(later <= score for _, later in rankingList)

    #--------------------

    def test_defaultScoreIsWindowCosine (self, rng):
        featureMatrix = rng.standard_normal((8, 3))
        queryVector = _unitRows(rng.standard_normal(3))
        groundingCfg = GroundingConfig(windowScaleList=[2, 5],
                                       nmsThreshold=1.0)
        rankingList = rankWindows(featureMatrix, queryVector, _unitRows,
                                  groundingCfg)

        assert len(rankingList) == 7 + 4

        for interval, score in rankingList:
            meanVector = featureMatrix[int(interval.tStart)
                                       :int(interval.tEnd)].mean(axis=0)
            npt.assert_allclose(score, _unitRows(meanVector) @ queryVector)

    #--------------------

    def test_oversizedScalesFallBackToWholeVideo (self):
        groundingCfg = GroundingConfig(windowScaleList=[20])
        rankingList = rankWindows(self._featureMatrix(),
                                  np.array([1.0, 0.0]), _unitRows,
                                  groundingCfg)

        assert len(rankingList) == 1
        interval, score = rankingList[0]
        assert (interval.tStart, interval.tEnd) == (0, 10)
        npt.assert_allclose(score, 0.3 / np.sqrt(0.58))

#====================

class TestLinearProbe:

    def test_probeSeparatesRegionsAndClasses (self, smallCorpus):
        probe = LinearProbe(4)
        featureMap = _rawFeatureMap(smallCorpus)
        probe.fit(featureMap, smallCorpus, ProbeConfig())

        featureMatrix = np.vstack(list(featureMap.values()))
        labelVector = np.concatenate([ video.classLabelVector()
                                       for video in smallCorpus ])
        foregroundVector, classProbabilityMatrix = \
            probe.predict(featureMatrix)

        assert classProbabilityMatrix.shape == (len(labelVector), 4)
        npt.assert_allclose(classProbabilityMatrix.sum(axis=1), 1.0)
        assert np.all((foregroundVector >= 0) & (foregroundVector <= 1))

        regionAccuracy = np.mean((foregroundVector > 0.5)
                                 == (labelVector >= 0))
        isForeground = (labelVector >= 0)
        classAccuracy = np.mean(np.argmax(classProbabilityMatrix,
                                          axis=1)[isForeground]
                                == labelVector[isForeground])
        assert regionAccuracy > 0.75
        assert classAccuracy > 0.7

    #--------------------

    def test_probeNeedsVideos (self):
        with pytest.raises(DataError):
            LinearProbe(4).fit({}, [], ProbeConfig())

#====================

class TestProtocols:

    def test_talProtocol (self, smallCorpus, smallManifest):
        report, detectionList = \
            talProtocol(_rawFeatureMap(smallCorpus), smallCorpus,
                        smallManifest, WindowConfig(),
                        ProbeConfig(stepCount=50), EvaluationConfig())

        assert report["videoCount"] \
               == len(smallManifest.validationVideoIdList)
        assert report["detectionCount"] == len(detectionList)
        assert 0.0 <= report["AmAP"] <= report["mAP@0.5"] <= 1.0
        assert { d.videoIdentifier for d in detectionList } \
               <= set(smallManifest.validationVideoIdList)

    #--------------------

    def test_fewshotProtocol (self, smallCorpus, smallManifest):
        episodeSpec = _episodeSpec(smallManifest, shotCount=1,
                                   episodeCount=3, seed=4)
        featureMap = _rawFeatureMap(smallCorpus)
        report = fewshotProtocol(featureMap, smallCorpus, episodeSpec,
                                 WindowConfig(), EvaluationConfig())

        assert len(report["episodes"]) == 3
        assert report["novelClassList"] == smallManifest.testClassList
        assert report["shotCount"] == 1
        assert report["AmAP.std"] >= 0.0
        npt.assert_allclose(report["AmAP"],
                            np.mean([ episode["AmAP"]
                                      for episode in report["episodes"] ]))

        again = fewshotProtocol(featureMap, smallCorpus, episodeSpec,
                                WindowConfig(), EvaluationConfig())
        assert again == report

    #--------------------

    def test_fewshotNeedsEnoughVideos (self, smallCorpus, smallManifest):
        episodeSpec = _episodeSpec(smallManifest, shotCount=50,
                                   episodeCount=1)

        with pytest.raises(EpisodeError):
            fewshotProtocol(_rawFeatureMap(smallCorpus), smallCorpus,
                            episodeSpec, WindowConfig(), EvaluationConfig())

    #--------------------

    def test_fewshotNeedsNovelClasses (self, smallCorpus):
        episodeSpec = EpisodeSpec(baseClassList=(0, 1, 2, 3))

        with pytest.raises(EpisodeError):
            fewshotProtocol(_rawFeatureMap(smallCorpus), smallCorpus,
                            episodeSpec, WindowConfig(), EvaluationConfig())

    #--------------------

    @pytest.mark.parametrize("mode, objective, expectedMode",
                             (("projection", Objective.tac, "projection"),
                              ("auto", Objective.clap, "projection"),
                              ("auto", Objective.tac, "fitted"),
                              ("fitted", Objective.clap, "fitted")))
    def test_groundingProtocol (self, smallCorpus, smallManifest,
                                smallDimensions, mode, objective,
                                expectedMode):
        state = initModel(smallDimensions, 0.07, 0)
        state.metadataMap["objective"] = objective
        featureMap = extractFeatures(state, smallCorpus)
        groundingCfg = GroundingConfig(textMapMode=mode)

        report = groundingProtocol(featureMap, state, smallCorpus,
                                   smallManifest, groundingCfg, 1)
        validationSet = set(smallManifest.validationVideoIdList)
        captionCount = sum(len(video.captionList) for video in smallCorpus
                           if video.identifier in validationSet)

        assert report["textMapMode"] == expectedMode
        assert report["queryCount"] == captionCount

        for metrics in (report, report["randomBaseline"]):
            assert 0.0 <= metrics["recall@0.7"] <= metrics["recall@0.5"] \
                   <= 1.0
            assert 0.0 <= metrics["mIoU"] <= 1.0

    #--------------------

    def test_textMapShape (self, smallCorpus, smallDimensions):
        state = initModel(smallDimensions, 0.07, 0)
        textMap = fitTextMap(extractFeatures(state, smallCorpus),
                             smallCorpus, state.textTable, 0.01)
        assert textMap.shape == (smallDimensions.textDimension,
                                 smallDimensions.featureDimension)

        silentCorpus = [ dataclasses.replace(video, captionList=())
                         for video in smallCorpus ]

        with pytest.raises(DataError):
            fitTextMap(_rawFeatureMap(smallCorpus), silentCorpus,
                       state.textTable, 0.01)

    #--------------------

    def test_talDefaultsUsePlainWindowScore (self, smallCorpus,
                                             smallManifest, monkeypatch):
        callList = _recordCalls(monkeypatch, "localizeVideo")
        talProtocol(_rawFeatureMap(smallCorpus), smallCorpus,
                    smallManifest, WindowConfig(),
                    ProbeConfig(stepCount=50), EvaluationConfig())

        assert len(callList) == len(smallManifest.validationVideoIdList)

        for (_, foregroundVector, classScoreMatrix, classIdList, _), \
                detectionList in callList:
            for detection in detectionList:
                npt.assert_allclose(detection.score,
                                    _plainWindowScore(foregroundVector,
                                                      classScoreMatrix,
                                                      classIdList,
                                                      detection))

    #--------------------

    def test_fewshotDefaultsUsePlainWindowScore (self, smallCorpus,
                                                 smallManifest,
                                                 monkeypatch):
        callList = _recordCalls(monkeypatch, "localizeVideo")
        episodeSpec = _episodeSpec(smallManifest, shotCount=1,
                                   episodeCount=2, seed=4)
        fewshotProtocol(_rawFeatureMap(smallCorpus), smallCorpus,
                        episodeSpec, WindowConfig(), EvaluationConfig())

        assert len(callList) > 0

        for (_, foregroundVector, classScoreMatrix, classIdList, _), \
                detectionList in callList:
            for detection in detectionList:
                npt.assert_allclose(detection.score,
                                    _plainWindowScore(foregroundVector,
                                                      classScoreMatrix,
                                                      classIdList,
                                                      detection))

    #--------------------

    def test_groundingDefaultsUsePlainWindowCosine (self, smallCorpus,
                                                    smallManifest,
                                                    smallDimensions,
                                                    monkeypatch):
        state = initModel(smallDimensions, 0.07, 0)
        featureMap = extractFeatures(state, smallCorpus)
        callList = _recordCalls(monkeypatch, "rankWindows")
        groundingCfg = GroundingConfig(textMapMode="projection")
        groundingProtocol(featureMap, state, smallCorpus, smallManifest,
                          groundingCfg, 1)

        assert len(callList) > 0

        for (featureMatrix, queryVector, embedProc, _), rankingList \
                in callList:
            npt.assert_allclose(rankingList[0][1],
                                _bestWindowCosine(featureMatrix,
                                                  queryVector, embedProc,
                                                  groundingCfg
                                                  .windowScaleList),
                                rtol=1e-7, atol=1e-9)

    #--------------------

    def test_groundingWithOversizedScales (self, smallCorpus,
                                           smallManifest, smallDimensions):
        state = initModel(smallDimensions, 0.07, 0)
        featureMap = extractFeatures(state, smallCorpus)
        groundingCfg = GroundingConfig(windowScaleList=[1000],
                                       textMapMode="projection")
        report = groundingProtocol(featureMap, state, smallCorpus,
                                   smallManifest, groundingCfg, 1)
        validationSet = set(smallManifest.validationVideoIdList)
        captionCount = sum(len(video.captionList) for video in smallCorpus
                           if video.identifier in validationSet)

        assert report["queryCount"] == captionCount
        assert 0.0 < report["mIoU"] <= 1.0

#====================

class TestFeatureDistances:

    def test_analysis (self, smallCorpus):
        video = smallCorpus[0]
        backgroundVideo = dataclasses.replace(
            video, identifier="bg", segmentList=(Segment(0, video.duration),))
        corpus = list(smallCorpus) + [backgroundVideo]
        featureMap = _rawFeatureMap(corpus)

        result = featureDistanceAnalysis(featureMap, corpus,
                                         np.random.default_rng(7), 10)

        assert result["skippedCount"] == 1
        assert len(result["differences"]) == len(smallCorpus)
        assert sum(result["histogram"]["counts"]) == len(smallCorpus)
        assert len(result["histogram"]["edges"]) == 11
        assert result["positiveShare"] > 0.5
        npt.assert_allclose(result["median"],
                            np.median(result["differences"]))

        again = featureDistanceAnalysis(featureMap, corpus,
                                        np.random.default_rng(7), 10)
        assert again["differences"] == result["differences"]

#====================

class TestOutputFiles:

    def test_histogramCsv (self, tmp_path):
        fileName = str(tmp_path / "histogram.csv")
        writeHistogramCsv({ "counts" : [2, 0], "edges" : [0.0, 0.5, 1.0] },
                          fileName)

        with UTF8File(fileName, "rt") as file:
            lineList = [ line.strip() for line in file.readlines() ]

        assert lineList == ["bin_left,bin_right,count", "0.0,0.5,2",
                            "0.5,1.0,0"]

    #--------------------

    def test_detectionsAndReport (self, tmp_path):
        detectionFileName = str(tmp_path / "detections.jsonl")
        writeDetections([_detection(1, 3, 0.25, 2, "v7")], detectionFileName)

        with UTF8File(detectionFileName, "rt") as file:
            recordList = [ json.loads(line) for line in file.readlines()
                           if line.strip() ]

        assert recordList == [ { "video_id" : "v7", "t_start" : 1,
                                 "t_end" : 3, "class_id" : 2,
                                 "score" : 0.25 } ]

        reportFileName = str(tmp_path / "report.json")
        writeReport({ "b" : 1, "a" : [0.5] }, reportFileName)

        with UTF8File(reportFileName, "rt") as file:
            assert json.loads(file.read()) == { "a" : [0.5], "b" : 1 }
