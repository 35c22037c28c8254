# test_model -- tests for the dual encoder, its batched passes and the
#               checkpoints
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import json

import numpy as np
import numpy.testing as npt
import pytest

from basemodules.utf8file import UTF8File
from clapmodules.clap_businesstypes import ModelDimensions, Objective, \
                                          Region
from clapmodules.clap_errors import CheckpointError, InputError, \
                                   MissingArtifactError
from clapmodules.corpus import ClipSample
from clapmodules.language import TextDescription, TextOrigin
from clapmodules.losses import ClassificationLabels, ContrastiveBatch, \
                               totalLoss
from clapmodules.model import CheckpointFile, backwardBatch, \
                              embedFeatures, embedText, embedVideo, \
                              embedVideoBatch, forwardBatch, headLogits, \
                              initModel, textTableChecksum, thetaVChecksum
from clapmodules.numkit import GradientChecker

#====================

def _objectiveLossProc (state, objective, rawMatrix, textMatrix, labels):
    """Returns a loss procedure over all model parameters for
       <objective> that leaves the running statistics untouched"""

    foregroundMask = (labels.regionLabelVector == Region.foreground)

    def lossProc ():
        record = forwardBatch(state, rawMatrix, textMatrix, True, False)
        batch = ContrastiveBatch(record.videoEmbeddingMatrix,
                                 record.textEmbeddingMatrix, foregroundMask)
        report, gradients = totalLoss(objective, state.temperature, batch,
                                      record.classLogitMatrix,
                                      record.regionLogitMatrix, labels)
        groupToGradientMap = \
            backwardBatch(state, record, gradients.videoEmbeddingGradient,
                          gradients.textEmbeddingGradient,
                          gradients.classLogitGradient,
                          gradients.regionLogitGradient)
        gradientMap = {}

        for groupGradientMap in groupToGradientMap.values():
            gradientMap.update(groupGradientMap)

        return report.totalValue, gradientMap

    return lossProc

#--------------------

def _randomBatch (rng, dimensions, pairCount=8):
    rawMatrix = rng.standard_normal((pairCount, dimensions.rawDimension))
    textMatrix = rng.standard_normal((pairCount, dimensions.textDimension))
    regionLabelVector = np.array([1, 0] * (pairCount // 2))
    classLabelVector = np.where(regionLabelVector == 1,
                                rng.integers(0, dimensions.classCount,
                                             size=pairCount), -1)
    labels = ClassificationLabels(regionLabelVector, classLabelVector)
    return rawMatrix, textMatrix, labels

#====================

class TestInitialization:

    def test_initIsSeeded (self, smallDimensions):
        stateA = initModel(smallDimensions, 0.07, 3)
        stateB = initModel(smallDimensions, 0.07, 3)
        stateC = initModel(smallDimensions, 0.07, 4)

        assert thetaVChecksum(stateA) == thetaVChecksum(stateB)
        assert thetaVChecksum(stateA) != thetaVChecksum(stateC)
        assert textTableChecksum(stateA) == textTableChecksum(stateC)

    #--------------------

    def test_biasesStartAtZero (self, smallDimensions):
        state = initModel(smallDimensions, 0.07, 0)

        for name, value in state.parameterMap().items():
            if name.endswith("bias") or name.endswith("shift"):
                npt.assert_array_equal(value, 0.0)
            elif name.endswith("scale"):
                npt.assert_array_equal(value, 1.0)

    #--------------------

    @pytest.mark.parametrize("temperature", (0.0, -0.1))
    def test_temperatureMustBePositive (self, smallDimensions, temperature):
        with pytest.raises(InputError):
            initModel(smallDimensions, temperature, 0)

    #--------------------

    def test_parameterGroups (self, smallDimensions):
        state = initModel(smallDimensions, 0.07, 0)
        groupMap = state.groupToParameterMap()

        assert all(name.startswith("videoEncoder.")
                   for name in groupMap["backbone"])
        assert { name.split(".")[0] for name in groupMap["heads"] } \
               == { "projectionVideo", "projectionText", "headClass",
                    "headRegion" }

#====================

class TestEmbedding:

    def test_embeddingsHaveUnitNorm (self, smallDimensions, rng):
        state = initModel(smallDimensions, 0.07, 0)
        rawMatrix = rng.standard_normal((5, smallDimensions.rawDimension))
        featureMatrix, embeddingMatrix = embedVideoBatch(state, rawMatrix)

        assert featureMatrix.shape == (5, smallDimensions.featureDimension)
        npt.assert_allclose(np.linalg.norm(embeddingMatrix, axis=1), 1.0)

        description = TextDescription("foreground of action01",
                                      TextOrigin.synthetic, True)
        npt.assert_allclose(np.linalg.norm(embedText(state, description)),
                            1.0)

    #--------------------

    def test_singleClipMatchesBatch (self, smallDimensions, rng):
        state = initModel(smallDimensions, 0.07, 0)
        rawMatrix = rng.standard_normal((3, smallDimensions.rawDimension))
        clip = ClipSample("v00000", 1, 2, rawMatrix[1], True, 0)

        featureVector, embeddingVector = embedVideo(state, clip)
        featureMatrix, embeddingMatrix = embedVideoBatch(state, rawMatrix)
        npt.assert_allclose(featureVector, featureMatrix[1])
        npt.assert_allclose(embeddingVector, embeddingMatrix[1])

    #--------------------

    def test_headLogitShapes (self, smallDimensions, rng):
        state = initModel(smallDimensions, 0.07, 0)
        featureMatrix = embedFeatures(
            state, rng.standard_normal((4, smallDimensions.rawDimension)))

        classLogitMatrix, regionLogitMatrix = headLogits(state,
                                                         featureMatrix)
        assert classLogitMatrix.shape == (4, smallDimensions.classCount)
        assert regionLogitMatrix.shape == (4, 2)

        classLogitVector, regionLogitVector = headLogits(state,
                                                         featureMatrix[0])
        npt.assert_allclose(classLogitVector, classLogitMatrix[0])
        assert regionLogitVector.shape == (2,)

    #--------------------

    def test_evalEmbeddingKeepsStatistics (self, smallDimensions, rng):
        state = initModel(smallDimensions, 0.07, 0)
        before = state.projectionVideo.layerList[0].runningMean.copy()
        embedVideoBatch(state,
                        rng.standard_normal((4, smallDimensions.rawDimension)))
        npt.assert_array_equal(state.projectionVideo.layerList[0].runningMean,
                               before)

#====================

class TestBatchPasses:

    def test_forwardWithoutTextSkipsProjections (self, smallDimensions, rng):
        state = initModel(smallDimensions, 0.07, 0)
        rawMatrix, _, labels = _randomBatch(rng, smallDimensions)
        record = forwardBatch(state, rawMatrix, None, True)

        assert record.videoEmbeddingMatrix is None
        assert record.textEmbeddingMatrix is None

        _, gradients = totalLoss(Objective.tac, state.temperature, None,
                                 record.classLogitMatrix,
                                 record.regionLogitMatrix, labels)
        groupToGradientMap = backwardBatch(state, record, None, None,
                                           gradients.classLogitGradient,
                                           gradients.regionLogitGradient)
        parameterMap = state.parameterMap()

        assert set(groupToGradientMap["backbone"]) \
               | set(groupToGradientMap["heads"]) == set(parameterMap)

        for name, gradient in groupToGradientMap["heads"].items():
            assert gradient.shape == parameterMap[name].shape

            if name.startswith("projection"):
                npt.assert_array_equal(gradient, 0.0)

    #--------------------

    def test_headsCanBeLeftOut (self, smallDimensions, rng):
        state = initModel(smallDimensions, 0.07, 0)
        rawMatrix, textMatrix, _ = _randomBatch(rng, smallDimensions)
        record = forwardBatch(state, rawMatrix, textMatrix, False)

        assert record.classLogitMatrix is None
        npt.assert_allclose(np.linalg.norm(record.videoEmbeddingMatrix,
                                           axis=1), 1.0)

    #--------------------

    def test_embeddingBetweenForwardAndBackward (self, smallDimensions,
                                                 rng):
        state = initModel(smallDimensions, 0.07, 0)
        rawMatrix, textMatrix, labels = _randomBatch(rng, smallDimensions)
        foregroundMask = (labels.regionLabelVector == Region.foreground)
        query = TextDescription("someone waves", TextOrigin.caption, True)

        def gradientMapOf (isEmbeddingInterleaved):
            record = forwardBatch(state, rawMatrix, textMatrix, True, False)

            if isEmbeddingInterleaved:
                embedFeatures(state, rawMatrix)
                embedVideoBatch(state, rawMatrix)
                embedText(state, query)

            batch = ContrastiveBatch(record.videoEmbeddingMatrix,
                                     record.textEmbeddingMatrix,
                                     foregroundMask)
            _, gradients = totalLoss(Objective.clap, state.temperature,
                                     batch, record.classLogitMatrix,
                                     record.regionLogitMatrix, labels)
            return backwardBatch(state, record,
                                 gradients.videoEmbeddingGradient,
                                 gradients.textEmbeddingGradient,
                                 gradients.classLogitGradient,
                                 gradients.regionLogitGradient)

        expectedMap = gradientMapOf(False)
        actualMap = gradientMapOf(True)

        for groupName, groupGradientMap in expectedMap.items():
            for name, gradient in groupGradientMap.items():
                npt.assert_allclose(actualMap[groupName][name], gradient)

    #--------------------

    @pytest.mark.parametrize("objective, seed",
                             [ (Objective.clap, seed) for seed in range(3) ]
                             + [ (Objective.clapClip, 0),
                                 (Objective.tac, 0) ])
    def test_gradientsMatchFiniteDifferences (self, objective, seed):
        rng = np.random.default_rng(seed)
        dimensions = ModelDimensions(rawDimension=8, hiddenDimension=12,
                                     featureDimension=10,
                                     embeddingDimension=16,
                                     textDimension=12, classCount=4,
                                     encoderBlockCount=1,
                                     projectionPairCount=1,
                                     vocabularyHashSize=32)
        state = initModel(dimensions, 0.07, seed)
        rawMatrix, textMatrix, labels = _randomBatch(rng, dimensions)
        lossProc = _objectiveLossProc(state, objective, rawMatrix,
                                      textMatrix, labels)

        error = GradientChecker.maximumRelativeError(lossProc,
                                                     state.parameterMap(),
                                                     seed=seed)
        assert error < 1e-4

#====================

class TestCheckpoints:

    def test_savedStateBehavesIdentically (self, smallDimensions, rng,
                                           tmp_path):
        state = initModel(smallDimensions, 0.05, 2)
        rawMatrix, textMatrix, _ = _randomBatch(rng, smallDimensions)
        forwardBatch(state, rawMatrix, textMatrix, True)
        state.metadataMap["objective"] = "clap"

        fileName = str(tmp_path / "model.json")
        CheckpointFile.save(state, fileName)
        copy = CheckpointFile.load(fileName)

        assert copy.temperature == 0.05
        assert copy.metadataMap == state.metadataMap
        assert thetaVChecksum(copy) == thetaVChecksum(state)
        assert textTableChecksum(copy) == textTableChecksum(state)
        npt.assert_array_equal(embedVideoBatch(copy, rawMatrix)[1],
                               embedVideoBatch(state, rawMatrix)[1])

    #--------------------

    def test_unsupportedSchemaIsRejected (self, smallDimensions, tmp_path):
        fileName = str(tmp_path / "model.json")
        CheckpointFile.save(initModel(smallDimensions, 0.07, 0), fileName)

        with UTF8File(fileName, "rt") as file:
            checkpointMap = json.loads(file.read())

        checkpointMap["schemaVersion"] = 99

        with UTF8File(fileName, "wt") as file:
            file.write(json.dumps(checkpointMap))

        with pytest.raises(CheckpointError):
            CheckpointFile.load(fileName)

    #--------------------

    def test_inconsistentDimensionsAreRejected (self, smallDimensions,
                                                tmp_path):
        fileName = str(tmp_path / "model.json")
        CheckpointFile.save(initModel(smallDimensions, 0.07, 0), fileName)

        with UTF8File(fileName, "rt") as file:
            checkpointMap = json.loads(file.read())

        checkpointMap["dimensions"]["embeddingDimension"] += 1

        with UTF8File(fileName, "wt") as file:
            file.write(json.dumps(checkpointMap))

        with pytest.raises(CheckpointError):
            CheckpointFile.load(fileName)

    #--------------------

    def test_corruptOrMissingFiles (self, tmp_path):
        fileName = str(tmp_path / "model.json")

        with pytest.raises(MissingArtifactError):
            CheckpointFile.load(fileName)

        with UTF8File(fileName, "wt") as file:
            file.write('{"schemaVersion": 1, ')

        with pytest.raises(CheckpointError):
            CheckpointFile.load(fileName)
