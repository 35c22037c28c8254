# test_losses -- tests for the contrastive and classification losses
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import math

import numpy as np
import numpy.testing as npt
import pytest

from clapmodules.clap_businesstypes import Objective
from clapmodules.clap_errors import InputError, NumericError
from clapmodules.losses import ClassificationLabels, ContrastiveBatch, \
                               classificationLoss, clipLoss, maskedLoss, \
                               nce, totalLoss
from clapmodules.numkit import GradientChecker, normalizeRows, \
                               normalizeRowsBackward

#====================

def _unitRows (matrix):
    return normalizeRows(matrix)[0]

#--------------------

def _randomBatch (rng, pairCount=8, dimension=16, foregroundCount=None):
    foregroundCount = (pairCount // 2 if foregroundCount is None
                       else foregroundCount)
    foregroundMask = np.arange(pairCount) < foregroundCount
    return ContrastiveBatch(_unitRows(rng.standard_normal((pairCount,
                                                           dimension))),
                            _unitRows(rng.standard_normal((pairCount,
                                                           dimension))),
                            rng.permutation(foregroundMask))

#--------------------

def _contrastiveLossProc (videoMatrix, textMatrix, foregroundMask,
                          lossFunction, textList=None, **kwargs):
    """Returns a loss procedure over the unnormalized embedding rows"""

    def lossProc ():
        videoUnit, videoNorms = normalizeRows(videoMatrix)
        textUnit, textNorms = normalizeRows(textMatrix)
        batch = ContrastiveBatch(videoUnit, textUnit, foregroundMask,
                                 textList)
        value, videoGradient, textGradient = lossFunction(batch, 0.07,
                                                          **kwargs)
        gradientMap = {
            "video" : normalizeRowsBackward(videoUnit, videoNorms,
                                            videoGradient),
            "text"  : normalizeRowsBackward(textUnit, textNorms,
                                            textGradient)
        }
        return value, gradientMap

    return lossProc

#====================

class TestNce:

    def test_noNegativesGivesCertainty (self):
        anchor = np.array([1.0, 0.0])
        assert nce(anchor, np.array([0.0, 1.0]), [], 0.1) == 1.0

    #--------------------

    def test_equalNegativeHalvesProbability (self):
        anchor = np.array([0.6, 0.8])
        positive = np.array([1.0, 0.0])
        negative = np.array([0.0, 0.75])
        npt.assert_allclose(nce(anchor, positive, [negative], 0.07), 0.5)

    #--------------------

    def test_referenceValue (self):
        anchor = np.array([1.0, 0.0])
        value = nce(anchor, np.array([1.0, 0.0]), [np.array([0.0, 1.0])],
                    1.0)
        npt.assert_allclose(value, math.e / (math.e + 1.0))
        npt.assert_allclose(value, 0.731059, atol=1e-6)

    #--------------------

    def test_temperatureMustBePositive (self):
        with pytest.raises(InputError):
            nce(np.ones(2), np.ones(2), [], 0.0)

#====================

class TestContrastiveBatch:

    def test_nonUnitRowsAreRejected (self, rng):
        batch = _randomBatch(rng)

        with pytest.raises(InputError):
            ContrastiveBatch(2.0 * batch.videoEmbeddingMatrix,
                             batch.textEmbeddingMatrix,
                             batch.foregroundMask)

    #--------------------

    def test_nonFiniteRowsAreRejected (self, rng):
        batch = _randomBatch(rng)
        videoMatrix = batch.videoEmbeddingMatrix.copy()
        videoMatrix[0, 0] = np.nan

        with pytest.raises(NumericError):
            ContrastiveBatch(videoMatrix, batch.textEmbeddingMatrix,
                             batch.foregroundMask)

    #--------------------

    def test_shapesMustAgree (self, rng):
        batch = _randomBatch(rng)

        with pytest.raises(InputError):
            ContrastiveBatch(batch.videoEmbeddingMatrix,
                             batch.textEmbeddingMatrix[:-1],
                             batch.foregroundMask)

#====================

class TestContrastiveLosses:

    def test_clipLossOfTwoPairs (self):
        videoMatrix = np.array([[1.0, 0.0], [0.0, 1.0]])
        batch = ContrastiveBatch(videoMatrix, videoMatrix.copy(),
                                 np.array([True, True]))
        value, _, _ = clipLoss(batch, 1.0)
        npt.assert_allclose(value, -2.0 * math.log(math.e / (math.e + 1.0)))

    #--------------------

    def test_fullForegroundMaskEqualsClipLoss (self, rng):
        batch = _randomBatch(rng, foregroundCount=8)
        clipValue, clipVideoGradient, _ = clipLoss(batch, 0.07)
        maskValue, maskVideoGradient, _ = maskedLoss(batch, 0.07)

        npt.assert_allclose(maskValue, clipValue, rtol=1e-12)
        npt.assert_allclose(maskVideoGradient, clipVideoGradient,
                            rtol=1e-10, atol=1e-14)

    #--------------------

    def test_allBackgroundGivesZero (self, rng):
        batch = _randomBatch(rng, foregroundCount=0)

        for isForegroundNormalized in (False, True):
            value, videoGradient, textGradient = \
                maskedLoss(batch, 0.07, isForegroundNormalized)
            assert value == 0.0
            npt.assert_array_equal(videoGradient, 0.0)
            npt.assert_array_equal(textGradient, 0.0)

    #--------------------

    def test_normalizationChoice (self, rng):
        batch = _randomBatch(rng, foregroundCount=2)
        batchValue, _, _ = maskedLoss(batch, 0.07)
        foregroundValue, _, _ = maskedLoss(batch, 0.07, True)
        npt.assert_allclose(foregroundValue, batchValue * 8 / 2)

    #--------------------

    def test_backgroundStaysInDenominators (self, rng):
        batch = _randomBatch(rng, foregroundCount=4)
        backgroundIndex = int(np.flatnonzero(~batch.foregroundMask)[0])
        textMatrix = batch.textEmbeddingMatrix.copy()
        textMatrix[backgroundIndex] = -textMatrix[backgroundIndex]
        changedBatch = ContrastiveBatch(batch.videoEmbeddingMatrix,
                                        textMatrix, batch.foregroundMask)

        value, _, textGradient = maskedLoss(batch, 0.07)
        changedValue, _, _ = maskedLoss(changedBatch, 0.07)

        assert value != changedValue
        assert np.any(textGradient[backgroundIndex] != 0.0)

    #--------------------

    @pytest.mark.parametrize("lossFunction", (clipLoss, maskedLoss))
    def test_pairPermutationInvariance (self, rng, lossFunction):
        batch = _randomBatch(rng)
        permutation = rng.permutation(batch.pairCount)
        permutedBatch = ContrastiveBatch(
            batch.videoEmbeddingMatrix[permutation],
            batch.textEmbeddingMatrix[permutation],
            batch.foregroundMask[permutation])

        value, videoGradient, _ = lossFunction(batch, 0.07)
        permutedValue, permutedVideoGradient, _ = \
            lossFunction(permutedBatch, 0.07)

        npt.assert_allclose(permutedValue, value, rtol=1e-14)
        npt.assert_allclose(permutedVideoGradient,
                            videoGradient[permutation], rtol=1e-12,
                            atol=1e-15)

    #--------------------

    def test_duplicateTextsAreNoNegatives (self, rng):
        batch = _randomBatch(rng, pairCount=4, foregroundCount=4)
        textMatrix = batch.textEmbeddingMatrix.copy()
        textMatrix[1] = textMatrix[0]
        textList = ["a jump", "a jump", "a run", "a swim"]
        duplicateBatch = ContrastiveBatch(batch.videoEmbeddingMatrix,
                                          textMatrix, batch.foregroundMask,
                                          textList)

        plainValue, _, _ = clipLoss(duplicateBatch, 0.07)
        dedupeValue, _, _ = clipLoss(duplicateBatch, 0.07, True)
        assert dedupeValue < plainValue

        uniqueBatch = ContrastiveBatch(batch.videoEmbeddingMatrix,
                                       batch.textEmbeddingMatrix,
                                       batch.foregroundMask,
                                       ["a", "b", "c", "d"])
        npt.assert_allclose(clipLoss(uniqueBatch, 0.07, True)[0],
                            clipLoss(uniqueBatch, 0.07)[0])

    #--------------------

    @pytest.mark.parametrize("seed", range(20))
    def test_gradientsMatchFiniteDifferences (self, seed):
        rng = np.random.default_rng(seed)
        lossFunction = (clipLoss, maskedLoss)[seed % 2]
        videoMatrix = rng.standard_normal((8, 16))
        textMatrix = rng.standard_normal((8, 16))
        foregroundMask = rng.permutation(np.arange(8) < 3 + seed % 4)
        kwargs = ({ "isForegroundNormalized" : seed % 4 == 1 }
                  if lossFunction is maskedLoss else {})
        lossProc = _contrastiveLossProc(videoMatrix, textMatrix,
                                        foregroundMask, lossFunction,
                                        **kwargs)

        error = GradientChecker.maximumRelativeError(
            lossProc, { "video" : videoMatrix, "text" : textMatrix })
        assert error < 1e-4

#====================

class TestClassificationLoss:

    def test_uniformLogits (self):
        labels = ClassificationLabels(np.array([1, 0]), np.array([2, -1]))
        value, classGradient, regionGradient = \
            classificationLoss(np.zeros((2, 4)), np.zeros((2, 2)), labels)

        npt.assert_allclose(value, ((math.log(2) + math.log(4))
                                    + math.log(2)) / 2)
        npt.assert_array_equal(classGradient[1], 0.0)
        npt.assert_allclose(classGradient[0], [0.125, 0.125, -0.375, 0.125])
        npt.assert_allclose(regionGradient, [[0.25, -0.25], [-0.25, 0.25]])

    #--------------------

    def test_singleForegroundClip (self):
        labels = ClassificationLabels(np.array([1]), np.array([0]))
        value, _, _ = classificationLoss(np.zeros((1, 4)), np.zeros((1, 2)),
                                         labels)
        npt.assert_allclose(value, math.log(2) + math.log(4))

    #--------------------

    def test_badLabelsAreRejected (self):
        with pytest.raises(InputError):
            ClassificationLabels(np.array([1, 0]), np.array([-1, -1]))

        with pytest.raises(InputError):
            ClassificationLabels(np.array([2]), np.array([0]))

        labels = ClassificationLabels(np.array([1]), np.array([7]))

        with pytest.raises(InputError):
            classificationLoss(np.zeros((1, 4)), np.zeros((1, 2)), labels)

    #--------------------

    @pytest.mark.parametrize("seed", range(5))
    def test_gradientsMatchFiniteDifferences (self, seed):
        rng = np.random.default_rng(100 + seed)
        classLogitMatrix = rng.standard_normal((6, 4))
        regionLogitMatrix = rng.standard_normal((6, 2))
        regionLabelVector = np.array([1, 1, 0, 1, 0, 0])
        labels = ClassificationLabels(
            regionLabelVector,
            np.where(regionLabelVector == 1, rng.integers(0, 4, size=6), -1))

        def lossProc ():
            value, classGradient, regionGradient = \
                classificationLoss(classLogitMatrix, regionLogitMatrix,
                                   labels)
            return value, { "class" : classGradient,
                            "region" : regionGradient }

        error = GradientChecker.maximumRelativeError(
            lossProc, { "class" : classLogitMatrix,
                        "region" : regionLogitMatrix })
        assert error < 1e-4

#====================

class TestTotalLoss:

    def _inputs (self, rng):
        batch = _randomBatch(rng)
        regionLabelVector = batch.foregroundMask.astype(int)
        labels = ClassificationLabels(
            regionLabelVector,
            np.where(regionLabelVector == 1, rng.integers(0, 3, size=8), -1))
        return batch, rng.standard_normal((8, 3)), \
               rng.standard_normal((8, 2)), labels

    #--------------------

    def test_termsPerObjective (self, rng):
        batch, classLogitMatrix, regionLogitMatrix, labels = \
            self._inputs(rng)
        objectiveToTermMap = {}

        for objective in Objective.allList:
            report, _ = totalLoss(objective, 0.07, batch, classLogitMatrix,
                                  regionLogitMatrix, labels)
            termMap = report.termMap()
            objectiveToTermMap[objective] = termMap
            presentSum = math.fsum(termMap[name] for name in
                                   ("clip", "mask", "ce")
                                   if termMap[name] is not None)
            npt.assert_allclose(termMap["total"], presentSum)

        assert objectiveToTermMap["tac"]["clip"] is None
        assert objectiveToTermMap["tac"]["mask"] is None
        assert objectiveToTermMap["clap-clip"]["mask"] is None
        assert objectiveToTermMap["clap-clip"]["clip"] is not None
        assert objectiveToTermMap["clap-no-cls"]["ce"] is None
        assert objectiveToTermMap["clap"]["mask"] \
               == objectiveToTermMap["clap-mask"]["mask"]

    #--------------------

    def test_missingPartsAreRejected (self, rng):
        batch, classLogitMatrix, regionLogitMatrix, labels = \
            self._inputs(rng)

        with pytest.raises(InputError):
            totalLoss(Objective.clap, 0.07, None, classLogitMatrix,
                      regionLogitMatrix, labels)

        with pytest.raises(InputError):
            totalLoss(Objective.tac, 0.07, batch)

    #--------------------

    def test_nonFiniteLogitsRaise (self, rng):
        batch, classLogitMatrix, regionLogitMatrix, labels = \
            self._inputs(rng)
        classLogitMatrix[0, 0] = np.inf

        with pytest.raises(NumericError):
            totalLoss(Objective.tac, 0.07, batch, classLogitMatrix,
                      regionLogitMatrix, labels)
