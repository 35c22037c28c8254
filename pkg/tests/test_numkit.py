# test_numkit -- tests for layers, optimizer and gradient checker
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import numpy as np
import numpy.testing as npt
import pytest

from clapmodules.clap_businesstypes import SgdConfig
from clapmodules.clap_errors import ConfigurationError, InputError, \
                                   NumericError, UsageError
from clapmodules.numkit import AffineLayer, GradientChecker, LayerStack, \
                               ReluLayer, SgdOptimizer, StandardizeLayer, \
                               glorotUniform, normalizeRows, \
                               normalizeRowsBackward, parameterChecksum

#====================

def _linearLossProc (stack : LayerStack,
                     batch : np.ndarray,
                     weightMatrix : np.ndarray):
    """Returns a loss procedure for sum(weight * stack(batch)) that
       leaves the running statistics untouched"""

    def lossProc ():
        stack.markParametersChanged()
        output, tape = stack.forward(batch, False)
        _, gradientMap = stack.backward(tape, weightMatrix)
        return float(np.sum(output * weightMatrix)), gradientMap

    return lossProc

#====================

class TestLayers:

    def test_identityAffineKeepsInput (self):
        layer = AffineLayer(np.eye(3))
        batch = np.array([[1.0, -2.0, 3.5], [0.0, 4.0, -1.0]])
        output, _ = layer.forward(batch, True, True)
        npt.assert_array_equal(output, batch)

    #--------------------

    def test_affineGradients (self, rng):
        layer = AffineLayer(rng.standard_normal((2, 3)),
                            rng.standard_normal(2))
        batch = rng.standard_normal((4, 3))
        gradient = rng.standard_normal((4, 2))
        _, record = layer.forward(batch, True, True)
        inputGradient, gradientMap = layer.backward(record, gradient)

        npt.assert_allclose(inputGradient, gradient @ layer.weightMatrix)
        npt.assert_allclose(gradientMap["weight"], gradient.T @ batch)
        npt.assert_allclose(gradientMap["bias"], gradient.sum(axis=0))

    #--------------------

    def test_reluClipsNegatives (self):
        output, _ = ReluLayer().forward(np.array([[-1.0, 0.0, 2.0]]),
                                        True, True)
        npt.assert_array_equal(output, [[0.0, 0.0, 2.0]])

    #--------------------

    def test_standardizeInTrainingMode (self):
        column = np.array([-2.0, 2.0, -2.0, 2.0]) + 5.0
        batch = np.stack([column, 3.0 * column], axis=1)

        output, _ = StandardizeLayer(2).forward(batch, True, False)
        npt.assert_allclose(output.mean(axis=0), 0.0, atol=1e-12)
        npt.assert_allclose(output[:, 0].var(), 4.0 / (4.0 + 1e-5),
                            rtol=1e-12)

        exactLayer = StandardizeLayer(2, epsilon=0.0)
        output, _ = exactLayer.forward(batch, True, False)
        npt.assert_allclose(output.var(axis=0), 1.0, rtol=1e-12)

    #--------------------

    def test_standardizeRunningStatistics (self):
        layer = StandardizeLayer(1, momentum=0.1)
        batch = np.array([[1.0], [3.0]])

        layer.forward(batch, True, False)
        npt.assert_array_equal(layer.runningMean, [0.0])

        layer.forward(batch, True, True)
        npt.assert_allclose(layer.runningMean, [0.2])
        npt.assert_allclose(layer.runningVariance, [0.9 + 0.1 * 1.0])

        output, _ = layer.forward(batch, False, True)
        expected = (batch - 0.2) / np.sqrt(1.0 + 1e-5)
        npt.assert_allclose(output, expected)
        npt.assert_allclose(layer.runningMean, [0.2])

    #--------------------

    def test_glorotUniformBounds (self, rng):
        matrix = glorotUniform(rng, 30, 10)
        assert matrix.shape == (10, 30)
        assert np.max(np.abs(matrix)) <= np.sqrt(6.0 / 40.0)

#====================

class TestLayerStack:

    def test_dimensionMismatchIsRejected (self):
        with pytest.raises(ConfigurationError):
            LayerStack([AffineLayer(np.ones((3, 2))),
                        AffineLayer(np.ones((2, 4)))], "broken")

        stack = LayerStack([AffineLayer(np.ones((3, 2)))], "ok")

        with pytest.raises(ConfigurationError):
            stack.forward(np.ones((5, 3)))

    #--------------------

    def test_staleTapeIsRejected (self, rng):
        stack = LayerStack([AffineLayer(rng.standard_normal((2, 3)))])
        output, tape = stack.forward(rng.standard_normal((4, 3)))
        stack.markParametersChanged()

        with pytest.raises(UsageError):
            stack.backward(tape, np.ones_like(output))

    #--------------------

    def test_foreignTapeIsRejected (self, rng):
        stackA = LayerStack([AffineLayer(np.eye(2))], "a")
        stackB = LayerStack([AffineLayer(np.eye(2))], "b")
        output, tape = stackA.forward(rng.standard_normal((3, 2)))

        with pytest.raises(UsageError):
            stackB.backward(tape, np.ones_like(output))

    #--------------------

    def test_modeSwitchKeepsTape (self, rng):
        stack = LayerStack([StandardizeLayer(2)])
        output, tape = stack.forward(rng.standard_normal((3, 2)), False)
        outputGradient = rng.standard_normal(output.shape)
        expectedGradient, expectedMap = stack.backward(tape, outputGradient)

        stack.setTrainingMode(False)
        inputGradient, gradientMap = stack.backward(tape, outputGradient)

        npt.assert_allclose(inputGradient, expectedGradient)

        for name, gradient in expectedMap.items():
            npt.assert_allclose(gradientMap[name], gradient)

    #--------------------

    @pytest.mark.parametrize("seed", range(5))
    def test_stackGradientsMatchFiniteDifferences (self, seed):
        rng = np.random.default_rng(seed)
        stack = LayerStack([StandardizeLayer(4),
                            AffineLayer(rng.standard_normal((5, 4)),
                                        rng.standard_normal(5)),
                            AffineLayer(rng.standard_normal((3, 5)))],
                           "smooth")
        batch = rng.standard_normal((6, 4))
        weightMatrix = rng.standard_normal((6, 3))
        lossProc = _linearLossProc(stack, batch, weightMatrix)

        error = GradientChecker.maximumRelativeError(lossProc,
                                                     stack.parameterMap())
        assert error < 1e-5

    #--------------------

    def test_serializationKeepsBehaviour (self, rng):
        stack = LayerStack([AffineLayer(rng.standard_normal((4, 3))),
                            ReluLayer(), StandardizeLayer(4)], "enc")
        stack.forward(rng.standard_normal((5, 3)))
        stack.setTrainingMode(False)
        batch = rng.standard_normal((2, 3))

        copy = LayerStack.fromJsonMap(stack.toJsonMap(), "enc")
        copy.setTrainingMode(False)
        npt.assert_array_equal(copy.forward(batch)[0],
                               stack.forward(batch)[0])

#====================

class TestNormalization:

    def test_zeroRowIsRejected (self):
        with pytest.raises(NumericError):
            normalizeRows(np.array([[1.0, 0.0], [0.0, 0.0]]))

    #--------------------

    def test_backwardIsTangential (self, rng):
        matrix = rng.standard_normal((4, 3))
        unitMatrix, norms = normalizeRows(matrix)
        npt.assert_allclose(np.linalg.norm(unitMatrix, axis=1), 1.0)

        gradient = normalizeRowsBackward(unitMatrix, norms, unitMatrix)
        npt.assert_allclose(gradient, 0.0, atol=1e-12)

#====================

class TestSgdOptimizer:

    def test_learningRateSchedule (self):
        sgdConfig = SgdConfig(1e-4, 2e-2, 0.01, 2)

        assert SgdOptimizer.learningRate(sgdConfig, "backbone", 0) == 1e-4
        assert SgdOptimizer.learningRate(sgdConfig, "backbone", 1) == 1e-4
        npt.assert_allclose(SgdOptimizer.learningRate(sgdConfig,
                                                      "backbone", 2),
                            1e-6)
        npt.assert_allclose(SgdOptimizer.learningRate(sgdConfig, "heads", 4),
                            2e-6)

    #--------------------

    def test_stepUpdatesInPlace (self):
        weight = np.array([1.0, 2.0])
        head = np.array([3.0])
        parameterMap = { "backbone" : { "w" : weight },
                         "heads"    : { "h" : head } }
        gradientMap = { "backbone" : { "w" : np.array([1.0, -1.0]) },
                        "heads"    : { "h" : np.array([2.0]) } }

        learningRateMap = SgdOptimizer.step(parameterMap, gradientMap, 0,
                                            SgdConfig(0.5, 0.25, 0.1, 1))

        assert learningRateMap == { "backbone" : 0.5, "heads" : 0.25 }
        npt.assert_allclose(weight, [0.5, 2.5])
        npt.assert_allclose(head, [2.5])

    #--------------------

    def test_nonFiniteGradientLeavesParameters (self):
        weight = np.array([1.0, 2.0])
        head = np.array([3.0])
        parameterMap = { "backbone" : { "w" : weight },
                         "heads"    : { "h" : head } }
        gradientMap = { "backbone" : { "w" : np.array([1.0, 1.0]) },
                        "heads"    : { "h" : np.array([np.nan]) } }

        with pytest.raises(NumericError):
            SgdOptimizer.step(parameterMap, gradientMap, 0, SgdConfig())

        npt.assert_array_equal(weight, [1.0, 2.0])
        npt.assert_array_equal(head, [3.0])

#====================

class TestGradientChecker:

    def test_quadraticLoss (self, rng):
        weightMatrix = rng.standard_normal((3, 4))
        x = rng.standard_normal(4)

        def lossProc ():
            y = weightMatrix @ x
            return 0.5 * float(y @ y), { "W" : np.outer(y, x) }

        error = GradientChecker.maximumRelativeError(lossProc,
                                                     { "W" : weightMatrix })
        assert error < 1e-6

    #--------------------

    def test_wrongGradientIsDetected (self, rng):
        weightMatrix = rng.standard_normal((2, 2))

        def lossProc ():
            return float(np.sum(weightMatrix ** 2)), { "W" : weightMatrix }

        error = GradientChecker.maximumRelativeError(lossProc,
                                                     { "W" : weightMatrix })
        npt.assert_allclose(error, 0.5, rtol=1e-6)

    #--------------------

    def test_parametersAreRestored (self, rng):
        weightMatrix = rng.standard_normal((3, 3))
        original = weightMatrix.copy()

        def lossProc ():
            return float(np.sum(weightMatrix)), \
                   { "W" : np.ones_like(weightMatrix) }

        GradientChecker.maximumRelativeError(lossProc, { "W" : weightMatrix })
        npt.assert_array_equal(weightMatrix, original)

    #--------------------

    @pytest.mark.parametrize("step", (1e-8, 1e-2))
    def test_stepOutsideRangeIsRejected (self, step):
        with pytest.raises(InputError):
            GradientChecker.maximumRelativeError(lambda: (0.0, {}), {},
                                                 step)

    #--------------------

    def test_checksumDependsOnValues (self):
        a = np.array([1.0, 2.0])
        checksum = parameterChecksum({ "a" : a, "b" : np.zeros(2) })
        assert checksum == parameterChecksum({ "b" : np.zeros(2), "a" : a })

        a[0] = 1.5
        assert checksum != parameterChecksum({ "a" : a, "b" : np.zeros(2) })
