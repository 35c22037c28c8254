# numkit -- dense float64 layers with explicit forward and backward
#           passes, layer stacks with activation tapes, row
#           normalization, the two-group SGD optimizer and a central
#           difference gradient checker
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass
import hashlib
import itertools

import numpy as np

from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, Callable, Natural, \
                                    Object, ObjectList, Real, \
                                    RandomGenerator, RealMatrix, \
                                    RealMatrixMap, RealVector, String, \
                                    StringMap, Tuple

from .clap_businesstypes import SgdConfig
from .clap_errors import CheckpointError, ConfigurationError, \
                         InputError, NumericError, UsageError

#====================
# LOCAL FEATURES
#====================

# the identity source for activation tapes
_tapeVersionCounter = itertools.count(1)

#--------------------

def _checkBatch (batch : RealMatrix,
                 dimension : Natural,
                 layerName : String):
    """Raises a configuration error when <batch> is not a matrix with
       <dimension> columns"""

    if batch.ndim != 2 or batch.shape[1] != dimension:
        message = ("%s expects %d input columns, got shape %r"
                   % (layerName, dimension, batch.shape))
        Logging.traceError(message)
        raise ConfigurationError(message)

#--------------------

def _matrixFromJson (value : Object,
                     rowCount : Natural,
                     columnCount : Natural,
                     name : String) -> RealMatrix:
    """Returns the float64 matrix for nested list <value>; raises a
       checkpoint error when the shape or content is wrong"""

    try:
        result = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise CheckpointError("%s is not numeric" % name)

    if result.shape != (rowCount, columnCount):
        raise CheckpointError("%s has shape %r, expected %r"
                              % (name, result.shape,
                                 (rowCount, columnCount)))

    return result

#--------------------

def _vectorFromJson (value : Object,
                     length : Natural,
                     name : String) -> RealVector:
    """Returns the float64 vector for list <value>"""

    return _matrixFromJson([value], 1, length, name)[0]

#====================
# EXPORTED FEATURES
#====================

def glorotUniform (rng : RandomGenerator,
                   fanIn : Natural,
                   fanOut : Natural) -> RealMatrix:
    """Returns a (<fanOut> x <fanIn>) weight matrix drawn uniformly
       from +-sqrt(6 / (<fanIn> + <fanOut>))"""

    limit = np.sqrt(6.0 / (fanIn + fanOut))
    return rng.uniform(-limit, limit, size=(fanOut, fanIn))

#--------------------

def normalizeRows (matrix : RealMatrix) -> Tuple:
    """Returns the rows of <matrix> scaled to unit L2 norm together
       with the original row norms; zero rows raise a numeric error"""

    norms = np.sqrt(np.sum(matrix * matrix, axis=1))

    if not np.all(np.isfinite(norms)) or np.any(norms == 0.0):
        Logging.traceError("cannot normalize zero or non-finite rows")
        raise NumericError("cannot normalize zero or non-finite rows")

    return matrix / norms[:, None], norms

#--------------------

def normalizeRowsBackward (normalizedMatrix : RealMatrix,
                           norms : RealVector,
                           gradient : RealMatrix) -> RealMatrix:
    """Returns the gradient wrt the unnormalized rows given the
       <gradient> wrt the <normalizedMatrix> and the row <norms>"""

    radialPart = np.sum(gradient * normalizedMatrix, axis=1)[:, None]
    return (gradient - normalizedMatrix * radialPart) / norms[:, None]

#--------------------

def parameterChecksum (nameToArrayMap : RealMatrixMap) -> String:
    """Returns the SHA-256 hex digest over the names and the raw
       float64 bytes of the arrays in <nameToArrayMap> in name order"""

    digest = hashlib.sha256()

    for name in sorted(nameToArrayMap.keys()):
        array = np.ascontiguousarray(nameToArrayMap[name], dtype=np.float64)
        digest.update(name.encode("utf-8"))
        digest.update(repr(array.shape).encode("utf-8"))
        digest.update(array.tobytes())

    return digest.hexdigest()

#====================
# LAYERS
#====================

class AffineLayer:
    """An affine map y = x W^T + b with weight matrix W of shape
       (outputDimension x inputDimension)"""

    kind = "affine"

    #--------------------

    def __init__ (self,
                  weightMatrix : RealMatrix,
                  biasVector : RealVector = None):
        self.weightMatrix = np.array(weightMatrix, dtype=np.float64)
        outputDimension = self.weightMatrix.shape[0]
        self.biasVector = (np.zeros(outputDimension) if biasVector is None
                           else np.array(biasVector, dtype=np.float64))

    #--------------------

    @property
    def inputDimension (self) -> Natural:
        return self.weightMatrix.shape[1]

    #--------------------

    @property
    def outputDimension (self) -> Natural:
        return self.weightMatrix.shape[0]

    #--------------------

    def backward (self,
                  record : Object,
                  gradient : RealMatrix) -> Tuple:
        """Returns gradient wrt the input and the map from parameter
           names to their gradients"""

        inputMatrix = record
        gradientMap = { "weight" : gradient.T @ inputMatrix,
                        "bias"   : gradient.sum(axis=0) }
        return gradient @ self.weightMatrix, gradientMap

    #--------------------

    def forward (self,
                 batch : RealMatrix,
                 isTraining : Boolean,
                 statisticsAreUpdated : Boolean) -> Tuple:
        """Returns the output for <batch> and the record for the
           backward pass"""

        return batch @ self.weightMatrix.T + self.biasVector, batch

    #--------------------

    def parameterMap (self) -> RealMatrixMap:
        return { "weight" : self.weightMatrix, "bias" : self.biasVector }

    #--------------------

    def toJsonMap (self) -> StringMap:
        return { "kind"   : self.kind,
                 "weight" : self.weightMatrix.tolist(),
                 "bias"   : self.biasVector.tolist() }

    #--------------------

    @classmethod
    def fromJsonMap (cls,
                     layerMap : StringMap,
                     name : String) -> Object:
        weightValue = layerMap.get("weight")

        if not isinstance(weightValue, list) or len(weightValue) == 0 \
           or not isinstance(weightValue[0], list):
            raise CheckpointError("%s.weight is not a matrix" % name)

        rowCount, columnCount = len(weightValue), len(weightValue[0])
        weightMatrix = _matrixFromJson(weightValue, rowCount, columnCount,
                                       name + ".weight")
        biasVector = _vectorFromJson(layerMap.get("bias"), rowCount,
                                     name + ".bias")
        return cls(weightMatrix, biasVector)

#--------------------

class ReluLayer:
    """The elementwise rectifier max(0, x)"""

    kind = "relu"
    inputDimension = None
    outputDimension = None

    #--------------------

    def backward (self,
                  record : Object,
                  gradient : RealMatrix) -> Tuple:
        isPositive = record
        return gradient * isPositive, {}

    #--------------------

    def forward (self,
                 batch : RealMatrix,
                 isTraining : Boolean,
                 statisticsAreUpdated : Boolean) -> Tuple:
        isPositive = batch > 0.0
        return np.where(isPositive, batch, 0.0), isPositive

    #--------------------

    def parameterMap (self) -> RealMatrixMap:
        return {}

    #--------------------

    def toJsonMap (self) -> StringMap:
        return { "kind" : self.kind }

    #--------------------

    @classmethod
    def fromJsonMap (cls,
                     layerMap : StringMap,
                     name : String) -> Object:
        return cls()

#--------------------

class StandardizeLayer:
    """Per-column standardization with a learned scale and shift; in
       training mode the batch statistics are used (and optionally
       folded into the running statistics with <momentum>), in eval
       mode the running statistics make the layer a fixed affine map"""

    kind = "standardize"

    #--------------------

    def __init__ (self,
                  dimension : Natural,
                  momentum : Real = 0.1,
                  epsilon : Real = 1e-5):
        self.runningMean     = np.zeros(dimension)
        self.runningVariance = np.ones(dimension)
        self.scale           = np.ones(dimension)
        self.shift           = np.zeros(dimension)
        self.momentum        = momentum
        self.epsilon         = epsilon

    #--------------------

    @property
    def inputDimension (self) -> Natural:
        return self.scale.shape[0]

    #--------------------

    @property
    def outputDimension (self) -> Natural:
        return self.scale.shape[0]

    #--------------------

    def backward (self,
                  record : Object,
                  gradient : RealMatrix) -> Tuple:
        standardizedMatrix, inverseStd, isTraining = record
        gradientMap = {
            "scale" : np.sum(gradient * standardizedMatrix, axis=0),
            "shift" : np.sum(gradient, axis=0)
        }
        standardizedGradient = gradient * self.scale

        if not isTraining:
            inputGradient = standardizedGradient * inverseStd
        else:
            rowCount = gradient.shape[0]
            inputGradient = (inverseStd / rowCount
                             * (rowCount * standardizedGradient
                                - standardizedGradient.sum(axis=0)
                                - standardizedMatrix
                                  * np.sum(standardizedGradient
                                           * standardizedMatrix, axis=0)))

        return inputGradient, gradientMap

    #--------------------

    def forward (self,
                 batch : RealMatrix,
                 isTraining : Boolean,
                 statisticsAreUpdated : Boolean) -> Tuple:
        if isTraining:
            mean     = batch.mean(axis=0)
            variance = batch.var(axis=0)

            if statisticsAreUpdated:
                factor = self.momentum
                self.runningMean = ((1.0 - factor) * self.runningMean
                                    + factor * mean)
                self.runningVariance = ((1.0 - factor)
                                        * self.runningVariance
                                        + factor * variance)
        else:
            mean, variance = self.runningMean, self.runningVariance

        inverseStd = 1.0 / np.sqrt(variance + self.epsilon)
        standardizedMatrix = (batch - mean) * inverseStd
        result = standardizedMatrix * self.scale + self.shift
        return result, (standardizedMatrix, inverseStd, isTraining)

    #--------------------

    def parameterMap (self) -> RealMatrixMap:
        return { "scale" : self.scale, "shift" : self.shift }

    #--------------------

    def toJsonMap (self) -> StringMap:
        return { "kind"            : self.kind,
                 "runningMean"     : self.runningMean.tolist(),
                 "runningVariance" : self.runningVariance.tolist(),
                 "scale"           : self.scale.tolist(),
                 "shift"           : self.shift.tolist(),
                 "momentum"        : self.momentum,
                 "epsilon"         : self.epsilon }

    #--------------------

    @classmethod
    def fromJsonMap (cls,
                     layerMap : StringMap,
                     name : String) -> Object:
        scaleValue = layerMap.get("scale")

        if not isinstance(scaleValue, list):
            raise CheckpointError("%s.scale is not a vector" % name)

        dimension = len(scaleValue)
        result = cls(dimension, layerMap.get("momentum", 0.1),
                     layerMap.get("epsilon", 1e-5))

        for attributeName in ("runningMean", "runningVariance",
                              "scale", "shift"):
            vector = _vectorFromJson(layerMap.get(attributeName),
                                     dimension,
                                     name + "." + attributeName)
            setattr(result, attributeName, vector)

        if np.any(result.runningVariance <= 0.0):
            raise CheckpointError("%s has non-positive running variance"
                                  % name)

        return result

#====================

@dataclass(frozen=True, eq=False)
class ActivationTape:
    """The record of a single forward pass through a layer stack"""

    stackIdentity : Natural
    version       : Natural
    recordList    : ObjectList

#--------------------

class LayerStack:
    """An ordered list of layers with a training mode flag; a forward
       pass returns an activation tape that is only valid for the
       matching backward pass until the parameters or the mode of the
       stack change"""

    _kindToLayerClassMap = {
        AffineLayer.kind      : AffineLayer,
        ReluLayer.kind        : ReluLayer,
        StandardizeLayer.kind : StandardizeLayer
    }

    #--------------------
    # LOCAL FEATURES
    #--------------------

    def _checkDimensions (self):
        """Checks that adjacent layer dimensions fit"""

        currentDimension = None

        for i, layer in enumerate(self.layerList):
            if layer.inputDimension is not None:
                if currentDimension is not None \
                   and currentDimension != layer.inputDimension:
                    message = ("%s: layer %d expects %d inputs, got %d"
                               % (self.name, i, layer.inputDimension,
                                  currentDimension))
                    Logging.traceError(message)
                    raise ConfigurationError(message)

                currentDimension = layer.outputDimension

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    def __init__ (self,
                  layerList : ObjectList,
                  name : String = "stack"):
        self.layerList  = list(layerList)
        self.name       = name
        self.isTraining = True
        self._version   = next(_tapeVersionCounter)
        self._checkDimensions()

    #--------------------

    def __repr__ (self) -> String:
        kindList = [ layer.kind for layer in self.layerList ]
        return ("LayerStack(%s, %r, in = %r, out = %r)"
                % (self.name, kindList, self.inputDimension,
                   self.outputDimension))

    #--------------------

    @property
    def inputDimension (self) -> Natural:
        dimensionList = [ layer.inputDimension for layer in self.layerList
                          if layer.inputDimension is not None ]
        return dimensionList[0] if dimensionList else None

    #--------------------

    @property
    def outputDimension (self) -> Natural:
        dimensionList = [ layer.outputDimension for layer in self.layerList
                          if layer.outputDimension is not None ]
        return dimensionList[-1] if dimensionList else None

    #--------------------

    def backward (self,
                  tape : ActivationTape,
                  outputGradient : RealMatrix) -> Tuple:
        """Returns the gradient wrt the stack input and the map from
           parameter names (like '0.weight') to their gradients for
           <outputGradient> wrt the output of the forward pass that
           produced <tape>"""

        if tape.stackIdentity != id(self) or tape.version != self._version:
            message = "%s: stale or foreign activation tape" % self.name
            Logging.traceError(message)
            raise UsageError(message)

        gradient = outputGradient
        gradientMap = {}

        for i in reversed(range(len(self.layerList))):
            layer = self.layerList[i]
            gradient, layerGradientMap = \
                layer.backward(tape.recordList[i], gradient)

            for name, value in layerGradientMap.items():
                gradientMap["%d.%s" % (i, name)] = value

        return gradient, gradientMap

    #--------------------

    def forward (self,
                 batch : RealMatrix,
                 statisticsAreUpdated : Boolean = True) -> Tuple:
        """Returns the output of the stack for <batch> and the
           activation tape; running statistics are only changed in
           training mode when <statisticsAreUpdated> is set"""

        inputDimension = self.inputDimension

        if inputDimension is not None:
            _checkBatch(batch, inputDimension, self.name)

        result = np.asarray(batch, dtype=np.float64)
        recordList = []

        for layer in self.layerList:
            result, record = layer.forward(result, self.isTraining,
                                           statisticsAreUpdated)
            recordList.append(record)

        tape = ActivationTape(id(self), self._version, recordList)
        return result, tape

    #--------------------

    def markParametersChanged (self):
        """Invalidates all outstanding activation tapes"""

        self._version = next(_tapeVersionCounter)

    #--------------------

    def parameterMap (self) -> RealMatrixMap:
        """Returns the map from parameter names to the live parameter
           arrays of all layers"""

        result = {}

        for i, layer in enumerate(self.layerList):
            for name, value in layer.parameterMap().items():
                result["%d.%s" % (i, name)] = value

        return result

    #--------------------

    def setTrainingMode (self,
                         isTraining : Boolean):
        """Switches between training mode (batch statistics) and eval
           mode (running statistics); outstanding tapes stay valid,
           their records carry the mode of their forward pass"""

        self.isTraining = isTraining

    #--------------------

    def toJsonMap (self) -> StringMap:
        return { "name"   : self.name,
                 "layers" : [ layer.toJsonMap()
                              for layer in self.layerList ] }

    #--------------------

    @classmethod
    def fromJsonMap (cls,
                     stackMap : StringMap,
                     name : String) -> Object:
        """Returns the stack described by <stackMap>; raises a
           checkpoint error on malformed content"""

        if not isinstance(stackMap, dict) \
           or not isinstance(stackMap.get("layers"), list):
            raise CheckpointError("%s has no layer list" % name)

        layerList = []

        for i, layerMap in enumerate(stackMap["layers"]):
            kind = layerMap.get("kind") if isinstance(layerMap, dict) \
                   else None

            if kind not in cls._kindToLayerClassMap:
                raise CheckpointError("%s.%d has unknown kind %r"
                                      % (name, i, kind))

            layerClass = cls._kindToLayerClassMap[kind]
            layerList.append(layerClass.fromJsonMap(layerMap,
                                                    "%s.%d" % (name, i)))

        try:
            result = cls(layerList, stackMap.get("name", name))
        except ConfigurationError as e:
            raise CheckpointError(e.message)

        return result

#====================

class SgdOptimizer:
    """Plain stochastic gradient descent over named parameter groups
       with the step decay schedule of an <SgdConfig>"""

    #--------------------

    @classmethod
    def learningRate (cls,
                      sgdConfig : SgdConfig,
                      groupName : String,
                      epoch : Natural) -> Real:
        """Returns the learning rate of <groupName> in <epoch>"""

        return sgdConfig.learningRate(groupName, epoch)

    #--------------------

    @classmethod
    def step (cls,
              groupToParameterMap : StringMap,
              groupToGradientMap : StringMap,
              epoch : Natural,
              sgdConfig : SgdConfig) -> StringMap:
        """Updates the parameter arrays in <groupToParameterMap> (group
           name to parameter map) in place by the gradients in
           <groupToGradientMap>; all gradients are checked for
           finiteness before any update; returns the learning rates
           used per group"""

        Logging.trace(">>: epoch = %d", epoch)

        for groupName, gradientMap in groupToGradientMap.items():
            parameterMap = groupToParameterMap[groupName]

            for name, gradient in gradientMap.items():
                if name not in parameterMap \
                   or parameterMap[name].shape != gradient.shape:
                    message = ("gradient %s.%s does not fit the parameters"
                               % (groupName, name))
                    Logging.traceError(message)
                    raise ConfigurationError(message)

                if not np.all(np.isfinite(gradient)):
                    message = ("non-finite gradient in %s.%s"
                               % (groupName, name))
                    Logging.traceError(message)
                    raise NumericError(message)

        learningRateMap = {}

        for groupName, gradientMap in groupToGradientMap.items():
            learningRate = cls.learningRate(sgdConfig, groupName, epoch)
            learningRateMap[groupName] = learningRate
            parameterMap = groupToParameterMap[groupName]

            for name, gradient in gradientMap.items():
                parameterMap[name] -= learningRate * gradient

        Logging.trace("<<: %r", learningRateMap)
        return learningRateMap

#====================

class GradientChecker:
    """Compares analytic gradients with central finite differences"""

    # parameter coordinate count above which a seeded subset is checked
    defaultCoordinateLimit = 400

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _coordinateList (cls,
                         parameterMap : RealMatrixMap,
                         coordinateLimit : Natural,
                         seed : Natural) -> ObjectList:
        """Returns the (name, flat index) pairs to perturb"""

        result = [ (name, index)
                   for name in sorted(parameterMap.keys())
                   for index in range(parameterMap[name].size) ]

        if len(result) > coordinateLimit:
            rng = np.random.default_rng(seed)
            selection = np.sort(rng.choice(len(result), coordinateLimit,
                                           replace=False))
            result = [ result[i] for i in selection ]

        return result

    #--------------------

    @classmethod
    def _finiteLoss (cls,
                     lossProc : Callable) -> Real:
        """Evaluates <lossProc> and raises a numeric error for a
           non-finite result"""

        loss, _ = lossProc()

        if not np.isfinite(loss):
            Logging.traceError("non-finite loss %r", loss)
            raise NumericError("non-finite loss during gradient check")

        return loss

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def relativeError (cls,
                       a : Real,
                       b : Real) -> Real:
        """Returns |a - b| / max(|a|, |b|, 1e-8)"""

        return abs(a - b) / max(abs(a), abs(b), 1e-8)

    #--------------------

    @classmethod
    def maximumRelativeError (cls,
                              lossProc : Callable,
                              parameterMap : RealMatrixMap,
                              step : Real = 1e-5,
                              coordinateLimit : Natural = None,
                              seed : Natural = 0) -> Real:
        """Returns the maximum relative error between the analytic
           gradient and the central difference quotient with <step>
           over the parameters in <parameterMap> (name to live array);
           <lossProc> takes no arguments and returns the loss and the
           gradient map for the current parameter values; at most
           <coordinateLimit> coordinates (a subset chosen by <seed>)
           are perturbed"""

        Logging.trace(">>: step = %g, parameters = %r",
                      step, sorted(parameterMap.keys()))

        if not (1e-7 < step < 1e-3):
            raise InputError("step must lie in (1e-7, 1e-3): %r" % step)

        coordinateLimit = (cls.defaultCoordinateLimit
                           if coordinateLimit is None else coordinateLimit)
        loss, gradientMap = lossProc()

        if not np.isfinite(loss):
            Logging.traceError("non-finite loss %r", loss)
            raise NumericError("non-finite loss during gradient check")

        result = 0.0

        for name, index in cls._coordinateList(parameterMap,
                                                coordinateLimit, seed):
            array = parameterMap[name]
            flatView = array.reshape(-1)
            originalValue = flatView[index]

            flatView[index] = originalValue + step
            lossPlus = cls._finiteLoss(lossProc)
            flatView[index] = originalValue - step
            lossMinus = cls._finiteLoss(lossProc)
            flatView[index] = originalValue

            numericGradient = (lossPlus - lossMinus) / (2.0 * step)
            gradient = gradientMap.get(name)
            analyticGradient = (0.0 if gradient is None
                                else gradient.reshape(-1)[index])
            error = cls.relativeError(analyticGradient, numericGradient)
            result = max(result, error)

        Logging.trace("<<: %g", result)
        return result
