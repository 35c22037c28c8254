# model -- the trainable dual encoder: video encoder, video and text
#          projections, class and region heads, the frozen text table,
#          batched forward and backward passes and checkpoint files
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass
import json

import numpy as np

from basemodules.datatypesupport import DataTypeSupport
from basemodules.operatingsystem import OperatingSystem
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, Natural, Object, \
                                    Optional, RandomGenerator, Real, \
                                    RealMatrix, RealMatrixMap, \
                                    RealVector, String, StringMap, Tuple
from basemodules.utf8file import UTF8File

from .clap_businesstypes import ModelDimensions
from .clap_errors import CheckpointError, ConfigurationError, \
                         InputError, MissingArtifactError
from .language import encodeText, TextDescription, TextEncoderTable, \
                      makeTextTable
from .numkit import AffineLayer, glorotUniform, LayerStack, \
                    normalizeRows, normalizeRowsBackward, \
                    parameterChecksum, ReluLayer, StandardizeLayer

#====================

# version of the checkpoint document layout
checkpointSchemaVersion = 1

# names of the trainable stacks in fixed order
_stackNameList = ("videoEncoder", "projectionVideo", "projectionText",
                  "headClass", "headRegion")

# parameter group of each stack for the learning rate schedule
_stackNameToGroupMap = {
    "videoEncoder"    : "backbone",
    "projectionVideo" : "heads",
    "projectionText"  : "heads",
    "headClass"       : "heads",
    "headRegion"      : "heads"
}

#====================

class ModelState:
    """All parameters of the dual encoder: the video encoder stack,
       the video and text projection stacks, the class and region
       heads, the frozen text table and the temperature"""

    #--------------------

    def __init__ (self,
                  dimensions : ModelDimensions,
                  stackMap : StringMap,
                  textTable : TextEncoderTable,
                  temperature : Real,
                  metadataMap : StringMap = None):
        if not temperature > 0.0:
            raise InputError("temperature must be positive: %r"
                             % temperature)

        self.dimensions      = dimensions
        self.videoEncoder    = stackMap["videoEncoder"]
        self.projectionVideo = stackMap["projectionVideo"]
        self.projectionText  = stackMap["projectionText"]
        self.headClass       = stackMap["headClass"]
        self.headRegion      = stackMap["headRegion"]
        self.textTable       = textTable
        self.temperature     = float(temperature)
        self.metadataMap     = dict(metadataMap or {})
        self._checkDimensions()

    #--------------------

    def __repr__ (self) -> String:
        return ("ModelState(%r, temperature = %g)"
                % (self.dimensions, self.temperature))

    #--------------------

    def _checkDimensions (self):
        """Checks that the stacks fit the dimension record"""

        dims = self.dimensions
        expectationList = (
            (self.videoEncoder,    dims.rawDimension,
             dims.featureDimension),
            (self.projectionVideo, dims.featureDimension,
             dims.embeddingDimension),
            (self.projectionText,  dims.textDimension,
             dims.embeddingDimension),
            (self.headClass,       dims.featureDimension, dims.classCount),
            (self.headRegion,      dims.featureDimension, 2)
        )

        for stack, inputDimension, outputDimension in expectationList:
            if (stack.inputDimension, stack.outputDimension) \
               != (inputDimension, outputDimension):
                message = ("%s maps %r -> %r, expected %d -> %d"
                           % (stack.name, stack.inputDimension,
                              stack.outputDimension, inputDimension,
                              outputDimension))
                Logging.traceError(message)
                raise ConfigurationError(message)

        if self.textTable.textDimension != dims.textDimension:
            raise ConfigurationError("text table dimension %d differs"
                                     " from %d"
                                     % (self.textTable.textDimension,
                                        dims.textDimension))

    #--------------------

    def groupToParameterMap (self) -> StringMap:
        """Returns the map from group name ('backbone', 'heads') to
           the map from qualified parameter names to live arrays"""

        result = { "backbone" : {}, "heads" : {} }

        for stackName in _stackNameList:
            groupMap = result[_stackNameToGroupMap[stackName]]

            for name, value in self.stack(stackName).parameterMap().items():
                groupMap[stackName + "." + name] = value

        return result

    #--------------------

    def markParametersChanged (self):
        """Invalidates all activation tapes of the stacks"""

        for stackName in _stackNameList:
            self.stack(stackName).markParametersChanged()

    #--------------------

    def parameterMap (self) -> RealMatrixMap:
        """Returns the map from qualified names to all trainable
           parameter arrays"""

        result = {}

        for groupMap in self.groupToParameterMap().values():
            result.update(groupMap)

        return result

    #--------------------

    def setTrainingMode (self,
                         isTraining : Boolean):
        for stackName in _stackNameList:
            self.stack(stackName).setTrainingMode(isTraining)

    #--------------------

    def stack (self,
               stackName : String) -> LayerStack:
        return getattr(self, stackName)

#====================

@dataclass(frozen=True, eq=False)
class BatchRecord:
    """The result of a batched forward pass with everything needed for
       the matching backward pass; absent parts are None"""

    featureMatrix        : RealMatrix
    videoEmbeddingMatrix : Optional[RealMatrix]
    textEmbeddingMatrix  : Optional[RealMatrix]
    classLogitMatrix     : Optional[RealMatrix]
    regionLogitMatrix    : Optional[RealMatrix]
    tapeMap              : StringMap
    normMap              : StringMap

#====================
# LOCAL FEATURES
#====================

def _makeAffine (rng : RandomGenerator,
                 inputDimension : Natural,
                 outputDimension : Natural) -> AffineLayer:
    return AffineLayer(glorotUniform(rng, inputDimension, outputDimension))

#--------------------

def _makeProjection (rng : RandomGenerator,
                     inputDimension : Natural,
                     outputDimension : Natural,
                     pairCount : Natural,
                     name : String) -> LayerStack:
    """Returns <pairCount> standardize+affine pairs"""

    layerList = []
    currentDimension = inputDimension

    for _ in range(pairCount):
        layerList.append(StandardizeLayer(currentDimension))
        layerList.append(_makeAffine(rng, currentDimension,
                                     outputDimension))
        currentDimension = outputDimension

    return LayerStack(layerList, name)

#====================
# EXPORTED FEATURES
#====================

def initModel (dimensions : ModelDimensions,
               temperature : Real,
               seed : Natural,
               textTableSeed : Natural = 0) -> ModelState:
    """Returns a freshly initialized model: Glorot uniform weights,
       zero biases, unit scales and zero shifts; the text table only
       depends on <textTableSeed> so that all runs share the same
       frozen language encoder"""

    Logging.trace(">>: %r, temperature = %g, seed = %d",
                  dimensions, temperature, seed)

    dims = dimensions
    rng = np.random.default_rng([seed, 4])

    encoderLayerList = []
    currentDimension = dims.rawDimension

    for i in range(dims.encoderBlockCount):
        isLast = (i == dims.encoderBlockCount - 1)
        outputDimension = (dims.featureDimension if isLast
                           else dims.hiddenDimension)
        encoderLayerList.append(_makeAffine(rng, currentDimension,
                                            outputDimension))
        encoderLayerList.append(ReluLayer())
        currentDimension = outputDimension

    stackMap = {
        "videoEncoder"    : LayerStack(encoderLayerList, "videoEncoder"),
        "projectionVideo" : _makeProjection(rng, dims.featureDimension,
                                            dims.embeddingDimension,
                                            dims.projectionPairCount,
                                            "projectionVideo"),
        "projectionText"  : _makeProjection(rng, dims.textDimension,
                                            dims.embeddingDimension,
                                            dims.projectionPairCount,
                                            "projectionText"),
        "headClass"       : LayerStack([_makeAffine(rng,
                                                    dims.featureDimension,
                                                    dims.classCount)],
                                       "headClass"),
        "headRegion"      : LayerStack([_makeAffine(rng,
                                                    dims.featureDimension,
                                                    2)],
                                       "headRegion")
    }

    textTable = makeTextTable(dims.vocabularyHashSize, dims.textDimension,
                              textTableSeed)
    result = ModelState(dims, stackMap, textTable, temperature,
                        { "seed" : seed })

    Logging.trace("<<: %r", result)
    return result

#--------------------

def embedFeatures (state : ModelState,
                   rawMatrix : RealMatrix) -> RealMatrix:
    """Returns the video encoder features h_v (eval mode) for the
       rows of <rawMatrix>"""

    state.setTrainingMode(False)
    featureMatrix, _ = state.videoEncoder.forward(rawMatrix, False)
    return featureMatrix

#--------------------

def embedVideoBatch (state : ModelState,
                     rawMatrix : RealMatrix) -> Tuple:
    """Returns h_v and the unit video embeddings z_v (eval mode) for
       the rows of <rawMatrix>"""

    featureMatrix = embedFeatures(state, rawMatrix)
    projectedMatrix, _ = state.projectionVideo.forward(featureMatrix, False)
    embeddingMatrix, _ = normalizeRows(projectedMatrix)
    return featureMatrix, embeddingMatrix

#--------------------

def embedVideo (state : ModelState,
                clip : Object) -> Tuple:
    """Returns h_v and z_v of a single <clip>"""

    rawMatrix = np.asarray(clip.rawFeature, dtype=np.float64)[None, :]
    featureMatrix, embeddingMatrix = embedVideoBatch(state, rawMatrix)
    return featureMatrix[0], embeddingMatrix[0]

#--------------------

def embedTextFeatures (state : ModelState,
                       textMatrix : RealMatrix) -> RealMatrix:
    """Returns the unit text embeddings z_t (eval mode) for the text
       feature rows of <textMatrix>"""

    state.setTrainingMode(False)
    projectedMatrix, _ = state.projectionText.forward(textMatrix, False)
    embeddingMatrix, _ = normalizeRows(projectedMatrix)
    return embeddingMatrix

#--------------------

def embedText (state : ModelState,
               description : TextDescription) -> RealVector:
    """Returns z_t of <description>"""

    textVector = encodeText(description, state.textTable)
    return embedTextFeatures(state, textVector[None, :])[0]

#--------------------

def headLogits (state : ModelState,
                featureMatrix : RealMatrix) -> Tuple:
    """Returns the class and region logits for the features h_v in
       the rows of <featureMatrix> (a single vector is accepted)"""

    isVector = (np.ndim(featureMatrix) == 1)
    matrix = np.atleast_2d(featureMatrix)
    state.setTrainingMode(False)
    classLogitMatrix, _  = state.headClass.forward(matrix, False)
    regionLogitMatrix, _ = state.headRegion.forward(matrix, False)

    if isVector:
        result = (classLogitMatrix[0], regionLogitMatrix[0])
    else:
        result = (classLogitMatrix, regionLogitMatrix)

    return result

#--------------------

def forwardBatch (state : ModelState,
                  rawMatrix : RealMatrix,
                  textMatrix : Optional[RealMatrix],
                  headsAreUsed : Boolean,
                  statisticsAreUpdated : Boolean = True) -> BatchRecord:
    """Runs the training mode forward pass of the raw clip features
       in <rawMatrix> and (when given) the text features in
       <textMatrix>; the projections only run when text is given, the
       heads only when <headsAreUsed> is set"""

    state.setTrainingMode(True)
    tapeMap = {}
    normMap = {}

    featureMatrix, tapeMap["videoEncoder"] = \
        state.videoEncoder.forward(rawMatrix, statisticsAreUpdated)

    videoEmbeddingMatrix = textEmbeddingMatrix = None
    classLogitMatrix = regionLogitMatrix = None

    if textMatrix is not None:
        projectedMatrix, tapeMap["projectionVideo"] = \
            state.projectionVideo.forward(featureMatrix,
                                          statisticsAreUpdated)
        videoEmbeddingMatrix, normMap["video"] = \
            normalizeRows(projectedMatrix)
        projectedMatrix, tapeMap["projectionText"] = \
            state.projectionText.forward(textMatrix, statisticsAreUpdated)
        textEmbeddingMatrix, normMap["text"] = \
            normalizeRows(projectedMatrix)

    if headsAreUsed:
        classLogitMatrix, tapeMap["headClass"] = \
            state.headClass.forward(featureMatrix, statisticsAreUpdated)
        regionLogitMatrix, tapeMap["headRegion"] = \
            state.headRegion.forward(featureMatrix, statisticsAreUpdated)

    return BatchRecord(featureMatrix, videoEmbeddingMatrix,
                       textEmbeddingMatrix, classLogitMatrix,
                       regionLogitMatrix, tapeMap, normMap)

#--------------------

def backwardBatch (state : ModelState,
                   record : BatchRecord,
                   videoEmbeddingGradient : Optional[RealMatrix],
                   textEmbeddingGradient : Optional[RealMatrix],
                   classLogitGradient : Optional[RealMatrix],
                   regionLogitGradient : Optional[RealMatrix]) -> StringMap:
    """Returns the complete map from group name to the gradients of
       all trainable parameters for the given loss gradients wrt the
       outputs of <record>; parameters without gradient path get
       zero gradients, the text table gets none"""

    featureGradient = np.zeros_like(record.featureMatrix)
    stackToGradientMap = {}

    if videoEmbeddingGradient is not None:
        projectedGradient = \
            normalizeRowsBackward(record.videoEmbeddingMatrix,
                                  record.normMap["video"],
                                  videoEmbeddingGradient)
        inputGradient, stackToGradientMap["projectionVideo"] = \
            state.projectionVideo.backward(record.tapeMap["projectionVideo"],
                                           projectedGradient)
        featureGradient += inputGradient

    if textEmbeddingGradient is not None:
        projectedGradient = \
            normalizeRowsBackward(record.textEmbeddingMatrix,
                                  record.normMap["text"],
                                  textEmbeddingGradient)
        _, stackToGradientMap["projectionText"] = \
            state.projectionText.backward(record.tapeMap["projectionText"],
                                          projectedGradient)

    for stackName, gradient in (("headClass", classLogitGradient),
                                ("headRegion", regionLogitGradient)):
        if gradient is not None:
            inputGradient, stackToGradientMap[stackName] = \
                state.stack(stackName).backward(record.tapeMap[stackName],
                                                gradient)
            featureGradient += inputGradient

    _, stackToGradientMap["videoEncoder"] = \
        state.videoEncoder.backward(record.tapeMap["videoEncoder"],
                                    featureGradient)

    result = {}

    for groupName, parameterMap in state.groupToParameterMap().items():
        groupGradientMap = {}

        for qualifiedName, value in parameterMap.items():
            stackName, _, name = qualifiedName.partition(".")
            gradientMap = stackToGradientMap.get(stackName, {})
            groupGradientMap[qualifiedName] = \
                gradientMap.get(name, np.zeros_like(value))

        result[groupName] = groupGradientMap

    return result

#--------------------

def thetaVChecksum (state : ModelState) -> String:
    """Returns the checksum of the video encoder parameters"""

    return parameterChecksum(state.videoEncoder.parameterMap())

#--------------------

def textTableChecksum (state : ModelState) -> String:
    """Returns the checksum of the frozen text table"""

    return parameterChecksum({ "textTable"
                               : state.textTable.embeddingMatrix })

#====================
# CHECKPOINTS
#====================

class CheckpointFile:
    """Reads and writes model checkpoints as a single versioned JSON
       document"""

    #--------------------

    @classmethod
    def load (cls,
              fileName : String) -> ModelState:
        """Returns the model state in <fileName>; a missing or
           unsupported schema version or malformed content raises a
           checkpoint error"""

        Logging.trace(">>: %r", fileName)

        if not OperatingSystem.hasFile(fileName):
            raise MissingArtifactError("checkpoint not found: %s"
                                       % fileName)

        with UTF8File(fileName, "rt") as file:
            text = file.read()

        try:
            checkpointMap = json.loads(text)
        except json.JSONDecodeError as e:
            Logging.traceError("corrupt checkpoint %s", fileName)
            raise CheckpointError("%s:%d: corrupt checkpoint: %s"
                                  % (fileName, e.lineno, e.msg))

        if not isinstance(checkpointMap, dict) \
           or "schemaVersion" not in checkpointMap:
            raise CheckpointError("%s has no schema version" % fileName)

        if checkpointMap["schemaVersion"] != checkpointSchemaVersion:
            raise CheckpointError("%s has unsupported schema version %r"
                                  % (fileName,
                                     checkpointMap["schemaVersion"]))

        try:
            dimensions = \
                DataTypeSupport.makeFromMap(ModelDimensions,
                                            checkpointMap["dimensions"],
                                            CheckpointError)
            stackMap = { name : LayerStack.fromJsonMap(checkpointMap[name],
                                                       name)
                         for name in _stackNameList }
            tableMap = checkpointMap["textTable"]
            embeddingMatrix = np.array(tableMap["matrix"], dtype=np.float64)

            if embeddingMatrix.shape != (tableMap["vocabularyHashSize"],
                                         dimensions.textDimension):
                raise CheckpointError("text table has shape %r"
                                      % (embeddingMatrix.shape,))

            embeddingMatrix.setflags(write=False)
            textTable = TextEncoderTable(tableMap["vocabularyHashSize"],
                                         embeddingMatrix)
            result = ModelState(dimensions, stackMap, textTable,
                                checkpointMap["temperature"],
                                checkpointMap.get("metadata", {}))
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointError("%s is malformed: %s" % (fileName, e))
        except ConfigurationError as e:
            raise CheckpointError("%s is inconsistent: %s"
                                  % (fileName, e.message))

        Logging.trace("<<: %r", result)
        return result

    #--------------------

    @classmethod
    def save (cls,
              state : ModelState,
              fileName : String):
        """Writes <state> with all running statistics, the temperature,
           the dimensions, the metadata and the text table"""

        Logging.trace(">>: %r", fileName)

        checkpointMap = {
            "schemaVersion" : checkpointSchemaVersion,
            "metadata"      : state.metadataMap,
            "dimensions"    : DataTypeSupport.toExternalMap(state.dimensions),
            "temperature"   : state.temperature,
            "textTable"     : {
                "vocabularyHashSize" : state.textTable.vocabularyHashSize,
                "matrix" : state.textTable.embeddingMatrix.tolist()
            }
        }

        for stackName in _stackNameList:
            checkpointMap[stackName] = state.stack(stackName).toJsonMap()

        with UTF8File(fileName, "wt") as file:
            file.write(json.dumps(checkpointMap, sort_keys=True) + "\n")

        Logging.trace("<<")
