# losses -- the training objectives with analytic gradients: the
#           temperature-scaled NCE probability, the symmetric in-batch
#           contrastive loss, its foreground-masked variant, the
#           region/class classification loss and their combinations
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import log_softmax, softmax

from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, BooleanVector, Natural, \
                                    NaturalVector, Optional, Real, \
                                    RealMatrix, RealVector, String, \
                                    StringList, StringMap, Tuple

from .clap_businesstypes import Objective, Region
from .clap_errors import InputError, NumericError

#====================

# tolerance for the unit norm check of embeddings
_unitNormTolerance = 1e-6

#====================
# TYPES
#====================

@dataclass(frozen=True, eq=False)
class ContrastiveBatch:
    """The positive pairs of a batch: row i of both embedding
       matrices is pair i; <foregroundMask> marks the foreground
       pairs; <textList> (optional) allows excluding identical texts
       from each other's negatives"""

    videoEmbeddingMatrix : RealMatrix
    textEmbeddingMatrix  : RealMatrix
    foregroundMask       : BooleanVector
    textList             : Optional[StringList] = None

    #--------------------

    def __post_init__ (self):
        pairCount = self.videoEmbeddingMatrix.shape[0]

        if pairCount == 0:
            raise InputError("contrastive batch must not be empty")

        if self.textEmbeddingMatrix.shape != self.videoEmbeddingMatrix.shape \
           or len(self.foregroundMask) != pairCount:
            raise InputError("contrastive batch parts differ in shape")

        if self.textList is not None and len(self.textList) != pairCount:
            raise InputError("text list does not fit the batch")

        for name, matrix in (("video", self.videoEmbeddingMatrix),
                             ("text", self.textEmbeddingMatrix)):
            norms = np.sqrt(np.sum(matrix * matrix, axis=1))

            if not np.all(np.isfinite(norms)):
                Logging.traceError("non-finite %s embeddings", name)
                raise NumericError("non-finite %s embeddings" % name)

            if not np.all(np.abs(norms - 1.0) <= _unitNormTolerance):
                raise InputError("%s embeddings are not unit norm" % name)

    #--------------------

    @property
    def pairCount (self) -> Natural:
        return self.videoEmbeddingMatrix.shape[0]

#--------------------

@dataclass(frozen=True, eq=False)
class ClassificationLabels:
    """Per clip the region label (0 background, 1 foreground) and the
       class label (-1 for background)"""

    regionLabelVector : NaturalVector
    classLabelVector  : NaturalVector

    #--------------------

    def __post_init__ (self):
        regionLabelVector = np.asarray(self.regionLabelVector)
        classLabelVector  = np.asarray(self.classLabelVector)

        if regionLabelVector.shape != classLabelVector.shape:
            raise InputError("region and class labels differ in length")

        if not np.all(np.isin(regionLabelVector,
                              (Region.background, Region.foreground))):
            raise InputError("region labels must be 0 or 1")

        isForeground = (regionLabelVector == Region.foreground)

        if np.any(classLabelVector[isForeground] < 0):
            Logging.traceError("foreground clip without class label")
            raise InputError("foreground clip without class label")

#--------------------

@dataclass(frozen=True)
class LossReport:
    """The loss terms of one batch; absent terms are None"""

    objective  : String
    clipValue  : Optional[Real]
    maskValue  : Optional[Real]
    ceValue    : Optional[Real]
    totalValue : Real

    #--------------------

    def termMap (self) -> StringMap:
        """Returns the map from term names to values for logs"""

        return { "objective" : self.objective,
                 "clip"      : self.clipValue,
                 "mask"      : self.maskValue,
                 "ce"        : self.ceValue,
                 "total"     : self.totalValue }

#--------------------

@dataclass(frozen=True, eq=False)
class LossGradients:
    """Gradients of the total loss wrt the embeddings and logits;
       absent parts are None"""

    videoEmbeddingGradient : Optional[RealMatrix] = None
    textEmbeddingGradient  : Optional[RealMatrix] = None
    classLogitGradient     : Optional[RealMatrix] = None
    regionLogitGradient    : Optional[RealMatrix] = None

#====================
# LOCAL FEATURES
#====================

def _checkTemperature (temperature : Real):
    if not temperature > 0.0:
        Logging.traceError("bad temperature %r", temperature)
        raise InputError("temperature must be positive: %r" % temperature)

#--------------------

def _orderFreeLogSoftmax (matrix : RealMatrix) -> RealMatrix:
    """Returns the row-wise log softmax of <matrix> with exactly
       rounded row sums, so the result does not depend on the column
       order"""

    maximumVector = np.max(matrix, axis=1)
    shiftedMatrix = matrix - maximumVector[:, None]
    logNormalizerVector = np.array([ math.log(math.fsum(np.exp(row)))
                                     for row in shiftedMatrix ])
    return shiftedMatrix - logNormalizerVector[:, None]

#--------------------

def _similarityMatrix (batch : ContrastiveBatch,
                       temperature : Real,
                       negativesAreDeduplicated : Boolean) -> RealMatrix:
    """Returns S[i,j] = z_v[i] . z_t[j] / tau; each entry is reduced
       over the embedding axis on its own so that reordering pairs
       permutes S exactly; identical texts are masked with -inf when
       requested"""

    videoMatrix = batch.videoEmbeddingMatrix
    textMatrix  = batch.textEmbeddingMatrix
    result = ((videoMatrix[:, None, :] * textMatrix[None, :, :]).sum(axis=2)
              / temperature)

    if negativesAreDeduplicated and batch.textList is not None:
        textList = batch.textList
        pairCount = batch.pairCount

        for i in range(pairCount):
            for j in range(pairCount):
                if i != j and textList[i] == textList[j]:
                    result[i, j] = -np.inf

    return result

#--------------------

def _symmetricContrastive (batch : ContrastiveBatch,
                           temperature : Real,
                           weightVector : RealVector,
                           denominator : Real,
                           negativesAreDeduplicated : Boolean) -> Tuple:
    """Returns value and gradients wrt both embedding matrices of
       -(1/<denominator>) sum_i w_i [log P_row(i,i) + log P_col(i,i)]
       where P_row is the softmax of S over texts and P_col over
       videos"""

    _checkTemperature(temperature)
    pairCount = batch.pairCount

    if denominator == 0:
        zeroMatrix = np.zeros_like(batch.videoEmbeddingMatrix)
        return 0.0, zeroMatrix, zeroMatrix.copy()

    similarityMatrix = _similarityMatrix(batch, temperature,
                                         negativesAreDeduplicated)
    rowLogProbabilityMatrix    = _orderFreeLogSoftmax(similarityMatrix)
    columnLogProbabilityMatrix = _orderFreeLogSoftmax(similarityMatrix.T).T
    termList = [ weightVector[i]
                 * -(rowLogProbabilityMatrix[i, i]
                     + columnLogProbabilityMatrix[i, i])
                 for i in range(pairCount) ]
    value = math.fsum(termList) / denominator

    identityMatrix = np.eye(pairCount)
    rowPart    = (np.exp(rowLogProbabilityMatrix) - identityMatrix) \
                 * weightVector[:, None]
    columnPart = (np.exp(columnLogProbabilityMatrix) - identityMatrix) \
                 * weightVector[None, :]
    similarityGradient = (rowPart + columnPart) / denominator

    videoGradient = similarityGradient @ batch.textEmbeddingMatrix \
                    / temperature
    textGradient  = similarityGradient.T @ batch.videoEmbeddingMatrix \
                    / temperature
    return value, videoGradient, textGradient

#====================
# EXPORTED FEATURES
#====================

def nceDistribution (anchor : RealVector,
                     candidateMatrix : RealMatrix,
                     temperature : Real) -> RealVector:
    """Returns the softmax of anchor . candidate / <temperature> over
       the rows of <candidateMatrix>"""

    _checkTemperature(temperature)
    logitVector = (np.asarray(candidateMatrix) * anchor[None, :]).sum(axis=1)
    return softmax(logitVector / temperature)

#--------------------

def nce (anchor : RealVector,
         positive : RealVector,
         negativeList : list,
         temperature : Real) -> Real:
    """Returns the probability of <positive> among <positive> and the
       vectors in <negativeList> as candidates for <anchor>; the
       reverse direction is obtained by swapping the roles of video
       and text"""

    candidateMatrix = np.vstack([positive] + list(negativeList))
    return float(nceDistribution(anchor, candidateMatrix, temperature)[0])

#--------------------

def clipLoss (batch : ContrastiveBatch,
              temperature : Real,
              negativesAreDeduplicated : Boolean = False) -> Tuple:
    """Returns the symmetric in-batch contrastive loss of <batch> (mean
       over all pairs of the negated video-to-text and text-to-video
       log NCE) and its gradients wrt the video and text embeddings"""

    weightVector = np.ones(batch.pairCount)
    return _symmetricContrastive(batch, temperature, weightVector,
                                 batch.pairCount, negativesAreDeduplicated)

#--------------------

def maskedLoss (batch : ContrastiveBatch,
                temperature : Real,
                isForegroundNormalized : Boolean = False,
                negativesAreDeduplicated : Boolean = False) -> Tuple:
    """Returns the masked contrastive loss of <batch> and its
       gradients: only foreground pairs contribute log terms while
       background embeddings stay in all denominators; the sum is
       divided by the batch size or (when <isForegroundNormalized>)
       by the foreground count, an all-background batch gives 0"""

    weightVector = np.asarray(batch.foregroundMask, dtype=np.float64)
    foregroundCount = int(np.sum(batch.foregroundMask))
    denominator = (foregroundCount if isForegroundNormalized
                   else batch.pairCount)
    return _symmetricContrastive(batch, temperature, weightVector,
                                 denominator, negativesAreDeduplicated)

#--------------------

def classificationLoss (classLogitMatrix : RealMatrix,
                        regionLogitMatrix : RealMatrix,
                        labels : ClassificationLabels) -> Tuple:
    """Returns the mean over clips of the region cross entropy plus,
       for foreground clips only, the class cross entropy, and the
       gradients wrt class and region logits"""

    regionLabelVector = np.asarray(labels.regionLabelVector)
    classLabelVector  = np.asarray(labels.classLabelVector)
    clipCount, classCount = classLogitMatrix.shape

    if regionLogitMatrix.shape != (clipCount, 2) \
       or len(regionLabelVector) != clipCount:
        raise InputError("logits and labels differ in shape")

    isForeground = (regionLabelVector == Region.foreground)

    if np.any(classLabelVector[isForeground] >= classCount):
        raise InputError("class label out of range")

    rowIndexList = np.arange(clipCount)
    regionLogProbabilityMatrix = log_softmax(regionLogitMatrix, axis=1)
    classLogProbabilityMatrix  = log_softmax(classLogitMatrix, axis=1)
    safeClassLabelVector = np.where(isForeground, classLabelVector, 0)

    termList = []

    for i in range(clipCount):
        term = -regionLogProbabilityMatrix[i, regionLabelVector[i]]

        if isForeground[i]:
            term -= classLogProbabilityMatrix[i, safeClassLabelVector[i]]

        termList.append(term)

    value = math.fsum(termList) / clipCount

    regionGradient = np.exp(regionLogProbabilityMatrix)
    regionGradient[rowIndexList, regionLabelVector] -= 1.0
    regionGradient /= clipCount

    classGradient = np.exp(classLogProbabilityMatrix)
    classGradient[rowIndexList, safeClassLabelVector] -= 1.0
    classGradient *= isForeground[:, None]
    classGradient /= clipCount

    return value, classGradient, regionGradient

#--------------------

def totalLoss (objective : String,
               temperature : Real,
               batch : Optional[ContrastiveBatch] = None,
               classLogitMatrix : Optional[RealMatrix] = None,
               regionLogitMatrix : Optional[RealMatrix] = None,
               labels : Optional[ClassificationLabels] = None,
               maskedLossIsForegroundNormalized : Boolean = False,
               negativesAreDeduplicated : Boolean = False) -> Tuple:
    """Returns the loss report and the loss gradients of <objective>:
       classification only (tac), classification plus plain (clap-clip)
       or masked contrastive loss (clap-mask, clap, clap-dagger) or
       masked contrastive loss only (clap-no-cls)"""

    Objective.check(objective)
    contrastiveTerm = Objective.contrastiveTerm(objective)
    hasClassificationTerm = Objective.hasClassificationTerm(objective)

    clipValue = maskValue = ceValue = None
    videoGradient = textGradient = None
    classGradient = regionGradient = None

    if contrastiveTerm is not None:
        if batch is None:
            raise InputError("objective %s needs a contrastive batch"
                             % objective)

        if contrastiveTerm == "clip":
            clipValue, videoGradient, textGradient = \
                clipLoss(batch, temperature, negativesAreDeduplicated)
        else:
            maskValue, videoGradient, textGradient = \
                maskedLoss(batch, temperature,
                           maskedLossIsForegroundNormalized,
                           negativesAreDeduplicated)

    if hasClassificationTerm:
        if classLogitMatrix is None or regionLogitMatrix is None \
           or labels is None:
            raise InputError("objective %s needs logits and labels"
                             % objective)

        ceValue, classGradient, regionGradient = \
            classificationLoss(classLogitMatrix, regionLogitMatrix, labels)

    totalValue = ((ceValue or 0.0) + (clipValue or 0.0)
                  + (maskValue or 0.0))

    if not math.isfinite(totalValue):
        Logging.traceError("non-finite loss for %s", objective)
        raise NumericError("non-finite loss (%s): ce = %r, clip = %r,"
                           " mask = %r" % (objective, ceValue, clipValue,
                                           maskValue))

    report = LossReport(objective, clipValue, maskValue, ceValue,
                        float(totalValue))
    gradients = LossGradients(videoGradient, textGradient,
                              classGradient, regionGradient)
    return report, gradients
