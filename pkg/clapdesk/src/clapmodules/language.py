# language -- textual descriptions of clips (synthetic prompts and
#             assigned captions) and the frozen hashing text encoder
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from dataclasses import dataclass

import numpy as np

from basemodules.datatypesupport import AbstractDataType
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, Natural, NaturalList, \
                                    ObjectList, Optional, \
                                    RandomGenerator, RealMatrix, \
                                    RealVector, String, StringList
from basemodules.stringutil import fnv1aHash, tokenList

from .clap_businesstypes import PromptPolicy, PromptVariant
from .clap_errors import InputError
from .corpus import ClipSample, TimedCaption, UntrimmedVideo

#====================
# TYPES
#====================

class TextOrigin:
    """Origins of text descriptions"""

    synthetic = "synthetic"
    caption   = "caption"

#--------------------

@dataclass(frozen=True, repr=False)
class TextDescription (AbstractDataType):
    """A prompt or caption describing a clip"""

    text         : String
    origin       : String
    isForeground : Boolean

    #--------------------

    def __post_init__ (self):
        if self.text.strip() == "":
            raise InputError("text description must not be empty")

#--------------------

@dataclass(frozen=True, eq=False)
class TextEncoderTable:
    """The frozen token embedding table of the text encoder; its rows
       are addressed by hashed tokens"""

    vocabularyHashSize : Natural
    embeddingMatrix    : RealMatrix

    #--------------------

    def __repr__ (self) -> String:
        return ("TextEncoderTable(size = %d, dimension = %d)"
                % self.embeddingMatrix.shape)

    #--------------------

    @property
    def textDimension (self) -> Natural:
        return self.embeddingMatrix.shape[1]

#====================
# LOCAL FEATURES
#====================

def _overlap (clip : ClipSample,
              caption : TimedCaption) -> float:
    """Returns the length of the intersection of <clip> and
       <caption> (negative when disjoint)"""

    return min(clip.tEnd, caption.tEnd) - max(clip.tStart, caption.tStart)

#--------------------

def _nearestForegroundClass (clip : ClipSample,
                             video : UntrimmedVideo) -> Natural:
    """Returns the class of the foreground segment temporally nearest
       to <clip> (earlier segment on ties) or the primary class of
       <video> if there is none"""

    result = video.primaryClass
    bestDistance = None

    for segment in sorted(video.foregroundSegmentList,
                          key=lambda s: s.tStart):
        distance = max(0, segment.tStart - clip.tEnd,
                       clip.tStart - segment.tEnd)

        if bestDistance is None or distance < bestDistance:
            bestDistance = distance
            result = segment.classId

    return result

#====================
# EXPORTED FEATURES
#====================

def classNameList (classCount : Natural) -> StringList:
    """Returns the default single-token class names 'action00', ..."""

    width = max(2, len(str(classCount - 1)))
    return [ "action%0*d" % (width, i) for i in range(classCount) ]

#--------------------

def tokenHashIndex (token : String,
                    vocabularyHashSize : Natural) -> Natural:
    """Returns the table row of <token>"""

    return fnv1aHash(token) % vocabularyHashSize

#--------------------

def makeTextTable (vocabularyHashSize : Natural,
                   textDimension : Natural,
                   seed : Natural) -> TextEncoderTable:
    """Returns a seeded random text table; the array is read-only"""

    Logging.trace(">>: size = %d, dimension = %d, seed = %d",
                  vocabularyHashSize, textDimension, seed)

    rng = np.random.default_rng([seed, 3])
    embeddingMatrix = rng.standard_normal((vocabularyHashSize,
                                           textDimension))
    embeddingMatrix.setflags(write=False)
    result = TextEncoderTable(vocabularyHashSize, embeddingMatrix)

    Logging.trace("<<: %r", result)
    return result

#--------------------

def generatePrompt (actionName : String,
                    isForeground : Boolean) -> TextDescription:
    """Returns the synthetic prompt 'foreground of <actionName>' or
       'background of <actionName>'"""

    if actionName is None or actionName.strip() == "":
        Logging.traceError("empty action name")
        raise InputError("action name must not be empty")

    regionName = "foreground" if isForeground else "background"
    return TextDescription("%s of %s" % (regionName, actionName),
                           TextOrigin.synthetic, isForeground)

#--------------------

def assignCaption (clip : ClipSample,
                   captionList : ObjectList) -> Optional[TimedCaption]:
    """Returns the caption with positive overlap with <clip> whose
       center is nearest to the clip center; ties go to the lowest
       start time and then to the earlier list position; None when
       no caption overlaps"""

    clipCenter = (clip.tStart + clip.tEnd) / 2.0
    candidateList = [ (abs((caption.tStart + caption.tEnd) / 2.0
                           - clipCenter),
                       caption.tStart, i, caption)
                      for i, caption in enumerate(captionList)
                      if _overlap(clip, caption) > 0 ]

    if len(candidateList) == 0:
        result = None
    else:
        result = min(candidateList, key=lambda x: x[:3])[3]

    return result

#--------------------

def describeClip (clip : ClipSample,
                  video : UntrimmedVideo,
                  policy : PromptPolicy,
                  rng : RandomGenerator,
                  actionNameList : StringList) -> TextDescription:
    """Returns the text description of <clip> from <video> under
       <policy>; prompts name the clip class for foreground and the
       class of the nearest foreground segment for background; the
       mixing variants draw exactly one random number per clip"""

    if clip.isForeground:
        classId = clip.classId
    else:
        classId = _nearestForegroundClass(clip, video)

    prompt = generatePrompt(actionNameList[classId], clip.isForeground)

    if policy.variant == PromptVariant.promptOnly:
        result = prompt
    else:
        captionIsTried = rng.random() < policy.captionProbability

        if policy.variant == PromptVariant.clapDagger \
           and not clip.isForeground:
            captionIsTried = False

        caption = (assignCaption(clip, video.captionList) if captionIsTried
                   else None)

        if caption is None:
            result = prompt
        else:
            result = TextDescription(caption.text, TextOrigin.caption,
                                     clip.isForeground)

    return result

#--------------------

def encodeText (description : TextDescription,
                table : TextEncoderTable) -> RealVector:
    """Returns the mean of the table rows of the hashed lower-cased
       tokens of <description>; the rows are averaged in index order
       so that token order does not matter"""

    indexList = tokenIndexList(description.text, table.vocabularyHashSize)

    if len(indexList) == 0:
        raise InputError("cannot encode an empty text")

    return table.embeddingMatrix[indexList].mean(axis=0)

#--------------------

def encodeTextBatch (descriptionList : ObjectList,
                     table : TextEncoderTable) -> RealMatrix:
    """Returns the text features of all descriptions as rows"""

    result = np.zeros((len(descriptionList), table.textDimension))

    for i, description in enumerate(descriptionList):
        result[i] = encodeText(description, table)

    return result

#--------------------

def tokenIndexList (text : String,
                    vocabularyHashSize : Natural) -> NaturalList:
    """Returns the sorted table rows of the tokens of <text>"""

    return sorted(tokenHashIndex(token, vocabularyHashSize)
                  for token in tokenList(text))
