# datatypesupport - provides support for python data classes: fields
#                   with validation kinds and external names, checked
#                   construction from maps and conversion to strings
#                   and maps
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import dataclasses

from basemodules.programerror import ValidationError
from basemodules.simpleassertion import Assertion
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Class, DataType, Dictionary, \
                                    Object, String, StringMap
from basemodules.ttbase import iif
from basemodules.validitychecker import ValidityChecker

#====================
# PRIVATE FEATURES
#====================

_alternativeNameKey = "alternativeName"
_kindKey = "kind"

#====================
# EXPORTED FEATURES
#====================

# short form of setattr proc for frozen data types
SETATTR = object.__setattr__

#--------------------

def specialField (defaultValue : Object,
                  kind : String = None,
                  alternativeName : String = None):
    """Makes a dataclass field with given <defaultValue> and the
       validity checker <kind> of its values; if <alternativeName> is
       set, it is used as the external key of the field in maps"""

    metadata = {}

    if kind is not None:
        metadata[_kindKey] = kind

    if alternativeName is not None:
        metadata[_alternativeNameKey] = alternativeName

    if isinstance(defaultValue, (list, dict)):
        return dataclasses.field(default_factory=lambda: type(defaultValue)
                                 (defaultValue),
                                 metadata=metadata)
    else:
        return dataclasses.field(default=defaultValue, metadata=metadata)

#====================

class DataTypeSupport:
    """Provides simple support for Python data classes"""

    #--------------------
    # PRIVATE FEATURES
    #--------------------

    # the mapping from python type name to local type symbol
    _pythonTypeNameToKindMap = {
        "<class 'bool'>"  : "B",
        "<class 'float'>" : "R",
        "<class 'int'>"   : "I",
        "<class 'str'>"   : "S"
    }

    #--------------------

    @classmethod
    def _externalName (cls,
                       attribute : dataclasses.Field) -> String:
        """Returns the external key of <attribute>"""

        return attribute.metadata.get(_alternativeNameKey, attribute.name)

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def convertToString (cls,
                         currentObject : Object,
                         dataType : DataType = None) -> String:
        """Returns a string representation of <currentObject> belonging to
           some data class"""

        dataType = (dataType if dataType is not None
                    else currentObject.__class__)
        dataTypeName = dataType.__name__
        Assertion.pre(dataclasses.is_dataclass(dataType),
                      "object type %s must be a dataclass" % dataTypeName)

        partList = []

        for attribute in dataclasses.fields(dataType):
            value = getattr(currentObject, attribute.name)
            kind = cls._pythonTypeNameToKindMap.get("%s" % attribute.type, "")
            template = iif(kind == "R" and isinstance(value, float),
                           "%s = %g", "%s = %r")
            partList.append(template % (attribute.name, value))

        return "%s(%s)" % (dataTypeName, ", ".join(partList))

    #--------------------

    @classmethod
    def externalNameToDefaultMap (cls,
                                  dataType : DataType) -> StringMap:
        """Returns the map from external field names of <dataType> to
           their default values"""

        result = {}

        for attribute in dataclasses.fields(dataType):
            if attribute.default is not dataclasses.MISSING:
                value = attribute.default
            else:
                value = attribute.default_factory()

            result[cls._externalName(attribute)] = value

        return result

    #--------------------

    @classmethod
    def externalNameToKindMap (cls,
                               dataType : DataType) -> Dictionary:
        """Returns the map from external field names of <dataType> to
           their validity kinds (fields without kind are omitted)"""

        return { cls._externalName(attribute) : attribute.metadata[_kindKey]
                 for attribute in dataclasses.fields(dataType)
                 if _kindKey in attribute.metadata }

    #--------------------

    @classmethod
    def makeFromMap (cls,
                     dataType : DataType,
                     externalNameToValueMap : StringMap,
                     errorClass : Class = ValidationError) -> Object:
        """Checks the values in <externalNameToValueMap> for the fields
           of <dataType> (by external name) and constructs an object;
           missing keys keep their defaults, failed checks raise
           <errorClass>"""

        dataTypeName = dataType.__name__
        Logging.trace(">>: dataType = %s, map = %r",
                      dataTypeName, externalNameToValueMap)
        Assertion.pre(dataclasses.is_dataclass(dataType),
                      "object type %s must be a dataclass" % dataTypeName)

        nameToValueMap = {}

        for attribute in dataclasses.fields(dataType):
            externalName = cls._externalName(attribute)

            if externalName in externalNameToValueMap:
                value = externalNameToValueMap[externalName]
                kind = attribute.metadata.get(_kindKey)

                if kind is not None:
                    ValidityChecker.isOfKind(value, externalName, kind,
                                             True, errorClass)

                if cls._pythonTypeNameToKindMap.get("%s" % attribute.type) \
                   == "R":
                    value = float(value)

                nameToValueMap[attribute.name] = value

        result = dataType(**nameToValueMap)
        Logging.trace("<<: %r", result)
        return result

    #--------------------

    @classmethod
    def toExternalMap (cls,
                       currentObject : Object) -> StringMap:
        """Returns the map from external field names to the values of
           <currentObject>"""

        return { cls._externalName(attribute)
                     : getattr(currentObject, attribute.name)
                 for attribute in dataclasses.fields(currentObject) }

#====================

class AbstractDataType:
    """A superclass for all simple data types providing a readable
       representation"""

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    def __repr__ (self) -> String:
        return DataTypeSupport.convertToString(self)
