# validitychecker - allows checking of validity of values (typically
#                   of configuration or command line parameters)
#
# ClapDesk, 2026

#====================

import os

import basemodules.typesupport as typesupport
from basemodules.operatingsystem import OperatingSystem
from basemodules.programerror import ValidationError
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, Class, Object, String, \
                                    StringList
from basemodules.ttbase import iif

#====================

class ValidityChecker:
    """Provides checking of validity of values (typically configuration
       parameters). Typically assumes that a check failure is fatal
       and raises an exception of a class given by the caller."""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    # mapping from range kinds to their descriptions and checks
    _rangeKindToDataMap = {
        ""      : ("%s",                   lambda x: True),
        ">0"    : ("a positive %s",        lambda x: x > 0),
        ">=0"   : ("a non-negative %s",    lambda x: x >= 0),
        "[0,1]" : ("a %s in [0, 1]",       lambda x: 0 <= x <= 1),
        "(0,1]" : ("a %s in (0, 1]",       lambda x: 0 < x <= 1),
        "(0,1)" : ("a %s in (0, 1)",       lambda x: 0 < x < 1)
    }

    #--------------------

    @classmethod
    def _checkTemplate (cls,
                        prefix : String,
                        typeName : String,
                        valueName : String,
                        value : Object) -> String:
        result = (prefix + ": checking %s for being %s (%r)"
                  % (valueName, typeName, value))
        # remove any template characters in result string
        return result.replace("%", "§")

    #--------------------

    @classmethod
    def _checkCondition (cls,
                         isOkay : Boolean,
                         kindName : String,
                         valueName : String,
                         value : Object,
                         failureCausesExit : Boolean,
                         errorClass : Class) -> Boolean:
        """Traces and checks a precomputed condition <isOkay> for
           <value> with <valueName> being of <kindName>"""

        Logging.trace(cls._checkTemplate(">>", kindName, valueName, value))
        message = "%s must be %s: %r" % (valueName, kindName, value)
        cls.isValid(isOkay, message, failureCausesExit, errorClass)
        Logging.trace("<<: %r", isOkay)
        return isOkay

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def isOfKind (cls,
                  value : Object,
                  valueName : String,
                  kind : String,
                  failureCausesExit : Boolean = True,
                  errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> named <valueName> has <kind>;
           otherwise raises an <errorClass> exception when
           <failureCausesExit> is set"""

        Logging.trace(">>: value = %r, valueName = %s, kind = %r",
                      value, valueName, kind)

        if kind not in _kindToCheckProcMap:
            isOkay = False
            cls.isValid(isOkay, "unknown kind %r for %s" % (kind, valueName),
                        failureCausesExit, errorClass)
        else:
            isOkay = _kindToCheckProcMap[kind](value, valueName,
                                               failureCausesExit,
                                               errorClass)

        Logging.trace("<<: %r", isOkay)
        return isOkay

    #--------------------

    @classmethod
    def isBoolean (cls,
                   value : Object,
                   valueName : String,
                   failureCausesExit : Boolean = True,
                   errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> of variable given by <valueName> is
           a boolean"""

        return cls._checkCondition(isinstance(value, bool), "a boolean",
                                   valueName, value, failureCausesExit,
                                   errorClass)

    #--------------------

    @classmethod
    def isDirectory (cls,
                     pathName : String,
                     valueName : String,
                     failureCausesExit : Boolean = True,
                     errorClass : Class = ValidationError) -> Boolean:
        """Checks whether directory given by <pathName> exists"""

        isOkay = pathName is not None and os.path.isdir(pathName)
        return cls._checkCondition(isOkay, "an existing directory",
                                   valueName, pathName, failureCausesExit,
                                   errorClass)

    #--------------------

    @classmethod
    def isElement (cls,
                   value : Object,
                   valueName : String,
                   allowedValueList : StringList,
                   failureCausesExit : Boolean = True,
                   errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> of variable given by <valueName> is
           one of <allowedValueList>"""

        kindName = "one of %s" % ", ".join(map(str, allowedValueList))
        return cls._checkCondition(value in allowedValueList, kindName,
                                   valueName, value, failureCausesExit,
                                   errorClass)

    #--------------------

    @classmethod
    def isNatural (cls,
                   value : Object,
                   valueName : String,
                   zeroIsIncluded : Boolean = True,
                   failureCausesExit : Boolean = True,
                   errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> of variable given by <valueName> is
           a positive integer; when <zeroIsIncluded> is set, also zero
           is acceptable."""

        kindName = "a " + iif(zeroIsIncluded, "", "positive ") + "natural"
        isOkay = (typesupport.isInteger(value)
                  and (value > 0 or value == 0 and zeroIsIncluded))
        return cls._checkCondition(isOkay, kindName, valueName, value,
                                   failureCausesExit, errorClass)

    #--------------------

    @classmethod
    def isNaturalList (cls,
                       value : Object,
                       valueName : String,
                       failureCausesExit : Boolean = True,
                       errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> is a non-empty list of positive
           integers"""

        isOkay = (typesupport.isIntegerList(value) and len(value) > 0
                  and all(x > 0 for x in value))
        return cls._checkCondition(isOkay, "a non-empty natural list",
                                   valueName, value, failureCausesExit,
                                   errorClass)

    #--------------------

    @classmethod
    def isReadableFile (cls,
                        pathName : String,
                        valueName : String,
                        failureCausesExit : Boolean = True,
                        errorClass : Class = ValidationError) -> Boolean:
        """Checks whether file given by <pathName> is readable"""

        isOkay = False if pathName is None else os.path.isfile(pathName)
        return cls._checkCondition(isOkay, "a readable file", valueName,
                                   pathName, failureCausesExit, errorClass)

    #--------------------

    @classmethod
    def isReal (cls,
                value : Object,
                valueName : String,
                rangeKind : String = "",
                failureCausesExit : Boolean = True,
                errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> of variable given by <valueName> is a
           finite real number satisfying <rangeKind> (one of '', '>0',
           '>=0', '[0,1]', '(0,1]', '(0,1)')"""

        template, rangeProc = cls._rangeKindToDataMap[rangeKind]
        isOkay = typesupport.isReal(value) and rangeProc(value)
        return cls._checkCondition(isOkay, template % "real number",
                                   valueName, value, failureCausesExit,
                                   errorClass)

    #--------------------

    @classmethod
    def isRealList (cls,
                    value : Object,
                    valueName : String,
                    rangeKind : String = "",
                    failureCausesExit : Boolean = True,
                    errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> is a non-empty list of reals each
           satisfying <rangeKind>"""

        template, rangeProc = cls._rangeKindToDataMap[rangeKind]
        isOkay = (typesupport.isRealList(value) and len(value) > 0
                  and all(rangeProc(x) for x in value))
        kindName = "a non-empty list of " + (template % "real number")
        return cls._checkCondition(isOkay, kindName, valueName, value,
                                   failureCausesExit, errorClass)

    #--------------------

    @classmethod
    def isString (cls,
                  value : Object,
                  valueName : String,
                  failureCausesExit : Boolean = True,
                  errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> of variable given by <valueName> is
           a string"""

        return cls._checkCondition(typesupport.isString(value), "a string",
                                   valueName, value, failureCausesExit,
                                   errorClass)

    #--------------------

    @classmethod
    def isStringMap (cls,
                     value : Object,
                     valueName : String,
                     failureCausesExit : Boolean = True,
                     errorClass : Class = ValidationError) -> Boolean:
        """Checks whether <value> of variable given by <valueName> is a
           map from strings to other objects"""

        return cls._checkCondition(typesupport.isStringMap(value),
                                   "a string map", valueName, value,
                                   failureCausesExit, errorClass)

    #--------------------

    @classmethod
    def isWritableFile (cls,
                        pathName : String,
                        valueName : String,
                        failureCausesExit : Boolean = True,
                        errorClass : Class = ValidationError) -> Boolean:
        """Checks whether file given by <pathName> is writable, that
           is, whether its directory exists"""

        directoryName = ("???" if pathName is None
                         else OperatingSystem.dirname(pathName))
        directoryName = iif(directoryName == "", ".", directoryName)
        isOkay = os.path.isdir(directoryName)
        return cls._checkCondition(isOkay, "a writable file", valueName,
                                   pathName, failureCausesExit, errorClass)

    #--------------------

    @classmethod
    def isValid (cls,
                 condition : Boolean,
                 message : String,
                 failureCausesExit : Boolean = True,
                 errorClass : Class = ValidationError):
        """Checks whether <condition> holds, otherwise gives <message>
           and raises an <errorClass> exception when
           <failureCausesExit> is set."""

        Logging.trace("--: checking condition (%r),"
                      + " otherwise failure is %r",
                      condition, message)

        if not condition:
            Logging.traceError(message)

            if failureCausesExit:
                raise errorClass(message)

#--------------------

def _makeRangeCheckProc (rangeKind : String):
    """Returns a real number check proc with fixed <rangeKind>"""

    return (lambda value, valueName, failureCausesExit, errorClass:
            ValidityChecker.isReal(value, valueName, rangeKind,
                                   failureCausesExit, errorClass))

#--------------------

_kindToCheckProcMap = {
    "B"    : ValidityChecker.isBoolean,
    "N"    : ValidityChecker.isNatural,
    "PN"   : (lambda value, valueName, failureCausesExit, errorClass:
              ValidityChecker.isNatural(value, valueName, False,
                                        failureCausesExit, errorClass)),
    "NL"   : ValidityChecker.isNaturalList,
    "R"    : _makeRangeCheckProc(""),
    "PR"   : _makeRangeCheckProc(">0"),
    "NNR"  : _makeRangeCheckProc(">=0"),
    "PROB" : _makeRangeCheckProc("[0,1]"),
    "UNIT" : _makeRangeCheckProc("(0,1]"),
    "OPEN" : _makeRangeCheckProc("(0,1)"),
    "RL"   : (lambda value, valueName, failureCausesExit, errorClass:
              ValidityChecker.isRealList(value, valueName, "(0,1)",
                                         failureCausesExit, errorClass)),
    "S"    : ValidityChecker.isString,
    "SM"   : ValidityChecker.isStringMap,
    "RF"   : ValidityChecker.isReadableFile,
    "WF"   : ValidityChecker.isWritableFile,
    "WD"   : ValidityChecker.isDirectory
}
