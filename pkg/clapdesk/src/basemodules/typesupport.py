# typesupport - provides simple type checking functions for values
#               read from JSON documents
#
# ClapDesk, 2026

#====================

import math

from basemodules.simpletypes import Boolean, Object

#====================

def isInteger (value : Object) -> Boolean:
    """Tells whether <value> is an integer (booleans excluded)"""

    return isinstance(value, int) and not isinstance(value, bool)

#--------------------

def isReal (value : Object) -> Boolean:
    """Tells whether <value> is a finite real number; integers are
       acceptable as reals"""

    isOkay = (isinstance(value, (int, float))
              and not isinstance(value, bool))
    return isOkay and math.isfinite(value)

#--------------------

def isRealList (value : Object) -> Boolean:
    """Tells whether <value> is a list of finite real numbers"""

    return isinstance(value, list) and all(isReal(x) for x in value)

#--------------------

def isIntegerList (value : Object) -> Boolean:
    """Tells whether <value> is a list of integers"""

    return isinstance(value, list) and all(isInteger(x) for x in value)

#--------------------

def isString (value : Object) -> Boolean:
    """Tells whether <value> is a string"""

    return isinstance(value, str)

#--------------------

def isStringMap (value : Object) -> Boolean:
    """Tells whether <value> is a map with string keys"""

    isOkay = isinstance(value, dict)

    if isOkay:
        isOkay = all(isString(x) for x in value.keys())

    return isOkay
