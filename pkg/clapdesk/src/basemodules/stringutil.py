# -*- coding:utf-8 -*-
# StringUtil - provides several utility string functions like
#              splitting, value deserialization and token hashing
#
# ClapDesk, 2026

#====================

import json

from basemodules.simpletypes import Natural, Object, String, \
                                    StringList, Tuple

#====================

# FNV-1a parameters for 64 bit hashes
_fnvOffsetBasis = 0xcbf29ce484222325
_fnvPrime       = 0x100000001b3
_fnvMask        = 0xffffffffffffffff

#====================

def deserializeValue (st : String) -> Object:
    """Returns the value denoted by <st>: JSON literals (numbers,
       booleans, lists, maps, quoted strings) are decoded, anything
       else is returned as a plain string"""

    try:
        result = json.loads(st)
    except ValueError:
        result = st

    return result

#--------------------

def fnv1aHash (st : String) -> Natural:
    """Returns the 64 bit FNV-1a hash of the UTF-8 encoding of <st>"""

    result = _fnvOffsetBasis

    for byte in st.encode("utf-8"):
        result ^= byte
        result = (result * _fnvPrime) & _fnvMask

    return result

#--------------------

def splitAt (st : String,
             separator : String) -> Tuple:
    """Returns split of <st> by <separator> at first position; if
       there is none, the third result is a False value"""

    separatorPosition = st.find(separator)
    separatorLength   = len(separator)
    isFound = (separatorPosition >= 0)

    if isFound:
        partA = st[:separatorPosition]
        partB = st[separatorPosition+separatorLength:]
    else:
        partA, partB = (st, "")

    result = (partA, partB, isFound)
    return result

#--------------------

def stripStringQuotes (st : String) -> String:
    """Returns <st> with string quotes removed"""

    for ch in ("'", "\""):
        if len(st) >= 2 and st.startswith(ch) and st.endswith(ch):
            st = st[1:-1]

    return st

#--------------------

def tokenList (st : String) -> StringList:
    """Returns the lower-cased whitespace-separated tokens of <st>"""

    return st.lower().split()
