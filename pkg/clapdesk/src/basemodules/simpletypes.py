# simpletypes - provide the internal type names like String, Real, ...
#                and the array types used by the numeric modules
#
# ClapDesk, 2026

#====================

import typing

import numpy

#====================

Class    = type
ClassVar = typing.ClassVar
DataType = type

# primitive types
Boolean   = bool
Integer   = int
Natural   = int
Object    = typing.Any
Positive  = int
Real      = float
String    = str

# list types
List        = typing.Sequence
IntegerList = List[Integer]
NaturalList = List[Natural]
ObjectList  = List
RealList    = List[Real]
StringList  = List[String]
Tuple       = typing.Tuple
Pair        = Tuple
TupleList   = List[Tuple]

# set types
Set         = typing.Set
NaturalSet  = Set[Natural]
StringSet   = Set[String]

# mapping types
Map        = typing.Mapping
Dictionary = Map[String, String]
StringMap  = Map[String, Object]

# function types
Callable = typing.Callable

# optional values
Optional = typing.Optional

# numeric array types (always float64 for reals)
RealMatrix       = numpy.ndarray
RealVector       = numpy.ndarray
NaturalVector    = numpy.ndarray
BooleanVector    = numpy.ndarray
RandomGenerator  = numpy.random.Generator
RealMatrixMap    = Map[String, RealMatrix]
