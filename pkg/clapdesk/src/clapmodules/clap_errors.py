# clap_errors -- the exception hierarchy of the language-action
#                pre-training modules with their process exit codes
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

from basemodules.programerror import ProgramError, ValidationError
from basemodules.simpletypes import Natural, String

#====================

class ClapError (ProgramError):
    """Root of all domain errors"""

    exitCode = 1

#====================

class ConfigurationError (ValidationError, ClapError):
    """An invalid configuration value, model dimension mismatch or
       inconsistent training setup"""

    exitCode = 2

#--------------------

class InputError (ConfigurationError):
    """An invalid argument of a library operation (like a non-positive
       temperature or an empty action name)"""

#--------------------

class UsageError (ClapError):
    """An operation has been called out of protocol (like a backward
       pass with a stale activation record)"""

    exitCode = 2

#====================

class DataError (ClapError):
    """A data artifact is missing, inconsistent or unreadable"""

    exitCode = 3

#--------------------

class ParseError (DataError):
    """A data file is malformed; <lineNumber> is one-based"""

    def __init__ (self,
                  fileName : String,
                  lineNumber : Natural,
                  message : String):
        super().__init__("%s:%d: %s" % (fileName, lineNumber, message))
        self.fileName   = fileName
        self.lineNumber = lineNumber

#--------------------

class CheckpointError (DataError):
    """A checkpoint is corrupt or has an unsupported schema version"""

#--------------------

class EpisodeError (DataError):
    """A few-shot episode cannot be formed from the available videos"""

#--------------------

class MissingArtifactError (DataError):
    """A required input file does not exist"""

#====================

class NumericError (ClapError):
    """A non-finite value has occurred in a loss or gradient;
       <dumpFilePath> names the diagnostic dump (if any)"""

    exitCode = 4

    #--------------------

    def __init__ (self,
                  message : String,
                  dumpFilePath : String = None):
        super().__init__(message)
        self.dumpFilePath = dumpFilePath
