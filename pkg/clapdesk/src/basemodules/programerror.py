# programerror - provides the root exceptions of programs with an
#                associated process exit code
#
# ClapDesk, 2026

#====================

from basemodules.simpletypes import Natural, String

#====================

class ProgramError (Exception):
    """Root of all exceptions raised deliberately by a program; carries
       the process exit code to be used when the exception reaches
       the main program"""

    exitCode : Natural = 1

    #--------------------

    def __init__ (self,
                  message : String):
        super().__init__(message)
        self.message = message

#====================

class AssertionFailure (ProgramError):
    """Raised when an internal pre-/postcondition does not hold"""

    exitCode = 1

#====================

class ValidationError (ProgramError):
    """Raised when a checked value (typically some configuration or
       command line parameter) is invalid"""

    exitCode = 2
