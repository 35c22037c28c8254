# operatingsystem -- provides simple facilities for access of operating
#                    system services like file paths and console output
#
# ClapDesk, 2026

#====================

import os
import os.path
import sys

from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, String
from basemodules.stringutil import splitAt
from basemodules.typesupport import isString

#====================

class OperatingSystem:
    """Encapsulates access to operating system functions."""

    pathSeparator = "/"

    #--------------------
    # EXPORTED METHODS
    #--------------------

    @classmethod
    def basename (cls,
                  fileName : String,
                  extensionIsShown : Boolean = True) -> String:
        """Returns <fileName> without leading path; when
           <extensionIsShown> is not set, the part from the last
           dot on is removed"""

        standardSeparator = cls.pathSeparator
        fileName = fileName.replace("\\", standardSeparator)
        shortFileName = fileName.split(standardSeparator)[-1]

        if not extensionIsShown:
            reversedName, _, isFound = splitAt(shortFileName[::-1], ".")

            if isFound and len(reversedName) < len(shortFileName) - 1:
                shortFileName = shortFileName[:-len(reversedName) - 1]

        return shortFileName

    #--------------------

    @classmethod
    def derivedFilePath (cls,
                         filePath : String,
                         suffix : String,
                         extension : String) -> String:
        """Returns a file path in the directory of <filePath> whose
           name is the stem of <filePath> followed by <suffix> and
           <extension> (e.g. 'data/corpus.jsonl' with '-manifest' and
           '.json' gives 'data/corpus-manifest.json')"""

        directoryName = cls.dirname(filePath)
        stem = cls.basename(filePath, False)
        fileName = stem + suffix + extension

        if directoryName == "":
            result = fileName
        else:
            result = directoryName + cls.pathSeparator + fileName

        return result

    #--------------------

    @classmethod
    def dirname (cls,
                 filePath : String) -> String:
        """Returns directory of <filePath> (an empty string if there
           is none)."""

        standardSeparator = cls.pathSeparator
        filePath = filePath.replace("\\", standardSeparator)
        filePartList = filePath.split(standardSeparator)
        return standardSeparator.join(filePartList[:-1])

    #--------------------

    @classmethod
    def hasFile (cls,
                 fileName : String) -> Boolean:
        """Tells whether <fileName> signifies a file."""

        return isString(fileName) and os.path.isfile(fileName)

    #--------------------

    @classmethod
    def hasDirectory (cls,
                      directoryName : String) -> Boolean:
        """Tells whether <directoryName> signifies a directory."""

        return isString(directoryName) and os.path.isdir(directoryName)

    #--------------------

    @classmethod
    def joinPath (cls,
                  directoryName : String,
                  fileName : String) -> String:
        """Returns path of <fileName> in <directoryName>"""

        return os.path.join(directoryName, fileName)

    #--------------------

    @classmethod
    def makeDirectory (cls,
                       directoryName : String):
        """Creates directory named <directoryName> including all
           missing parents."""

        Logging.trace(">>: %s", directoryName)

        if directoryName == "" or cls.hasDirectory(directoryName):
            Logging.trace("--: directory already exists")
        else:
            os.makedirs(directoryName, exist_ok=True)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def showMessageOnConsole (cls,
                              message : String,
                              newlineIsAppended : Boolean = True):
        """Shows <message> on console (stderr) with an optional
           trailing newline"""

        Logging.trace("--: %s", message)
        st = message + ("\n" if newlineIsAppended else "")
        sys.stderr.write(st)
        sys.stderr.flush()
