# -*- coding: utf-8 -*-
# jsonfile - provides reading of a json file containing
#            include references and comments
#
# ClapDesk, 2026

#====================

import json
import os.path
import re

from basemodules.operatingsystem import OperatingSystem
from basemodules.programerror import ProgramError
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, Natural, String, \
                                    StringList, StringMap, StringSet
from basemodules.stringutil import splitAt, stripStringQuotes
from basemodules.utf8file import UTF8File

#====================

class JsonFileError (ProgramError):
    """Raised when a (relaxed) JSON file cannot be read or parsed; the
       line number is one-based or zero when unknown"""

    exitCode = 3

    #--------------------

    def __init__ (self,
                  fileName : String,
                  lineNumber : Natural,
                  message : String):
        super().__init__("%s:%d: %s" % (fileName, lineNumber, message))
        self.fileName   = fileName
        self.lineNumber = lineNumber

#====================

class SimpleJsonFile:
    """Reads a JSON file; in relaxed syntax whole-line comments
       starting with '--' are allowed, lines '#include "path"'
       include other files (relative to the including file, merged
       before the own keys), the top-level braces may be omitted and
       trailing commas before closing brackets are ignored"""

    _commentPrefix = "--"
    _includeDirective = "#include"
    _trailingCommaRegExp = re.compile(r",(\s*[}\]])")

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _readRecursively (cls,
                          fileName : String,
                          usesRelaxedSyntax : Boolean,
                          visitedPathSet : StringSet) -> StringMap:
        """Reads <fileName> and all its included files; <visitedPathSet>
           contains the already visited absolute file paths to detect
           include cycles"""

        Logging.trace(">>: %r", fileName)

        absolutePath = os.path.abspath(fileName)

        if absolutePath in visitedPathSet:
            raise JsonFileError(fileName, 0, "include cycle detected")

        if not OperatingSystem.hasFile(fileName):
            raise JsonFileError(fileName, 0, "file not found")

        visitedPathSet = visitedPathSet | { absolutePath }

        with UTF8File(fileName, "rt") as file:
            lineList = file.readlines()

        result = {}

        if usesRelaxedSyntax:
            includeFileNameList, lineList = \
                cls._splitOffDirectives(fileName, lineList)

            for includeFileName in includeFileNameList:
                includedMap = cls._readRecursively(includeFileName, True,
                                                   visitedPathSet)
                result.update(includedMap)

        text = "".join(lineList)

        if usesRelaxedSyntax:
            if text.strip() == "":
                text = "{}"
            elif not text.lstrip().startswith("{"):
                text = "{" + text + "}"

            text = cls._trailingCommaRegExp.sub(r"\1", text)

        try:
            ownMap = json.loads(text)
        except json.JSONDecodeError as e:
            Logging.traceError("cannot parse %s: %s", fileName, e.msg)
            raise JsonFileError(fileName, e.lineno, e.msg)

        if not isinstance(ownMap, dict):
            raise JsonFileError(fileName, 1, "top level must be an object")

        result.update(ownMap)

        Logging.trace("<<: %r", result)
        return result

    #--------------------

    @classmethod
    def _splitOffDirectives (cls,
                             fileName : String,
                             lineList : StringList) -> tuple:
        """Returns the list of include file names in <lineList> and the
           line list where comment and include lines are replaced by
           empty lines (to keep line numbers intact)"""

        directoryName = OperatingSystem.dirname(fileName)
        includeFileNameList = []
        resultLineList = []

        for line in lineList:
            strippedLine = line.strip()

            if strippedLine.startswith(cls._commentPrefix):
                resultLineList.append("\n")
            elif strippedLine.startswith(cls._includeDirective):
                _, includeFileName, _ = splitAt(strippedLine, " ")
                includeFileName = stripStringQuotes(includeFileName.strip())

                if directoryName > "" and not os.path.isabs(includeFileName):
                    includeFileName = \
                        OperatingSystem.joinPath(directoryName,
                                                 includeFileName)

                includeFileNameList.append(includeFileName)
                resultLineList.append("\n")
            else:
                resultLineList.append(line)

        return includeFileNameList, resultLineList

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def read (cls,
              fileName : String,
              usesRelaxedSyntax : Boolean = True) -> StringMap:
        """Reads JSON object from <fileName> and returns it as a map;
           <usesRelaxedSyntax> enables comments, includes, omitted
           top-level braces and trailing commas"""

        Logging.trace(">>: fileName = %r, isRelaxed = %r",
                      fileName, usesRelaxedSyntax)
        result = cls._readRecursively(fileName, usesRelaxedSyntax, set())
        Logging.trace("<<")
        return result
