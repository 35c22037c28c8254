# clap_configurationdatahandler -- services for access to the
#                                  configuration of clapdesk: defaults,
#                                  configuration files, command line
#                                  overrides and the typed groups
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import hashlib
import json

from basemodules.datatypesupport import DataTypeSupport
from basemodules.jsonfile import JsonFileError, SimpleJsonFile
from basemodules.operatingsystem import OperatingSystem
from basemodules.simplelogging import Logging
from basemodules.simpletypes import Boolean, DataType, NaturalList, \
                                    Object, String, StringList, StringMap
from basemodules.stringutil import deserializeValue, splitAt
from basemodules.validitychecker import ValidityChecker

from .clap_businesstypes import configurationGroupList, EpisodeSpec, \
                                EvaluationConfig, GeneratorConfig, \
                                GlobalSettings, GroundingConfig, \
                                ModelDimensions, ProbeConfig, \
                                SgdConfig, SplitConfig, TrainConfig, \
                                WindowConfig
from .clap_errors import ConfigurationError, MissingArtifactError

#====================

class _DefaultValueHandler:
    """Encapsulates the default values of all configuration
       variables; they are collected from the configuration group
       data types"""

    _parameterNameToDataMap : StringMap = None

    #--------------------
    # LOCAL FEATURES
    #--------------------

    @classmethod
    def _initializeConditionally (cls):
        """Collects the defaults from the configuration groups when
           not yet done"""

        if cls._parameterNameToDataMap is None:
            Logging.trace(">>")
            result = {}

            for dataType in configurationGroupList:
                kindMap    = DataTypeSupport.externalNameToKindMap(dataType)
                defaultMap = \
                    DataTypeSupport.externalNameToDefaultMap(dataType)

                for parameterName in kindMap.keys():
                    result.setdefault(parameterName,
                                      defaultMap[parameterName])

            cls._parameterNameToDataMap = result
            Logging.trace("<<: %r", result)

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    @classmethod
    def parameterNameList (cls) -> StringList:
        """Returns the list of parameter names with defaults"""

        cls._initializeConditionally()
        return list(cls._parameterNameToDataMap.keys())

    #--------------------

    @classmethod
    def value (cls,
               parameterName : String) -> Object:
        """Returns the default value for parameter given by
           <parameterName> (if any)"""

        cls._initializeConditionally()
        return cls._parameterNameToDataMap.get(parameterName)

#====================

class _LocalValidator:
    """Encapsulates routines for validation of the configuration
       variables by their kinds"""

    _validationMap : StringMap = {}

    #--------------------
    # EXPORTED ROUTINES
    #--------------------

    @classmethod
    def initialize (cls):
        """Sets up internal map for all configuration variables"""

        Logging.trace(">>")

        for dataType in configurationGroupList:
            kindMap = DataTypeSupport.externalNameToKindMap(dataType)

            for parameterName, kind in kindMap.items():
                existingKind = cls._validationMap.get(parameterName, kind)
                ValidityChecker.isValid(existingKind == kind,
                                        "conflicting kinds for %s"
                                        % parameterName)
                cls._validationMap[parameterName] = kind

        Logging.trace("<<")

    #--------------------

    @classmethod
    def checkVariable (cls,
                       parameterName : String,
                       parameterNameToValueMap : StringMap):
        """Checks whether value for <parameterName> gained from
           <parameterNameToValueMap> is okay by looking up its kind in
           internal map"""

        Logging.trace(">>: %r", parameterName)

        if parameterName not in cls._validationMap:
            Logging.traceError("unknown configuration key %r", parameterName)
            raise ConfigurationError("unknown configuration key %r"
                                     % parameterName)

        kind  = cls._validationMap[parameterName]
        value = parameterNameToValueMap[parameterName]
        ValidityChecker.isOfKind(value, parameterName, kind, True,
                                 ConfigurationError)

        Logging.trace("<<")

    #--------------------

    @classmethod
    def isKnown (cls,
                 parameterName : String) -> Boolean:
        """Tells whether <parameterName> is a configuration variable"""

        return parameterName in cls._validationMap

#====================

class ClapConfigurationData:
    """The effective configuration of a clapdesk run: the defaults
       overridden by a configuration file and then by single
       'key=value' settings; every value is validated and the typed
       configuration groups are built from it"""

    #--------------------
    # LOCAL FEATURES
    #--------------------

    def _makeGroup (self,
                    dataType : DataType) -> Object:
        """Returns the configuration group of <dataType> built from
           the effective values"""

        return DataTypeSupport.makeFromMap(dataType,
                                           self._parameterNameToValueMap,
                                           ConfigurationError)

    #--------------------

    def _update (self,
                 parameterNameToValueMap : StringMap,
                 sourceName : String):
        """Overrides the effective values by <parameterNameToValueMap>
           originating from <sourceName>; unknown keys are rejected"""

        Logging.trace(">>: source = %r, map = %r",
                      sourceName, parameterNameToValueMap)

        for parameterName in sorted(parameterNameToValueMap.keys()):
            if not _LocalValidator.isKnown(parameterName):
                message = ("unknown configuration key %r in %s"
                           % (parameterName, sourceName))
                Logging.traceError(message)
                raise ConfigurationError(message)

            self._parameterNameToValueMap[parameterName] = \
                parameterNameToValueMap[parameterName]

        Logging.trace("<<")

    #--------------------
    # EXPORTED FEATURES
    #--------------------

    def __init__ (self):
        Logging.trace(">>")
        _LocalValidator.initialize()
        self._parameterNameToValueMap = \
            { parameterName : _DefaultValueHandler.value(parameterName)
              for parameterName in _DefaultValueHandler.parameterNameList() }
        Logging.trace("<<")

    #--------------------

    def __repr__ (self) -> String:
        return "ClapConfigurationData(%s)" % self.canonicalText()

    #--------------------

    def applyOverride (self,
                       assignment : String):
        """Applies a command line setting <assignment> of the form
           'key=value'; the value is decoded as JSON when possible,
           otherwise taken as a string"""

        Logging.trace(">>: %r", assignment)

        parameterName, valueString, isFound = splitAt(assignment, "=")
        parameterName = parameterName.strip()

        if not isFound or parameterName == "":
            message = "bad setting %r, expected key=value" % assignment
            Logging.traceError(message)
            raise ConfigurationError(message)

        value = deserializeValue(valueString.strip())
        self._update({ parameterName : value }, "command line")

        Logging.trace("<<")

    #--------------------

    def canonicalText (self,
                       isPretty : Boolean = False) -> String:
        """Returns the effective configuration as JSON text with
           sorted keys; the compact form is the basis of the
           configuration hash"""

        if isPretty:
            result = json.dumps(self._parameterNameToValueMap,
                                sort_keys=True, indent=2)
        else:
            result = json.dumps(self._parameterNameToValueMap,
                                sort_keys=True, separators=(",", ":"))

        return result

    #--------------------

    def checkValidity (self):
        """Checks all effective values and the consistency of every
           configuration group; raises a configuration error on the
           first problem"""

        Logging.trace(">>")

        for parameterName in sorted(self._parameterNameToValueMap.keys()):
            _LocalValidator.checkVariable(parameterName,
                                          self._parameterNameToValueMap)

        for dataType in configurationGroupList:
            self._makeGroup(dataType)

        # an explicitly built train config validates objective and
        # batch size together
        self.trainConfig()

        Logging.trace("<<")

    #--------------------

    def configHash (self) -> String:
        """Returns the SHA-256 hex digest of the canonical text"""

        text = self.canonicalText()
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    #--------------------

    def get (self,
             parameterName : String) -> Object:
        """Returns the effective value of <parameterName>"""

        ValidityChecker.isValid(_LocalValidator.isKnown(parameterName),
                                "unknown configuration key %r"
                                % parameterName, True, ConfigurationError)
        return self._parameterNameToValueMap[parameterName]

    #--------------------

    def readFile (self,
                  configurationFilePath : String):
        """Reads the relaxed JSON configuration file at
           <configurationFilePath> and overrides the current values"""

        Logging.trace(">>: %r", configurationFilePath)

        if not OperatingSystem.hasFile(configurationFilePath):
            message = ("configuration file not found: %s"
                       % configurationFilePath)
            Logging.traceError(message)
            raise MissingArtifactError(message)

        try:
            parameterNameToValueMap = \
                SimpleJsonFile.read(configurationFilePath)
        except JsonFileError as e:
            raise ConfigurationError("bad configuration file: %s"
                                     % e.message)

        self._update(parameterNameToValueMap, configurationFilePath)

        Logging.trace("<<")

    #--------------------

    def set (self,
             parameterName : String,
             value : Object):
        """Overrides the value of <parameterName> by <value> (typically
           from a dedicated command line option)"""

        self._update({ parameterName : value }, "command line")

    #--------------------
    # typed groups
    #--------------------

    def episodeSpec (self,
                     baseClassList : NaturalList = (),
                     validationClassList : NaturalList = (),
                     testClassList : NaturalList = ()) -> EpisodeSpec:
        """Returns the few-shot episode settings with the class
           partitions given"""

        episodeSettings = self._makeGroup(EpisodeSpec)
        return EpisodeSpec(episodeSettings.shotCount,
                           episodeSettings.episodeCount,
                           episodeSettings.seed,
                           episodeSettings.fewshotTemperature,
                           tuple(baseClassList),
                           tuple(validationClassList),
                           tuple(testClassList))

    #--------------------

    def evaluationConfig (self) -> EvaluationConfig:
        return self._makeGroup(EvaluationConfig)

    #--------------------

    def generatorConfig (self) -> GeneratorConfig:
        return self._makeGroup(GeneratorConfig)

    #--------------------

    def globalSettings (self) -> GlobalSettings:
        return self._makeGroup(GlobalSettings)

    #--------------------

    def groundingConfig (self) -> GroundingConfig:
        return self._makeGroup(GroundingConfig)

    #--------------------

    def modelDimensions (self) -> ModelDimensions:
        return self._makeGroup(ModelDimensions)

    #--------------------

    def probeConfig (self) -> ProbeConfig:
        return self._makeGroup(ProbeConfig)

    #--------------------

    def sgdConfig (self) -> SgdConfig:
        return self._makeGroup(SgdConfig)

    #--------------------

    def splitConfig (self) -> SplitConfig:
        return self._makeGroup(SplitConfig)

    #--------------------

    def trainConfig (self) -> TrainConfig:
        """Returns the training settings including the learning rate
           schedule"""

        nameToValueMap = dict(self._parameterNameToValueMap)
        nameToValueMap["sgdConfig"] = self.sgdConfig()
        return DataTypeSupport.makeFromMap(TrainConfig, nameToValueMap,
                                           ConfigurationError)

    #--------------------

    def windowConfig (self) -> WindowConfig:
        return self._makeGroup(WindowConfig)
