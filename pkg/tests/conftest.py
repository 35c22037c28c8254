# conftest -- shared fixtures of the clapdesk tests: small generator
#             configurations, tiny corpora with their manifests, model
#             dimensions and seeded random generators
#
# ClapDesk, 2026

#====================
# IMPORTS
#====================

import os
import sys

_sourceDirectory = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                "..", "clapdesk", "src")
sys.path.insert(0, os.path.normpath(_sourceDirectory))

import numpy as np
import pytest

from basemodules.simplelogging import Logging
from clapmodules.clap_businesstypes import GeneratorConfig, \
                                          ModelDimensions, SgdConfig, \
                                          SplitConfig, TrainConfig
from clapmodules.corpus import CorpusGenerator, SplitManifestHandler

#====================

Logging.initialize()

#====================
# FIXTURES
#====================

@pytest.fixture
def rng ():
    return np.random.default_rng(1234)

#--------------------

@pytest.fixture
def smallGeneratorConfig () -> GeneratorConfig:
    """Sixteen short videos over four classes in an 8-dimensional raw
       feature space"""

    return GeneratorConfig(videoCount=16, classCount=4, rawDimension=8,
                           meanDuration=24, minimumActionSeconds=2,
                           maximumActionSeconds=6, vocabularySize=40,
                           captionCoverage=1.0, seed=3)

#--------------------

@pytest.fixture
def smallCorpus (smallGeneratorConfig):
    return CorpusGenerator.generateCorpus(smallGeneratorConfig)

#--------------------

@pytest.fixture
def smallManifest (smallCorpus, smallGeneratorConfig):
    return SplitManifestHandler.make(smallCorpus,
                                     smallGeneratorConfig.classCount,
                                     SplitConfig(), 0)

#--------------------

@pytest.fixture
def smallDimensions () -> ModelDimensions:
    return ModelDimensions(rawDimension=8, hiddenDimension=12,
                           featureDimension=8, embeddingDimension=6,
                           textDimension=10, classCount=4,
                           encoderBlockCount=2, projectionPairCount=1,
                           vocabularyHashSize=64)

#--------------------

@pytest.fixture
def smallTrainConfig () -> TrainConfig:
    """Two short epochs with large learning rates"""

    return TrainConfig(epochCount=2, batchSize=8, clipsPerSegment=2,
                       stepsPerEpoch=3, seed=0,
                       sgdConfig=SgdConfig(0.05, 0.1, 0.5, 1))
