"""Setup File for ClapDesk."""

from setuptools import setup
from os import path

here = path.abspath(path.dirname(__file__))

# version and root directories for installation and sources
installationVersion = "1.0.0"
installationRootDirectory = "Lib/site-packages/clapdesk"
sourceRootDirectory = "clapdesk/src"

with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

#============================================================

setup(
    name = "ClapDesk",
    version = installationVersion,
    description = ("Desk-scale contrastive language-action"
                   + " post-pre-training of video features"),
    long_description = long_description,
    long_description_content_type = "text/markdown",
    license = "MIT",
    classifiers = [
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.8",
    ],
    keywords = ("video language contrastive pre-training temporal"
                + " action localization grounding"),
    package_dir = { "" : sourceRootDirectory },
    packages = ["basemodules", "clapmodules"],
    install_requires = ["numpy", "scipy"],
    extras_require = { "tests" : ["pytest"] },
    python_requires = ">=3.8, <4",
    data_files = [
        (installationRootDirectory, ["LICENSE.txt"]),
        (installationRootDirectory + "/config",
             ["config/clapdesk-default.cfg",
              "config/clapdesk-largedims.cfg",
              "config/clapdesk-ablation.cfg"])
    ],
    entry_points = { "console_scripts":
        [ "clapdesk=clapmodules.clapdesk:main" ]
    }
)
