#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence
"""

# Imports #
from setuptools import setup, find_namespace_packages
from os import path

# Load the contents of the README file #
this_dir = path.abspath(path.dirname(__file__))
readme_path = path.join(this_dir, "README.md")
with open(readme_path, encoding="utf-8") as handle:
    readme = handle.read()

# Call setup #
setup(
    name="glmvi",
    version="0.1.0",
    description="Variational inequality estimation of generalized linear models.",
    license="MIT",
    packages=find_namespace_packages(include=["glmvi", "glmvi.*"], exclude=["glmvi.tests"]),
    install_requires=[
        "numpy",
        "pandas",
        "scipy",
        "pymannkendall",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["glmvi = glmvi.cli:main"]},
    python_requires=">=3.8",
    long_description=readme,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    include_package_data=True,
)
