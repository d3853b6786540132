"""Build script for the optional compiled kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile must not fail the install.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.path.exists("src/ctlnet/_kernels/_core.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "ctlnet._kernels._core",
                ["src/ctlnet/_kernels/_core.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
