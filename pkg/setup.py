"""Build script for the optional compiled SGD kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed.
"""

import numpy
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "motifclass.embedding._sgd_cy",
                ["src/motifclass/embedding/_sgd_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
