"""Build script: compiles the optional Cython inference kernel.

The package works without the extension (a NumPy fallback is selected at
import time); the build therefore tolerates a missing Cython or compiler.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "generank._mamdani_cy",
                ["src/generank/_mamdani_cy.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
