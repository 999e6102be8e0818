"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension (a pure-Python
twin of every kernel ships in honeysim._kernels.pure). Set
HONEYSIM_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("HONEYSIM_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "honeysim._kernels._accel",
                    ["src/honeysim/_kernels/_accel.pyx"],
                    language="c++",
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
