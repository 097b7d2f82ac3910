"""Build script: compiles the optional Cython sweep kernel when Cython is available.

The package works without the extension; qkacz._kernels falls back to the
pure-numpy implementation at import time.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("QKACZ_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "qkacz._kernels._ckernels",
                    ["src/qkacz/_kernels/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
