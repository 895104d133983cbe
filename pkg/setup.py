"""Build script for the compiled interpolation kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time), but the compiled core is much faster for the shifted-sum
loops used by the spherical averaging operators.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "sphmax.kernels._core",
        ["src/sphmax/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
