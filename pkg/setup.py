"""Build script for the optional compiled texture-matrix kernels.

The package works without the extension (a pure numpy fallback is selected
at import time); building it just makes per-image feature extraction faster.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "frd._texture_fast",
                sources=["src/frd/_texture_fast.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
