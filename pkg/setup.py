"""Build script for the optional compiled solver kernel.

The dual coordinate ascent sweep used by the hard-margin SVM trainer is the
one genuinely hot sequential loop in this package. It is compiled with Cython
when available; a NumPy fallback with identical semantics ships alongside, so
the build never hard-fails on a missing compiler.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "retaincal._dca",
                sources=["src/retaincal/_dca.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
