"""Build script for the compiled simulation kernel.

The extension is optional at runtime: if it is absent (or fails to build),
``pureucb`` falls back to a pure-Python implementation of the same kernels.
Build in place with

    pip install -e . --no-build-isolation

Note: no -ffast-math here.  The fallback backend promises bit-identical
results, which requires strict IEEE semantics in the compiled code.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - source dists ship the .pyx only
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "pureucb._kernel",
                ["src/pureucb/_kernel.pyx"],
                language="c++",
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
