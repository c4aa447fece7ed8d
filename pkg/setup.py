"""Build script: compiles the optional echelon core if Cython is available.

The package is fully functional without the extension (a pure numpy
fallback is selected at import time), so any build failure here is
deliberately non-fatal.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/obstower/kernels/_core.pyx"],
        language_level=3,
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # pragma: no cover - depends on build host
    sys.stderr.write(f"obstower: skipping compiled kernels ({exc!r})\n")

setup(ext_modules=ext_modules)
