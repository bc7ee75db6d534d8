"""Build script: compiles the optional Cython solver kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failed cythonize is downgraded to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "sarlib._kernels._svr_cy",
                ["src/sarlib/_kernels/_svr_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    warnings.warn(f"building without compiled kernels: {exc}")

setup(ext_modules=ext_modules)
