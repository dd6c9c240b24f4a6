"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); compilation failures therefore only emit a warning.
Set PROTONEURO_NO_EXTENSION=1 to skip the compiled core entirely.
"""

import os
import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("PROTONEURO_NO_EXTENSION"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        warnings.warn(f"compiled kernels skipped ({exc}); using the pure NumPy fallback")
        return []
    ext = Extension(
        "protoneuro._kernels._native",
        ["src/protoneuro/_kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


class optional_build_ext(build_ext):
    """Demote extension build failures to a warning."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"compiled kernels skipped ({exc}); using the pure NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); using the pure NumPy fallback")


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
