"""Build script for the optional compiled kernel extension.

``pip install .`` (or ``python setup.py build_ext --inplace``) compiles the
Cython kernels when a toolchain is available. Without one the package still
installs; the NumPy/Python fallback in ``peakpauser._kernels.pure`` is
selected at import time. Set PEAKPAUSER_NO_EXT=1 to skip the extension
entirely.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; warn and continue if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled kernels: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping compiled kernels ({ext.name}): {exc}")


def extensions():
    if os.environ.get("PEAKPAUSER_NO_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "peakpauser._kernels._ckernels",
        ["src/peakpauser/_kernels/_ckernels.pyx"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
