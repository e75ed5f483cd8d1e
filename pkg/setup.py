"""Build shim: compiles the optional Cython kernels.

The package works without the extension (pure-Python fallback is selected at
import time), so any build failure here downgrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: compiled kernels skipped ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: compiled kernels skipped ({exc})", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available, building pure-Python only", file=sys.stderr)
        return []
    ext = Extension(
        "qcordic._kernels",
        ["src/qcordic/_kernels.pyx"],
        # -ffp-contract=off: no fused multiply-add, results must match the
        # pure-Python kernels bit for bit.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
