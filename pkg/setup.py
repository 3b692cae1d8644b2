"""Build script. The compiled mining kernels are optional: when Cython or a
C++ toolchain is unavailable the package installs anyway and falls back to the
pure-Python kernels at import time."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    # A failed kernel build must not fail the install; the package degrades
    # to the pure-Python kernels.
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"skipping compiled kernels: {exc}\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"skipping {ext.name}: {exc}\n")


ext_modules = []
cmdclass = {}
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "stylemirror._kernels_cy",
                ["src/stylemirror/_kernels_cy.pyx"],
                language="c++",
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )
    cmdclass["build_ext"] = optional_build_ext
except ImportError:
    sys.stderr.write("Cython not found; installing without compiled kernels\n")

setup(ext_modules=ext_modules, cmdclass=cmdclass)
