"""Build script: compiles the optional accelerator extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure to build it is downgraded to a warning.
Regenerate the shipped C source with ``cython src/vesselsafe/_core.pyx``
after editing the .pyx file.
"""

import warnings
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

PYX = "src/vesselsafe/_core.pyx"
C_SRC = "src/vesselsafe/_core.c"


def _extensions():
    try:
        from Cython.Build import cythonize

        return cythonize(
            [Extension("vesselsafe._core", [PYX], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        if Path(C_SRC).exists():
            return [Extension("vesselsafe._core", [C_SRC], extra_compile_args=["-O3"])]
        warnings.warn("neither Cython nor pregenerated _core.c available; "
                      "installing with the pure-numpy backend only")
        return []


class OptionalBuildExt(build_ext):
    """Build the extension if possible, fall back to pure python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"skipping compiled core ({exc}); pure-numpy backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); pure-numpy backend will be used")


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
