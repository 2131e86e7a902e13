"""Build script: compiles the optional Cython kernel extension.

If Cython or a C compiler is unavailable the install proceeds without the
extension; the package falls back to the pure-numpy kernels at import time.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


def make_extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        ["src/nmfrank/_backend/_cy_kernels.pyx"],
        compiler_directives={"language_level": "3"},
        include_path=[np.get_include()],
    )


class OptionalBuildExt(build_ext):
    """Skip the extension (with a warning) instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping Cython kernels ({exc}); "
                  "pure-python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-python fallback will be used")


def include_dirs():
    try:
        import numpy as np
        return [np.get_include()]
    except ImportError:
        return []


exts = make_extensions()
for ext in exts:
    ext.include_dirs.extend(include_dirs())

setup(ext_modules=exts, cmdclass={"build_ext": OptionalBuildExt})
