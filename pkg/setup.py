"""Build script for the optional compiled FM kernel.

The Cython extension is skipped if Cython or a C++ compiler is unavailable;
the package then runs on its pure-Python kernel.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DQCPART_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "dqcpart._fm_kernel",
                    ["src/dqcpart/_fm_kernel.pyx"],
                    language="c++",
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
