"""Build hook for the optional compiled statevector kernels.

The package is fully functional without the extension (a numpy fallback is
selected at import time); set SAOOVQE_NO_EXTENSION=1 to skip compilation.
"""

import os
import sys

from setuptools import Extension, setup

# without -fcx-limited-range gcc calls __muldc3 for every complex multiply,
# which is slower than the numpy fallback on large registers
if sys.platform == "win32":
    compile_args = ["/O2"]
else:
    compile_args = ["-O3", "-fcx-limited-range"]

ext_modules = []
if os.environ.get("SAOOVQE_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "saoovqe._fastkernels",
                    ["src/saoovqe/_fastkernels.pyx"],
                    extra_compile_args=compile_args,
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
