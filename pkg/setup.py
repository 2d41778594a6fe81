import os
import sys

import numpy as np
from setuptools import Extension, setup

# Building the compiled core is optional; without it the package falls back
# to the numpy implementation in hyplab._kernels_py.
ext_modules = []
if os.environ.get("HYPLAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        extensions = [
            Extension(
                "hyplab._kernels",
                ["src/hyplab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
