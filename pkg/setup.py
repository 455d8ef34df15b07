import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    if not os.path.exists("src/minsurf/_mesh_kernels_cy.pyx"):
        raise ImportError
    ext_modules = cythonize(
        [
            Extension(
                "minsurf._mesh_kernels_cy",
                ["src/minsurf/_mesh_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # pure-Python kernels are selected at import time when the extension
    # is unavailable
    ext_modules = []

setup(ext_modules=ext_modules)
