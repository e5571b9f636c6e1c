import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "zonepulse._kernels_cy",
                ["src/zonepulse/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # package still works on the pure-python kernels
    ext_modules = []

setup(ext_modules=ext_modules)
