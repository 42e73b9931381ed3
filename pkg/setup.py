"""Build hook for the optional compiled kernel.

The package is pure Python plus one Cython extension holding the hot
finite-volume sweeps.  If Cython (or the .pyx source) is unavailable the
install proceeds without it and the numpy reference backend is used at
runtime.
"""

import os

from setuptools import Extension, setup

ext_modules = []
pyx = os.path.join("src", "curllab", "_kernels", "_accel.pyx")
if os.path.exists(pyx):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "curllab._kernels._accel",
                    [pyx],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
