"""Build script for the optional compiled sampling kernels.

The package works without the extension (a pure-numpy fallback is selected at
import time); building it just makes Monte-Carlo sampling faster.
"""

import os
from os.path import join

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []

    # numpy ships static libs for its C random-distribution API:
    #   <numpy>/random/lib/libnpyrandom.a and <numpy>/_core/lib/libnpymath.a
    np_root = os.path.dirname(numpy.__file__)
    core = "_core" if os.path.isdir(join(np_root, "_core")) else "core"
    ext = Extension(
        "certlab._kernels",
        ["src/certlab/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[join(np_root, "random", "lib"), join(np_root, core, "lib")],
        libraries=["npyrandom", "npymath"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
