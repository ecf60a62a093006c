"""Build script for the optional compiled kernels.

    pip install -e . --no-build-isolation

builds ``crsphere._ckernels`` when Cython and a C compiler are available;
otherwise the package installs without it and falls back to numpy.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    pass
else:
    ext_modules = cythonize(
        [
            Extension(
                "crsphere._ckernels",
                ["src/crsphere/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # finite inputs only, so complex multiply can skip the inf/NaN recovery path
                extra_compile_args=["-O3", "-fcx-limited-range"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
