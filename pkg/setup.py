"""Build script for the optional compiled DSP kernels.

The package works without the extension (a NumPy/pure-Python fallback is
selected at import time); Cython and a C compiler just make the hot loops
fast. The extension is marked optional so installs never fail on build
problems.
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sva.dsp._kernels",
                ["src/sva/dsp/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
