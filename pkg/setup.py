import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fxsignal._kernels",
                sources=["src/fxsignal/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffast-math"],
                # -ffast-math lets gcc emit SIMD exp/tanh from libmvec
                extra_link_args=["-lmvec", "-lm"],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
except ImportError:
    # Pure-Python install still works: the package falls back to the
    # numpy kernels at import time when the extension is missing.
    ext_modules = []

setup(ext_modules=ext_modules)
