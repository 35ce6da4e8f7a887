import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "navfuse._kernels._core",
                ["src/navfuse/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # -fno-builtin-sincos: glibc sincos() can differ from separate
                # sin()/cos() calls by 1 ulp; keep the compiled kernels
                # bit-identical to the pure-Python fallback.
                extra_compile_args=["-O3", "-fno-builtin-sin", "-fno-builtin-cos", "-fno-builtin-sincos"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython: install pure-Python only; the package falls back at import.
    extensions = []

setup(ext_modules=extensions)
