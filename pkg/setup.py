import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install still works; the solver falls back at import time.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "crod._fista_core",
                ["src/crod/_fista_core.pyx"],
                include_dirs=[numpy.get_include()],
                # fp-contract off keeps magnitudes bit-identical to numpy
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
