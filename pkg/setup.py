"""Build hook for the optional compiled kernels.

If Cython or a C compiler is missing the package still installs and falls
back to ``storeplan._pykernels`` at import time.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("STOREPLAN_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"storeplan: skipping compiled kernels ({exc})", file=sys.stderr)
    else:
        ext_modules = cythonize(
            [Extension(
                "storeplan._ckernels",
                ["src/storeplan/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )],
            compiler_directives={"language_level": 3, "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )

setup(ext_modules=ext_modules)
