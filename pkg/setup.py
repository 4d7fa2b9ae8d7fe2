import os
import sys

from setuptools import Extension, setup


def extensions():
    if os.environ.get("RANKBENCH_PURE_PYTHON"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        print("Cython or numpy missing; installing the pure-Python backend only", file=sys.stderr)
        return []
    ext = Extension(
        "rankbench._ckernels",
        ["src/rankbench/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # keep rounding identical to the Python twin
        extra_compile_args=["-O2", "-ffp-contract=off"] if sys.platform != "win32" else [],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
