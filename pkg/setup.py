import os

from setuptools import setup

ext_modules = []
if not os.environ.get("AIID_PURE_PYTHON"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "aiid._ckernels",
                    ["src/aiid/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # numpy fallback kernels are used at import time
        ext_modules = []

setup(ext_modules=ext_modules)
