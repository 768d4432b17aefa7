import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython: install the pure-Python fallback only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "tmgk._core",
                ["src/tmgk/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
