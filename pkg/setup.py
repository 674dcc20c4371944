"""Build script: compiles the Cython dynamics kernels when possible.

The package works without the compiled extension (a NumPy fallback is
selected at import time), so the extension is marked optional and a failed
compile degrades to the pure-Python backend instead of breaking the install.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "robusttraj.dynamics._kernels",
                sources=["src/robusttraj/dynamics/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
