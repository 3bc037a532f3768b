"""Build script for the optional compiled fitness kernel.

The package works without the extension: famec.kernels falls back to a
vectorized numpy implementation when famec._core is missing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    extensions = [
        Extension(
            "famec._core",
            ["src/famec/_core.pyx"],
            extra_compile_args=["-O3"],
            optional=True,
        )
    ]
    ext_modules = cythonize(
        extensions,
        language_level="3",
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
