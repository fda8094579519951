"""Build script for the compiled time-stepping kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-numpy kernel at import.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "cascadecomp._heat_kernel",
        ["src/cascadecomp/_heat_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
