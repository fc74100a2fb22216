"""Build script: compiles the optional Cython kernel for the packer hot loop.

The package is fully functional without the extension; sphpack._backend falls
back to the pure-numpy kernels when the compiled module is missing.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sphpack._kernels",
                ["src/sphpack/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"sphpack: skipping compiled kernels ({exc}); pure-python fallback will be used")

setup(ext_modules=ext_modules)
