from setuptools import Extension, setup

# The compiled kernels are optional: a failed build (no compiler, no Cython)
# falls back to the NumPy implementations selected in uslads._kernels.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "uslads._kernels._cykernels",
                ["src/uslads/_kernels/_cykernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
