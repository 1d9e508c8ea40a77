import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -O2 without -ffast-math: the model builder promises bit-reproducible output
# for identical inputs, which fast-math license-to-reorder would break.
extensions = [
    Extension(
        "eventflow._kernels._cd",
        ["src/eventflow/_kernels/_cd.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O2"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
