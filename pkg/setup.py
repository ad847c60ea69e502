import os

from setuptools import setup

ext_modules = []
if os.environ.get("SUNITKIT_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [Extension("sunitkit._kernels",
                       [os.path.join("src", "sunitkit", "_kernels.pyx")],
                       include_dirs=[numpy.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
