"""Build script: compiles the optional Cython kernel.

The package works without the extension (pure-Python fallback in
u21hecke._pure); the extension just makes the series/matrix kernels faster.
If Cython or a C compiler is unavailable the build degrades gracefully.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "u21hecke._core",
                ["src/u21hecke/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print("u21hecke: skipping Cython kernel build (%s)" % exc)

setup(ext_modules=ext_modules)
