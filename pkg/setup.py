"""Build script for the optional compiled kernel extension.

The package works without the extension: boxloss.backend falls back to the
pure-Python kernels when boxloss._speedups is missing, so the extension is
marked optional and a failed compile does not fail the install.

-ffp-contract=off keeps the C arithmetic free of fused multiply-adds so the
compiled kernels produce bit-identical results to the pure-Python mirror.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "boxloss._speedups",
        ["src/boxloss/_speedups.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
    if cythonize is not None
    else [],
)
