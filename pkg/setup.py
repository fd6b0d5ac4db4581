from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "aggrisk.engine._kernel",
    ["src/aggrisk/engine/_kernel.pyx"],
    # -ffp-contract=off: no FMA contraction, so the compiled kernel rounds
    # exactly like the NumPy fallback and results stay backend-independent.
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(
    ext_modules=cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    ),
)
