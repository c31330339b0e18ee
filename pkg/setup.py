from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("gbsat._chunkset", ["src/gbsat/_chunkset.pyx"]),
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    ),
)
