from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("graspdet._geomfast", ["src/graspdet/_geomfast.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython: install with the pure-Python geometry kernel only.
    ext_modules = []

setup(ext_modules=ext_modules)
