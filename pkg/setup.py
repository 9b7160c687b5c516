"""Build script.

The compiled kernel is optional: if Cython or a C compiler is unavailable the
package installs anyway and ``spincm.kernels`` falls back to the pure-Python
implementation at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/spincm/_poly_core.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - environment dependent
    print(f"spincm: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
