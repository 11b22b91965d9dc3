"""Build script: compiles the optional truncated-series kernel.

The package works without the extension (a pure NumPy twin is selected at
import time), so any failure here downgrades to a pure build instead of
aborting the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("jetgauge._series_cy", ["src/jetgauge/_series_cy.pyx"])],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
except Exception as exc:  # pragma: no cover - depends on build host
    print(f"jetgauge: skipping compiled kernel ({exc}); using pure fallback")

setup(ext_modules=ext_modules)
