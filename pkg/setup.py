"""Build script: compiles the optional Cython alignment kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so any failure here degrades to a pure-Python install.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/tabdistill/metrics/_alignment_cy.pyx"],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - any build-chain failure means "no extension"
    print(f"tabdistill: skipping Cython kernel ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
