"""Build script. The compiled kernel extension is optional: if Cython or a C
toolchain is missing, installation proceeds with the pure-Python kernels."""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
	def run(self):
		try:
			super().run()
		except Exception as exc:  # toolchain missing: fall back to pure python
			print(f"warning: compiled kernels skipped ({exc}); using pure-Python fallback")

	def build_extension(self, ext):
		try:
			super().build_extension(ext)
		except Exception as exc:
			print(f"warning: building {ext.name} failed ({exc}); using pure-Python fallback")


ext_modules = []
if os.environ.get("QTODA_PURE") != "1":
	try:
		from Cython.Build import cythonize

		ext_modules = cythonize(
			["src/qtoda/_kernels_cy.pyx"],
			compiler_directives={"language_level": "3"},
		)
	except Exception as exc:
		print(f"warning: Cython unavailable ({exc}); using pure-Python kernels")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
