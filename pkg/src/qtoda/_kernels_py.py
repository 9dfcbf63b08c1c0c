"""Dense integer polynomial kernels, pure-Python backend.

Polynomials are lists of Python ints in ascending power order. These two
functions are the hot inner loops of the whole package (series products and
VScalar arithmetic); `qtoda._kernels_cy` is the compiled twin with the same
contract, and `qtoda.kernels` picks one at import time.
"""

from __future__ import annotations

BACKEND = "py"


def poly_mul(a: list, b: list) -> list:
	"""Full product of two coefficient lists (ascending powers)."""
	la, lb = len(a), len(b)
	if la == 0 or lb == 0:
		return []
	out = [0] * (la + lb - 1)
	if la > lb:
		a, b, la, lb = b, a, lb, la
	for i in range(la):
		ai = a[i]
		if ai:
			for j in range(lb):
				bj = b[j]
				if bj:
					out[i + j] += ai * bj
	return out


def poly_mul_clip(a: list, b: list, lo: int, hi: int) -> list:
	"""Product coefficients for result powers lo..hi only.

	Returns a list of length hi-lo+1 whose k-th entry is the coefficient of
	power lo+k in a*b. Powers outside [lo, hi] are never accumulated.
	"""
	if hi < lo:
		return []
	out = [0] * (hi - lo + 1)
	lb = len(b)
	for i in range(len(a)):
		ai = a[i]
		if not ai:
			continue
		jmin = lo - i
		if jmin < 0:
			jmin = 0
		jmax = hi - i
		if jmax > lb - 1:
			jmax = lb - 1
		base = i - lo
		for j in range(jmin, jmax + 1):
			bj = b[j]
			if bj:
				out[base + j] += ai * bj
	return out
