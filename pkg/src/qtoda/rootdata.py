"""Root-lattice combinatorics for sl(n+1), type A_n.

Lattice vectors are plain integer tuples of length n holding coordinates in
the simple-root basis: d represents d[0]*alpha_1 + ... + d[n-1]*alpha_n.
The invariant form is normalized so (alpha_i, alpha_i) = 2 and neighbouring
simple roots pair to -1.
"""

from __future__ import annotations

from itertools import product


def cartan_pairing(d, e) -> int:
	"""(sum d_i alpha_i, sum e_j alpha_j)."""
	n = len(d)
	if len(e) != n:
		raise ValueError("rank mismatch")
	s = 0
	for i in range(n):
		s += 2 * d[i] * e[i]
		if i + 1 < n:
			s -= d[i] * e[i + 1] + d[i + 1] * e[i]
	return s


def norm_sq(d) -> int:
	"""(beta, beta); always even on the root lattice."""
	return cartan_pairing(d, d)


def quad_form(d) -> int:
	"""(beta, beta)/2 = sum d_i^2 - sum d_i d_{i+1}; nonnegative."""
	return norm_sq(d) // 2


def rho_pairing(d) -> int:
	"""(rho, beta) = sum of simple-root coordinates."""
	return sum(d)


def is_nonneg(d) -> bool:
	return all(c >= 0 for c in d)


def dominated_by(a, b) -> bool:
	"""Componentwise a <= b."""
	return len(a) == len(b) and all(x <= y for x, y in zip(a, b))


def basis_delta(n: int, i: int) -> tuple:
	"""Coordinate vector of alpha_i, 1-indexed."""
	if not 1 <= i <= n:
		raise ValueError("simple root index out of range")
	return tuple(1 if j == i - 1 else 0 for j in range(n))


def interval_root(n: int, j: int, i: int) -> tuple:
	"""alpha_j + alpha_{j+1} + ... + alpha_i for 1 <= j <= i <= n."""
	if not 1 <= j <= i <= n:
		raise ValueError("bad interval")
	return tuple(1 if j - 1 <= t <= i - 1 else 0 for t in range(n))


def two_rho(n: int) -> tuple:
	"""Root coordinates of 2*rho: entry i is i*(n+1-i)."""
	return tuple((i + 1) * (n - i) for i in range(n))


def vec_add(a, b):
	return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
	return tuple(x - y for x, y in zip(a, b))


def vec_scale(a, c):
	return tuple(c * x for x in a)


def cone_coordinates(d, i: int):
	"""Coordinates of d in the basis alpha_j + ... + alpha_i, j = 1..i.

	Returns the tuple (c_1, ..., c_i) with all c_j >= 0 when d lies in the
	nonnegative span of those interval roots (which forces support inside
	the first i coordinates and ascending values there), else None.
	"""
	n = len(d)
	if not 1 <= i <= n:
		raise ValueError("cone apex out of range")
	if any(d[t] for t in range(i, n)):
		return None
	prev = 0
	coords = []
	for j in range(i):
		c = d[j] - prev
		if c < 0:
			return None
		coords.append(c)
		prev = d[j]
	return tuple(coords)


def iter_dominated(d):
	"""All lattice vectors a with 0 <= a <= d componentwise."""
	return product(*(range(c + 1) for c in d))


def iter_degree(n: int, total: int):
	"""All nonnegative vectors of length n with coordinate sum == total."""
	if n == 0:
		if total == 0:
			yield ()
		return
	for first in range(total + 1):
		for rest in iter_degree(n - 1, total - first):
			yield (first,) + rest


def iter_up_to_degree(n: int, max_total: int):
	"""All nonnegative vectors of length n with coordinate sum <= max_total."""
	for total in range(max_total + 1):
		yield from iter_degree(n, total)
