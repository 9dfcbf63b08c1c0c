"""The q-difference Toda operator on generating series in y_1..y_n.

Coefficients live in the z-function field as TermSum values. Every piece
of the operator acts diagonally on y-monomials except the single (1 - y_i)
factor, which mixes a coefficient with its lower neighbor, so the image of
a series stored on the simplex |d| <= cutoff is exact on that simplex.

The same y-coefficient relation, read as a recursion, determines every
J_d from J_0 = 1 alone. That route is kept free of any import from the
pattern modules so the two can confirm each other.
"""

from __future__ import annotations

from itertools import product

from .multivar import FactoredExpr, TermSum, termsum_equal_report
from .rootdata import interval_root, iter_up_to_degree
from .scalar import ONE, VScalar


def _tail_z2(n: int, i: int) -> tuple:
	"""Doubled exponent vector of z_{i,n} = z_{i+1} ... z_n (empty for i = n)."""
	if i == n:
		return (0,) * n
	return tuple(2 * x for x in interval_root(n, i + 1, n))


def eigenvalue_terms(n: int) -> TermSum:
	"""The eigenvalue 1 + z_n + z_{n-1} z_n + ... + z_1 ... z_n."""
	return TermSum(n, tuple(FactoredExpr(n, z2=_tail_z2(n, i)) for i in range(n + 1)))


class GenSeries:
	"""Series sum_d c_d y^d stored on the simplex |d| <= cutoff.

	Missing degrees read as zero. The Whittaker series normalizes c_0 = 1.
	"""

	__slots__ = ("rank", "cutoff", "coeffs")

	def __init__(self, rank: int, cutoff: int, coeffs):
		if cutoff < 0:
			raise ValueError("cutoff must be nonnegative")
		store = {}
		for d, ts in coeffs.items():
			d = tuple(int(x) for x in d)
			if len(d) != rank or any(x < 0 for x in d):
				raise ValueError("bad degree vector")
			if sum(d) > cutoff:
				raise ValueError("degree beyond cutoff")
			if ts.rank != rank:
				raise ValueError("coefficient rank mismatch")
			store[d] = ts
		self.rank = rank
		self.cutoff = cutoff
		self.coeffs = store

	def coeff(self, d) -> TermSum:
		return self.coeffs.get(tuple(d), TermSum(self.rank))

	def __add__(self, other: "GenSeries") -> "GenSeries":
		if not isinstance(other, GenSeries):
			return NotImplemented
		if self.rank != other.rank:
			raise ValueError("rank mismatch")
		cutoff = min(self.cutoff, other.cutoff)
		out = {}
		for d in set(self.coeffs) | set(other.coeffs):
			if sum(d) <= cutoff:
				out[d] = self.coeff(d) + other.coeff(d)
		return GenSeries(self.rank, cutoff, out)

	def times_expr(self, e: FactoredExpr) -> "GenSeries":
		out = {d: ts.times_expr(e) for d, ts in self.coeffs.items()}
		return GenSeries(self.rank, self.cutoff, out)


def whittaker_series(n: int, cutoff: int, jsource) -> GenSeries:
	"""Assemble F = sum_d J_d y^d from a coefficient source d -> TermSum."""
	if cutoff < 0:
		raise ValueError("cutoff must be nonnegative")
	coeffs = {d: jsource(n, d) for d in iter_up_to_degree(n, cutoff)}
	c0 = coeffs[(0,) * n]
	if c0.terms != (FactoredExpr(n),):
		raise ValueError("series is not normalized to 1 at degree zero")
	return GenSeries(n, cutoff, coeffs)


def apply_hamiltonian(F: GenSeries) -> GenSeries:
	"""Image of F under sum_i D_i^{-1} D_{i+1} (z_{i,n} (1 - y_i) . ), y_0 = 0."""
	n = F.rank
	out = {}
	for e in iter_up_to_degree(n, F.cutoff):
		acc = TermSum(n)
		for i in range(n + 1):
			lo = e[i - 1] if i >= 1 else 0
			hi = e[i] if i < n else 0
			mono = FactoredExpr(n, VScalar.v_power(2 * (hi - lo)), _tail_z2(n, i))
			acc = acc + F.coeff(e).times_expr(mono)
			if i >= 1 and e[i - 1] >= 1:
				prev = tuple(x - (j == i - 1) for j, x in enumerate(e))
				acc = acc + F.coeff(prev).times_expr(mono).scaled(-ONE)
		out[e] = acc
	return GenSeries(n, F.cutoff, out)


def verify_eigen(n: int, cutoff: int, jsource, trials: int = 4, seed: int = 0) -> dict:
	"""Check (H - sum_i z_{i,n}) F = 0 coefficient by coefficient.

	jsource maps (n, d) to the TermSum coefficient J_d. Returns a report
	with one entry per degree on the simplex, each carrying a witness point
	on failure.
	"""
	F = whittaker_series(n, cutoff, jsource)
	HF = apply_hamiltonian(F)
	eig = eigenvalue_terms(n)
	checks = []
	ok = True
	for e in iter_up_to_degree(n, cutoff):
		want = F.coeff(e).times(eig)
		rep = termsum_equal_report(HF.coeff(e), want, seed=seed + 17 * sum(e) + sum(e[i] * (i + 2) for i in range(n)), trials=trials)
		checks.append({"d": list(e), "pass": rep["equal"], "witness": rep["witness"]})
		ok = ok and rep["equal"]
	return {"n": n, "cutoff": cutoff, "pass": ok, "checks": checks}


def _lead_reciprocal(n: int, e) -> FactoredExpr:
	"""1 / sum_{i=0}^n z_{i,n} (q^{-e_i + e_{i+1}} - 1) in factored form.

	A two-monomial sum whose coefficient ratio is minus a q-power folds
	into a single Pochhammer atom; anything larger rides along as an
	unexpanded sum denominator.
	"""
	parts = []
	for i in range(n + 1):
		lo = e[i - 1] if i >= 1 else 0
		hi = e[i] if i < n else 0
		x = hi - lo
		if x == 0:
			continue
		parts.append((VScalar.v_power(2 * x) - ONE, _tail_z2(n, i)))
	if not parts:
		raise ValueError("vanishing leading coefficient")
	if len(parts) == 2:
		for (ca, za), (cb, zb) in (parts, parts[::-1]):
			unit = (ca * cb.reciprocal()).is_unit_v_power()
			if unit is None:
				continue
			sign, k = unit
			if sign != -1 or k % 2:
				continue
			zpart = tuple((x - y) // 2 for x, y in zip(za, zb))
			return FactoredExpr(
				n,
				cb.reciprocal(),
				tuple(-x for x in zb),
				den=[(k // 2, zpart, 1)],
			)
	total = TermSum(n, tuple(FactoredExpr(n, c, z2) for c, z2 in parts))
	return FactoredExpr(n, den_sums=(total,))


def toda_solve(n: int, d) -> TermSum:
	"""J_d from the y-coefficient recursion of the eigen-equation.

	Walks the box below d in graded order, each step dividing the lower
	neighbor combination by the leading coefficient.
	"""
	d = tuple(int(x) for x in d)
	if len(d) != n:
		raise ValueError("degree vector rank mismatch")
	if any(x < 0 for x in d):
		raise ValueError("degree must lie in the positive cone")
	zero = (0,) * n
	cache = {zero: TermSum(n, (FactoredExpr(n),))}
	box = [e for e in product(*(range(x + 1) for x in d)) if e != zero]
	box.sort(key=lambda e: (sum(e), e))
	for e in box:
		num = TermSum(n)
		for i in range(1, n + 1):
			if e[i - 1] < 1:
				continue
			hi = e[i] if i < n else 0
			mono = FactoredExpr(n, VScalar.v_power(2 * (hi - e[i - 1])), _tail_z2(n, i))
			prev = tuple(x - (j == i - 1) for j, x in enumerate(e))
			num = num + cache[prev].times_expr(mono)
		cache[e] = num.times_expr(_lead_reciprocal(n, e))
	return cache[d]
