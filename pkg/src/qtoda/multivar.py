"""Multivariate q-series with exact truncation.

Two levels live here. FactoredExpr / TermSum hold closed-form expressions:
a scalar coefficient times a z-monomial times finite or infinite
q-Pochhammer factors, kept symbolically so they can be evaluated exactly at
rational points or expanded into truncated series. TruncSeries holds the
expansion: integer v-Laurent coefficients per z-monomial, exact within a
declared window.

z-monomial exponents on FactoredExpr are stored doubled (z2), because
intermediate expressions legitimately carry half-integer powers of z; all
public serialization and expansion entry points insist the doubling is even.

The expansion rules for an inverse factor 1/(1 - q^a z^mu) depend on mu:
nonnegative mu expands geometrically, nonpositive mu is first rewritten as
-q^(-a) z^(-mu) / (1 - q^(-a) z^(-mu)), and genuinely mixed signs have no
canonical expansion region, which is reported as an error rather than
guessed at.
"""

from __future__ import annotations

import json
import random

from gmpy2 import mpq

from .kernels import poly_mul_clip
from .scalar import ONE, VScalar, ZERO, rational


class ExpansionError(ValueError):
	"""A factor has no well-defined series expansion in the requested region."""


# ---------------------------------------------------------------------------
# small monomial helpers (tuples of ints)
# ---------------------------------------------------------------------------


def _madd(a, b):
	return tuple(x + y for x, y in zip(a, b))


def _mneg(a):
	return tuple(-x for x in a)


def _mscale(a, c):
	return tuple(c * x for x in a)


def _zero_mono(n):
	return (0,) * n


# ---------------------------------------------------------------------------
# factored expressions
# ---------------------------------------------------------------------------


def _poch_sort_key(f):
	return (f[2] is None, f[2] if f[2] is not None else 0, f[0], f[1])


def _emit_run(out, mu, start, end):
	# end is exclusive; None means the run extends to infinity
	if end is None:
		if start <= 0 and not any(mu):
			# keep the infinite tail at a >= 1 so the factor stays valid
			out.append(PochFactor(start, mu, 1 - start))
			out.append(PochFactor(1, mu, None))
		else:
			out.append(PochFactor(start, mu, None))
	elif end > start:
		out.append(PochFactor(start, mu, end - start))


def _emit_layers(out, mu, segs):
	"""Rebuild PochFactors from constant-coverage segments of one sign."""
	if not segs:
		return
	top = max(h for _, _, h in segs)
	for layer in range(1, top + 1):
		run_start = prev_end = None
		for s, e, h in segs:
			if h < layer:
				continue
			if run_start is not None and s == prev_end:
				prev_end = e
			else:
				if run_start is not None:
					_emit_run(out, mu, run_start, prev_end)
				run_start, prev_end = s, e
		if run_start is not None:
			_emit_run(out, mu, run_start, prev_end)


def _cancel_factors(num, den):
	"""Cancel atoms 1 - q^c z^mu shared by numerator and denominator.

	A factor (a, mu, m) covers the exponent slots a .. a+m-1 (a .. inf for
	an infinite factor); overlapping slots with the same mu cancel exactly,
	including partial overlaps such as num (a, mu, inf) against
	den (a, mu, m) which leaves num (a+m, mu, inf).
	"""
	shared = {f.zpart for f in num} & {f.zpart for f in den}
	if not shared:
		return num, den
	out_num = [f for f in num if f.zpart not in shared]
	out_den = [f for f in den if f.zpart not in shared]
	for mu in shared:
		events = {}
		for f, sgn in [(g, 1) for g in num if g.zpart == mu] + [
			(g, -1) for g in den if g.zpart == mu
		]:
			events[f.a] = events.get(f.a, 0) + sgn
			if f.length is not None:
				e = f.a + f.length
				events[e] = events.get(e, 0) - sgn
		points = sorted(events)
		pos, neg = [], []
		cov = 0
		for i, p in enumerate(points):
			cov += events[p]
			end = points[i + 1] if i + 1 < len(points) else None
			if cov > 0:
				pos.append((p, end, cov))
			elif cov < 0:
				neg.append((p, end, -cov))
		_emit_layers(out_num, mu, pos)
		_emit_layers(out_den, mu, neg)
	return out_num, out_den


class PochFactor(tuple):
	"""(q^a * z^zpart; q)_length with integer zpart; length None means infinite."""

	__slots__ = ()

	def __new__(cls, a: int, zpart: tuple, length):
		zpart = tuple(zpart)
		if length is not None and (not isinstance(length, int) or length < 0):
			raise ValueError("Pochhammer length must be None or a nonnegative int")
		return tuple.__new__(cls, (a, zpart, length))

	@property
	def a(self):
		return self[0]

	@property
	def zpart(self):
		return self[1]

	@property
	def length(self):
		return self[2]

	def __repr__(self):
		return f"PochFactor(a={self[0]}, zpart={self[1]}, length={self[2]})"


class FactoredExpr:
	"""coeff * z^(z2/2) * prod(num) / (prod(den) * prod(den_sums values)).

	num and den are tuples of PochFactor; den_sums is a tuple of TermSum
	whose values divide the expression (used where a denominator is only
	available as a sum). Atoms 1 - q^c z^mu covered by both num and den
	cancel on construction, partial interval overlaps included.
	"""

	__slots__ = ("rank", "coeff", "z2", "num", "den", "den_sums")

	def __init__(self, rank, coeff=ONE, z2=None, num=(), den=(), den_sums=()):
		self.rank = rank
		self.coeff = coeff if isinstance(coeff, VScalar) else VScalar.from_int(coeff)
		self.z2 = tuple(z2) if z2 is not None else _zero_mono(rank)
		if len(self.z2) != rank:
			raise ValueError("z2 rank mismatch")
		num = [PochFactor(*f) for f in num if f[2] != 0]
		den = [PochFactor(*f) for f in den if f[2] != 0]
		for f in num + den:
			if len(f.zpart) != rank:
				raise ValueError("factor rank mismatch")
		if num and den:
			num, den = _cancel_factors(num, den)
		self.num = tuple(sorted(num, key=_poch_sort_key))
		self.den = tuple(sorted(den, key=_poch_sort_key))
		self.den_sums = tuple(den_sums)

	def __repr__(self):
		return (
			f"FactoredExpr(rank={self.rank}, coeff={self.coeff!r}, z2={self.z2}, "
			f"num={self.num}, den={self.den}, den_sums={len(self.den_sums)} sums)"
		)

	def __eq__(self, other):
		if not isinstance(other, FactoredExpr):
			return NotImplemented
		return (
			self.rank == other.rank
			and self.coeff == other.coeff
			and self.z2 == other.z2
			and self.num == other.num
			and self.den == other.den
			and self.den_sums == other.den_sums
		)

	def scaled(self, s) -> "FactoredExpr":
		e = FactoredExpr.__new__(FactoredExpr)
		e.rank, e.z2, e.num, e.den, e.den_sums = (
			self.rank,
			self.z2,
			self.num,
			self.den,
			self.den_sums,
		)
		e.coeff = self.coeff * s
		return e

	def times(self, other: "FactoredExpr") -> "FactoredExpr":
		if self.rank != other.rank:
			raise ValueError("rank mismatch")
		return FactoredExpr(
			self.rank,
			self.coeff * other.coeff,
			_madd(self.z2, other.z2),
			self.num + other.num,
			self.den + other.den,
			self.den_sums + other.den_sums,
		)

	def shifted(self, z2_delta) -> "FactoredExpr":
		return FactoredExpr(
			self.rank,
			self.coeff,
			_madd(self.z2, tuple(z2_delta)),
			self.num,
			self.den,
			self.den_sums,
		)

	def reciprocal(self) -> "FactoredExpr":
		if self.den_sums:
			raise ValueError("cannot invert an expression carrying sum denominators")
		return FactoredExpr(
			self.rank,
			self.coeff.reciprocal(),
			_mneg(self.z2),
			self.den,
			self.num,
		)

	def subst_z_inverse(self) -> "FactoredExpr":
		"""The image under z_i -> 1/z_i for every i."""
		return FactoredExpr(
			self.rank,
			self.coeff,
			_mneg(self.z2),
			tuple(PochFactor(f.a, _mneg(f.zpart), f.length) for f in self.num),
			tuple(PochFactor(f.a, _mneg(f.zpart), f.length) for f in self.den),
			tuple(s.subst_z_inverse() for s in self.den_sums),
		)

	def subst_q_shift(self, shifts) -> "FactoredExpr":
		"""The image under z_i -> q^shifts[i] * z_i."""
		shifts = tuple(shifts)
		if len(shifts) != self.rank:
			raise ValueError("shift rank mismatch")
		vpow = sum(s * e for s, e in zip(shifts, self.z2))
		return FactoredExpr(
			self.rank,
			self.coeff * VScalar.v_power(vpow),
			self.z2,
			tuple(
				PochFactor(f.a + sum(s * e for s, e in zip(shifts, f.zpart)), f.zpart, f.length)
				for f in self.num
			),
			tuple(
				PochFactor(f.a + sum(s * e for s, e in zip(shifts, f.zpart)), f.zpart, f.length)
				for f in self.den
			),
			tuple(s.subst_q_shift(shifts) for s in self.den_sums),
		)

	def min_z2_vector(self) -> tuple:
		"""Componentwise lower bound (doubled units) for every z-monomial in
		the expansion of this expression. Raises if no expansion exists."""
		low = list(self.z2)
		if self.den_sums:
			raise ExpansionError("no monomial bound through a sum-denominator")
		for f in self.num:
			if f.length is None:
				if any(x < 0 for x in f.zpart):
					raise ExpansionError(
						"non-expandable infinite numerator with inverse powers"
					)
			else:
				for i, x in enumerate(f.zpart):
					if x < 0:
						low[i] += 2 * f.length * x
		for f in self.den:
			neg = all(x <= 0 for x in f.zpart) and any(x < 0 for x in f.zpart)
			pos = all(x >= 0 for x in f.zpart)
			if pos:
				continue
			if neg:
				if f.length is None:
					raise ExpansionError(
						"non-expandable infinite denominator with inverse powers"
					)
				for i, x in enumerate(f.zpart):
					low[i] -= 2 * f.length * x
			else:
				raise ExpansionError(
					"ambiguous expansion region: denominator factor mixes z signs"
				)
		return tuple(low)

	# -- exact evaluation ----------------------------------------------------

	def eval_exact(self, v0, zvals):
		"""Exact rational value at v = v0, z_i = zvals[i]; needs integral z2."""
		v0 = rational(v0)
		zvals = [rational(z) for z in zvals]
		if len(zvals) != self.rank:
			raise ValueError("z value rank mismatch")
		acc = self.coeff.eval_at(v0)
		for i, e2 in enumerate(self.z2):
			if e2 % 2:
				raise ValueError("half-integral z-power; use eval_with_weight")
			if e2:
				acc *= zvals[i] ** (e2 // 2)
		q0 = v0 * v0
		for f in self.num:
			acc *= _poch_value(f, q0, zvals)
		for f in self.den:
			dv = _poch_value(f, q0, zvals)
			if dv == 0:
				raise ZeroDivisionError("Pochhammer pole")
			acc /= dv
		for s in self.den_sums:
			sv = s.eval_exact(v0, zvals)
			if sv == 0:
				raise ZeroDivisionError("vanishing sum-denominator")
			acc /= sv
		return acc

	def eval_with_weight(self, v0, lam):
		"""Exact value at v = v0 with z_i specialized to v0^(-2(lam_i + 1)).

		This specialization turns half-integral z-powers into integer
		v-powers, so it is defined for every z2.
		"""
		v0 = rational(v0)
		lam = tuple(lam)
		if len(lam) != self.rank:
			raise ValueError("weight rank mismatch")
		acc = self.coeff.eval_at(v0)
		e = -sum((a + 1) * e2 for a, e2 in zip(lam, self.z2))
		acc *= v0**e
		for f in self.num:
			acc *= _poch_value_weight(f, v0, lam)
		for f in self.den:
			dv = _poch_value_weight(f, v0, lam)
			if dv == 0:
				raise ZeroDivisionError("Pochhammer pole")
			acc /= dv
		for s in self.den_sums:
			sv = s.eval_with_weight(v0, lam)
			if sv == 0:
				raise ZeroDivisionError("vanishing sum-denominator")
			acc /= sv
		return acc

	# -- serialization -------------------------------------------------------

	def to_json_obj(self):
		if self.den_sums:
			raise ValueError("sum-denominators have no JSON form")
		if any(e % 2 for e in self.z2):
			raise ValueError("half-integral z-power has no JSON form")
		return {
			"coeff": self.coeff.to_string(),
			"z": [e // 2 for e in self.z2],
			"num": [[f.a, list(f.zpart), "inf" if f.length is None else f.length] for f in self.num],
			"den": [[f.a, list(f.zpart), "inf" if f.length is None else f.length] for f in self.den],
		}

	@staticmethod
	def from_json_obj(obj) -> "FactoredExpr":
		z = [int(e) for e in obj["z"]]
		rank = len(z)

		def factors(key):
			return tuple(
				PochFactor(int(a), tuple(int(x) for x in zp), None if m == "inf" else int(m))
				for a, zp, m in obj.get(key, [])
			)

		return FactoredExpr(
			rank,
			VScalar.from_string(obj["coeff"]),
			tuple(2 * e for e in z),
			factors("num"),
			factors("den"),
		)


def _poch_value(f: PochFactor, q0, zvals):
	if f.length is None:
		raise ValueError("cannot exactly evaluate an infinite product")
	x = q0**f.a
	for i, e in enumerate(f.zpart):
		if e:
			x *= zvals[i] ** e
	acc = mpq(1)
	for j in range(f.length):
		acc *= 1 - x * q0**j
	return acc


def _poch_value_weight(f: PochFactor, v0, lam):
	if f.length is None:
		raise ValueError("cannot exactly evaluate an infinite product")
	e = 2 * f.a - sum(2 * (a + 1) * x for a, x in zip(lam, f.zpart))
	x = v0**e
	acc = mpq(1)
	for j in range(f.length):
		acc *= 1 - x * v0 ** (2 * j)
	return acc


class TermSum:
	"""A flat sum of FactoredExpr of one common rank."""

	__slots__ = ("rank", "terms")

	def __init__(self, rank: int, terms=()):
		self.rank = rank
		terms = tuple(terms)
		for t in terms:
			if t.rank != rank:
				raise ValueError("term rank mismatch")
		self.terms = terms

	def __len__(self):
		return len(self.terms)

	def __iter__(self):
		return iter(self.terms)

	def __add__(self, other):
		if isinstance(other, FactoredExpr):
			other = TermSum(other.rank, (other,))
		if not isinstance(other, TermSum):
			return NotImplemented
		if self.rank != other.rank:
			raise ValueError("rank mismatch")
		return TermSum(self.rank, self.terms + other.terms)

	def scaled(self, s) -> "TermSum":
		return TermSum(self.rank, tuple(t.scaled(s) for t in self.terms))

	def times_expr(self, e: FactoredExpr) -> "TermSum":
		return TermSum(self.rank, tuple(t.times(e) for t in self.terms))

	def times(self, other: "TermSum") -> "TermSum":
		return TermSum(
			self.rank, tuple(a.times(b) for a in self.terms for b in other.terms)
		)

	def shifted(self, z2_delta) -> "TermSum":
		return TermSum(self.rank, tuple(t.shifted(z2_delta) for t in self.terms))

	def subst_z_inverse(self) -> "TermSum":
		return TermSum(self.rank, tuple(t.subst_z_inverse() for t in self.terms))

	def subst_q_shift(self, shifts) -> "TermSum":
		return TermSum(self.rank, tuple(t.subst_q_shift(shifts) for t in self.terms))

	def eval_exact(self, v0, zvals):
		acc = mpq(0)
		for t in self.terms:
			acc += t.eval_exact(v0, zvals)
		return acc

	def eval_with_weight(self, v0, lam):
		acc = mpq(0)
		for t in self.terms:
			acc += t.eval_with_weight(v0, lam)
		return acc

	def to_json_obj(self):
		return {"rank": self.rank, "terms": [t.to_json_obj() for t in self.terms]}

	@staticmethod
	def from_json_obj(obj) -> "TermSum":
		terms = tuple(FactoredExpr.from_json_obj(t) for t in obj["terms"])
		return TermSum(int(obj["rank"]), terms)


# ---------------------------------------------------------------------------
# random-point equality
# ---------------------------------------------------------------------------


def poch_finite_expand(f) -> TermSum:
	"""Multiply out a finite Pochhammer factor into a sum of plain monomials.

	(q^a z^mu; q)_m becomes a TermSum of factor-free terms; e.g. with a=0,
	m=2 the result is 1 - (1+q) z^mu + q z^(2 mu).
	"""
	f = PochFactor(*f)
	if f.length is None:
		raise ValueError("poch_finite_expand requires a finite length")
	rank = len(f.zpart)
	mu2 = _mscale(f.zpart, 2)
	coeffs = [ONE]
	for j in range(f.length):
		step = VScalar.v_power(2 * (f.a + j))
		nxt = [coeffs[0]]
		for k in range(1, len(coeffs) + 1):
			prev = coeffs[k] if k < len(coeffs) else ZERO
			nxt.append(prev - coeffs[k - 1] * step)
		coeffs = nxt
	terms = []
	for k, c in enumerate(coeffs):
		if not c.is_zero():
			terms.append(FactoredExpr(rank, c, _mscale(mu2, k)))
	return TermSum(rank, terms)


def _sample_rational(rng):
	while True:
		p = rng.randint(2, 9)
		q = rng.randint(2, 9)
		if p != q:
			break
	r = mpq(p, q)
	return -r if rng.random() < 0.5 else r


def termsum_equal_report(a: TermSum, b: TermSum, seed: int, trials: int = 8, retries: int = 40):
	"""Probabilistic exact equality by evaluation at random rational points.

	Returns a report dict; report["equal"] is the verdict. Points that hit a
	pole of either side are resampled, up to `retries` per trial.
	"""
	if a.rank != b.rank:
		raise ValueError("rank mismatch")
	rng = random.Random(seed)
	points = []
	for _ in range(trials):
		for _attempt in range(retries):
			v0 = _sample_rational(rng)
			zs = [_sample_rational(rng) for _ in range(a.rank)]
			try:
				va = a.eval_exact(v0, zs)
				vb = b.eval_exact(v0, zs)
			except ZeroDivisionError:
				continue
			if va != vb:
				return {
					"equal": False,
					"seed": seed,
					"trials_done": len(points),
					"witness": {
						"v": str(v0),
						"z": [str(z) for z in zs],
						"lhs": str(va),
						"rhs": str(vb),
					},
				}
			points.append({"v": str(v0), "z": [str(z) for z in zs]})
			break
		else:
			raise RuntimeError("could not find a pole-free sample point")
	return {"equal": True, "seed": seed, "trials_done": len(points), "witness": None}


def termsum_equal(a: TermSum, b: TermSum, trials: int = 8, seed: int = 0) -> bool:
	"""Boolean verdict of termsum_equal_report."""
	return termsum_equal_report(a, b, seed, trials=trials)["equal"]


def termsum_equal_weight_report(a: TermSum, b: TermSum, lam, seed: int, trials: int = 8, retries: int = 40):
	"""Like termsum_equal_report, but along the weight specialization for integer lam."""
	if a.rank != b.rank:
		raise ValueError("rank mismatch")
	rng = random.Random(seed)
	done = 0
	for _ in range(trials):
		for _attempt in range(retries):
			v0 = _sample_rational(rng)
			try:
				va = a.eval_with_weight(v0, lam)
				vb = b.eval_with_weight(v0, lam)
			except ZeroDivisionError:
				continue
			if va != vb:
				return {
					"equal": False,
					"seed": seed,
					"trials_done": done,
					"witness": {"v": str(v0), "lam": list(lam), "lhs": str(va), "rhs": str(vb)},
				}
			done += 1
			break
		else:
			raise RuntimeError("could not find a pole-free sample point")
	return {"equal": True, "seed": seed, "trials_done": done, "witness": None}


def termsum_equal_weight(a: TermSum, b: TermSum, lam, trials: int = 8, seed: int = 0) -> bool:
	return termsum_equal_weight_report(a, b, lam, seed, trials=trials)["equal"]


# ---------------------------------------------------------------------------
# truncated series
# ---------------------------------------------------------------------------


class TruncSpec:
	"""Truncation request: rank, total z-degree bound, inclusive v-window."""

	__slots__ = ("rank", "max_z_degree", "v_lo", "v_hi")

	def __init__(self, rank: int, max_z_degree: int, v_window):
		self.rank = rank
		self.max_z_degree = max_z_degree
		self.v_lo, self.v_hi = int(v_window[0]), int(v_window[1])
		if self.v_lo > self.v_hi:
			raise ValueError("empty v-window")
		if max_z_degree < 0:
			raise ValueError("negative z-degree bound")

	def __eq__(self, other):
		if not isinstance(other, TruncSpec):
			return NotImplemented
		return (
			self.rank == other.rank
			and self.max_z_degree == other.max_z_degree
			and (self.v_lo, self.v_hi) == (other.v_lo, other.v_hi)
		)

	def __repr__(self):
		return (
			f"TruncSpec(rank={self.rank}, max_z_degree={self.max_z_degree}, "
			f"v_window=({self.v_lo}, {self.v_hi}))"
		)


class TruncSeries:
	"""Truncated series: nonnegative z-monomials of total degree <= D, each
	with an integer v-Laurent coefficient clipped to the window."""

	__slots__ = ("spec", "data")

	def __init__(self, spec: TruncSpec, data=None):
		self.spec = spec
		self.data = {}
		if data:
			for mono, cmap in data.items():
				self._set(mono, cmap)

	def _set(self, mono, cmap):
		mono = tuple(mono)
		if len(mono) != self.spec.rank or any(x < 0 for x in mono):
			raise ValueError(f"monomial {mono} outside the series domain")
		if sum(mono) > self.spec.max_z_degree:
			raise ValueError(f"monomial {mono} beyond the degree bound")
		clean = {int(p): int(c) for p, c in cmap.items() if c}
		for p in clean:
			if not self.spec.v_lo <= p <= self.spec.v_hi:
				raise ValueError(f"v-power {p} outside the window")
		if clean:
			self.data[mono] = clean

	def coeff(self, mono, vpow) -> int:
		return self.data.get(tuple(mono), {}).get(vpow, 0)

	def laurent(self, mono) -> dict:
		return dict(self.data.get(tuple(mono), {}))

	def __eq__(self, other):
		if not isinstance(other, TruncSeries):
			return NotImplemented
		return self.spec == other.spec and self.data == other.data

	def __add__(self, other):
		if not isinstance(other, TruncSeries):
			return NotImplemented
		if self.spec != other.spec:
			raise ValueError("cannot add series with different truncation specs")
		out = TruncSeries(self.spec)
		for src in (self.data, other.data):
			for mono, cmap in src.items():
				acc = out.data.setdefault(mono, {})
				for p, c in cmap.items():
					nc = acc.get(p, 0) + c
					if nc:
						acc[p] = nc
					else:
						acc.pop(p, None)
		for mono in [m for m, c in out.data.items() if not c]:
			del out.data[mono]
		return out

	def scaled(self, c: int) -> "TruncSeries":
		out = TruncSeries(self.spec)
		if c:
			for mono, cmap in self.data.items():
				out.data[mono] = {p: c * x for p, x in cmap.items()}
		return out

	def __mul__(self, other):
		"""Windowed product: z-degrees capped at D, v-powers clipped to the window."""
		if not isinstance(other, TruncSeries):
			return NotImplemented
		if self.spec != other.spec:
			raise ValueError("cannot multiply series with different truncation specs")
		d = self.spec.max_z_degree
		lo, hi = self.spec.v_lo, self.spec.v_hi
		out = TruncSeries(self.spec)
		for ma, ca in self.data.items():
			ta = sum(ma)
			ia = list(ca.items())
			for mb, cb in other.data.items():
				if ta + sum(mb) > d:
					continue
				mono = _madd(ma, mb)
				acc = out.data.setdefault(mono, {})
				for pa, va in ia:
					for pb, vb in cb.items():
						p = pa + pb
						if p < lo or p > hi:
							continue
						nc = acc.get(p, 0) + va * vb
						if nc:
							acc[p] = nc
						else:
							del acc[p]
		for mono in [m for m, c in out.data.items() if not c]:
			del out.data[mono]
		return out

	def is_zero(self) -> bool:
		return not self.data

	def diff(self, other, limit: int = 5):
		"""First few (mono, v-power, this, that) coefficient mismatches."""
		out = []
		monos = set(self.data) | set(other.data)
		for mono in sorted(monos):
			a = self.data.get(mono, {})
			b = other.data.get(mono, {})
			for p in sorted(set(a) | set(b)):
				ca, cb = a.get(p, 0), b.get(p, 0)
				if ca != cb:
					out.append((mono, p, ca, cb))
					if len(out) >= limit:
						return out
		return out

	def to_json_obj(self):
		terms = []
		for mono in sorted(self.data):
			cmap = self.data[mono]
			terms.append(
				{
					"z": list(mono),
					"v_coeffs": {str(p): str(cmap[p]) for p in sorted(cmap)},
				}
			)
		return {
			"rank": self.spec.rank,
			"max_z_degree": self.spec.max_z_degree,
			"v_window": [self.spec.v_lo, self.spec.v_hi],
			"terms": terms,
		}

	@staticmethod
	def from_json_obj(obj) -> "TruncSeries":
		spec = TruncSpec(int(obj["rank"]), int(obj["max_z_degree"]), obj["v_window"])
		out = TruncSeries(spec)
		for t in obj["terms"]:
			out._set(tuple(int(x) for x in t["z"]), {int(p): int(c) for p, c in t["v_coeffs"].items()})
		return out


def canonical_json(obj) -> str:
	"""Deterministic JSON text: fixed separators, insertion order preserved."""
	return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


def _geom_factor_map(c, mu, d_eff, w_top, rank):
	"""Series terms of 1/(1 - q^c z^mu) as {mono: (off, [coeffs])}."""
	deg = sum(mu)
	out = {}
	j = 0
	while True:
		if deg:
			if j * deg > d_eff:
				break
			if c > 0 and 2 * c * j > w_top:
				break
		elif 2 * c * j > w_top:
			break
		mono = _mscale(mu, j)
		off = 2 * c * j
		prev = out.get(mono)
		if prev is None:
			out[mono] = (off, [1])
		else:
			out[mono] = _laurent_accum(prev, off, [1])
		j += 1
	return out


def _poly_factor_map(c, mu, rank):
	"""(1 - q^c z^mu) as {mono: (off, [coeffs])}."""
	zero = _zero_mono(rank)
	if not any(mu):
		lo = min(0, 2 * c)
		hi = max(0, 2 * c)
		coeffs = [0] * (hi - lo + 1)
		coeffs[0 - lo] += 1
		coeffs[2 * c - lo] -= 1
		return {zero: (lo, coeffs)}
	return {zero: (0, [1]), tuple(mu): (2 * c, [-1])}


def _laurent_accum(prev, off, coeffs):
	poff, pco = prev
	lo = min(poff, off)
	hi = max(poff + len(pco), off + len(coeffs))
	out = [0] * (hi - lo)
	for i, c in enumerate(pco):
		out[poff - lo + i] += c
	for i, c in enumerate(coeffs):
		out[off - lo + i] += c
	return (lo, out)


def _map_mul(state, factor, d_eff, w_top):
	out = {}
	for ma, (offa, la) in state.items():
		if not la:
			continue
		sa = sum(ma)
		for mb, (offb, lb) in factor.items():
			if sa + sum(mb) > d_eff:
				continue
			if not lb:
				continue
			lo = offa + offb
			if lo > w_top:
				continue
			hi = min(w_top, offa + len(la) - 1 + offb + len(lb) - 1)
			prod = poly_mul_clip(la, lb, 0, hi - lo)
			mono = _madd(ma, mb)
			prev = out.get(mono)
			if prev is None:
				out[mono] = (lo, prod)
			else:
				out[mono] = _laurent_accum(prev, lo, prod)
	return out


def _expand_expr_into(acc, expr: FactoredExpr, spec: TruncSpec):
	if expr.den_sums:
		raise ExpansionError("cannot series-expand a term carrying sum-denominators")
	if not expr.coeff:
		return
	n = expr.rank
	if n != spec.rank:
		raise ValueError("rank mismatch")
	if any(e % 2 for e in expr.z2):
		raise ValueError("half-integral z-power cannot be expanded")
	p0 = [e // 2 for e in expr.z2]
	coeff = expr.coeff

	geoms = []  # (c, mu) for 1/(1 - q^c z^mu), mu nonneg nonzero
	polys = []  # (c, mu) for (1 - q^c z^mu), mu nonzero any sign
	inf_den = []  # (a, mu) for 1/(q^a z^mu; q)_inf, mu nonneg nonzero
	inf_den_q = []  # a for 1/(q^a; q)_inf, a >= 1
	inf_num = []  # (a, mu) for (q^a z^mu; q)_inf, mu nonneg nonzero
	inf_num_q = []  # a for (q^a; q)_inf, a >= 1

	for f in expr.den:
		mu = f.zpart
		pos = all(x >= 0 for x in mu)
		neg = all(x <= 0 for x in mu)
		if not any(mu):
			if f.length is None:
				if f.a <= 0:
					raise ExpansionError(
						"non-expandable pure-q factor: infinite denominator with exponent <= 0"
					)
				inf_den_q.append(f.a)
			else:
				val = ONE
				for j in range(f.length):
					val = val * (ONE - VScalar.v_power(2 * (f.a + j)))
				if not val:
					raise ZeroDivisionError("vanishing pure-q denominator")
				coeff = coeff / val
		elif pos:
			if f.length is None:
				inf_den.append((f.a, mu))
			else:
				geoms.extend((f.a + j, mu) for j in range(f.length))
		elif neg:
			if f.length is None:
				raise ExpansionError(
					"non-expandable infinite denominator with inverse powers"
				)
			for j in range(f.length):
				coeff = coeff * -VScalar.v_power(-2 * (f.a + j))
			flip = _mneg(mu)
			for i in range(n):
				p0[i] += f.length * flip[i]
			geoms.extend((-(f.a + j), flip) for j in range(f.length))
		else:
			raise ExpansionError(
				"ambiguous expansion region: denominator factor mixes z signs"
			)

	for f in expr.num:
		mu = f.zpart
		if not any(mu):
			if f.length is None:
				if f.a <= 0:
					return  # contains the exact factor (1 - q^0) = 0
				inf_num_q.append(f.a)
			else:
				val = ONE
				for j in range(f.length):
					val = val * (ONE - VScalar.v_power(2 * (f.a + j)))
				coeff = coeff * val
				if not coeff:
					return
		elif f.length is None:
			if any(x < 0 for x in mu):
				raise ExpansionError(
					"non-expandable infinite numerator with inverse powers"
				)
			inf_num.append((f.a, mu))
		else:
			polys.extend((f.a + j, mu) for j in range(f.length))

	if not coeff:
		return
	# binomials of negative total degree widen the reachable band: a state
	# above the cutoff can still be pulled back into range by one of them
	d_eff = spec.max_z_degree - sum(p0)
	d_eff += sum(max(0, -sum(mu)) for c, mu in polys)
	if d_eff < 0:
		return

	# lower v-bound bookkeeping: sum of negative per-factor minima
	neg_l = min(0, coeff.min_v_power())
	for c, mu in polys:
		neg_l += min(0, 2 * c)
	for c, mu in geoms:
		deg = sum(mu)
		jm = d_eff // deg
		neg_l += min(0, 2 * c * jm)
	for a, mu in inf_den:
		deg = sum(mu)
		if deg > d_eff:
			continue
		jm = d_eff // deg
		for j in range(max(0, -a)):
			neg_l += min(0, 2 * (a + j) * jm)
	for a, mu in inf_num:
		if sum(mu) > d_eff:
			continue
		for j in range(max(0, -a)):
			neg_l += min(0, 2 * (a + j))
	w_top = spec.v_hi - neg_l

	for a in inf_den_q:
		j = 0
		while 2 * (a + j) <= w_top:
			geoms.append((a + j, _zero_mono(n)))
			j += 1
	for a, mu in inf_den:
		if sum(mu) > d_eff:
			continue
		j = 0
		while a + j <= 0 or 2 * (a + j) <= w_top:
			geoms.append((a + j, mu))
			j += 1
	for a in inf_num_q:
		j = 0
		while 2 * (a + j) <= w_top:
			polys.append((a + j, _zero_mono(n)))
			j += 1
	for a, mu in inf_num:
		if sum(mu) > d_eff:
			continue
		j = 0
		while a + j <= 0 or 2 * (a + j) <= w_top:
			polys.append((a + j, mu))
			j += 1

	state = {_zero_mono(n): (0, [1])}
	# negative-degree binomials first, so the degree cutoff in _map_mul
	# never discards a state a later factor would pull back into range
	polys.sort(key=lambda cm: sum(cm[1]))
	for c, mu in polys:
		state = _map_mul(state, _poly_factor_map(c, mu, n), d_eff, w_top)
	for c, mu in geoms:
		state = _map_mul(state, _geom_factor_map(c, mu, d_eff, w_top, n), d_eff, w_top)

	l0 = coeff.min_v_power()
	if l0 <= w_top:
		cw = coeff.window_coeffs(l0, w_top)
		state = _map_mul(state, {_zero_mono(n): (l0, cw)}, d_eff, w_top)
	else:
		return

	width = spec.v_hi - spec.v_lo + 1
	for mono, (off, coeffs) in state.items():
		final = _madd(tuple(p0), mono)
		if any(x < 0 for x in final) or sum(final) > spec.max_z_degree:
			continue
		dense = acc.get(final)
		if dense is None:
			dense = [0] * width
			acc[final] = dense
		for i, cval in enumerate(coeffs):
			p = off + i
			if cval and spec.v_lo <= p <= spec.v_hi:
				dense[p - spec.v_lo] += cval


def expand_termsum(ts: TermSum, spec: TruncSpec) -> TruncSeries:
	"""Expand a TermSum into a TruncSeries, exact within the window.

	Exactness: every kept coefficient (nonnegative monomial of total degree
	at most max_z_degree, v-power inside the window) equals the true series
	coefficient. Working windows are widened internally to absorb factors
	whose expansions reach below v^0, so no contribution at or below the
	requested window top is lost.
	"""
	acc = {}
	for t in ts.terms:
		_expand_expr_into(acc, t, spec)
	out = TruncSeries(spec)
	for mono, dense in acc.items():
		cmap = {spec.v_lo + i: c for i, c in enumerate(dense) if c}
		if cmap:
			out.data[mono] = cmap
	return out


def expand_expr(e: FactoredExpr, spec: TruncSpec) -> TruncSeries:
	return expand_termsum(TermSum(e.rank, (e,)), spec)


# ---------------------------------------------------------------------------
# free-monomial series maps (internal working representation)
# ---------------------------------------------------------------------------


class SeriesMap:
	"""Exactness-agnostic map {z-monomial (any sign): v-Laurent}.

	Used as the working representation for sums built term by term
	(fermionic sums, towers, convolution products). The caller owns the
	truncation argument; clamp() converts to the public TruncSeries form.
	"""

	__slots__ = ("rank", "data")

	def __init__(self, rank: int):
		self.rank = rank
		self.data = {}

	def add_laurent(self, mono, off, coeffs):
		mono = tuple(mono)
		if len(mono) != self.rank:
			raise ValueError("mono rank mismatch")
		if not any(coeffs):
			return
		prev = self.data.get(mono)
		if prev is None:
			self.data[mono] = (off, list(coeffs))
		else:
			self.data[mono] = _laurent_accum(prev, off, list(coeffs))

	def iadd(self, other: "SeriesMap"):
		if other.rank != self.rank:
			raise ValueError("rank mismatch")
		for mono, (off, coeffs) in other.data.items():
			self.add_laurent(mono, off, coeffs)

	def scaled(self, c: int) -> "SeriesMap":
		out = SeriesMap(self.rank)
		if c:
			for mono, (off, coeffs) in self.data.items():
				out.data[mono] = (off, [c * x for x in coeffs])
		return out

	def shifted(self, mono_delta, vpow_delta: int = 0) -> "SeriesMap":
		out = SeriesMap(self.rank)
		md = tuple(mono_delta)
		for mono, (off, coeffs) in self.data.items():
			out.data[_madd(mono, md)] = (off + vpow_delta, list(coeffs))
		return out

	def times(self, other: "SeriesMap", keep, v_top: int) -> "SeriesMap":
		"""Product keeping output monomials selected by keep(mono), with
		v-powers capped at v_top. Exactness is the caller's obligation."""
		out = SeriesMap(self.rank)
		for ma, (offa, la) in self.data.items():
			for mb, (offb, lb) in other.data.items():
				mono = _madd(ma, mb)
				if not keep(mono):
					continue
				lo = offa + offb
				if lo > v_top:
					continue
				hi = min(v_top, offa + len(la) - 1 + offb + len(lb) - 1)
				prod = poly_mul_clip(la, lb, 0, hi - lo)
				if any(prod):
					out.add_laurent(mono, lo, prod)
		return out

	def clamp(self, spec: TruncSpec) -> TruncSeries:
		out = TruncSeries(spec)
		for mono, (off, coeffs) in self.data.items():
			if any(x < 0 for x in mono) or sum(mono) > spec.max_z_degree:
				continue
			cmap = {}
			for i, c in enumerate(coeffs):
				p = off + i
				if c and spec.v_lo <= p <= spec.v_hi:
					cmap[p] = cmap.get(p, 0) + c
			cmap = {p: c for p, c in cmap.items() if c}
			if cmap:
				out.data[mono] = cmap
		return out
