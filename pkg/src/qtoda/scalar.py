"""Exact scalars: arbitrary-precision rationals and the field Q(v).

Everything downstream is computed over the field of rational functions in a
single variable v, with q = v**2 as a derived view (so half-integer q-powers
are plain v-powers and never need special handling). Elements are kept in a
canonical reduced form, which makes equality structural.

A Laurent polynomial is stored as a lowest-power offset plus a dense tuple of
integer coefficients in ascending powers of v.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

from .kernels import poly_mul, poly_mul_clip

Rational = mpq


def rational(a, b=1):
	"""Exact rational constructor; accepts ints, Fractions, mpq, and strings."""
	if isinstance(a, Fraction):
		return mpq(a.numerator, a.denominator) / b
	return mpq(a, b)


# ---------------------------------------------------------------------------
# integer polynomial helpers (dense ascending lists, trimmed, zero == [])
# ---------------------------------------------------------------------------


def _trim(p: list) -> list:
	n = len(p)
	while n and p[n - 1] == 0:
		n -= 1
	del p[n:]
	return p


def _content(p) -> int:
	g = 0
	for c in p:
		g = math.gcd(g, c)
		if g == 1:
			return 1
	return g


def _primitive(p: list) -> list:
	c = _content(p)
	if c > 1:
		return [x // c for x in p]
	return list(p)


def _poly_add(a, b):
	if len(a) < len(b):
		a, b = b, a
	out = list(a)
	for i, c in enumerate(b):
		out[i] += c
	return _trim(out)


def _poly_scale(p, c):
	return [x * c for x in p]


def _prem(a: list, b: list) -> list:
	"""Pseudo-remainder: lc(b)^k * a mod b for the k needed to stay integral."""
	r = list(a)
	db = len(b) - 1
	lcb = b[-1]
	while len(r) - 1 >= db and r:
		dr = len(r) - 1
		lead = r[-1]
		shift = dr - db
		r = [lcb * c for c in r]
		for i, bc in enumerate(b):
			r[shift + i] -= lead * bc
		_trim(r)
	return r


def _poly_gcd(a, b) -> list:
	"""Primitive gcd over Z[v] via the primitive pseudo-remainder sequence."""
	a = _primitive(_trim(list(a)))
	b = _primitive(_trim(list(b)))
	if len(a) < len(b):
		a, b = b, a
	while b:
		a, b = b, _primitive(_prem(a, b))
	if a and a[-1] < 0:
		a = [-c for c in a]
	return a


def _poly_divexact(a, b) -> list:
	"""Exact division in Z[v]; raises if the division does not come out even."""
	r = list(a)
	db = len(b) - 1
	lcb = b[-1]
	nq = len(a) - len(b) + 1
	if nq <= 0:
		if any(a):
			raise ArithmeticError("inexact polynomial division")
		return []
	q = [0] * nq
	for k in range(nq - 1, -1, -1):
		c = r[db + k]
		if c == 0:
			continue
		qc, rem = divmod(c, lcb)
		if rem:
			raise ArithmeticError("inexact polynomial division")
		q[k] = qc
		for i, bc in enumerate(b):
			r[k + i] -= qc * bc
	if any(r):
		raise ArithmeticError("inexact polynomial division")
	return _trim(q)


def _poly_eval(p, x0):
	acc = mpq(0)
	for c in reversed(p):
		acc = acc * x0 + c
	return acc


@lru_cache(maxsize=4096)
def _inv_series(den: tuple, upto: int) -> tuple:
	"""Power-series inverse of den (den[0] == +-1) through degree `upto`."""
	d0 = den[0]
	if d0 not in (1, -1):
		raise ArithmeticError(
			"denominator constant term %r is not a unit; no integer series inverse" % (d0,)
		)
	out = [0] * (upto + 1)
	out[0] = d0
	dd = len(den) - 1
	for k in range(1, upto + 1):
		s = 0
		for j in range(1, min(k, dd) + 1):
			dj = den[j]
			if dj:
				s += dj * out[k - j]
		out[k] = -s * d0
	return tuple(out)


# ---------------------------------------------------------------------------
# VScalar
# ---------------------------------------------------------------------------


class VScalar:
	"""An element of Q(v) in canonical form.

	value == v**noff * num(v) / den(v), where num and den are integer
	coefficient tuples (ascending powers), num and den are coprime over Q,
	their joint integer content is 1, den has a nonzero constant term (pure
	v-powers live in noff) and a positive leading coefficient. Zero is
	(0, (), (1,)). Canonical form makes __eq__ and __hash__ structural.
	"""

	__slots__ = ("noff", "num", "den")

	def __init__(self, noff: int, num: tuple, den: tuple):
		self.noff = noff
		self.num = num
		self.den = den

	# -- construction -------------------------------------------------------

	@staticmethod
	def _normalized(noff: int, num: list, den: list) -> "VScalar":
		num = _trim(list(num))
		den = _trim(list(den))
		if not den:
			raise ZeroDivisionError("zero denominator in VScalar")
		if not num:
			return ZERO
		lo = 0
		while den[lo] == 0:
			lo += 1
		if lo:
			den = den[lo:]
			noff -= lo
		lo = 0
		while num[lo] == 0:
			lo += 1
		if lo:
			num = num[lo:]
			noff += lo
		if len(den) > 1 and len(num) > 1:
			g = _poly_gcd(num, den)
			if len(g) > 1:
				num = _poly_divexact(num, g)
				den = _poly_divexact(den, g)
		c = math.gcd(_content(num), _content(den))
		if c > 1:
			num = [x // c for x in num]
			den = [x // c for x in den]
		if den[-1] < 0:
			num = [-x for x in num]
			den = [-x for x in den]
		return VScalar(noff, tuple(num), tuple(den))

	@staticmethod
	def from_int(c: int) -> "VScalar":
		if c == 0:
			return ZERO
		return VScalar(0, (c,), (1,))

	@staticmethod
	def from_rational(r) -> "VScalar":
		r = rational(r)
		if r == 0:
			return ZERO
		return VScalar(0, (int(r.numerator),), (int(r.denominator),))

	@staticmethod
	def v_power(k: int) -> "VScalar":
		return VScalar(k, (1,), (1,))

	@staticmethod
	def from_laurent(noff: int, coeffs) -> "VScalar":
		return VScalar._normalized(noff, list(coeffs), [1])

	# -- predicates ---------------------------------------------------------

	def is_zero(self) -> bool:
		return not self.num

	def __bool__(self) -> bool:
		return bool(self.num)

	def is_one(self) -> bool:
		return self.noff == 0 and self.num == (1,) and self.den == (1,)

	def is_unit_v_power(self):
		"""Return (sign, k) when self == sign * v**k, else None."""
		if self.den == (1,) and self.num in ((1,), (-1,)):
			return (self.num[0], self.noff)
		return None

	# -- arithmetic ---------------------------------------------------------

	def __neg__(self):
		if not self.num:
			return self
		return VScalar(self.noff, tuple(-c for c in self.num), self.den)

	def __add__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		if not self.num:
			return other
		if not other.num:
			return self
		# common offset
		off = min(self.noff, other.noff)
		a = [0] * (self.noff - off) + list(poly_mul(list(self.num), list(other.den)))
		b = [0] * (other.noff - off) + list(poly_mul(list(other.num), list(self.den)))
		num = _poly_add(a, b)
		den = poly_mul(list(self.den), list(other.den))
		return VScalar._normalized(off, num, den)

	__radd__ = __add__

	def __sub__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		return self + (-other)

	def __rsub__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		return other + (-self)

	def __mul__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		if not self.num or not other.num:
			return ZERO
		n1, d1 = list(self.num), list(self.den)
		n2, d2 = list(other.num), list(other.den)
		g = _poly_gcd(n1, d2)
		if len(g) > 1:
			n1 = _poly_divexact(n1, g)
			d2 = _poly_divexact(d2, g)
		g = _poly_gcd(n2, d1)
		if len(g) > 1:
			n2 = _poly_divexact(n2, g)
			d1 = _poly_divexact(d1, g)
		num = poly_mul(n1, n2)
		den = poly_mul(d1, d2)
		c = math.gcd(_content(num), _content(den))
		if c > 1:
			num = [x // c for x in num]
			den = [x // c for x in den]
		if den[-1] < 0:
			num = [-x for x in num]
			den = [-x for x in den]
		noff = self.noff + other.noff
		# den may have picked up a v-power from cancellation bookkeeping
		lo = 0
		while den[lo] == 0:
			lo += 1
		if lo:
			den = den[lo:]
			noff -= lo
		lo = 0
		while num[lo] == 0:
			lo += 1
		if lo:
			num = num[lo:]
			noff += lo
		return VScalar(noff, tuple(num), tuple(den))

	__rmul__ = __mul__

	def reciprocal(self):
		if not self.num:
			raise ZeroDivisionError("division by zero VScalar")
		num, den = list(self.den), list(self.num)
		noff = -self.noff
		if den[-1] < 0:
			num = [-x for x in num]
			den = [-x for x in den]
		lo = 0
		while den[lo] == 0:
			lo += 1
		if lo:
			den = den[lo:]
			noff -= lo
		return VScalar(noff, tuple(num), tuple(den))

	def __truediv__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		return self * other.reciprocal()

	def __rtruediv__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		return other * self.reciprocal()

	def __pow__(self, k: int):
		if not isinstance(k, int):
			return NotImplemented
		if k == 0:
			return ONE
		base = self if k > 0 else self.reciprocal()
		out = base
		for _ in range(abs(k) - 1):
			out = out * base
		return out

	# -- structure ----------------------------------------------------------

	def __eq__(self, other):
		other = _coerce(other)
		if other is NotImplemented:
			return NotImplemented
		return self.noff == other.noff and self.num == other.num and self.den == other.den

	def __hash__(self):
		return hash((self.noff, self.num, self.den))

	def substitute_v_inverse(self) -> "VScalar":
		"""The image under v -> 1/v."""
		if not self.num:
			return self
		num = list(reversed(self.num))
		den = list(reversed(self.den))
		noff = -(self.noff + len(self.num) - 1) + (len(self.den) - 1)
		return VScalar._normalized(noff, num, den)

	def eval_at(self, v0) -> Rational:
		"""Exact evaluation at a nonzero rational point."""
		v0 = rational(v0)
		if v0 == 0:
			raise ZeroDivisionError("VScalar evaluation at v = 0")
		if not self.num:
			return mpq(0)
		dval = _poly_eval(self.den, v0)
		if dval == 0:
			raise ZeroDivisionError("VScalar evaluation at a pole")
		return _poly_eval(self.num, v0) * v0**self.noff / dval

	def window_coeffs(self, lo: int, hi: int) -> list:
		"""Integer Laurent-series coefficients of self for powers lo..hi.

		Well defined because canonical form forces den(0) != 0; requires the
		constant term of den to be a unit so the series stays integral.
		"""
		if hi < lo:
			return []
		if not self.num:
			return [0] * (hi - lo + 1)
		if self.den == (1,):
			inv = (1,)
		else:
			upto = hi - self.noff
			if upto < 0:
				return [0] * (hi - lo + 1)
			inv = _inv_series(self.den, upto)
		return poly_mul_clip(list(self.num), list(inv), lo - self.noff, hi - self.noff)

	def min_v_power(self) -> int:
		"""Lowest v-power of the Laurent expansion around v = 0 (num nonzero)."""
		if not self.num:
			raise ValueError("zero VScalar has no lowest power")
		return self.noff

	# -- serialization ------------------------------------------------------

	def to_string(self) -> str:
		num_s = _laurent_to_string(self.noff, self.num)
		if self.den == (1,):
			return num_s
		return f"({num_s}) / ({_laurent_to_string(0, self.den)})"

	@staticmethod
	def from_string(s: str) -> "VScalar":
		s = s.strip()
		m = re.fullmatch(r"\((?P<num>.*)\)\s*/\s*\((?P<den>.*)\)", s)
		if m:
			noff, num = _laurent_from_string(m.group("num"))
			doff, den = _laurent_from_string(m.group("den"))
			return VScalar._normalized(noff - doff, num, den)
		noff, num = _laurent_from_string(s)
		return VScalar._normalized(noff, num, [1])

	def __str__(self):
		return self.to_string()

	def __repr__(self):
		return f"VScalar({self.to_string()!r})"


def _coerce(x):
	if isinstance(x, VScalar):
		return x
	if isinstance(x, int):
		return VScalar.from_int(x)
	if isinstance(x, (Fraction, type(mpq()))):
		return VScalar.from_rational(x)
	return NotImplemented


ZERO = VScalar(0, (), (1,))
ONE = VScalar(0, (1,), (1,))


def _laurent_to_string(off: int, coeffs: tuple) -> str:
	if not coeffs:
		return "0"
	parts = []
	for i, c in enumerate(coeffs):
		if c == 0:
			continue
		p = off + i
		if p == 0:
			body = str(abs(c))
		else:
			vp = "v" if p == 1 else f"v^{p}"
			body = vp if abs(c) == 1 else f"{abs(c)}*{vp}"
		if not parts:
			parts.append(body if c > 0 else f"-{body}")
		else:
			parts.append(f"+ {body}" if c > 0 else f"- {body}")
	return " ".join(parts)


_TERM_RE = re.compile(
	r"\s*(?P<sign>[+-])?\s*(?:(?P<coeff>\d+)\s*\*?\s*)?(?:(?P<v>v)(?:\^(?P<pow>-?\d+))?)?\s*"
)


def _laurent_from_string(s: str):
	s = s.strip()
	if s in ("0", ""):
		return 0, []
	terms = {}
	pos = 0
	while pos < len(s):
		m = _TERM_RE.match(s, pos)
		if not m or m.end() == pos:
			raise ValueError(f"cannot parse Laurent polynomial at {s[pos:]!r}")
		sign = -1 if m.group("sign") == "-" else 1
		coeff = m.group("coeff")
		has_v = m.group("v") is not None
		if coeff is None and not has_v:
			raise ValueError(f"cannot parse Laurent polynomial at {s[pos:]!r}")
		c = sign * (int(coeff) if coeff is not None else 1)
		if has_v:
			p = int(m.group("pow")) if m.group("pow") is not None else 1
		else:
			p = 0
		terms[p] = terms.get(p, 0) + c
		pos = m.end()
	lo = min(terms)
	hi = max(terms)
	coeffs = [terms.get(p, 0) for p in range(lo, hi + 1)]
	return lo, coeffs


# ---------------------------------------------------------------------------
# quantum brackets
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def qbracket(m: int) -> VScalar:
	"""[m] = (v^m - v^-m)/(v - v^-1); an integer Laurent polynomial."""
	if m == 0:
		return ZERO
	if m < 0:
		return -qbracket(-m)
	coeffs = [0] * (2 * m - 1)
	coeffs[0::2] = [1] * m
	return VScalar(-(m - 1), tuple(coeffs), (1,))


@lru_cache(maxsize=None)
def qbracket_factorial(m: int) -> VScalar:
	"""[m]! = [m][m-1]...[1] for m >= 0."""
	if m < 0:
		raise ValueError("bracket factorial needs m >= 0")
	if m == 0:
		return ONE
	return qbracket_factorial(m - 1) * qbracket(m)


def qbracket_poch(m: int, k: int) -> VScalar:
	"""Ascending bracket product [m]_k = [m][m+1]...[m+k-1] for k >= 0."""
	if k < 0:
		raise ValueError("bracket Pochhammer needs k >= 0")
	out = ONE
	for j in range(k):
		out = out * qbracket(m + j)
		if not out:
			return ZERO
	return out


def eval_at(s: VScalar, v0) -> Rational:
	"""Module-level alias for VScalar.eval_at."""
	return s.eval_at(v0)
