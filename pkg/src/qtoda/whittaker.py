"""Gelfand-Zetlin pattern data and two exact routes to the scalar products
J_{d_1..d_n}(q, z_1..z_n) attached to Whittaker vectors.

Conventions. The quantum parameter is v with q = v^2, and the z-variables
absorb the symbolic highest weight through z_i = q^{-(lambda+rho, alpha_i)}.
A bracket [lambda_a - lambda_b + c] with a < b then factors into a signed
v-power, a half power of z_{a,b} = z_{a+1} ... z_b, the atom
1 - q^{c-(b-a)} z_{a,b}^{-1}, and 1/(v - 1/v). Every half power and every
1/(v - 1/v) cancels in the exported sums; the assembly functions assert it.
"""

from __future__ import annotations

from gmpy2 import iroot, mpq, mpz

from .multivar import FactoredExpr, PochFactor, TermSum
from .rootdata import interval_root, quad_form, rho_pairing
from .scalar import ONE, VScalar, qbracket, qbracket_poch

_VV = VScalar.v_power(1) - VScalar.v_power(-1)


class GelfandOffsets:
	"""Free offsets m_{k,i} of a pattern, stored by rows i = 0..n-1.

	rows[i][k] = m_{k,i}. The implicit row i = n is zero and each column k
	decreases weakly with i: m_{k,k} >= m_{k,k+1} >= ... >= m_{k,n} = 0.
	"""

	__slots__ = ("n", "rows")

	def __init__(self, n: int, rows):
		rows = tuple(tuple(int(x) for x in row) for row in rows)
		if len(rows) != n:
			raise ValueError("need one row per level below the top")
		for i, row in enumerate(rows):
			if len(row) != i + 1:
				raise ValueError(f"row {i} must have {i + 1} entries")
		for k in range(n):
			col = [rows[i][k] for i in range(k, n)]
			if any(x < 0 for x in col):
				raise ValueError(f"column {k} has a negative entry")
			if any(col[j] < col[j + 1] for j in range(len(col) - 1)):
				raise ValueError(f"column {k} violates monotonicity")
		self.n = n
		self.rows = rows

	def m(self, k: int, i: int) -> int:
		"""Entry m_{k,i} for 0 <= k <= i <= n; the top row is zero."""
		if not 0 <= k <= i <= self.n:
			raise IndexError("offset entry outside the triangle")
		if i == self.n:
			return 0
		return self.rows[i][k]

	def degree(self) -> tuple:
		"""d with d_i = sum of row i-1, the alpha_i content."""
		return tuple(sum(self.rows[i]) for i in range(self.n))

	def __eq__(self, other):
		if not isinstance(other, GelfandOffsets):
			return NotImplemented
		return self.n == other.n and self.rows == other.rows

	def __hash__(self):
		return hash((self.n, self.rows))

	def __repr__(self):
		return f"GelfandOffsets(n={self.n}, rows={self.rows})"


def enumerate_patterns(n: int, d):
	"""Yield every offset pattern of degree d.

	Order is lexicographic in the entry vector read row by row, row 0
	first, k ascending inside a row, values ascending.
	"""
	d = tuple(int(x) for x in d)
	if len(d) != n:
		raise ValueError("degree vector rank mismatch")
	if any(x < 0 for x in d):
		return

	def gen_row(i, prev):
		entry = [0] * (i + 1)

		def rec(k, remaining):
			if k == i:
				entry[k] = remaining
				yield tuple(entry)
				return
			for val in range(min(prev[k], remaining) + 1):
				entry[k] = val
				yield from rec(k + 1, remaining - val)

		yield from rec(0, d[i])

	def dfs(i, acc):
		if i == n:
			yield GelfandOffsets(n, acc)
			return
		prev = acc[i - 1] if i else ()
		for row in gen_row(i, prev):
			acc.append(row)
			yield from dfs(i + 1, acc)
			acc.pop()

	yield from dfs(0, [])


def ht(p: GelfandOffsets) -> int:
	"""Total of all offsets, the height of the pattern."""
	return sum(sum(row) for row in p.rows)


def p_exponent(p: GelfandOffsets, lam=None) -> int:
	"""Exponent of the v-power prefactor of the transition coefficients.

	lam gives the top row (lambda_0..lambda_n) as integers, default all
	zero. The nested sums are read with independent totals. The value
	cancels between a vector and its dual in every exported scalar, so
	nothing downstream depends on it; it is provided for completeness.
	"""
	n = p.n
	if lam is None:
		lam = [0] * (n + 1)
	lam = [int(x) for x in lam]
	if len(lam) != n + 1:
		raise ValueError("need n+1 top-row values")

	def lam_at(k, i):
		return lam[k] - p.m(k, i)

	total = 0
	for i in range(1, n + 1):
		s_low = sum(lam_at(k, i - 1) for k in range(i))
		s_high = sum(lam_at(k, i) for k in range(i + 1))
		cross_low = sum(
			lam_at(k, i - 1) * lam_at(l, i - 1)
			for k in range(i)
			for l in range(k + 1, i)
		)
		cross_high = sum(
			lam_at(k, i) * lam_at(l, i)
			for k in range(i + 1)
			for l in range(k + 1, i + 1)
		)
		pi = (i - 1) * (s_low * (s_low - s_high) - cross_low + cross_high)
		pi -= sum(k * (i - k) * (lam_at(k, i - 1) - lam_at(k, i)) for k in range(1, i))
		total += pi
	return total


class WeightExpr:
	"""Offsets c_k of a weight sum_k (lambda_k - c_k) eps_k, lambda symbolic."""

	__slots__ = ("offsets",)

	def __init__(self, offsets):
		self.offsets = tuple(int(x) for x in offsets)

	@property
	def rank(self) -> int:
		return len(self.offsets) - 1

	def __getitem__(self, k):
		return self.offsets[k]

	def __len__(self):
		return len(self.offsets)

	def __eq__(self, other):
		if not isinstance(other, WeightExpr):
			return NotImplemented
		return self.offsets == other.offsets

	def __hash__(self):
		return hash(self.offsets)

	def __repr__(self):
		return f"WeightExpr({self.offsets})"

	def shifted(self, deltas) -> "WeightExpr":
		return WeightExpr(tuple(c + int(x) for c, x in zip(self.offsets, deltas)))


def weight_row(p: GelfandOffsets, i: int) -> WeightExpr:
	"""Row i of the weight triangle as offsets (m_{0,i}, ..., m_{i,i})."""
	return WeightExpr(tuple(p.m(k, i) for k in range(i + 1)))


def bracket_to_factored(a: int, b: int, c: int, rank: int) -> FactoredExpr:
	"""[lambda_a - lambda_b + c] as a factored expression in q and z.

	For a == b the bracket is the scalar [c]. For a < b the z-monomial
	carries a half power of z_{a,b} (odd doubled exponent); substituting
	any integer weight reproduces the plain bracket value.
	"""
	if a > b:
		raise ValueError("bracket indices must satisfy a <= b")
	if a == b:
		return FactoredExpr(rank, coeff=qbracket(c))
	return bracket_poch_to_factored(a, b, c, 1, rank)


def bracket_poch_to_factored(a: int, b: int, c: int, m: int, rank: int) -> FactoredExpr:
	"""[lambda_a - lambda_b + c]_m as a single factored expression.

	Equal to the product of the m single brackets at c, c+1, ..., c+m-1.
	"""
	if a == b:
		return FactoredExpr(rank, coeff=qbracket_poch(c, m))
	if not 0 <= a < b <= rank:
		raise ValueError("weight indices out of range")
	if m < 0:
		raise ValueError("bracket Pochhammer needs m >= 0")
	if m == 0:
		return FactoredExpr(rank)
	mu = interval_root(rank, a + 1, b)
	coeff = VScalar.v_power(m * (b - a - c) - m * (m - 1) // 2) * (_VV ** (-m))
	if m % 2:
		coeff = -coeff
	return FactoredExpr(
		rank,
		coeff,
		tuple(m * x for x in mu),
		num=[PochFactor(c - (b - a), tuple(-x for x in mu), m)],
	)


def a_squared(i: int, mu: WeightExpr, nu: WeightExpr, rank=None) -> FactoredExpr:
	"""Squared transition coefficient between consecutive weight rows.

	mu has i+1 entries and nu has i; every difference mu_k - nu_k (offset
	difference nu[k] - mu[k]) must be a nonnegative integer. The result is
	the inverse of a product of three bracket families and is invariant
	under v -> 1/v, so no square root is ever needed.
	"""
	if len(mu) != i + 1 or len(nu) != i:
		raise ValueError("weight rows of wrong length")
	if rank is None:
		rank = i
	diffs = [nu[k] - mu[k] for k in range(i)]
	if any(x < 0 for x in diffs):
		raise ValueError("weight rows must differ by nonnegative integers")
	zero = (0,) * rank
	acc = FactoredExpr(rank)
	for k in range(i):
		m = diffs[k]
		if not m:
			continue
		# [m]! = (-1)^m v^{-m(m+1)/2} (v - 1/v)^{-m} (q)_m
		coeff = VScalar.v_power(-m * (m + 1) // 2) * (_VV ** (-m))
		if m % 2:
			coeff = -coeff
		acc = acc.times(FactoredExpr(rank, coeff, num=[PochFactor(1, zero, m)]))
	for k in range(i):
		for l in range(k + 1, i):
			c = nu[l] - nu[k] - k + l + 1
			acc = acc.times(bracket_poch_to_factored(k, l, c, diffs[k], rank))
	for k in range(i):
		for l in range(k + 1, i + 1):
			c = mu[l] - nu[k] - k + l
			acc = acc.times(bracket_poch_to_factored(k, l, c, diffs[k], rank))
	return acc.reciprocal()


def _signed_bracket(l, k, c, rank):
	# [lambda_l - lambda_k + c] for any l, k using [-x] = -[x]
	if l <= k:
		return bracket_to_factored(l, k, c, rank)
	return bracket_to_factored(k, l, -c, rank).scaled(-ONE)


def chevalley_c_squared(i: int, k: int, p: GelfandOffsets, rank=None) -> FactoredExpr:
	"""Squared raising coefficient c_{k,i-1} on the pattern p.

	Carries the leading minus sign of the factorized form. Brackets with
	reversed index order are normalized through [-x] = -[x].
	"""
	n = p.n
	if not 1 <= i <= n or not 0 <= k <= i - 1:
		raise ValueError("entry outside the triangle")
	if rank is None:
		rank = n

	def arg(l, j, shift):
		# lambda_{l,j} - lambda_{k,i-1} + shift = lambda_l - lambda_k + c
		return p.m(k, i - 1) - p.m(l, j) + shift

	num = FactoredExpr(rank)
	for l in range(i - 1):
		num = num.times(_signed_bracket(l, k, arg(l, i - 2, -l + k - 1), rank))
	for l in range(i + 1):
		num = num.times(_signed_bracket(l, k, arg(l, i, -l + k), rank))
	den = FactoredExpr(rank)
	for l in range(i):
		if l == k:
			continue
		den = den.times(_signed_bracket(l, k, arg(l, i - 1, -l + k - 1), rank))
		den = den.times(_signed_bracket(l, k, arg(l, i - 1, -l + k), rank))
	if den.coeff.is_zero():
		raise ValueError("non-generic pattern")
	return num.times(den.reciprocal()).scaled(-ONE)


def scalar_product_J(n: int, d) -> TermSum:
	"""Scalar product of the Whittaker vector with its dual at weight d.

	Assembled pattern by pattern from the squared transition coefficients:
	prefactor v^{-(b,b)/2 + (lambda,b)} times the sum over patterns of
	((1-v^2)(1-v^-2))^{-ht} prod_i A_i^2. All (v - 1/v) powers and all
	half z-powers cancel; each term is checked for both before it is kept.
	"""
	d = tuple(int(x) for x in d)
	if len(d) != n:
		raise ValueError("degree vector rank mismatch")
	if any(x < 0 for x in d):
		raise ValueError("degree must lie in the positive cone")
	pref_coeff = VScalar.v_power(-quad_form(d) - rho_pairing(d))
	pref_z2 = tuple(-x for x in d)
	terms = []
	for p in enumerate_patterns(n, d):
		h = ht(p)
		# ((1-v^2)(1-v^-2))^{-ht} = (-1)^ht (v - 1/v)^{-2 ht}
		coeff0 = _VV ** (-2 * h)
		if h % 2:
			coeff0 = -coeff0
		acc = FactoredExpr(n, coeff0)
		for i in range(1, n + 1):
			try:
				acc = acc.times(
					a_squared(i, weight_row(p, i), weight_row(p, i - 1), rank=n)
				)
			except ZeroDivisionError:
				raise ValueError("pattern contributes pole") from None
		acc = acc.scaled(pref_coeff).shifted(pref_z2)
		if acc.coeff.is_unit_v_power() is None:
			raise AssertionError("bracket v-power bookkeeping failed to cancel")
		if any(x % 2 for x in acc.z2):
			raise AssertionError("half z-powers failed to cancel")
		terms.append(acc)
	return TermSum(n, terms)


def jd_explicit(n: int, d) -> TermSum:
	"""Explicit pattern sum for the scalar product, one term per pattern.

	Each term carries a sign, an integer q-power, a z-monomial, and three
	denominator families of finite Pochhammer factors.
	"""
	d = tuple(int(x) for x in d)
	if len(d) != n:
		raise ValueError("degree vector rank mismatch")
	if any(x < 0 for x in d):
		raise ValueError("degree must lie in the positive cone")
	zero = (0,) * n
	terms = []
	for p in enumerate_patterns(n, d):
		diag = sum(p.m(i, i) for i in range(n))
		pm = 0
		for i in range(n):
			for l in range(i + 1):
				for k in range(l):
					pm -= p.m(k, i) * p.m(l, i)
			for l in range(i):
				for k in range(l):
					pm += p.m(k, i) * p.m(l, i - 1)
			for k in range(i):
				pm += p.m(k, i) * (p.m(k, i) - 1) // 2
		coeff = VScalar.v_power(2 * pm)
		if (sum(d) - diag) % 2:
			coeff = -coeff
		z2 = tuple(
			2 * sum(p.m(k, i - 1) for k in range(j) for i in range(j + 1, n + 1))
			for j in range(1, n + 1)
		)
		den = []
		for i in range(1, n + 1):
			for k in range(i):
				den.append(PochFactor(1, zero, p.m(k, i - 1) - p.m(k, i)))
			for l in range(1, i):
				for k in range(l):
					root = interval_root(n, k + 1, l)
					den.append(
						PochFactor(
							p.m(k, i) - p.m(l, i - 1),
							root,
							p.m(k, i - 1) - p.m(k, i),
						)
					)
			for l in range(1, i + 1):
				for k in range(l):
					root = interval_root(n, k + 1, l)
					den.append(
						PochFactor(
							p.m(k, i) - p.m(l, i) + 1,
							root,
							p.m(k, i - 1) - p.m(k, i),
						)
					)
		terms.append(FactoredExpr(n, coeff, z2, den=den))
	return TermSum(n, terms)


def _root_rational(x, r: int):
	num, den = x.numerator, x.denominator
	neg = num < 0
	if neg and r % 2 == 0:
		raise ValueError("no exact rational root")
	rn, okn = iroot(mpz(abs(num)), r)
	rd, okd = iroot(mpz(den), r)
	if not (okn and okd):
		raise ValueError("no exact rational root")
	out = mpq(rn, rd)
	return -out if neg else out


def _pow_exact(v0, x):
	x = mpq(x)
	r = int(x.denominator)
	if r == 1:
		return v0 ** int(x)
	return _root_rational(v0, r) ** int(x.numerator)


def verify_whittaker_identity(i: int, a, b, v0=2) -> bool:
	"""Check the rational bracket identity behind the Whittaker condition.

	sum_{l=0}^{i} (prod_k [a_k - b_l] / prod_{k != l} [b_k - b_l])
	  * v^{-sum a + sum_{k != l} b_k}  =  1

	evaluated exactly at the rational point v0, brackets realized as
	(v0^x - v0^-x)/(v0 - 1/v0). Rational entries need v0 to admit the
	matching exact root; integer entries always work.
	"""
	a = [mpq(x) for x in a]
	b = [mpq(x) for x in b]
	if len(a) != i or len(b) != i + 1:
		raise ValueError("need i upper and i+1 lower parameters")
	if len(set(b)) != len(b):
		raise ValueError("coincident b parameters")
	v0 = mpq(v0)
	if v0 == 0 or abs(v0) == 1:
		raise ValueError("v0 must avoid 0 and units")

	def br(x):
		return (_pow_exact(v0, x) - _pow_exact(v0, -x)) / (v0 - 1 / v0)

	total = mpq(0)
	sum_a = sum(a)
	sum_b = sum(b)
	for l in range(i + 1):
		numer = mpq(1)
		for k in range(i):
			numer *= br(a[k] - b[l])
		denom = mpq(1)
		for k in range(i + 1):
			if k != l:
				denom *= br(b[k] - b[l])
		total += numer / denom * _pow_exact(v0, -sum_a + sum_b - b[l])
	return total == 1
