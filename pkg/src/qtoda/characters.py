"""Principal subspace characters and tower decompositions.

Two independent routes to the same character: summing lattice
configurations over the sites 1..k directly, and the bosonic sum of
scalar-product terms taken at inverted, q-shifted arguments under an
infinite-product prefactor. The tower identities then decompose a
finite-boundary sum into rank-wise factors with explicit transition
coefficients.

Infinite pieces are handled two ways. Right-infinite site intervals are
exact per z-monomial. Sums that are genuinely infinite in another
direction (site cutoffs toward minus infinity, unbounded per-color
weight in products of towers) run under an increasing cutoff until two
successive passes agree on the whole window; the certified cutoff is
reported.
"""

from collections import Counter
from fractions import Fraction

from .fermionic import (
	TowerSpec,
	expand_configs,
	fermionic_sum,
	interval_configs,
	sparse_add,
	sparse_clamp,
	sparse_mul,
	sparse_scale,
	tower_sum_report,
	twist_b2,
)
from .multivar import (
	FactoredExpr,
	PochFactor,
	TermSum,
	TruncSeries,
	TruncSpec,
	expand_expr,
	expand_termsum,
)
from .rootdata import (
	cartan_pairing,
	cone_coordinates,
	interval_root,
	iter_degree,
	iter_dominated,
	iter_up_to_degree,
	norm_sq,
	quad_form,
	rho_pairing,
	vec_add,
	vec_scale,
	vec_sub,
)
from .scalar import VScalar
from .whittaker import WeightExpr, a_squared, jd_explicit


class CharSpec:
	"""Rank, level, and truncation window for a character computation."""

	__slots__ = ("n", "k", "trunc")

	def __init__(self, n: int, k: int, trunc: TruncSpec):
		if n < 1:
			raise ValueError("rank must be positive")
		if k < 0:
			raise ValueError("level must be nonnegative")
		if trunc.rank != n:
			raise ValueError("window rank mismatch")
		self.n = n
		self.k = k
		self.trunc = trunc

	def __repr__(self):
		return f"CharSpec(n={self.n}, k={self.k}, trunc={self.trunc})"


def _one_series(trunc: TruncSpec) -> TruncSeries:
	return sparse_clamp({(0,) * trunc.rank: {0: 1}}, trunc)


def _check_vec(n, d):
	d = tuple(int(x) for x in d)
	if len(d) != n:
		raise ValueError("degree vector rank mismatch")
	if any(x < 0 for x in d):
		raise ValueError("degree must lie in the positive cone")
	return d


def char_fermionic(spec: CharSpec) -> TruncSeries:
	"""Character of the principal subspace from site configurations.

	Particles of color i sit on sites 1..k; every z-monomial coefficient
	is an exact finite sum because each particle contributes at least one
	to its color's weighted site sum.
	"""
	n, k, trunc = spec.n, spec.k, spec.trunc
	if k == 0:
		return _one_series(trunc)
	D = trunc.max_z_degree
	acc = {}
	for beta in iter_up_to_degree(n, D):
		colors = [(1, k, di, min(D, k * di)) for di in beta]
		cfgs = interval_configs(n, beta, colors)
		acc = sparse_add(acc, expand_configs(cfgs, trunc.v_hi))
	return sparse_clamp(acc, trunc)


def _infinite_prefactor(n: int, shifts=None) -> FactoredExpr:
	"""1 / prod over interval roots mu of (q^{1+(shifts,mu)} z^mu; q)_inf."""
	den = []
	for i in range(n + 1):
		for j in range(i + 1, n + 1):
			mu = interval_root(n, i + 1, j)
			a = 1
			if shifts is not None:
				a += sum(s * x for s, x in zip(shifts, mu))
			den.append(PochFactor(a, mu, None))
	return FactoredExpr(n, den=den)


def tilde_j(n: int, d, trunc: TruncSpec) -> TruncSeries:
	"""Scalar-product term at inverted arguments under the full product.

	Expands prod 1/(q z_{i,j})_inf times J_d(q, 1/z_1, ..., 1/z_n); the
	inverse powers expand through the flip rule, so the result is a
	genuine power series in z within the window.
	"""
	d = _check_vec(n, d)
	ts = jd_explicit(n, d).subst_z_inverse().times_expr(_infinite_prefactor(n))
	return expand_termsum(ts, trunc)


def _cartan_shifts(d) -> tuple:
	n = len(d)
	out = []
	for i in range(n):
		s = 2 * d[i]
		if i > 0:
			s -= d[i - 1]
		if i + 1 < n:
			s -= d[i + 1]
		out.append(s)
	return tuple(out)


def char_bosonic(spec: CharSpec) -> TruncSeries:
	"""Character of the principal subspace as a sum over degree vectors.

	Term d carries q^{k(d,d)/2} z^{kd} times the inverted-argument
	expression at z_i -> q^{(Ad)_i} z_i. Every monomial of term d has
	degree at least k|d| componentwise (checked), so the d-loop stops
	once the prefactor leaves the window.
	"""
	n, k, trunc = spec.n, spec.k, spec.trunc
	if k < 1:
		raise ValueError("level must be positive")
	D = trunc.max_z_degree
	out = TruncSeries(trunc)
	for total in range(D // k + 2):
		for d in iter_degree(n, total):
			shifts = _cartan_shifts(d)
			pref = FactoredExpr(
				n, VScalar.v_power(2 * k * quad_form(d)), vec_scale(d, 2 * k)
			)
			ts = jd_explicit(n, d).subst_z_inverse().subst_q_shift(shifts)
			ts = ts.times_expr(_infinite_prefactor(n, shifts)).times_expr(pref)
			for t in ts.terms:
				low = t.min_z2_vector()
				assert all(x >= 2 * k * di for x, di in zip(low, d)), (
					"term monomials dip below the level prefactor"
				)
			if total * k <= D:
				out = out + expand_termsum(ts, trunc)
	return out


def sum_j_one_infty(n: int, trunc: TruncSpec) -> TruncSeries:
	"""Sum over all degrees of the right-infinite interval sum from 1."""
	D = trunc.max_z_degree
	acc = {}
	for gamma in iter_up_to_degree(n, D):
		colors = [(1, None, gi, D) for gi in gamma]
		cfgs = interval_configs(n, gamma, colors)
		acc = sparse_add(acc, expand_configs(cfgs, trunc.v_hi))
	return sparse_clamp(acc, trunc)


def product_check(n: int, trunc: TruncSpec) -> bool:
	"""Degree-summed interval sums against the infinite product."""
	return sum_j_one_infty(n, trunc) == expand_expr(_infinite_prefactor(n), trunc)


# ---------------------------------------------------------------------------
# convolution of interval sums
# ---------------------------------------------------------------------------


_ZERO_INF_CACHE = {}


def j_zero_infty_reflected(n: int, alpha) -> TermSum:
	"""Interval sum over sites from 0 at the reflected weight, resummed.

	Summed termwise the configurations produce inverse powers without a
	floor; the resummed rational form below is what enters the
	convolution, re-expanded in positive powers through the flip rule.
	Site 0 couples to nothing, so splitting it off and translating the
	rest by one site gives a recursion on the total degree; each step
	divides by 1 - q^{-(a,a)/2} z^{-a}.
	"""
	alpha = _check_vec(n, alpha)
	key = (n, alpha)
	if key in _ZERO_INF_CACHE:
		return _ZERO_INF_CACHE[key]
	if not any(alpha):
		out = TermSum(n, (FactoredExpr(n),))
	else:
		zero = (0,) * n
		nn = norm_sq(alpha)
		acc = None
		for delta in iter_dominated(alpha):
			if not any(delta):
				continue
			ap = vec_sub(alpha, delta)
			step = FactoredExpr(
				n,
				VScalar.v_power(norm_sq(ap) - 2 * cartan_pairing(alpha, ap)),
				vec_scale(ap, -2),
				den=[(-nn // 2, vec_scale(alpha, -1), 1)]
				+ [(1, zero, di) for di in delta if di],
			)
			part = j_zero_infty_reflected(n, ap).times_expr(step)
			acc = part if acc is None else acc + part
		out = acc
	_ZERO_INF_CACHE[key] = out
	return out


def convolution_report(n: int, k: int, beta, trunc: TruncSpec) -> dict:
	"""Finite interval sum over 1..k against the twisted-weight convolution.

	The alpha-sum runs over vectors dominated by beta; each term is the
	resummed reflected-weight factor times the right-infinite sum at the
	weight lowered by alpha, scaled by q^{k((a,a)/2)} z^{k a}. Both
	factors are exact per z-monomial, so no cutoff search is needed.
	"""
	beta = _check_vec(n, beta)
	if k < 1:
		raise ValueError("interval needs at least one site")
	if trunc.rank != n:
		raise ValueError("window rank mismatch")
	D = trunc.max_z_degree
	v_hi = trunc.v_hi
	lhs = expand_termsum(fermionic_sum(n, beta, 1, k), trunc)
	total = TruncSeries(trunc)
	terms = 0
	for alpha in iter_dominated(beta):
		terms += 1
		rem = vec_sub(beta, alpha)
		dv = k * norm_sq(alpha)
		dmono = vec_scale(alpha, k)
		neg_alpha = vec_scale(alpha, -1)
		colors = [(1, None, ri, D) for ri in rem]
		cfgs = list(interval_configs(n, rem, colors))
		floor_b = min(
			(twist_b2(w, b2, 1, neg_alpha) for w, b2, _ in cfgs), default=0
		)
		floor_b = min(floor_b, 0)
		hi_a = v_hi - dv - floor_b
		lo_a = min(trunc.v_lo - dv, 0) - 8
		while True:
			a_ser = expand_termsum(
				j_zero_infty_reflected(n, alpha), TruncSpec(n, D, (lo_a, hi_a))
			)
			mins = [min(c) for c in a_ser.data.values() if c]
			floor_a = min(mins, default=0)
			if not mins or floor_a > lo_a:
				break
			lo_a -= 32
		floor_a = min(floor_a, 0)
		b = expand_configs(cfgs, v_hi - dv - floor_a, eps=1, cvec=neg_alpha)
		prod = sparse_mul(a_ser.data, b, v_hi - dv)
		total = total + sparse_clamp(sparse_scale(prod, dv, dmono), trunc)
	diff = lhs.diff(total, 1)
	witness = None
	if diff:
		mono, p, ca, cb = diff[0]
		witness = {"z": list(mono), "v_power": p, "lhs": str(ca), "rhs": str(cb)}
	return {
		"pass": not diff,
		"witness": witness,
		"truncation_bounds": {"exact": True, "alpha_terms": terms},
	}


def convolution_check(n: int, k: int, beta, trunc: TruncSpec) -> bool:
	return convolution_report(n, k, beta, trunc)["pass"]


# ---------------------------------------------------------------------------
# tower decomposition
# ---------------------------------------------------------------------------


def decomposition_coefficient(mu: WeightExpr, nu, r: int, rank=None) -> FactoredExpr:
	"""Transition coefficient d(mu, nu | r) carried by one tower level.

	mu is an offset row for the symbolic top weight; nu a root vector
	whose support must sit inside the row. All weight pairings exit as
	z-monomials (half powers ride in the doubled exponents) or integer
	v-powers through the offsets.
	"""
	o = mu.offsets
	nu = tuple(int(x) for x in nu)
	if rank is None:
		rank = len(nu)
	if len(nu) != rank:
		raise ValueError("root vector rank mismatch")
	if any(x < 0 for x in nu):
		raise ValueError("root vector outside the positive cone")
	if any(nu[j] for j in range(len(o) - 1, rank)):
		raise ValueError("root vector support exceeds the weight row")
	onu = sum(nu[j - 1] * (o[j - 1] - o[j]) for j in range(1, len(o)))
	h = rho_pairing(nu)
	nn = norm_sq(nu)
	vpow = -nn // 2 + h - onu + r * (nn + 2 * onu)
	coeff = VScalar.v_power(vpow)
	if h % 2:
		coeff = -coeff
	zero = (0,) * rank
	return FactoredExpr(
		rank,
		coeff,
		vec_scale(nu, 2 * r - 1),
		den=[(1, zero, 1)] * (2 * h),
	)


def _offset_row_below(offsets, cone):
	"""Offsets of the projected weight one level down: drop the last
	entry and subtract the cone coordinates of the removed root."""
	return tuple(offsets[l] + cone[l] for l in range(len(cone)))


def _tower_theta(n):
	"""Region exponents for a single tower level: every drifting color
	sits at the same scale just outside |z| = 1, the last just inside."""
	return tuple(Fraction(1, 2) for _ in range(n - 1)) + (Fraction(0),)


def _nested_theta(n):
	"""Region exponents for separated boundaries: lower colors drift
	farther, so their scales are strictly ordered."""
	return tuple(Fraction(n - j, n) for j in range(1, n)) + (Fraction(0),)


def _region_keeps(f, theta) -> bool:
	"""Whether the default expansion of a denominator factor agrees with
	the region encoded by theta: |z_j| = |q|^{-theta_j}, so the factor
	q^a z^mu is small there iff a - sum(theta_j mu_j) is positive.

	Small means expand directly, large means flip; the engine always
	flips mu <= 0 and expands mu >= 0 directly, so a factor whose
	region side disagrees, sits on a cell boundary, or mixes signs has
	to be cross-multiplied against the other side of the identity.
	"""
	mu = f.zpart
	a = f.a
	if all(x == 0 for x in mu):
		return a >= 1
	neg = all(x <= 0 for x in mu)
	pos = all(x >= 0 for x in mu)
	if not (neg or pos):
		return False
	e = Fraction(a) - sum((t * x for t, x in zip(theta, mu)), Fraction(0))
	if e == 0:
		return False
	return (e > 0) is bool(pos)


def _cross_terms(factors, n):
	"""Laurent-monomial expansion of prod (q^a z^mu; q)_l over the
	cross-multiplied factors: list of (v_shift, z_shift, sign)."""
	terms = [(0, (0,) * n, 1)]
	for f in factors:
		for j in range(f.length):
			terms = [
				t
				for (dv, dm, s) in terms
				for t in (
					(dv, dm, s),
					(dv + 2 * (f.a + j), vec_add(dm, f.zpart), -s),
				)
			]
	return terms


def lemma_dj_report(n: int, r: int, gamma, trunc: TruncSpec,
			t_start: int = 2, t_cap: int = 40) -> dict:
	"""Single tower level against its factorized value.

	The sum with every boundary at minus infinity except the last equals
	the transition coefficient times the squared row-change factor, with
	the lower weight row read off the cone coordinates of gamma. Factors
	sitting on the wrong side of the tower region (those in inverse
	powers of the drifting colors) multiply the tower side instead of
	being expanded against it.
	"""
	if n < 2:
		raise ValueError("needs at least two cone levels")
	gamma = _check_vec(n, gamma)
	cone = cone_coordinates(gamma, n)
	if cone is None:
		raise ValueError("gamma outside the interval-root cone")
	mu = WeightExpr((0,) * (n + 1))
	nu = WeightExpr(cone)
	rhs_expr = decomposition_coefficient(mu, gamma, r, rank=n).times(
		a_squared(n, mu, nu, rank=n)
	)
	theta = _tower_theta(n)
	keep, cross = [], []
	for f in rhs_expr.den:
		(keep if _region_keeps(f, theta) else cross).append(f)
	pterms = _cross_terms(cross, n)
	assert all(all(x <= 0 for x in dm) for _, dm, _ in pterms), (
		"cross factors must shift monomials downward"
	)
	deg_extra = max(-sum(dm) for _, dm, _ in pterms)
	dv_lo = min(dv for dv, _, _ in pterms)
	dv_hi = max(dv for dv, _, _ in pterms)
	wide = TruncSpec(
		n, trunc.max_z_degree + deg_extra,
		(trunc.v_lo - dv_hi, trunc.v_hi - dv_lo),
	)
	tspec = TowerSpec(n, (None,) * (n - 1) + (r,))
	lhs_wide, rep = tower_sum_report(tspec, gamma, wide, t_start, t_cap)
	acc = {}
	for dv, dm, s in pterms:
		part = sparse_scale(lhs_wide.data, dv, dm)
		if s < 0:
			part = {m: {p: -c for p, c in pm.items()} for m, pm in part.items()}
		acc = sparse_add(acc, part)
	lhs = sparse_clamp(acc, trunc)
	rhs = expand_expr(
		FactoredExpr(
			n, rhs_expr.coeff, rhs_expr.z2, num=rhs_expr.num, den=keep
		),
		trunc,
	)
	diff = lhs.diff(rhs, 1)
	witness = None
	if diff:
		mono, p, ca, cb = diff[0]
		witness = {"z": list(mono), "v_power": p, "lhs": str(ca), "rhs": str(cb)}
	rep = dict(rep)
	rep["crossed_factors"] = len(cross)
	return {"pass": not diff, "witness": witness, "truncation_bounds": rep}


def lemma_dj_check(n: int, r: int, gamma, trunc: TruncSpec) -> bool:
	return lemma_dj_report(n, r, gamma, trunc)["pass"]


def _cone_vectors(rem, i):
	for g in iter_dominated(rem):
		if cone_coordinates(g, i) is not None:
			yield g


def _decompositions(n, beta):
	"""Splittings of beta with the i-th part in the rank-i interval cone;
	yields tuples ordered from level 1 up."""

	def rec(i, rem):
		if i == 1:
			if cone_coordinates(rem, 1) is not None:
				yield (rem,)
			return
		for g in _cone_vectors(rem, i):
			for tail in rec(i - 1, vec_sub(rem, g)):
				yield tail + (g,)

	yield from rec(n, beta)


def _offset_rows(n, decomp):
	"""Accumulated weight offsets per level: row i lists i+1 offsets of
	the level-i weight, built downward from zero at the top."""
	offsets = [None] * (n + 1)
	offsets[n] = (0,) * (n + 1)
	for i in range(n, 1, -1):
		cone = cone_coordinates(decomp[i - 1], i)
		offsets[i - 1] = _offset_row_below(offsets[i], cone)
	return offsets


_TAIL_CACHE = {}


def _rank1_tail(n: int, m: int, r: int, delta: int) -> TermSum:
	"""Right-infinite rank-one sum from site r, resummed to rational form.

	m particles of the first color with the site weight twisted by delta
	per site. Translating every site up by one multiplies the sum by
	q^{m(m+delta)} z^m, and splitting off the particles that sit exactly
	at r (j of them, with their mutual and cross couplings at the left
	end) gives a recursion on m; each step divides by
	1 - q^{m(m+delta)} z^m, which the region classifier then expands on
	whichever side the twist puts it.
	"""
	key = (n, m, r, delta)
	if key in _TAIL_CACHE:
		return _TAIL_CACHE[key]
	if m == 0:
		out = TermSum(n, (FactoredExpr(n),))
	else:
		zero = (0,) * n
		den0 = (m * (m + delta), (m,) + zero[1:], 1)
		acc = None
		for j in range(1, m + 1):
			mj = m - j
			vpow = 2 * (r * (j * j + 2 * j * mj) + delta * r * j
					+ mj * (mj + delta))
			step = FactoredExpr(
				n,
				VScalar.v_power(vpow),
				(2 * (r * j + mj),) + zero[1:],
				den=[den0, (1, zero, j)],
			)
			part = _rank1_tail(n, mj, r, delta).times_expr(step)
			acc = part if acc is None else acc + part
		out = acc
	_TAIL_CACHE[key] = out
	return out


def _level_rational(n, i, gamma, r_i, offrow):
	"""Transition coefficient times squared row-change factor for one
	level, at the level's offset row, embedded at ambient rank n."""
	cone = cone_coordinates(gamma, i)
	mu_row = WeightExpr(tuple(offrow))
	nu_row = WeightExpr(_offset_row_below(offrow, cone))
	d = decomposition_coefficient(mu_row, gamma, r_i, rank=n)
	return d.times(a_squared(i, mu_row, nu_row, rank=n))


def _split_units(ft, theta):
	"""Split the denominator of one factored term into region-consistent
	factors and single units that must be cross-multiplied."""
	kept, bad = [], []
	for f in ft.den:
		if all(x == 0 for x in f.zpart):
			kept.append(f)
			continue
		if f.length is None:
			raise ValueError("infinite z-carrying denominator in a level factor")
		for j in range(f.length):
			u = PochFactor(f.a + j, f.zpart, 1)
			if _region_keeps(u, theta):
				kept.append(u)
			else:
				bad.append((f.a + j, f.zpart))
	return kept, Counter(bad)


def quasi_classical_report(n: int, boundaries, beta, trunc: TruncSpec) -> dict:
	"""Tower sum against its level-by-level decomposition.

	The left side is the finite-boundary tower, exact per monomial. The
	right side sums, over splittings of beta into interval-cone parts, the
	resummed rank-one tail at the first boundary times the transition
	coefficient and squared row-change factor of each higher level at its
	accumulated weight offsets. Denominator units whose expansion region
	disagrees with the separated-boundary scales multiply the tower side
	instead, so the whole comparison is exact and needs no cutoff search.
	"""
	beta = _check_vec(n, beta)
	if trunc.rank != n:
		raise ValueError("window rank mismatch")
	bnds = tuple(int(b) for b in boundaries)
	if len(bnds) != n:
		raise ValueError("need one boundary per level")
	if any(a > b for a, b in zip(bnds, bnds[1:])):
		raise ValueError("boundaries must be nondecreasing")
	if bnds[-1] > 0:
		raise ValueError("decomposition requires the last boundary at most 0")
	theta = _nested_theta(n)
	decs = list(_decompositions(n, beta))
	fts = []
	for decomp in decs:
		offsets = _offset_rows(n, decomp)
		delta1 = offsets[1][0] - offsets[1][1]
		term = _rank1_tail(n, decomp[0][0], bnds[0], delta1)
		for i in range(2, n + 1):
			if any(decomp[i - 1]):
				term = term.times_expr(
					_level_rational(n, i, decomp[i - 1], bnds[i - 1],
							offsets[i])
				)
		fts.extend(term.terms)
	split = [_split_units(ft, theta) for ft in fts]
	punits = Counter()
	for _, bad in split:
		for u, c in bad.items():
			punits[u] = max(punits[u], c)
	rhs = TruncSeries(trunc)
	for ft, (kept, bad) in zip(fts, split):
		extra = []
		for (au, zp), c in sorted(punits.items()):
			extra.extend([(au, zp, 1)] * (c - bad.get((au, zp), 0)))
		rhs = rhs + expand_expr(
			FactoredExpr(
				n, ft.coeff, ft.z2,
				num=tuple(ft.num) + tuple(extra), den=kept,
			),
			trunc,
		)
	plist = [PochFactor(au, zp, 1) for (au, zp), c in sorted(punits.items())
			for _ in range(c)]
	pterms = _cross_terms(plist, n)
	D = trunc.max_z_degree
	deg_hi = D + sum(sum(abs(x) for x in f.zpart) for f in plist)
	dv_lo = min(dv for dv, _, _ in pterms)
	floors = [bnds[j] * beta[j] for j in range(n)]
	colors = [
		(bnds[j], None, floors[j], deg_hi - (sum(floors) - floors[j]))
		for j in range(n)
	]
	data = expand_configs(
		list(interval_configs(n, beta, colors)), trunc.v_hi - dv_lo
	)
	acc = {}
	for dv, dm, s in pterms:
		part = sparse_scale(data, dv, dm)
		if s < 0:
			part = {m: {p: -c for p, c in pm.items()} for m, pm in part.items()}
		acc = sparse_add(acc, part)
	lhs = sparse_clamp(acc, trunc)
	diff = lhs.diff(rhs, 1)
	witness = None
	if diff:
		mono, p, ca, cb = diff[0]
		witness = {"z": list(mono), "v_power": p, "lhs": str(ca), "rhs": str(cb)}
	return {
		"pass": not diff,
		"witness": witness,
		"truncation_bounds": {
			"exact": True,
			"crossed_units": sum(punits.values()),
			"decompositions": len(decs),
		},
	}


def quasi_classical_check(n: int, boundaries, beta, trunc: TruncSpec) -> bool:
	return quasi_classical_report(n, boundaries, beta, trunc)["pass"]
