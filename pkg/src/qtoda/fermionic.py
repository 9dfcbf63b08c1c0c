"""Fermionic configuration sums over integer intervals.

A configuration places l_{t,i} particles of color i at integer sites t.
Writing gamma_t = sum_i l_{t,i} alpha_i, each configuration is weighted by

    q^{(1/2) sum_{t,t'} min(t,t') (gamma_t, gamma_t')}
    * prod_i z_i^{sum_t t l_{t,i}} / prod_{t,i} (q)_{l_{t,i}}

and the interval sums run over all configurations with prescribed column
sums. The symbolic weight never appears directly: its entire contribution
is the z-monomial, and shifted weights eps*lambda + c enter through the
twist parameters (eps, c) below.

Right-infinite intervals are exact per z-monomial: fixing the monomial
bounds the support, so each window coefficient is a finite sum. Left ends
at minus infinity are realized by a decreasing cutoff with stabilization
detection; the certified cutoff is part of the returned report.
"""

from __future__ import annotations

from itertools import product as _iterprod

from .kernels import poly_mul_clip
from .multivar import FactoredExpr, TermSum, TruncSeries, TruncSpec, termsum_equal
from .rootdata import cartan_pairing, norm_sq, rho_pairing, vec_add
from .scalar import VScalar


class Config:
	"""Particle numbers l_{t,i} on a finite site window [r, s], colors 1..n."""

	__slots__ = ("n", "r", "s", "rows")

	def __init__(self, n: int, r: int, s: int, rows):
		if r > s:
			raise ValueError("empty site window")
		rows = tuple(tuple(int(x) for x in row) for row in rows)
		if len(rows) != s - r + 1:
			raise ValueError("need one row per site")
		for row in rows:
			if len(row) != n or any(x < 0 for x in row):
				raise ValueError("rows must be nonnegative color vectors")
		self.n = n
		self.r = r
		self.s = s
		self.rows = rows

	def gamma(self, t: int) -> tuple:
		"""Color vector at site t (zero outside the window)."""
		if self.r <= t <= self.s:
			return self.rows[t - self.r]
		return (0,) * self.n

	def column_sums(self) -> tuple:
		return tuple(sum(row[i] for row in self.rows) for i in range(self.n))

	def __repr__(self):
		return f"Config(n={self.n}, r={self.r}, s={self.s}, rows={self.rows})"


def b_form(config: Config):
	"""(integer q-exponent, z-exponent vector) of a configuration.

	The q-part is computed through the running tails G_s = sum_{t >= s}
	gamma_t, which turns the min-weighted double sum into
	(1/2)[r (beta, beta) + sum_{s > r} (G_s, G_s)]; each tail norm is even,
	so the half is an integer (asserted). The weight-dependent part is
	exactly the monomial prod_i z_i^{w_i} with w_i = sum_t t l_{t,i}.
	"""
	n = config.n
	beta = config.column_sums()
	twice = config.r * norm_sq(beta)
	tail = beta
	for row in config.rows[:-1]:
		tail = tuple(a - b for a, b in zip(tail, row))
		twice += norm_sq(tail)
	assert twice % 2 == 0, "bilinear form produced a half-integer exponent"
	w = tuple(
		sum(t * row[i] for t, row in zip(range(config.r, config.s + 1), config.rows))
		for i in range(n)
	)
	return twice // 2, w


# ---------------------------------------------------------------------------
# configuration engine
# ---------------------------------------------------------------------------


def _color_placements(d: int, site_lo: int, site_hi, w_lo: int, w_hi: int):
	"""Site multisets for d particles of one color.

	Yields (placement, w) with placement a tuple of (site, count) pairs and
	w the weighted site sum, restricted to w_lo <= w <= w_hi. A None upper
	site bound is derived from the w window (particles sit at nondecreasing
	sites, so the remaining ones weigh at least the current site each).
	"""
	if d == 0:
		if w_lo <= 0 <= w_hi:
			yield (), 0
		return
	if site_hi is None:
		site_hi = w_hi - site_lo * (d - 1)
	if site_hi < site_lo:
		return

	def rec(t, remaining, w, acc):
		if remaining == 0:
			if w >= w_lo:
				yield tuple(acc), w
			return
		if w + remaining * site_hi < w_lo:
			return
		while t <= site_hi and w + remaining * t <= w_hi:
			for cnt in range(1, remaining + 1):
				acc.append((t, cnt))
				yield from rec(t + 1, remaining - cnt, w + cnt * t, acc)
				acc.pop()
			t += 1

	yield from rec(site_lo, d, 0, [])


def interval_configs(n: int, d, colors):
	"""All joint configurations as (w, b2, counts) triples.

	colors[i] = (site_lo, site_hi_or_None, w_lo, w_hi) for color i+1; w is
	the per-color weighted site sum vector, b2 twice the bilinear-form
	exponent, counts the multiset of nonzero particle numbers. The twist
	and the interval left end never enter b2: the tail formula only sees
	occupied sites.
	"""
	d = tuple(int(x) for x in d)
	if len(colors) != len(d):
		raise ValueError("need one site window per color")
	per_color = []
	for di, spec in zip(d, colors):
		lst = list(_color_placements(di, *spec))
		if not lst:
			return
		per_color.append(lst)
	for combo in _iterprod(*per_color):
		sites = {}
		for i, (placement, _w) in enumerate(combo):
			for t, cnt in placement:
				sites.setdefault(t, [0] * n)[i] += cnt
		w = tuple(item[1] for item in combo)
		order = sorted(sites)
		twice = 0
		if order:
			tail = d
			prev = None
			for t in order:
				if prev is None:
					twice += t * norm_sq(tail)
				else:
					twice += (t - prev) * norm_sq(tail)
				tail = tuple(a - b for a, b in zip(tail, sites[t]))
				prev = t
		assert twice % 2 == 0, "bilinear form produced a half-integer exponent"
		counts = tuple(c for t in order for c in sites[t] if c)
		yield w, twice, counts


def _inv_poch_window(counts, qmax: int) -> list:
	"""Coefficients of prod 1/(q)_l up to q^qmax (ascending, exact)."""
	out = [1] + [0] * qmax
	for l in counts:
		for j in range(1, l + 1):
			geom = [1 if k % j == 0 else 0 for k in range(qmax + 1)]
			out = poly_mul_clip(out, geom, 0, qmax)
	return out


def twist_b2(w, b2: int, eps: int, cvec, lin=None) -> int:
	"""Exponent shift for the weight eps*lambda + c: the (lambda+rho)-part
	of the form becomes eps-signed z-powers plus this pure q-correction.
	lin adds a raw per-variable shift 2*sum(lin_j w_j), the effect of
	substituting q^{lin_j} z_j for z_j."""
	extra = (eps - 1) * rho_pairing(w)
	if cvec is not None:
		extra -= cartan_pairing(cvec, w)
	if lin is not None:
		extra += sum(a * b for a, b in zip(lin, w))
	return b2 + 2 * extra


def expand_configs(cfgs, ceiling: int, eps: int = 1, cvec=None, lin=None) -> dict:
	"""Sparse series {mono: {v-power: coeff}} from config triples.

	Keeps every v-power up to the ceiling; monomials are unrestricted (the
	caller clamps). eps = -1 negates the z-monomials, matching weights of
	the form c - lambda.
	"""
	data = {}
	for w, b2, counts in cfgs:
		base = twist_b2(w, b2, eps, cvec, lin)
		if base > ceiling:
			continue
		mono = w if eps == 1 else tuple(-x for x in w)
		qmax = (ceiling - base) // 2
		row = _inv_poch_window(counts, qmax)
		acc = data.setdefault(mono, {})
		for j, cj in enumerate(row):
			if cj:
				p = base + 2 * j
				acc[p] = acc.get(p, 0) + cj
	return data


def sparse_mul(a: dict, b: dict, ceiling: int) -> dict:
	out = {}
	for ma, pa in a.items():
		for mb, pb in b.items():
			mono = vec_add(ma, mb)
			acc = None
			for p1, c1 in pa.items():
				for p2, c2 in pb.items():
					p = p1 + p2
					if p > ceiling:
						continue
					if acc is None:
						acc = out.setdefault(mono, {})
					acc[p] = acc.get(p, 0) + c1 * c2
	return out


def sparse_add(a: dict, b: dict) -> dict:
	out = {m: dict(p) for m, p in a.items()}
	for m, pb in b.items():
		acc = out.setdefault(m, {})
		for p, c in pb.items():
			acc[p] = acc.get(p, 0) + c
	return out


def sparse_scale(a: dict, dv: int, dmono) -> dict:
	"""Multiply by v^dv * z^dmono."""
	out = {}
	for m, pm in a.items():
		out[vec_add(m, dmono)] = {p + dv: c for p, c in pm.items()}
	return out


def sparse_floor(a: dict):
	"""Smallest v-power present, or None for the empty series."""
	lows = [min(pm) for pm in a.values() if pm]
	return min(lows) if lows else None


def sparse_clamp(data: dict, spec: TruncSpec) -> TruncSeries:
	"""Restrict to the public window: nonnegative monomials within the
	degree bound, v-powers inside the window."""
	out = TruncSeries(spec)
	for mono, pm in data.items():
		if any(x < 0 for x in mono) or sum(mono) > spec.max_z_degree:
			continue
		keep = {p: c for p, c in pm.items() if spec.v_lo <= p <= spec.v_hi and c}
		if keep:
			out.data[tuple(mono)] = keep
	return out


# ---------------------------------------------------------------------------
# public sums
# ---------------------------------------------------------------------------


def _check_degree(n, d):
	d = tuple(int(x) for x in d)
	if len(d) != n:
		raise ValueError("degree vector rank mismatch")
	if any(x < 0 for x in d):
		raise ValueError("degree must lie in the positive cone")
	return d


def fermionic_sum(n: int, d, r: int, s: int) -> TermSum:
	"""The flat interval sum over [r, s] as an exact term sum."""
	d = _check_degree(n, d)
	if r > s:
		raise ValueError("empty interval")
	zero = (0,) * n
	colors = [(r, s, r * di, s * di) for di in d]
	terms = []
	for w, b2, counts in interval_configs(n, d, colors):
		terms.append(
			FactoredExpr(
				n,
				VScalar.v_power(b2),
				tuple(2 * x for x in w),
				den=[(1, zero, l) for l in counts],
			)
		)
	return TermSum(n, terms)


def fermionic_sum_series(n: int, d, r: int, spec: TruncSpec) -> TruncSeries:
	"""The right-infinite sum on [r, oo) expanded into the window, exactly.

	Each stored monomial bounds every per-color site sum by the degree
	bound, which bounds the support, so no truncation in t is involved.
	"""
	d = _check_degree(n, d)
	if spec.rank != n:
		raise ValueError("spec rank mismatch")
	D = spec.max_z_degree
	colors = [(r, None, 0, D) for _ in d]
	cfgs = interval_configs(n, d, colors)
	return sparse_clamp(expand_configs(cfgs, spec.v_hi), spec)


class TowerSpec:
	"""Nondecreasing cone boundaries r_1 <= ... <= r_n, None meaning -oo.

	Color j may occupy sites t >= r_j; the right end is +oo. This encodes
	the rule gamma_t in Q+_i exactly for r_i <= t < r_{i+1}.
	"""

	__slots__ = ("n", "boundaries")

	def __init__(self, n: int, boundaries):
		bnds = tuple(None if b is None else int(b) for b in boundaries)
		if len(bnds) != n:
			raise ValueError("need one boundary per cone level")
		last_int = None
		seen_int = False
		for b in bnds:
			if b is None:
				if seen_int:
					raise ValueError("boundaries must be nondecreasing")
			else:
				if last_int is not None and b < last_int:
					raise ValueError("boundaries must be nondecreasing")
				last_int = b
				seen_int = True
		self.n = n
		self.boundaries = bnds

	@property
	def has_minus_infinity(self) -> bool:
		return any(b is None for b in self.boundaries)

	def __repr__(self):
		return f"TowerSpec(n={self.n}, boundaries={self.boundaries})"


def _tower_sparse(tspec: TowerSpec, beta, trunc: TruncSpec, cutoff, ceiling):
	D = trunc.max_z_degree
	colors = []
	for b in tspec.boundaries:
		lo = -cutoff if b is None else b
		colors.append((lo, None, 0, D))
	cfgs = interval_configs(tspec.n, beta, colors)
	return expand_configs(cfgs, ceiling)


def tower_sum_report(tspec: TowerSpec, beta, trunc: TruncSpec, t_start: int = 2, t_cap: int = 40):
	"""Cone-constrained tower sum clamped to the window, with certificate.

	Finite boundaries give an exact single pass. Any -oo boundary is
	realized by a decreasing cutoff -T, raised until two successive values
	agree on the whole window; failure to stabilize raises.
	"""
	beta = _check_degree(tspec.n, beta)
	if trunc.rank != tspec.n:
		raise ValueError("spec rank mismatch")
	if not tspec.has_minus_infinity:
		data = _tower_sparse(tspec, beta, trunc, 0, trunc.v_hi)
		series = sparse_clamp(data, trunc)
		return series, {"exact": True, "minus_infinity_cutoff": None}
	prev = None
	prev_t = None
	t = t_start
	while t <= t_cap:
		data = _tower_sparse(tspec, beta, trunc, t, trunc.v_hi)
		series = sparse_clamp(data, trunc)
		if prev is not None and series == prev:
			return series, {
				"exact": False,
				"minus_infinity_cutoff": -prev_t,
				"confirmed_at": -t,
			}
		prev = series
		prev_t = t
		t += 1
	raise ValueError(
		f"tower sum failed to stabilize by cutoff -{t_cap}: "
		f"window coefficients still changing"
	)


def tower_sum(tspec: TowerSpec, beta, trunc: TruncSpec) -> TruncSeries:
	return tower_sum_report(tspec, beta, trunc)[0]


def shift_check(n: int, beta, r: int, s: int, trials: int = 6, seed: int = 0) -> bool:
	"""Interval translation: [r+1, s+1] picks up q^{(beta,beta)/2} z^beta."""
	beta = _check_degree(n, beta)
	lhs = fermionic_sum(n, beta, r + 1, s + 1)
	shift = FactoredExpr(n, VScalar.v_power(norm_sq(beta)), tuple(2 * x for x in beta))
	rhs = fermionic_sum(n, beta, r, s).times_expr(shift)
	return termsum_equal(lhs, rhs, trials=trials, seed=seed)
