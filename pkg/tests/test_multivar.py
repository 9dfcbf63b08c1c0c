"""Factored-expression and truncated-series tests.

The expansion engine is checked against classical q-series identities whose
other side is computed through scalar-field window coefficients only, plus
hand-frozen small windows.
"""

import random

import pytest
from gmpy2 import mpq

from qtoda.multivar import (
	ExpansionError,
	FactoredExpr,
	PochFactor,
	SeriesMap,
	TermSum,
	TruncSeries,
	TruncSpec,
	canonical_json,
	expand_expr,
	expand_termsum,
	poch_finite_expand,
	termsum_equal,
	termsum_equal_report,
	termsum_equal_weight_report,
)
from qtoda.scalar import ONE, VScalar, ZERO, qbracket


def q_poch_scalar(a: int, m: int) -> VScalar:
	"""(q^a; q)_m as a scalar."""
	out = ONE
	for j in range(m):
		out = out * (ONE - VScalar.v_power(2 * (a + j)))
	return out


def series_from_vscalars(spec, assign) -> TruncSeries:
	"""Build the series {mono: scalar} through window coefficients only."""
	out = TruncSeries(spec)
	for mono, s in assign.items():
		coeffs = s.window_coeffs(spec.v_lo, spec.v_hi)
		cmap = {spec.v_lo + i: c for i, c in enumerate(coeffs) if c}
		if cmap:
			out.data[tuple(mono)] = cmap
	return out


class TestExpandFinite:
	def test_poch_polynomial(self):
		e = FactoredExpr(1, num=[(1, (1,), 2)])
		got = expand_expr(e, TruncSpec(1, 3, (-10, 10)))
		assert got.laurent((0,)) == {0: 1}
		assert got.laurent((1,)) == {2: -1, 4: -1}
		assert got.laurent((2,)) == {6: 1}
		assert got.laurent((3,)) == {}

	def test_monomial_prefactor(self):
		e = FactoredExpr(2, coeff=VScalar.v_power(3), z2=(2, 4))
		got = expand_expr(e, TruncSpec(2, 5, (-5, 5)))
		assert got.data == {(1, 2): {3: 1}}

	def test_degree_clipping(self):
		e = FactoredExpr(1, num=[(1, (1,), 5)])
		got = expand_expr(e, TruncSpec(1, 2, (-40, 40)))
		assert set(got.data) <= {(0,), (1,), (2,)}
		# coefficient of z^2 in prod_{j=1..5}(1 - q^j z) is e_2(q, ..., q^5)
		cmap = got.laurent((2,))
		total = {}
		for a in range(1, 6):
			for b in range(a + 1, 6):
				p = 2 * (a + b)
				total[p] = total.get(p, 0) + 1
		assert cmap == total

	def test_negative_monomial_dropped_by_clamp(self):
		e = FactoredExpr(1, z2=(-2,))
		got = expand_expr(e, TruncSpec(1, 3, (-5, 5)))
		assert got.is_zero()


class TestExpandGeometric:
	def test_single_geometric(self):
		e = FactoredExpr(1, den=[(1, (1,), 1)])
		got = expand_expr(e, TruncSpec(1, 3, (0, 10)))
		assert got.data == {(j,): {2 * j: 1} for j in range(4)}

	def test_negative_exponent_geometric(self):
		# 1/(1 - q^-2 z): terms q^(-2j) z^j reach below v^0
		e = FactoredExpr(1, den=[(-2, (1,), 1)])
		got = expand_expr(e, TruncSpec(1, 3, (-12, 4)))
		assert got.data == {(0,): {0: 1}, (1,): {-4: 1}, (2,): {-8: 1}, (3,): {-12: 1}}

	def test_pure_q_denominator_folds(self):
		e = FactoredExpr(1, den=[(1, (0,), 2)])
		got = expand_expr(e, TruncSpec(1, 0, (0, 8)))
		assert got.laurent((0,)) == {0: 1, 2: 1, 4: 2, 6: 2, 8: 3}

	def test_vanishing_pure_q_denominator(self):
		e = FactoredExpr(1, den=[(0, (0,), 1)])
		with pytest.raises(ZeroDivisionError):
			expand_expr(e, TruncSpec(1, 0, (0, 4)))

	def test_flip_rule_frozen(self):
		# 1/(1 - q^-1 z^-1) = -qz/(1 - qz)
		e = FactoredExpr(1, den=[(-1, (-1,), 1)])
		got = expand_expr(e, TruncSpec(1, 4, (0, 20)))
		assert got.data == {(j,): {2 * j: -1} for j in range(1, 5)}

	def test_flip_rule_longer(self):
		# 1/(qz^-1; q)_2 has lowest z-power 2
		e = FactoredExpr(1, den=[(1, (-1,), 2)])
		assert e.min_z2_vector() == (4,)
		got = expand_expr(e, TruncSpec(1, 3, (-30, 10)))
		assert got.laurent((0,)) == {}
		assert got.laurent((1,)) == {}
		assert got.laurent((2,)) == {-6: 1}
		# z^3 coefficient: q^-3 (q^-1 + q^-2)
		assert got.laurent((3,)) == {-8: 1, -10: 1}


class TestExpandInfinite:
	def test_q_exponential(self):
		# 1/(z; q)_inf = sum_m z^m / (q)_m
		spec = TruncSpec(1, 4, (0, 30))
		lhs = expand_expr(FactoredExpr(1, den=[(0, (1,), None)]), spec)
		rhs = series_from_vscalars(
			spec, {(m,): ONE / q_poch_scalar(1, m) for m in range(5)}
		)
		assert lhs == rhs

	def test_q_binomial_theorem(self):
		# (q^2 z; q)_inf / (z; q)_inf = sum_m (q^2; q)_m / (q; q)_m z^m
		spec = TruncSpec(1, 4, (0, 40))
		lhs = expand_expr(
			FactoredExpr(1, num=[(2, (1,), None)], den=[(0, (1,), None)]), spec
		)
		rhs = series_from_vscalars(
			spec,
			{(m,): q_poch_scalar(2, m) / q_poch_scalar(1, m) for m in range(5)},
		)
		assert lhs == rhs

	def test_euler_pentagonal(self):
		# (q; q)_inf = sum_k (-1)^k q^(k(3k-1)/2) within the window
		spec = TruncSpec(1, 0, (0, 24))
		lhs = expand_expr(FactoredExpr(1, num=[(1, (0,), None)]), spec)
		expected = {}
		for k in range(-10, 11):
			p = k * (3 * k - 1)  # 2 * k(3k-1)/2 in v-units
			if 0 <= p <= 24:
				expected[p] = expected.get(p, 0) + (-1) ** k
		assert lhs.laurent((0,)) == {p: c for p, c in expected.items() if c}

	def test_infinite_num_with_zero_factor_is_zero(self):
		e = FactoredExpr(1, num=[(-1, (0,), None)])
		got = expand_expr(e, TruncSpec(1, 2, (-10, 10)))
		assert got.is_zero()

	def test_region_errors(self):
		with pytest.raises(ExpansionError, match="ambiguous expansion region"):
			expand_expr(
				FactoredExpr(2, den=[(0, (1, -1), 1)]), TruncSpec(2, 2, (0, 4))
			)
		with pytest.raises(ExpansionError, match="non-expandable pure-q"):
			expand_expr(
				FactoredExpr(1, den=[(0, (0,), None)]), TruncSpec(1, 2, (0, 4))
			)
		with pytest.raises(ExpansionError, match="inverse powers"):
			expand_expr(
				FactoredExpr(1, den=[(1, (-1,), None)]), TruncSpec(1, 2, (0, 4))
			)
		with pytest.raises(ExpansionError, match="inverse powers"):
			expand_expr(
				FactoredExpr(1, num=[(1, (-1,), None)]), TruncSpec(1, 2, (0, 4))
			)


class TestEval:
	def test_eval_matches_hand_value(self):
		e = FactoredExpr(
			2,
			coeff=VScalar.v_power(3),
			z2=(2, -2),
			num=[(1, (1, 0), 2)],
		)
		v0, z1, z2v = mpq(2), mpq(1, 3), mpq(5)
		q0 = v0 * v0
		want = v0**3 * z1 / z2v * (1 - q0 * z1) * (1 - q0**2 * z1)
		assert e.eval_exact(v0, [z1, z2v]) == want

	def test_eval_den_and_den_sums(self):
		inner = TermSum(1, (FactoredExpr(1, coeff=ONE), FactoredExpr(1, z2=(2,))))
		e = FactoredExpr(1, den=[(1, (1,), 1)], den_sums=(inner,))
		v0, z = mpq(1, 2), mpq(3)
		want = 1 / ((1 - v0**2 * z) * (1 + z))
		assert e.eval_exact(v0, [z]) == want

	def test_eval_odd_z2_raises(self):
		e = FactoredExpr(1, z2=(1,))
		with pytest.raises(ValueError, match="half-integral"):
			e.eval_exact(mpq(2), [mpq(3)])

	def test_weight_eval_half_power(self):
		e = FactoredExpr(1, z2=(1,))
		# z^(1/2) at z = v^(-2(lam+1)), lam = 2 gives v^-3
		assert e.eval_with_weight(mpq(2, 3), [2]) == mpq(27, 8)

	def test_weight_eval_consistent_with_exact(self):
		e = FactoredExpr(
			1, coeff=qbracket(2), z2=(4,), num=[(0, (1,), 1)], den=[(3, (1,), 2)]
		)
		lam = [1]
		v0 = mpq(3, 2)
		z0 = v0 ** (-2 * (lam[0] + 1))
		assert e.eval_with_weight(v0, lam) == e.eval_exact(v0, [z0])

	def test_infinite_eval_raises(self):
		e = FactoredExpr(1, num=[(1, (1,), None)])
		with pytest.raises(ValueError, match="infinite"):
			e.eval_exact(mpq(2), [mpq(3)])


class TestSubstitutions:
	def _expr(self):
		return FactoredExpr(
			2,
			coeff=qbracket(3),
			z2=(2, -4),
			num=[(0, (1, 1), 1)],
			den=[(2, (1, 0), 2)],
		)

	def test_q_shift_eval(self):
		e = self._expr()
		s = (3, -1)
		e2 = e.subst_q_shift(s)
		rng = random.Random(7)
		for _ in range(5):
			v0 = mpq(rng.randint(2, 7), rng.randint(2, 7) + 7)
			zs = [mpq(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(2)]
			shifted = [v0 ** (2 * si) * z for si, z in zip(s, zs)]
			assert e2.eval_exact(v0, zs) == e.eval_exact(v0, shifted)

	def test_z_inverse_eval(self):
		e = self._expr()
		e2 = e.subst_z_inverse()
		v0 = mpq(2, 5)
		zs = [mpq(3), mpq(7, 2)]
		assert e2.eval_exact(v0, zs) == e.eval_exact(v0, [1 / z for z in zs])

	def test_z_inverse_round_trip(self):
		e = self._expr()
		assert e.subst_z_inverse().subst_z_inverse() == e


class TestTermSumEquality:
	def test_equal_reordered(self):
		a = TermSum(1, (FactoredExpr(1, num=[(1, (1,), 1)]),))
		b = TermSum(
			1,
			(
				FactoredExpr(1, coeff=-VScalar.v_power(2), z2=(2,)),
				FactoredExpr(1, coeff=ONE),
			),
		)
		rep = termsum_equal_report(a, b, seed=11)
		assert rep["equal"] and rep["witness"] is None

	def test_unequal_witness(self):
		a = TermSum(1, (FactoredExpr(1, coeff=ONE),))
		b = TermSum(1, (FactoredExpr(1, coeff=VScalar.from_int(2)),))
		rep = termsum_equal_report(a, b, seed=11)
		assert not rep["equal"]
		assert rep["witness"]["lhs"] != rep["witness"]["rhs"]

	def test_weight_equality_on_half_powers(self):
		# z^(1/2) * z^(1/2) == z both ways of writing it
		a = TermSum(1, (FactoredExpr(1, z2=(1,)).times(FactoredExpr(1, z2=(1,))),))
		b = TermSum(1, (FactoredExpr(1, z2=(2,)),))
		rep = termsum_equal_weight_report(a, b, lam=[3], seed=5)
		assert rep["equal"]

	def test_deterministic_given_seed(self):
		a = TermSum(1, (FactoredExpr(1, num=[(1, (1,), 2)]),))
		b = TermSum(1, (FactoredExpr(1, num=[(1, (1,), 2)]),))
		r1 = termsum_equal_report(a, b, seed=99)
		r2 = termsum_equal_report(a, b, seed=99)
		assert r1 == r2


class TestFactoredAlgebra:
	def test_num_den_cancellation(self):
		e = FactoredExpr(1, num=[(1, (1,), 2)], den=[(1, (1,), 2), (3, (1,), 1)])
		assert e.num == ()
		assert e.den == (PochFactor(3, (1,), 1),)

	def test_times_merges(self):
		a = FactoredExpr(1, z2=(2,), num=[(1, (1,), 1)])
		b = FactoredExpr(1, z2=(-2,), den=[(1, (1,), 1)])
		c = a.times(b)
		assert c.z2 == (0,) and c.num == () and c.den == ()

	def test_min_z2_infinite_pos_ok(self):
		e = FactoredExpr(1, den=[(1, (1,), None)], z2=(-2,))
		assert e.min_z2_vector() == (-2,)


class TestSeriesMap:
	def test_product_cancellation(self):
		n = 1
		a = SeriesMap(n)
		for j in range(5):
			a.add_laurent((j,), 2 * j, [1])  # 1/(1-qz) truncated
		b = SeriesMap(n)
		b.add_laurent((0,), 0, [1])
		b.add_laurent((1,), 2, [-1])  # (1 - qz)
		prod = a.times(b, keep=lambda m: 0 <= m[0] <= 4, v_top=50)
		spec = TruncSpec(1, 4, (0, 50))
		got = prod.clamp(spec)
		assert got.data == {(0,): {0: 1}}

	def test_shift_scale_iadd(self):
		a = SeriesMap(2)
		a.add_laurent((0, 1), -1, [1, 2])
		b = a.shifted((1, 0), vpow_delta=3).scaled(-2)
		assert b.data == {(1, 1): (2, [-2, -4])}
		a.iadd(a)
		assert a.data == {(0, 1): (-1, [2, 4])}

	def test_clamp_drops_out_of_domain(self):
		a = SeriesMap(1)
		a.add_laurent((-1,), 0, [1])
		a.add_laurent((2,), 0, [1, 0, 1])
		got = a.clamp(TruncSpec(1, 2, (1, 2)))
		assert got.data == {(2,): {2: 1}}


class TestSeriesContainer:
	def test_add_and_scale(self):
		spec = TruncSpec(1, 2, (0, 4))
		a = TruncSeries(spec, {(1,): {2: 3}})
		b = TruncSeries(spec, {(1,): {2: -3}, (2,): {4: 1}})
		s = a + b
		assert s.data == {(2,): {4: 1}}
		assert s.scaled(2).data == {(2,): {4: 2}}
		assert s.scaled(0).is_zero()

	def test_diff_witness(self):
		spec = TruncSpec(1, 2, (0, 4))
		a = TruncSeries(spec, {(1,): {2: 3}})
		b = TruncSeries(spec, {(1,): {2: 5}})
		assert a.diff(b) == [((1,), 2, 3, 5)]

	def test_domain_validation(self):
		spec = TruncSpec(1, 2, (0, 4))
		with pytest.raises(ValueError):
			TruncSeries(spec, {(3,): {0: 1}})
		with pytest.raises(ValueError):
			TruncSeries(spec, {(1,): {9: 1}})
		with pytest.raises(ValueError):
			TruncSeries(spec, {(-1,): {0: 1}})


class TestJson:
	def test_truncseries_round_trip(self):
		spec = TruncSpec(2, 3, (-4, 9))
		s = TruncSeries(spec, {(1, 0): {-3: 5, 2: -7}, (0, 2): {0: 1}})
		obj = s.to_json_obj()
		assert TruncSeries.from_json_obj(obj) == s

	def test_truncseries_bytes_deterministic(self):
		spec = TruncSpec(2, 3, (-4, 9))
		a = TruncSeries(spec)
		a._set((1, 0), {2: -7, -3: 5})
		a._set((0, 2), {0: 1})
		b = TruncSeries(spec)
		b._set((0, 2), {0: 1})
		b._set((1, 0), {-3: 5, 2: -7})
		assert canonical_json(a.to_json_obj()) == canonical_json(b.to_json_obj())
		assert '"z":[0,2]' in canonical_json(a.to_json_obj())

	def test_termsum_round_trip(self):
		ts = TermSum(
			2,
			(
				FactoredExpr(
					2,
					coeff=ONE / qbracket(2),
					z2=(4, -2),
					num=[(1, (1, 1), None)],
					den=[(0, (1, 0), 3)],
				),
			),
		)
		obj = ts.to_json_obj()
		back = TermSum.from_json_obj(obj)
		assert back.terms == ts.terms
		assert obj["terms"][0]["num"][0][2] == "inf"

	def test_termsum_odd_z2_refuses(self):
		ts = TermSum(1, (FactoredExpr(1, z2=(1,)),))
		with pytest.raises(ValueError):
			ts.to_json_obj()


class TestPochFiniteExpand:
	def test_length_zero_is_one(self):
		ts = poch_finite_expand(PochFactor(0, (1,), 0))
		assert len(ts) == 1
		t = ts.terms[0]
		assert t.coeff == ONE and t.z2 == (0,) and t.num == () and t.den == ()

	def test_qz_one(self):
		ts = poch_finite_expand(PochFactor(1, (1,), 1))
		got = {t.z2: t.coeff for t in ts}
		assert got == {(0,): ONE, (2,): -VScalar.v_power(2)}

	def test_z_two(self):
		# (z)_2 = 1 - (1+q) z + q z^2
		ts = poch_finite_expand(PochFactor(0, (1,), 2))
		got = {t.z2: t.coeff for t in ts}
		assert got == {
			(0,): ONE,
			(2,): -(ONE + VScalar.v_power(2)),
			(4,): VScalar.v_power(2),
		}

	def test_infinite_rejected(self):
		with pytest.raises(ValueError):
			poch_finite_expand(PochFactor(1, (1,), None))

	def test_matches_factored_eval(self):
		rng = random.Random(7)
		for _ in range(6):
			a = rng.randint(-2, 3)
			m = rng.randint(0, 4)
			mu = (rng.randint(0, 2), rng.randint(-1, 2))
			f = PochFactor(a, mu, m)
			ts = poch_finite_expand(f)
			direct = TermSum(2, (FactoredExpr(2, num=[f]),))
			v0 = mpq(rng.randint(2, 5), rng.randint(6, 9))
			zs = [mpq(rng.randint(1, 7), rng.randint(1, 7)) for _ in range(2)]
			assert ts.eval_exact(v0, zs) == direct.eval_exact(v0, zs)

	def test_recurrence_step(self):
		# (z)_{m+1} = (z)_m * (1 - q^m z), coefficient by coefficient
		for m in range(7):
			lhs = poch_finite_expand(PochFactor(0, (1,), m + 1))
			rhs = poch_finite_expand(PochFactor(0, (1,), m)).times(
				poch_finite_expand(PochFactor(m, (1,), 1))
			)
			def collect(ts):
				out = {}
				for t in ts:
					assert t.num == () and t.den == ()
					out[t.z2] = out.get(t.z2, ZERO) + t.coeff
				return {k: v for k, v in out.items() if not v.is_zero()}
			assert collect(lhs) == collect(rhs)


class TestIntervalCancellation:
	def test_infinite_tail_vs_finite_prefix(self):
		# (q^a z; q)_inf / (q^a z; q)_m = (q^(a+m) z; q)_inf
		e = FactoredExpr(1, num=[(1, (1,), None)], den=[(1, (1,), 3)])
		assert e.num == (PochFactor(4, (1,), None),)
		assert e.den == ()

	def test_partial_shifted_overlap(self):
		# slots 2..5 over slots 4..7 leave 2..3 up and 6..7 down
		e = FactoredExpr(1, num=[(2, (1,), 4)], den=[(4, (1,), 4)])
		assert e.num == (PochFactor(2, (1,), 2),)
		assert e.den == (PochFactor(6, (1,), 2),)

	def test_layered_coverage(self):
		# num covers slot 1 twice, den once: one copy survives
		e = FactoredExpr(1, num=[(1, (1,), 1), (1, (1,), 2)], den=[(1, (1,), 1)])
		assert e.num == (PochFactor(1, (1,), 2),)
		assert e.den == ()

	def test_distinct_zparts_untouched(self):
		e = FactoredExpr(2, num=[(1, (1, 0), 2)], den=[(1, (0, 1), 2)])
		assert e.num == (PochFactor(1, (1, 0), 2),)
		assert e.den == (PochFactor(1, (0, 1), 2),)

	def test_length_zero_dropped(self):
		e = FactoredExpr(1, num=[(1, (1,), 0)], den=[(5, (1,), 0)])
		assert e.num == () and e.den == ()

	def test_cancellation_preserves_value(self):
		rng = random.Random(23)
		for _ in range(8):
			mu = (1, rng.randint(0, 2))
			a1, m1 = rng.randint(-1, 3), rng.randint(1, 4)
			a2, m2 = rng.randint(-1, 3), rng.randint(1, 4)
			a3, m3 = rng.randint(-1, 3), rng.randint(1, 4)
			plain = FactoredExpr(2, num=[(a1, mu, m1), (a2, mu, m2)], den=[(a3, mu, m3)])
			v0 = mpq(rng.randint(2, 5), rng.randint(6, 9))
			zs = [mpq(rng.randint(2, 9), rng.randint(2, 9)) for _ in range(2)]
			num_val = den_val = mpq(1)
			q0 = v0 * v0
			zmu = zs[0] ** mu[0] * zs[1] ** mu[1]
			for a, m in ((a1, m1), (a2, m2)):
				for j in range(m):
					num_val *= 1 - q0 ** (a + j) * zmu
			for j in range(m3):
				den_val *= 1 - q0 ** (a3 + j) * zmu
			if den_val == 0:
				continue
			assert plain.eval_exact(v0, zs) == num_val / den_val


class TestSeriesArith:
	def test_mul_by_one(self):
		spec = TruncSpec(1, 3, (-6, 6))
		a = TruncSeries(spec, {(1,): {2: 3, -1: 4}, (3,): {0: -2}})
		one = TruncSeries(spec, {(0,): {0: 1}})
		assert a * one == a

	def test_difference_of_squares(self):
		spec = TruncSpec(1, 4, (-10, 10))
		plus = expand_expr(FactoredExpr(1, num=[(1, (1,), 1)]), spec)
		# 1 + q z as a series built directly
		minus = TruncSeries(spec, {(0,): {0: 1}, (1,): {2: 1}})
		prod = minus * plus
		assert prod.data == {(0,): {0: 1}, (2,): {4: -1}}

	def test_spec_mismatch_raises(self):
		a = TruncSeries(TruncSpec(1, 3, (-6, 6)), {(0,): {0: 1}})
		b = TruncSeries(TruncSpec(1, 2, (-6, 6)), {(0,): {0: 1}})
		with pytest.raises(ValueError):
			a * b

	def test_degree_and_window_clipping(self):
		spec = TruncSpec(1, 2, (0, 4))
		a = TruncSeries(spec, {(1,): {2: 1}, (2,): {4: 1}})
		b = TruncSeries(spec, {(1,): {2: 1}, (0,): {0: 1}})
		prod = a * b
		# z^3 terms exceed D=2 and drop; surviving z^2 coefficients merge
		assert prod.data == {(1,): {2: 1}, (2,): {4: 2}}

	def test_mixed_sign_numerator_cross_term(self):
		# (1 - qz^5)(1 - qz^-5) at D=2: only the q^2 cross term survives the
		# clamp, and it must not be lost to intermediate degree pruning
		e = FactoredExpr(1, num=[(1, (5,), 1), (1, (-5,), 1)])
		s = expand_expr(e, TruncSpec(1, 2, (0, 10)))
		assert s.data == {(0,): {0: 1, 4: 1}}

	def test_expand_multiplicative_on_random_exprs(self):
		# expand(e1 * e2) == expand(e1) * expand(e2) on a window where all
		# generated v-powers are nonnegative, so windowed products are exact
		rng = random.Random(41)
		spec = TruncSpec(2, 4, (0, 60))
		def rand_expr():
			coeff = VScalar.v_power(2 * rng.randint(0, 2)) * rng.choice([1, -1, 2])
			z2 = (2 * rng.randint(0, 1), 2 * rng.randint(0, 1))
			num = []
			den = []
			for _ in range(rng.randint(0, 2)):
				mu = (rng.randint(0, 1), rng.randint(0, 1))
				num.append((rng.randint(1, 3), mu, rng.randint(0, 2)))
			for _ in range(rng.randint(0, 2)):
				mu = (rng.randint(0, 1), rng.randint(0, 1))
				den.append((rng.randint(1, 3), mu, rng.randint(1, 2)))
			return FactoredExpr(2, coeff, z2, num, den)
		for _ in range(30):
			e1, e2 = rand_expr(), rand_expr()
			lhs = expand_expr(e1.times(e2), spec)
			rhs = expand_expr(e1, spec) * expand_expr(e2, spec)
			assert lhs.diff(rhs) == []


class TestFlipRuleConvergence:
	def test_partial_sums_converge_to_exact_value(self):
		# 1/(1 - q^(a+j) z^mu) with mu <= 0 rewritten per factor as
		# -q^(-a-j) z^(-mu) / (1 - q^(-a-j) z^(-mu)): geometric in the
		# small-z region. Exact rational partial sums must approach the
		# exact evaluation once every flipped ratio has modulus below 1.
		rng = random.Random(5)
		for _ in range(10):
			a = rng.randint(-2, 2)
			m = rng.randint(1, 3)
			mu = (-rng.randint(1, 2), -rng.randint(0, 1))
			v0 = mpq(rng.randint(2, 5), rng.randint(7, 11))
			q0 = v0 * v0
			# choose z small enough that the worst ratio stays below 1
			c_top = max(a + m - 1, 0)
			zs = [q0 ** c_top / rng.randint(2, 5) for _ in range(2)]
			zmu = zs[0] ** mu[0] * zs[1] ** mu[1]
			ratios = [q0 ** -(a + j) / zmu for j in range(m)]
			assert all(abs(r) < 1 for r in ratios)
			e = FactoredExpr(2, den=[(a, mu, m)])
			exact = e.eval_exact(v0, zs)
			prefactor = mpq(1)
			for j in range(m):
				prefactor *= -(q0 ** -(a + j)) / zmu
			sums = [mpq(1) for _ in ratios]
			pows = [mpq(1) for _ in ratios]
			for step in range(1, 600):
				for i, r in enumerate(ratios):
					pows[i] *= r
					sums[i] += pows[i]
				if step % 8:
					continue
				val = prefactor
				for s in sums:
					val *= s
				if abs(val - exact) < mpq(1, 10 ** 9):
					break
			else:
				raise AssertionError("partial sums failed to converge")

	def test_expander_matches_eval_through_window(self):
		# the same flip rule inside expand(): evaluate the truncated series
		# at a small numeric point and compare with the exact value
		e = FactoredExpr(1, den=[(0, (-1,), 2)])
		v0 = mpq(1, 2)
		z0 = mpq(1, 20)
		exact = e.eval_exact(v0, [z0])
		errors = []
		for depth in (6, 12, 24):
			spec = TruncSpec(1, depth, (-6 * depth, 6 * depth))
			series = expand_expr(e, spec)
			val = mpq(0)
			for mono, cmap in series.data.items():
				for p, c in cmap.items():
					val += c * v0 ** p * z0 ** mono[0]
			errors.append(abs(val - exact))
		assert errors[0] > errors[1] > errors[2]
		assert errors[-1] < mpq(1, 10 ** 9)
