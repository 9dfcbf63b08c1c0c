"""Canonical-form scalar field tests.

Frozen values below were computed by hand from the defining products before
the implementation existed; they must never be regenerated from the code
under test.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qtoda.scalar import (
	ONE,
	ZERO,
	Rational,
	VScalar,
	eval_at,
	qbracket,
	qbracket_factorial,
	qbracket_poch,
	rational,
)


def vv():
	"""v - 1/v."""
	return VScalar.from_laurent(-1, [-1, 0, 1])


class TestCanonicalForm:
	def test_zero(self):
		z = VScalar.from_int(0)
		assert z is ZERO
		assert not z
		assert z.num == () and z.den == (1,) and z.noff == 0

	def test_pure_power_normalization(self):
		s = VScalar.from_laurent(0, [0, 0, 5])
		assert s.noff == 2 and s.num == (5,) and s.den == (1,)

	def test_denominator_sign_and_content(self):
		s = VScalar.from_int(4) / VScalar.from_laurent(0, [-6])
		assert s.num == (-2,) and s.den == (3,)

	def test_gcd_reduction(self):
		# (v^2 - 1)/(v - 1) = v + 1, entered without the cancellation
		s = VScalar.from_laurent(0, [-1, 0, 1]) / VScalar.from_laurent(0, [-1, 1])
		assert s == VScalar.from_laurent(0, [1, 1])

	def test_structural_equality_and_hash(self):
		a = qbracket(3) * qbracket(2)
		b = qbracket(2) * qbracket(3)
		assert a == b
		assert hash(a) == hash(b)
		assert len({a, b}) == 1


class TestArithmetic:
	def test_ring_basics(self):
		a = qbracket(5)
		assert a + ZERO == a
		assert a * ONE == a
		assert a - a == ZERO
		assert a * ZERO == ZERO
		assert -(-a) == a

	def test_int_coercion(self):
		assert qbracket(2) * 2 == 2 * qbracket(2)
		assert qbracket(1) + 1 == VScalar.from_int(2)
		assert 1 - qbracket(1) == ZERO
		assert (VScalar.from_int(3) / 2) == VScalar.from_rational(rational(3, 2))

	def test_pow(self):
		v = VScalar.v_power(1)
		assert v**7 == VScalar.v_power(7)
		assert v**-3 == VScalar.v_power(-3)
		assert (qbracket(2) ** 2) == qbracket(2) * qbracket(2)
		assert (qbracket(2) ** -1) * qbracket(2) == ONE

	def test_reciprocal_round_trip(self):
		s = qbracket_factorial(4) * VScalar.v_power(-3)
		assert s.reciprocal().reciprocal() == s
		assert s * s.reciprocal() == ONE

	def test_division_by_zero(self):
		with pytest.raises(ZeroDivisionError):
			ONE / ZERO
		with pytest.raises(ZeroDivisionError):
			ZERO.reciprocal()


class TestBrackets:
	def test_small_brackets_frozen(self):
		assert qbracket(0) == ZERO
		assert qbracket(1) == ONE
		assert str(qbracket(2)) == "v^-1 + v"
		assert str(qbracket(3)) == "v^-2 + 1 + v^2"
		assert str(qbracket(-3)) == "-v^-2 - 1 - v^2"

	def test_factorials_frozen(self):
		assert qbracket_factorial(0) == ONE
		assert str(qbracket_factorial(3)) == "v^-3 + 2*v^-1 + 2*v + v^3"
		assert (
			str(qbracket_factorial(4))
			== "v^-6 + 3*v^-4 + 5*v^-2 + 6 + 5*v^2 + 3*v^4 + v^6"
		)

	def test_factorial_negative_raises(self):
		with pytest.raises(ValueError):
			qbracket_factorial(-1)

	def test_bracket_product_identity(self):
		# [m+1][m-1] = [m]^2 - 1 across signs
		for m in range(-10, 11):
			assert qbracket(m + 1) * qbracket(m - 1) == qbracket(m) ** 2 - 1

	def test_bracket_definition(self):
		v = VScalar.v_power(1)
		for m in range(-6, 7):
			assert qbracket(m) * vv() == v**m - v**-m

	def test_bracket_palindromic(self):
		for m in range(0, 8):
			assert qbracket(m).substitute_v_inverse() == qbracket(m)
			assert qbracket_factorial(m).substitute_v_inverse() == qbracket_factorial(m)

	def test_factorial_vs_q_pochhammer(self):
		# [m]! = (-1)^m v^(-m(m+1)/2) (v - 1/v)^(-m) prod_{j=1..m} (1 - v^(2j))
		for m in range(0, 7):
			qp = ONE
			for j in range(1, m + 1):
				qp = qp * (ONE - VScalar.v_power(2 * j))
			rhs = (
				VScalar.from_int((-1) ** m)
				* VScalar.v_power(-m * (m + 1) // 2)
				* vv() ** -m
				* qp
			)
			assert qbracket_factorial(m) == rhs

	def test_pochhammer(self):
		assert qbracket_poch(3, 0) == ONE
		assert qbracket_poch(2, 3) == qbracket(2) * qbracket(3) * qbracket(4)
		assert qbracket_poch(-2, 4) == ZERO  # hits [0]
		assert qbracket_poch(-3, 2) == qbracket(3) * qbracket(2)  # signs cancel
		with pytest.raises(ValueError):
			qbracket_poch(1, -1)


class TestEvaluation:
	def test_frozen_point(self):
		assert qbracket(3).eval_at(rational(2)) == rational(21, 4)
		assert qbracket(2).eval_at(rational(1, 3)) == rational(10, 3)

	def test_hom_random_points(self):
		rng = random.Random(20240517)
		pool = [
			qbracket(3),
			qbracket_factorial(3),
			ONE / qbracket(2),
			VScalar.v_power(-2) - 1,
			(qbracket(4) + 1) / (qbracket(2) ** 2),
		]
		checked = 0
		while checked < 50:
			v0 = rational(rng.randint(1, 9), rng.randint(1, 9))
			if v0 in (0, 1):
				continue
			a = rng.choice(pool)
			b = rng.choice(pool)
			try:
				av, bv = a.eval_at(v0), b.eval_at(v0)
				assert (a + b).eval_at(v0) == av + bv
				assert (a * b).eval_at(v0) == av * bv
				assert (a - b).eval_at(v0) == av - bv
			except ZeroDivisionError:
				continue
			checked += 1

	def test_pole_raises(self):
		s = ONE / (ONE - VScalar.v_power(2))
		with pytest.raises(ZeroDivisionError):
			s.eval_at(rational(1))
		with pytest.raises(ZeroDivisionError):
			s.eval_at(rational(0))

	def test_substitution_matches_eval(self):
		s = (qbracket(4) + VScalar.v_power(3)) / qbracket(2)
		t = s.substitute_v_inverse()
		for v0 in (rational(2), rational(3, 5), rational(-7, 2)):
			assert t.eval_at(v0) == s.eval_at(1 / v0)


class TestWindowSeries:
	def test_geometric(self):
		s = ONE / (ONE - VScalar.v_power(2))
		assert s.window_coeffs(0, 6) == [1, 0, 1, 0, 1, 0, 1]
		assert s.window_coeffs(-3, -1) == [0, 0, 0]

	def test_two_factor_partitions(self):
		# 1/((1-q)(1-q^2)) counts partitions into parts of size at most 2
		s = ONE / ((ONE - VScalar.v_power(2)) * (ONE - VScalar.v_power(4)))
		assert s.window_coeffs(0, 8) == [1, 0, 1, 0, 2, 0, 2, 0, 3]

	def test_laurent_window(self):
		s = VScalar.v_power(-2) * (ONE + VScalar.v_power(1)) ** 2
		assert s.window_coeffs(-2, 1) == [1, 2, 1, 0]

	def test_zero_window(self):
		assert ZERO.window_coeffs(-2, 2) == [0, 0, 0, 0, 0]

	def test_non_unit_constant_raises(self):
		s = ONE / (VScalar.from_int(2) - VScalar.v_power(1))
		with pytest.raises(ArithmeticError):
			s.window_coeffs(0, 4)


class TestSerialization:
	CASES = [
		ZERO,
		ONE,
		VScalar.from_int(-7),
		VScalar.v_power(5),
		VScalar.v_power(-4) * 3,
		qbracket(4),
		-qbracket_factorial(3),
		ONE / qbracket_factorial(3),
		(qbracket(5) - 2) / (qbracket(3) ** 2),
		VScalar.from_rational(rational(22, 7)),
	]

	def test_round_trip(self):
		for s in self.CASES:
			assert VScalar.from_string(s.to_string()) == s

	def test_frozen_strings(self):
		assert ZERO.to_string() == "0"
		assert VScalar.v_power(-4).to_string() == "v^-4"
		assert (ONE / qbracket(2)).to_string() == "(v) / (1 + v^2)"

	def test_parse_whitespace_tolerant(self):
		assert VScalar.from_string("  v^-1   +v ") == qbracket(2)
		assert VScalar.from_string("-2*v^3") == VScalar.v_power(3) * -2

	def test_parse_garbage_raises(self):
		with pytest.raises(ValueError):
			VScalar.from_string("v^^2")
		with pytest.raises(ValueError):
			VScalar.from_string("q + 1")


small_scalars = st.builds(
	lambda off, coeffs: VScalar.from_laurent(off, coeffs),
	st.integers(min_value=-3, max_value=3),
	st.lists(st.integers(min_value=-5, max_value=5), min_size=1, max_size=4),
)


@settings(max_examples=60, deadline=None)
@given(small_scalars, small_scalars, small_scalars)
def test_ring_axioms(a, b, c):
	assert (a + b) + c == a + (b + c)
	assert a + b == b + a
	assert a * b == b * a
	assert (a * b) * c == a * (b * c)
	assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(small_scalars)
def test_field_inverse(a):
	if a:
		assert a * a.reciprocal() == ONE
		assert a.substitute_v_inverse().substitute_v_inverse() == a


def test_eval_alias():
	assert eval_at(qbracket(2), rational(2)) == rational(5, 2)
	assert isinstance(eval_at(ONE, rational(3)), type(Rational(1)))
