"""Tests for polynomials, Taylor sequences and exact conversions."""

from fractions import Fraction

import mpmath
import pytest
import sympy

from data_models import CoeffSequence, RealPolynomial, TaylorSeq, is_exact, to_fraction, to_mpf


def test_to_fraction_is_exact_for_binary_values():
    assert to_fraction(0.5) == Fraction(1, 2)
    assert to_fraction(mpmath.mpf("0.375")) == Fraction(3, 8)
    assert to_fraction(sympy.Rational(2, 7)) == Fraction(2, 7)
    with pytest.raises(ValueError):
        to_fraction(mpmath.inf)
    with pytest.raises(TypeError):
        to_fraction("1/2")


def test_to_mpf_divides_fractions():
    with mpmath.workprec(100):
        assert abs(to_mpf(Fraction(1, 3)) - mpmath.mpf(1) / 3) == 0


def test_is_exact():
    assert is_exact(3) and is_exact(Fraction(1, 3))
    assert not is_exact(True)
    assert not is_exact(0.5)


def test_trailing_zeros_are_stripped():
    p = RealPolynomial((1, 2, 0, 0))
    assert p.coeffs == (1, 2)
    assert p.degree == 1
    assert RealPolynomial(()).degree == -1


def test_arithmetic_and_evaluation():
    p = RealPolynomial.from_roots([1, -2])
    assert p.coeffs == (-2, 1, 1)
    q = p * RealPolynomial((0, 1)) - 3
    assert q(Fraction(1, 2)) == Fraction(1, 2) * p(Fraction(1, 2)) - 3
    assert (p + p).coeffs == (-4, 2, 2)


def test_derivatives():
    p = RealPolynomial((1, 1, 1, 1))
    assert p.derivative().coeffs == (1, 2, 3)
    assert [d.degree for d in p.derivatives(4)] == [3, 2, 1, 0, -1]


def test_reversal_and_scaling():
    p = RealPolynomial((1, 2, 3))
    assert p.reversed().coeffs == (3, 2, 1)
    assert p.reversed(3).coeffs == (0, 3, 2, 1)
    with pytest.raises(ValueError):
        p.reversed(1)
    assert p.scaled(2).coeffs == (1, 4, 12)


def test_sympy_round_trip():
    p = RealPolynomial((Fraction(1, 2), 0, -3))
    assert RealPolynomial.from_sympy(p.to_sympy()) == p


def test_taylor_sequence():
    g = TaylorSeq((1, 1, 2, 6))
    assert g.length == 3
    assert g.coefficients() == [1, 1, 1, 1]
    assert TaylorSeq.from_coefficients([1, 1, 1, 1]) == g
    assert g.times(TaylorSeq((2, 3))).gamma == (2, 3)
    with pytest.raises(ValueError):
        TaylorSeq((1,))


def test_coeff_sequence_indices():
    seq = CoeffSequence((1, 2, 3))
    assert seq[-1] == 0
    assert seq[2] == 3
    assert seq.last_index == 2
    with pytest.raises(IndexError):
        seq[3]
    assert CoeffSequence.binomial(3).values == (1, 3, 3, 1)
    assert CoeffSequence.inverse_factorials(3).values[-1] == Fraction(1, 6)
    assert seq.exact
    assert not CoeffSequence((1.0,), rel_error=1e-20).exact
