from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdirac.scalars import ExactScalar, NumScalar, QContext, q_factor, q_int

CTX = QContext("0.5", prec=128)


def test_context_parses_decimal_string_exactly():
    ctx = QContext("0.1", prec=128)
    with ctx.guard():
        # 0.1 re-parsed at context precision, not the closest float64
        assert abs(ctx.q - mpmath.mpf("0.1")) < mpmath.mpf(2) ** -120
    assert ctx.key() == ("0.1", 128)


def test_context_rejects_bad_q():
    with pytest.raises(ValueError):
        QContext("1.0")
    with pytest.raises(ValueError):
        QContext("0")
    with pytest.raises(ValueError):
        QContext("1.5")
    with pytest.raises(TypeError):
        QContext(0.5)  # type: ignore[arg-type]
    with pytest.raises(ValueError):
        QContext("0.5", prec=16)


def test_numeric_q_int_frozen_values():
    # [3] = q^2 + 1 + q^-2 = 0.25 + 1 + 4 at q = 1/2
    assert abs(CTX.q_int(3) - mpmath.mpf("5.25")) < 1e-30
    # [2] = q + q^-1 = 2.5 at q = 1/2
    assert abs(CTX.q_int(2) - mpmath.mpf("2.5")) < 1e-30
    # [4] = q^3 + q + q^-1 + q^-3 = 0.125 + 0.5 + 2 + 8
    assert abs(CTX.q_int(4) - mpmath.mpf("10.625")) < 1e-30
    assert CTX.q_int(0) == 0
    assert abs(CTX.q_int(-3) + mpmath.mpf("5.25")) < 1e-30
    assert abs(CTX.q_int(1) - 1) < 1e-30


def test_q_bracket_matches_q_int_on_integers():
    for n in range(-6, 7):
        assert abs(CTX.q_bracket(n) - CTX.q_int(n)) < 1e-35


def test_exact_q_int_structure_and_eval():
    assert q_int(2) == ExactScalar.s_power(2) + ExactScalar.s_power(-2)
    assert q_int(0).is_zero()
    assert q_int(-3) == -q_int(3)
    val = q_int(3).eval(CTX)
    assert abs(val.value - mpmath.mpf("5.25")) < 1e-30
    # q^(m) for half-integer m = 3/2
    with CTX.guard():
        ref = mpmath.mpf("0.5") ** mpmath.mpf("1.5")
        assert abs(q_factor(3).eval(CTX).value - ref) < 1e-35


def test_q_int_product_recursion():
    # [n][2] = [n+1] + [n-1], exactly in the coefficient ring
    for n in range(1, 21):
        assert q_int(n) * q_int(2) == q_int(n + 1) + q_int(n - 1)


def test_exact_scalar_str_canonical():
    x = ExactScalar({2: (Fraction(3, 2), Fraction(0)), -1: (Fraction(0), Fraction(1)), 0: (Fraction(1), Fraction(0))})
    assert str(x) == "(1i)*s^-1 + 1 + (3/2)*s^2"
    assert str(ExactScalar({})) == "0"


def test_exact_scalar_rejects_inexact_coefficients():
    with pytest.raises(TypeError):
        ExactScalar({0: 0.25})  # type: ignore[dict-item]


def test_context_mixing_is_an_error():
    other = QContext("0.3", prec=128)
    a = CTX.num(1)
    b = other.num(1)
    with pytest.raises(ValueError):
        _ = a + b
    with pytest.raises(ValueError):
        QContext("0.5", prec=192).check(CTX)
    # same parameters in a different object is fine
    CTX.check(QContext("0.5", prec=128))


def test_num_scalar_arithmetic_and_conj():
    a = CTX.num(mpmath.mpc(1, 2))
    b = CTX.num(3)
    assert (a + b).value == mpmath.mpc(4, 2)
    assert (a * b).value == mpmath.mpc(3, 6)
    assert (-a).value == mpmath.mpc(-1, -2)
    assert a.conj().value == mpmath.mpc(1, -2)
    assert abs(CTX.num(Fraction(3, 4)).value - mpmath.mpf("0.75")) < 1e-35
    assert (a - a).value == 0


_coeffs = st.dictionaries(
    st.integers(min_value=-6, max_value=6),
    st.tuples(
        st.fractions(min_value=-4, max_value=4, max_denominator=8),
        st.fractions(min_value=-4, max_value=4, max_denominator=8),
    ),
    max_size=4,
)
_exacts = _coeffs.map(ExactScalar)


@settings(max_examples=120, deadline=None)
@given(_exacts, _exacts, _exacts)
def test_exact_scalar_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + ExactScalar({}) == a
    assert a * ExactScalar.from_int(1) == a
    assert (a - a).is_zero()


@settings(max_examples=80, deadline=None)
@given(_exacts, _exacts)
def test_exact_scalar_conj_and_eval_are_compatible(a, b):
    assert (a * b).conj() == a.conj() * b.conj()
    lhs = (a * b).eval(CTX).value
    rhs = (a.eval(CTX) * b.eval(CTX)).value
    assert abs(lhs - rhs) < 1e-30
