import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jtrace.errors import DomainError, InputError
from jtrace.qseries import (MultiSeries, SamplePoint, TruncationPolicy, eta, eta_inverse_pow,
                            series_add, series_mul)

import oracles


def q_list(vals, offset=0):
    return MultiSeries.from_q_list(vals, offset)


def test_add_cancels():
    assert series_add(q_list([1, 1]), q_list([-1, 1])) == q_list([0, 2])


def test_add_zero_is_identity():
    s = eta(10)
    assert s + MultiSeries.zero(0, 10) == s
    assert (s + MultiSeries.zero(0, 10)).q_offset == s.q_offset


def test_add_inverse_keeps_trunc():
    s = eta(12)
    z = s + (-s)
    assert z.is_zero() and z.trunc == 12


def test_zero_with_incommensurate_offset():
    s = MultiSeries.from_q_list([1, 2, 3], Fraction(23, 24))
    z = MultiSeries.zero(0, 5)
    assert (z + s).q_offset == Fraction(23, 24)
    assert (z + s).trunc == 3


def test_incommensurate_offsets_rejected():
    with pytest.raises(InputError, match="non-integer"):
        q_list([1], Fraction(1, 2)) + q_list([1])


def test_rank_mismatch():
    with pytest.raises(InputError, match="rank"):
        MultiSeries.one(1, 3) + MultiSeries.one(0, 3)


def test_geometric_inverse():
    geo = q_list([1] * 15)
    assert series_mul(q_list([1, -1] + [0] * 13), geo) == MultiSeries.one(0, 15)


def test_monomial_exponents_add():
    a = MultiSeries.monomial(1, Fraction(1, 2), (1,), 5)
    b = MultiSeries.monomial(1, Fraction(1, 2), (-1,), 5)
    c = a * b
    assert c.q_offset == 1 and c.coefficient(0, (0,)) == 1


def test_eta_times_inverse():
    assert eta(20) * eta_inverse_pow(1, 20) == MultiSeries.one(0, 20)


def test_eta_inverse_pow_counts():
    assert eta_inverse_pow(1, 6).q_coefficients() == [1, 1, 2, 3, 5, 7]
    assert eta_inverse_pow(1, 6).q_offset == Fraction(-1, 24)
    assert eta_inverse_pow(2, 3).coefficient(2) == 5
    assert eta_inverse_pow(0, 4) == MultiSeries.one(0, 4)
    for d in (1, 2, 3, 5):
        assert eta_inverse_pow(d, 25).q_coefficients() == oracles.colored_partitions(d, 25)
    with pytest.raises(InputError):
        eta_inverse_pow(-1, 4)


def test_eta_inverse_pow_power_identity():
    for d in (2, 3):
        assert eta_inverse_pow(d, 20) * (eta_inverse_pow(1, 20).inverse() ** d) == MultiSeries.one(0, 20)


def test_eval_basics():
    assert MultiSeries.one(0, 3).eval(SamplePoint(0.3 + 2j)) == 1
    assert abs(MultiSeries.monomial(1, 1, (), 3).eval(SamplePoint(1j)) - np.exp(-2 * np.pi)) < 1e-18


def test_eta_eval_matches_product():
    val = eta(30).eval(SamplePoint(1j))
    assert abs(val - oracles.eta_product(1j)) < 1e-12


def test_coefficient_beyond_trunc():
    with pytest.raises(InputError):
        eta(5).coefficient(5)


def test_json_round_trip_exact():
    s = eta_inverse_pow(3, 10).shift(Fraction(7, 3), ()) * Fraction(5, 7)
    s2 = MultiSeries.from_json(s.to_json())
    assert s2 == s and s2.q_offset == s.q_offset and s2.trunc == s.trunc
    assert s2.to_json() == s.to_json()
    doc = json.loads(s.to_json())
    assert doc["offset"] == f"{s.q_offset.numerator}/{s.q_offset.denominator}"
    assert all(isinstance(c, str) and "/" in c for _, _, c in doc["terms"])


def test_from_dict_malformed():
    with pytest.raises(InputError):
        MultiSeries.from_dict({"rank": 0})


def test_sample_point_domain():
    with pytest.raises(DomainError):
        SamplePoint(1 - 0.1j)
    with pytest.raises(DomainError):
        SamplePoint(1j, (), 7.0)
    SamplePoint(1j, (), -0.5)


def test_policy_validation():
    with pytest.raises(InputError):
        TruncationPolicy(n_q=0)
    with pytest.raises(InputError):
        TruncationPolicy(tail_tol=0)


def test_d_tau_and_d_z():
    s = MultiSeries(1, Fraction(1, 2), {(0, (2,)): 3, (1, (-1,)): 1}, 4)
    assert s.d_tau().coefficient(0, (2,)) == Fraction(3, 2)
    assert s.d_tau().coefficient(1, (-1,)) == Fraction(3, 2)
    assert s.d_z(0).coefficient(1, (-1,)) == -1


# ring axioms on random sparse series

rational = st.fractions(min_value=-5, max_value=5, max_denominator=7)
coeff_map = st.dictionaries(st.tuples(st.integers(0, 5), st.tuples(st.integers(-2, 2))), rational,
                            max_size=6)


def series(draw_map):
    return MultiSeries(1, Fraction(1, 3), draw_map, 6)


@settings(max_examples=60, deadline=None)
@given(coeff_map, coeff_map, coeff_map)
def test_ring_axioms(a, b, c):
    A, B, C = series(a), series(b), series(c)
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert A + B == B + A
    assert A * B == B * A


@settings(max_examples=25, deadline=None)
@given(coeff_map, coeff_map, st.floats(-0.5, 0.5), st.floats(-0.3, 0.3))
def test_eval_is_multiplicative(a, b, x, y):
    A = MultiSeries(1, 0, a, 20)
    B = MultiSeries(1, 0, b, 20)
    p = SamplePoint(complex(x, 1.0), (complex(y, 0.1),))
    lhs, rhs = (A * B).eval(p), A.eval(p) * B.eval(p)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))
