import cmath
import math

import pytest

from jtrace.eisenstein import TwistSpec, eisenstein_const
from jtrace.errors import DomainError, InputError
from jtrace.qseries import SamplePoint
from jtrace.weierstrass import (eulerian_row, polylog_neg, twisted_P, twisted_P_direct,
                                twisted_P_expansion, twisted_P_series)

import oracles

# value of the polylog-ordered oracle at (k=2, w=0.5+0.1i, tau=2i, x=0.31)
P2_REF = 3.4679525418481516 - 1.4788846132962814j


def test_eulerian_polylog():
    assert eulerian_row(3) == (1, 4, 1)
    x = 0.3 + 0.1j
    assert abs(polylog_neg(3, x) - sum(l ** 2 * x ** l for l in range(1, 200))) < 1e-14


def test_reference_values():
    assert abs(twisted_P(2, 0.5 + 0.1j, 2j, 0.31, extended=True) - P2_REF) < 1e-12
    p = SamplePoint(2j, (0.31,), 0.5 + 0.1j)
    assert abs(twisted_P_series(2, p, TwistSpec((1,)), 40) - P2_REF) < 1e-9


def test_unit_circle_w_agrees_with_expansion():
    direct = twisted_P(3, 0.2j, 3j, 0.4, extended=True)
    series = twisted_P_expansion(3, 0.2j, 3j, 0.4, 30)
    assert abs(direct - series) < 1e-10
    assert abs(direct - oracles.twisted_P_mp(3, 0.2j, 3j, 0.4)) < 1e-11


def test_against_polylog_oracle():
    for k in range(1, 5):
        for w, tau, x in [(-0.3 + 0.2j, 1j, 0.1 + 0.1j), (-1.0 - 0.4j, 0.3 + 0.8j, 0.2), (-0.2, 1.2j, 0)]:
            ref = oracles.twisted_P_mp(k, w, tau, x)
            assert abs(twisted_P(k, w, tau, x) - ref) < 1e-11 * max(1, abs(ref))
            assert abs(twisted_P(k, w, tau, x, extended=True) - ref) < 1e-11 * max(1, abs(ref))


def test_pole_cancellation_k1():
    tau, x = 1.1j, 0.2 + 0.05j
    vals = [twisted_P(1, -w, tau, x, extended=True) + 1 / (-w) for w in (1e-3, 1e-4)]
    assert abs(vals[0] - vals[1]) < 1e-2
    assert abs(vals[1] - twisted_E_one(tau, x)) < 1e-3


def twisted_E_one(tau, x):
    from jtrace.eisenstein import twisted_E
    return twisted_E(1, tau, x)


def test_untwisted_q_limit():
    w = -0.4 + 0.2j
    val = twisted_P(2, w, 6j, 0)
    limit = 1 / w ** 2 + sum(math.comb(j - 1, 1) * float(eisenstein_const(j)) * w ** (j - 2)
                             for j in range(2, 40, 2))
    assert abs(val - limit) < 1e-12


def test_delta_term_only_for_twisted_k1():
    w, tau = -0.4 + 0.1j, 1j
    a = twisted_P(1, w, tau, 0.3)
    b = twisted_P(1, w, tau, 0.3 + 1e-9)
    assert abs(a - b) < 1e-6
    assert abs(twisted_P(1, w, tau, 0) - twisted_P(1, w, tau, 1.0)) < 1e-14


def test_series_guards():
    with pytest.raises(InputError):
        twisted_P_expansion(1, 0.1, 1j, 0.2, 0)
    with pytest.raises(DomainError):
        twisted_P_expansion(2, 0, 1j, 0.2, 10)
    with pytest.raises(DomainError):
        twisted_P_expansion(2, 3.5, 1j, 0.2, 10)
    with pytest.warns(RuntimeWarning):
        twisted_P_expansion(2, 2.5, 1j, 0.2, 5)


def test_pole_scaling():
    w = 1e-4j
    a = twisted_P_expansion(2, w, 2j, 0.3, 20)
    b = twisted_P_expansion(2, w / 2, 2j, 0.3, 20)
    assert abs(b / a - 4) < 1e-6


def test_direct_domain():
    with pytest.raises(DomainError):
        twisted_P(2, 0.1, 1j, 0.3)
    with pytest.raises(DomainError):
        twisted_P(2, 0.0, 1j, 0.3, extended=True)
    with pytest.raises(InputError):
        twisted_P_direct(2, SamplePoint(1j, (0.3,)), TwistSpec((1,)))
