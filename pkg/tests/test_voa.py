import cmath
from fractions import Fraction as F

import pytest

from jtrace.errors import ConditionHError, InputError
from jtrace.lattice import EvenLattice, HSpec, discriminant_cosets, theta_series
from jtrace.qseries import MultiSeries, SamplePoint, eta_inverse_pow, with_rank
from jtrace.eisenstein import classical_E
from jtrace.voa.family import (CosetComponent, ModuleDescriptor, ModuleFamily, assemble_trace,
                               delta_module_shift, family_trace_value, phi_trace)
from jtrace.voa.fock import (FockState, bracket_coeff, bracket_convert, charged_pair_products,
                             graded_basis, round_to_square)
from jtrace.voa.heisenberg import (HeisenbergModule, SquareMonomial, c_coeff, f_series,
                                   fock_trace_oracle, heisenberg_trace, square_oracle)

import oracles

A1 = EvenLattice([[2]])
A2 = EvenLattice([[2, -1], [-1, 2]])
H1 = HSpec(((F(1),),))


def test_c_coeff_examples():
    assert all(c_coeff(l, l // 2 * 0) == 1 for l in range(8))
    assert c_coeff(3, 1) == 3
    assert c_coeff(4, 0) == 1 and c_coeff(4, 1) == 6 and c_coeff(4, 2) == 3
    with pytest.raises(InputError):
        c_coeff(3, 2)
    with pytest.raises(InputError):
        c_coeff(2, -1)


def test_c_coeff_matches_closed_form():
    for l in range(9):
        for i in range(l // 2 + 1):
            assert c_coeff(l, i) == oracles.c_closed(l, i)


def test_f_series_small_cases():
    N = 6
    assert f_series(2, 3, 0, N) == MultiSeries.one(0, N)
    assert f_series(2, 3, 1, N) == MultiSeries.constant(3, 0, N)
    assert f_series(2, 3, 2, N) == MultiSeries.constant(9, 0, N) + classical_E(2, N).scale(2)


def test_heisenberg_partition_example():
    M = HeisenbergModule((F(2),), (F(1),))
    s = heisenberg_trace(SquareMonomial.vacuum(), M, ((F(1),),), 6)
    assert s.q_offset == 1 - F(1, 24)
    counts = oracles.colored_partitions(1, 6)
    assert [s.layer(n).get((2,), 0) for n in range(6)] == counts
    s1 = heisenberg_trace(SquareMonomial(((0, 1, 1),)), M, ((F(1),),), 6)
    assert s1 == s.scale(2)


@pytest.mark.parametrize("factors", [(), ((0, 1, 1),), ((0, 1, 2),), ((0, 1, 1), (1, 1, 1)),
                                     ((0, 1, 3),), ((0, 1, 2), (1, 1, 2))])
def test_dual_route_heisenberg(factors):
    M = HeisenbergModule((F(2), F(6)), (F(1, 2), F(-1, 3)))
    hs = ((F(2), F(0)), (F(0), F(3)))
    v = SquareMonomial(factors)
    closed = heisenberg_trace(v, M, hs, 7)
    brute = square_oracle(v, M, hs, 6)
    assert closed.truncate(7) == brute
    for k in range(5):
        p = SamplePoint(0.1 * k - 0.2 + 1.1j, (0.05 * k + 0.02j, 0.1 - 0.01j * k))
        assert abs(closed.eval(p) - brute.eval(p)) <= 1e-9 * max(1, abs(brute.eval(p)))


def test_fock_oracle_basics():
    M = HeisenbergModule((F(2),), (F(3, 2),))
    hs = ((F(2),),)
    base = fock_trace_oracle(FockState.vacuum(), M, hs, 5)
    one = fock_trace_oracle(FockState.monomial([(0, 1)]), M, hs, 5)
    assert one == base.scale(3)
    with pytest.raises(InputError, match="grade_cutoff"):
        fock_trace_oracle(FockState.vacuum(), M, hs, 13)


def test_condition_h_heisenberg():
    M = HeisenbergModule((F(2),), (F(1, 3),))
    with pytest.raises(ConditionHError):
        heisenberg_trace(SquareMonomial.vacuum(), M, ((F(1),),), 4)


def test_bracket_convert_examples():
    assert bracket_convert(FockState.vacuum(), (F(1),)) == FockState.vacuum()
    st = bracket_convert(FockState.monomial([(0, 1)]), (F(1),))
    assert st.terms == {((0, 1),): 1}
    assert bracket_coeff(0, 0) == 1
    st2 = bracket_convert(FockState.monomial([(0, 2)]), (F(1),))
    assert st2.terms == {((0, 2),): 1, ((0, 1),): 1}


def test_round_square_inverse():
    norms = (F(2), F(4))
    for key in [((0, 1), (0, 2)), ((1, 3),), ((0, 1), (1, 1), (1, 2))]:
        st = FockState.monomial(key, F(5, 3))
        assert round_to_square(bracket_convert(st, norms), norms) == st


def test_graded_basis_counts():
    for d in (1, 2, 3):
        counts = oracles.colored_partitions(d, 8)
        assert [len(graded_basis(d, g)) for g in range(8)] == counts


def test_family_matches_theta_over_eta():
    fam = ModuleFamily.lattice_voa(A1)
    cs = discriminant_cosets(A1)
    for r in range(2):
        got = assemble_trace(SquareMonomial.vacuum(), fam, r, H1, 6)
        th = theta_series(cs, r, (0,), 0, H1, 6)
        assert got == with_rank(eta_inverse_pow(1, 6), 1) * th
    one = assemble_trace(SquareMonomial(((0, 1, 1),)), fam, 0, H1, 6)
    th1 = theta_series(cs, 0, fam.generators[0], 1, H1, 6)
    assert one == with_rank(eta_inverse_pow(1, 6), 1) * th1


def test_family_empty_h_is_character():
    fam = ModuleFamily.lattice_voa(A2)
    s = assemble_trace(SquareMonomial.vacuum(), fam, 0, HSpec(()), 5)
    # theta_A2 = 1 + 6q + 0q^2 + 6q^3 + 6q^4
    th = MultiSeries(0, 0, {(0, ()): 1, (1, ()): 6, (3, ()): 6, (4, ()): 6}, 5)
    assert s == eta_inverse_pow(2, 5) * th


def test_weight_bookkeeping():
    fam = ModuleFamily.lattice_voa(A2)
    meta = []
    v = SquareMonomial(((0, 1, 3), (1, 1, 2)))
    assemble_trace(v, fam, 1, HSpec(((1, 0),)), 4, meta)
    assert len(meta) == 2 * 2
    for m in meta:
        assert m.quasi_weight == 2 * sum(m.i)
        assert m.k == 5 - 2 * sum(m.i)


def test_nonzero_tail_vanishes():
    zero = (F(0), F(0))
    comp = CosetComponent(zero, {"vacuum": MultiSeries.one(0, 100), "charged": MultiSeries.one(0, 100)})
    fam = ModuleFamily(A2, [ModuleDescriptor("m", (comp,))], tail_components={"charged": 1})
    s = fam.module(0).closed_form((1, 0), (), HSpec(()), 5, "charged")
    assert s.is_zero()
    with pytest.raises(InputError):
        fam.module(0).closed_form((1, 0), (), HSpec(()), 5, "missing")


def test_conformal_weights():
    fam = ModuleFamily.lattice_voa(A2)
    assert [fam.conformal_weight(r) for r in range(3)] == [0, F(1, 3), F(1, 3)]


def test_numeric_trace_matches_series():
    fam = ModuleFamily.lattice_voa(A2)
    hs = HSpec(((1, 0),))
    v = SquareMonomial(((0, 1, 2),))
    p = SamplePoint(0.1 + 1.2j, (0.1 + 0.05j,))
    for r in range(3):
        s = assemble_trace(v, fam, r, hs, 30)
        assert abs(family_trace_value(fam, r, v, hs, p.tau, p.zs) - s.eval(p)) < 1e-10


def test_phi_trace():
    fam = ModuleFamily.lattice_voa(A1)
    tau, z = 0.2 + 1.0j, 0.1 + 0.03j
    for r in range(2):
        J = family_trace_value(fam, r, SquareMonomial.vacuum(), H1, tau, (z,))
        assert abs(phi_trace(fam, r, (0,), (z,), tau) - J) < 1e-12
    # a lattice shift u = lam h gives the elliptic factor of the v = 1 trace
    lam = 1
    J = family_trace_value(fam, 0, SquareMonomial.vacuum(), H1, tau, (z + lam * tau,))
    phi = phi_trace(fam, 0, (lam,), (z,), tau)
    back = cmath.exp(-2j * cmath.pi * (lam * z + lam ** 2 * tau))
    assert abs(J - phi * back) < 1e-10 * abs(J)


def test_delta_module_shift():
    fam = ModuleFamily.lattice_voa(A1)
    assert delta_module_shift(fam, (1,)) == [0, 1]
    E8_like = ModuleFamily.lattice_voa(EvenLattice([[2, 0], [0, 2]]))
    assert delta_module_shift(E8_like, (1, 0)) == [0, 1, 2, 3]
    with pytest.raises(ConditionHError):
        delta_module_shift(fam, (F(1, 2),))


def test_charged_pair_products_low_orders():
    # beta = e in A1: <beta,beta> = 2, so e^b[k]e^-b for k = -2, -1, 0, 1
    prods = charged_pair_products((F(1),), (F(2),), -2)
    assert prods[1] == FockState.vacuum()
    assert prods[0].terms == {((0, 1),): 1}
    assert sorted(prods) == [-2, -1, 0, 1]
    for k, st in prods.items():
        assert st.max_grade() == 1 - k
