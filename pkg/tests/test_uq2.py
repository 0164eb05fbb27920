"""Charged extension: algebra, charged GNS action, block Dirac, regularity."""

import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdirac.scalars import QContext
from qdirac.spinspace import build_decomposition, spin_labels
from qdirac.uq2 import (
    U2Element,
    U2Label,
    algebra_report,
    comm_norm_drifts,
    dimension_fit,
    dirac_report,
    dirac_uq2,
    exact_count,
    make_u2_index,
    n_label_value,
    random_u2_element,
    regularity_probe,
    rep_report,
    rho_hat,
    shell_count,
    truncation_count_check,
    u2_generators,
    u2_haar_inner,
    u2_haar_state,
    u2_interior,
    u2_labels,
)

CTX = QContext("0.5", prec=128)
TOL = mpmath.mpf("1e-30")


def test_index_validation():
    make_u2_index(2, 0, 2, 4)
    make_u2_index(1, 1, -1, -3)
    with pytest.raises(ValueError):
        make_u2_index(1, 1, 1, 2)
    with pytest.raises(ValueError):
        make_u2_index(0, 0, 0, 1)
    with pytest.raises(ValueError):
        make_u2_index(1, 3, 1, 1)


@pytest.mark.parametrize("q_str", ["0.3", "0.5", "0.9"])
def test_charge_generator_unitary_central(q_str):
    ctx = QContext(q_str, prec=128)
    rep = algebra_report(ctx)
    with ctx.guard():
        assert rep["unitarity_defect"] < TOL
        assert rep["centrality_defect"] < TOL
        assert rep["charge_shift_defect"] < TOL


def test_haar_norm_example_two_routes():
    rep = algebra_report(CTX)
    with CTX.guard():
        assert rep["norm_example_defect"] < TOL
        # [3] = 21/4 at q = 1/2, so the squared norm is 4/21
        assert abs(rep["norm_example_product"] - mpmath.mpf(4) / 21) < TOL
        assert rep["faithful_min_norm"] > 0
    assert rep["parity_closed"] is True


def test_haar_state_keeps_charge_zero_only():
    gens = u2_generators(CTX)
    with CTX.guard():
        assert u2_haar_state(gens["C"]) == 0
        assert u2_haar_state(U2Element.one(CTX)) == 1
        assert u2_haar_state(gens["C"] * gens["Cstar"]) == 1


def test_involution_involutive_and_antimultiplicative():
    rng = random.Random(3)
    with CTX.guard():
        for _ in range(20):
            x = random_u2_element(CTX, rng)
            y = random_u2_element(CTX, rng)
            assert (x.star().star() - x).max_abs_coeff() < TOL
            assert ((x * y).star() - y.star() * x.star()).max_abs_coeff() < TOL


@st.composite
def _small_index(draw):
    twol = draw(st.integers(min_value=0, max_value=2))
    # weights and charge stay on the twol parity class by construction
    twom = twol - 2 * draw(st.integers(min_value=0, max_value=twol))
    twon = twol - 2 * draw(st.integers(min_value=0, max_value=twol))
    twoc = twol - 2 * draw(st.integers(min_value=-1, max_value=twol + 1))
    return (twol, twom, twon, twoc)


@settings(max_examples=40, deadline=None)
@given(_small_index(), _small_index())
def test_product_adds_charges(i1, i2):
    x = U2Element.basis(CTX, *i1)
    y = U2Element.basis(CTX, *i2)
    prod = x * y
    for idx in prod.terms:
        assert idx.twoc == i1[3] + i2[3]
        assert abs(i1[0] - i2[0]) <= idx.twol <= i1[0] + i2[0]
        assert (idx.twol - idx.twoc) % 2 == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=4), st.integers(min_value=0, max_value=6))
def test_label_lattice_size(twol_max, twoc_max):
    labs = u2_labels(twol_max, twoc_max)
    expected = 0
    for sl in spin_labels(twol_max):
        expected += 2 * len([c for c in range(-twoc_max, twoc_max + 1) if (c - sl.twoj) % 2 == 0])
    assert len(labs) == expected
    assert all((lab.twoc - lab.twoj) % 2 == 0 for lab in labs)


def test_interior_margins():
    inner = u2_interior(6, 8, 2, 2)
    assert all(lab.twoj <= 4 and abs(lab.twoc) <= 6 for lab in inner)
    with pytest.raises(ValueError):
        u2_interior(2, 8, 2, 2)
    with pytest.raises(ValueError):
        u2_interior(6, 2, 2, 2)


def test_rho_isometry_sectors_adjoint():
    rep = rep_report(CTX, 6, 8)
    with CTX.guard():
        assert rep["isometry_defect"] < TOL
        assert rep["central_commutant_defect"] < TOL
        assert rep["sector_mismatch"] == 0
        assert rep["adjoint_defect"] < TOL


def test_rho_multiplicative_on_interior():
    gens = u2_generators(CTX)
    C = build_decomposition(CTX, 6)
    interior = u2_interior(6, 8, 2, 4)
    with CTX.guard():
        for n1, n2 in (("a", "b"), ("C", "a"), ("astar", "b")):
            lhs = rho_hat(CTX, gens[n1] * gens[n2], 6, 8, decomposition=C)
            rhs = rho_hat(CTX, gens[n1], 6, 8, decomposition=C) @ rho_hat(
                CTX, gens[n2], 6, 8, decomposition=C
            )
            assert (lhs - rhs).restrict(interior).max_entry() < TOL


def test_rho_strict_overflow():
    gens = u2_generators(CTX)
    with pytest.raises(ValueError):
        rho_hat(CTX, gens["C"], 2, 2, strict=True)


def test_absd_closed_form_values():
    with CTX.guard():
        assert n_label_value(CTX, U2Label(0, 1, 0, True, 0, 1)) == mpmath.mpf(3) / 2
        expect = mpmath.sqrt(26) / 2
        assert abs(n_label_value(CTX, U2Label(1, 0, 1, True, 1, 1)) - expect) < TOL
        assert n_label_value(CTX, U2Label(2, 1, 0, False, 0, -1)) == mpmath.mpf(5) / 2


@pytest.mark.parametrize("q_str", ["0.5", "0.9"])
def test_dirac_identities(q_str):
    ctx = QContext(q_str, prec=128)
    rep = dirac_report(ctx, 4, 6)
    with ctx.guard():
        assert rep["selfadjoint_defect"] == 0
        assert rep["calculus_absd_defect"] < TOL
        assert rep["base_n_defect"] == 0
        assert rep["gamma_anticommutator"] == 0
        assert rep["gamma_rho_commutant"] == 0
        assert rep["circle_identity_defect"] < TOL
        assert rep["half_shift_defect"] < TOL
        assert rep["equivariance_defect"] < mpmath.mpf("1e-25")


def test_gamma_conjugation_flips_dirac():
    dhat, gamma, _ = dirac_uq2(CTX, 3, 5)
    with CTX.guard():
        assert (gamma @ dhat @ gamma + dhat).max_entry() == 0


def test_probe_circle_first_order():
    probe = regularity_probe(CTX, "C", 2, 6, 8)
    with CTX.guard():
        # interior window tops out at the charge pair 2c = 4 -> 6
        frozen = (3 * mpmath.sqrt(5) - 5) / 2
        assert abs(probe["first_order_sup"] - frozen) < TOL
        assert probe["first_order_le_one"] is True
        assert probe["first_order_norm_defect"] < mpmath.mpf("1e-9")
        assert probe["derivation_identity_defect"] < TOL
        assert probe["weight_identity_defect"] < TOL
    assert probe["remainder_levels"] == 0
    for p in (1, 2):
        assert probe["norms"][p]["drift"] < 1e-10


def test_probe_sphere_generator():
    probe = regularity_probe(CTX, "a", 2, 6, 8)
    with CTX.guard():
        assert probe["derivation_identity_defect"] < TOL
        assert probe["weight_identity_defect"] < TOL
    for p in (1, 2):
        assert probe["norms"][p]["small"] < 10
        assert probe["norms"][p]["drift"] < 0.01
    assert probe["remainder_levels"] > 8
    assert probe["remainder_rate"] < -0.3
    assert probe["remainder_r2"] > 0.99


def test_probe_rejects_bad_input():
    with pytest.raises(ValueError):
        regularity_probe(CTX, "x", 2, 6, 8)
    with pytest.raises(ValueError):
        regularity_probe(CTX, "a", 4, 6, 8)
    with pytest.raises(ValueError):
        regularity_probe(CTX, "a", 2, 2, 8)


def test_comm_norm_drifts():
    drifts = comm_norm_drifts(CTX, 6, 8)
    for t in ("a", "b", "C"):
        assert drifts[t]["drift"] < 0.01
    assert abs(drifts["C"]["small"] - 1.0) < 1e-12


def test_dimension_fit_bands():
    fit = dimension_fit(CTX)
    assert 3.7 < fit["exponent"] < 4.3
    assert fit["half_window_shift"] < 0.2
    assert 2.5 < fit["control_exponent"] < 3.5
    assert 3.8 < fit["exact_count_exponent"] < 4.2
    assert fit["r2"] > 0.99


def test_counts_monotone_and_consistent():
    prev_shell = prev_exact = 0
    for lam in (3.0, 5.0, 8.0, 12.0):
        s, e = shell_count(lam), exact_count(lam)
        assert s >= prev_shell and e >= prev_exact
        prev_shell, prev_exact = s, e
    # the shell count lumps the down tower at the larger shell value,
    # so it can only trail the exact count
    assert shell_count(12.0) <= exact_count(12.0)


@pytest.mark.parametrize("size", [(4, 6), (6, 8)])
def test_truncation_count_matches_lattice(size):
    check = truncation_count_check(CTX, *size)
    assert check["match"] is True
    assert check["operator_count"] == check["lattice_count"] > 0
