"""Dirac operators, Clifford triple, and Fredholm analysis on the 3-sphere."""

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdirac.diracsu2 import (
    algebraic_dirac,
    cluster_levels,
    clifford_covariance,
    clifford_exact_relations,
    clifford_numeric,
    clifford_numeric_residuals,
    counting_eigenvalues,
    decay_levels,
    dtilde_operator,
    fredholm_package,
    fredholm_sign,
    fundamental_report,
    gate_exponential,
    homotopy_family,
    singlet_report,
    spectrum_table,
    summability_report,
)
from qdirac.linalg import BlockOperator, fit_powerlaw, q_bracket_op
from qdirac.scalars import QContext
from qdirac.spinspace import build_decomposition, isospectral_dirac

CTX = QContext("0.5", prec=128)
TOL = mpmath.mpf("1e-30")


def test_spectrum_table_frozen_values():
    rows, max_dev = spectrum_table(CTX, 4)
    with CTX.guard():
        assert max_dev < TOL
        vals = {(r["twoj"], r["branch"]): r["value"] for r in rows}
        assert vals[(0, "up")] == 0
        assert abs(vals[(2, "up")] - CTX.mpf("2.5")) < TOL
        assert abs(vals[(1, "down")] - CTX.mpf("-5.25")) < TOL
    for r in rows:
        assert r["measured_mult"] == r["predicted_mult"]
        expected = (
            (r["twoj"] + 2) * (r["twoj"] + 1)
            if r["branch"] == "up"
            else r["twoj"] * (r["twoj"] + 1)
        )
        assert r["predicted_mult"] == expected


@pytest.mark.parametrize("q_str", ["0.3", "0.9"])
def test_spectrum_other_q(q_str):
    ctx = QContext(q_str, prec=128)
    rows, max_dev = spectrum_table(ctx, 3)
    with ctx.guard():
        assert max_dev < TOL
    assert all(r["measured_mult"] == r["predicted_mult"] for r in rows)


def test_exponential_gate_unique_winner():
    op, name, report = gate_exponential(CTX, 4)
    assert name == "ke-kiki"
    assert sorted(report) == ["ke-kiki", "ke-negkk", "kf-kiki", "kf-negkk"]
    assert report["ke-kiki"]["accepted"]
    assert report["ke-kiki"]["positive"]
    with CTX.guard():
        assert report["ke-kiki"]["spectrum_deviation"] < TOL
    # the printed signs fail visibly, not silently
    assert not report["kf-negkk"]["selfadjoint"]
    assert not report["kf-kiki"]["selfadjoint"]
    assert report["ke-negkk"]["selfadjoint"]
    assert not report["ke-negkk"]["positive"]
    assert not report["ke-negkk"]["accepted"]


def test_exponential_eigenvalues_on_smallest_shells():
    op, _, _ = gate_exponential(CTX, 2)
    with CTX.guard():
        evs = sorted(ev.real for ev in op.eigenvalues())
        half = CTX.mpf("0.5")
        assert any(abs(ev - half) < TOL for ev in evs)
        assert any(abs(ev - 8) < TOL for ev in evs)
        assert any(abs(ev - 1) < TOL for ev in evs)
        assert evs[0] > 0


@pytest.mark.parametrize("q_str", ["0.3", "0.5", "0.9"])
def test_fundamental_relation(q_str):
    ctx = QContext(q_str, prec=128)
    rep = fundamental_report(ctx, 4)
    assert rep["variant"] == "ke-kiki"
    with ctx.guard():
        assert rep["bracket_residual_direct"] < TOL
        assert rep["bracket_residual_spectral"] < TOL
        assert rep["spectrum_deviation"] < TOL
        assert rep["linear_spectrum_deviation"] < TOL


def test_fundamental_shifted_negative_control():
    twol_max = 3
    C = build_decomposition(CTX, twol_max)
    Q, _, _ = gate_exponential(CTX, twol_max)
    with CTX.guard():
        D = C.dagger() @ algebraic_dirac(CTX, twol_max) @ C
        Dt = C.dagger() @ dtilde_operator(CTX, Q) @ C
        shifted = D + BlockOperator.identity(CTX, D.labels)
        gap = shifted - q_bracket_op(Dt)
        # on every interior label the defect is exactly the shift
        assert min(abs(ev) for ev in gap.eigenvalues()) > CTX.mpf("0.99")


def test_clifford_exact_relations_vanish():
    rels = clifford_exact_relations()
    assert sorted(rels) == [
        "anticommutator",
        "middle",
        "plus_zero",
        "square_minus",
        "square_plus",
        "zero_minus",
    ]
    for mat in rels.values():
        for row in mat:
            for entry in row:
                assert entry.is_zero()


@pytest.mark.parametrize("q_str", ["0.3", "0.5", "0.9"])
def test_clifford_numeric_residuals(q_str):
    ctx = QContext(q_str, prec=128)
    res = clifford_numeric_residuals(ctx)
    with ctx.guard():
        bound = mpmath.mpf("1e-25")
        for name, val in res.items():
            assert val < bound, name


def test_clifford_matrix_entries():
    ctx = QContext("0.25", prec=128)
    psi = clifford_numeric(ctx)
    with ctx.guard():
        assert abs(psi[2][0, 1] - ctx.mpf("0.5")) < TOL
        assert abs(psi[-2][1, 0] + 2) < TOL
        assert psi[2][0, 0] == psi[2][1, 0] == psi[2][1, 1] == 0
        assert psi[0][0, 1] == psi[0][1, 0] == 0
        norm2 = mpmath.sqrt(ctx.q_int(2))
        assert abs(psi[0][0, 0] + 1 / (norm2 * ctx.q)) < TOL
        assert abs(psi[0][1, 1] - ctx.q / norm2) < TOL


def test_clifford_covariance():
    cov = clifford_covariance(CTX)
    with CTX.guard():
        for key in ("lower_top", "raise_top", "lower_bottom", "raise_bottom_residual"):
            assert cov[key] < TOL
        for twoi in (2, 0, -2):
            assert cov[f"weight_{twoi}"] < TOL
        assert abs(cov["raise_bottom_coeff"] - mpmath.sqrt(CTX.q_int(2))) < TOL


@pytest.mark.parametrize("q_str", ["0.3", "0.5"])
def test_singlet_reconstruction(q_str):
    ctx = QContext(q_str, prec=128)
    rep = singlet_report(ctx, 3)
    with ctx.guard():
        assert abs(rep["scale"] + ctx.q_int(2) / ctx.q) < TOL
        assert rep["scale_deviation"] < TOL
        assert rep["residual"] < TOL
        assert rep["diagonal_residual"] < TOL
        assert rep["equivariance"] < mpmath.mpf("1e-28")


def test_fredholm_sign_values():
    with CTX.guard():
        F = fredholm_sign(CTX, isospectral_dirac(CTX, 2))
        evs = [ev.real for ev in F.eigenvalues()]
        # kernel shell passes through as 0, and 2 maps to 2/sqrt(5)
        assert any(abs(ev) < TOL for ev in evs)
        target = CTX.mpf("0.894427190999915878563669467492510494")
        assert any(abs(ev - target) < mpmath.mpf("1e-35") for ev in evs)
        assert max(abs(ev) for ev in evs) <= 1


def test_fredholm_package_bounds():
    pkg = fredholm_package(CTX, 3, "qint")
    assert pkg["opnorm"] <= 1 + 1e-12
    assert abs(pkg["f2m1"][0] - 1.0) < 1e-30
    assert all(x >= y for x, y in zip(pkg["comm_a"], pkg["comm_a"][1:]))
    assert all(v > 0 for v in pkg["comm_a"])
    lin = fredholm_package(CTX, 3, "linear")
    assert lin["opnorm"] <= 1 + 1e-12


def test_counting_exponent_band():
    mu = counting_eigenvalues(13)
    exponent, r2 = fit_powerlaw(range(1, len(mu) + 1), mu)
    assert -0.8 < exponent < -0.55
    assert r2 > 0.97


def test_summability_report_shape():
    rep = summability_report(CTX, twol_max=9)
    assert rep["opnorm_qint"] <= 1 + 1e-12
    assert rep["opnorm_linear"] <= 1 + 1e-12
    assert rep["f2m1_r2"] > 0.99
    assert rep["commutator_level_r2"] > 0.95
    assert rep["commutator_level_rate"] < 0
    assert rep["commutator_level_count"] > 10
    assert rep["counting_cross_deviation"] < mpmath.mpf("1e-20")
    assert rep["commutator_r2"] <= rep["commutator_level_r2"]


def test_homotopy_family_endpoints_and_domain():
    twol_max = 3
    C = build_decomposition(CTX, twol_max)
    Q, _, _ = gate_exponential(CTX, twol_max)
    with CTX.guard():
        Dt = C.dagger() @ dtilde_operator(CTX, Q) @ C
        D = C.dagger() @ algebraic_dirac(CTX, twol_max) @ C
        F0 = homotopy_family(CTX, 0, twol_max)
        F1 = homotopy_family(CTX, 1, twol_max)
        assert (F0 - fredholm_sign(CTX, Dt)).frobenius() < mpmath.mpf("1e-25")
        assert (F1 - fredholm_sign(CTX, D)).frobenius() < mpmath.mpf("1e-25")
        Fsmall = homotopy_family(CTX, "0.001", twol_max)
        assert (Fsmall - F0).frobenius() < mpmath.mpf("1e-3")
    for bad in ("-0.1", "1.5"):
        with pytest.raises(ValueError):
            homotopy_family(CTX, bad, twol_max)


_descending = st.lists(
    st.floats(min_value=1e-12, max_value=1.0), min_size=1, max_size=60
).map(lambda xs: sorted(xs, reverse=True))


@settings(max_examples=80, deadline=None)
@given(_descending)
def test_cluster_levels_invariants(vals):
    reps = cluster_levels(vals, thr=0.5)
    assert reps and reps[0] == vals[0]
    assert all(x / y < 0.5 for x, y in zip(reps[1:], reps))
    assert set(reps) <= set(vals)


@settings(max_examples=80, deadline=None)
@given(_descending)
def test_decay_levels_invariants(vals):
    levels = decay_levels(vals, rel_tol=1e-9, floor_ratio=1e-6)
    assert all(x > vals[0] * 1e-6 for x in levels)
    assert all(x < y * (1 - 1e-9) for x, y in zip(levels[1:], levels))
