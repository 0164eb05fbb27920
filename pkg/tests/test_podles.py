"""Invariant sphere: generators, subspace, Dirac operator, decay."""

import mpmath
import pytest

from qdirac.podles import (
    expected_sphere_spectrum,
    haar_report,
    invariant_subspace_report,
    sector_ratio_report,
    sphere_dirac,
    sphere_generators,
    sphere_labels,
    sphere_relation_residuals,
    sphere_spectrum_table,
    sphere_triple_report,
)
from qdirac.scalars import QContext

CTX = QContext("0.5", prec=128)
TOL = mpmath.mpf("1e-30")


@pytest.mark.parametrize("q_str", ["0.3", "0.5", "0.9"])
def test_relations_vanish(q_str):
    ctx = QContext(q_str, prec=128)
    res = sphere_relation_residuals(ctx)
    with ctx.guard():
        bound = mpmath.mpf("1e-25")
        for name, val in res.items():
            assert val < bound, name


def test_haar_value_two_routes():
    rep = haar_report(CTX)
    with CTX.guard():
        assert rep["difference"] < TOL
        assert abs(rep["haar_B"] - CTX.mpf("0.8")) < TOL
    ctx3 = QContext("0.3", prec=128)
    rep3 = haar_report(ctx3)
    with ctx3.guard():
        target = ctx3.mpf("0.917431192660550458715596330275229")
        assert abs(rep3["haar_B"] - target) < TOL


def test_generators_are_weight_zero_elements():
    G = sphere_generators(CTX)
    for x in G.values():
        assert all(idx.twom == 0 for idx in x.terms)


@pytest.mark.parametrize("twol_max", [1, 3, 5, 8])
def test_sphere_label_set(twol_max):
    labs = sphere_labels(twol_max)
    assert all(lab.twom + lab.twosigma == 0 for lab in labs)
    assert all(lab.twol % 2 for lab in labs)
    assert len(labs) == sum(2 * (twol + 1) for twol in range(1, twol_max + 1, 2))


def test_invariant_subspace_projector():
    rep = invariant_subspace_report(CTX, 5)
    assert rep["rank"] == 24
    assert rep["matches_displayed"]
    assert rep["sector_counts_match"]
    assert rep["even_shells_empty"]
    with CTX.guard():
        assert rep["eigenvector_defect"] < TOL


def test_dirac_forms_agree_only_on_subspace():
    rep = sphere_dirac(CTX, 7)
    with CTX.guard():
        assert rep["agreement"] < mpmath.mpf("1e-20")
        assert rep["forms_differ_off_subspace"] > 1
        assert rep["leakage"] < TOL
        assert rep["spectrum_symmetry"] < TOL


def test_gamma_anticommutation_exact():
    for q_str in ("0.3", "0.5"):
        ctx = QContext(q_str, prec=128)
        rep = sphere_dirac(ctx, 5)
        assert rep["gamma_anticommutator"] == 0


def test_spectrum_closed_form():
    rows, max_dev = sphere_spectrum_table(CTX, 7)
    with CTX.guard():
        assert max_dev < TOL
        vals = {(r["twol"], r["sign"]): r for r in rows}
        assert abs(vals[(1, 1)]["value"] - CTX.mpf("2.5")) < TOL
        assert abs(vals[(3, -1)]["value"] + CTX.mpf("6.25")) < TOL
        assert abs(vals[(7, 1)]["value"] - CTX.mpf("26.5625")) < TOL
    for r in rows:
        assert r["measured_mult"] == r["mult"] == r["twol"] + 1


def test_expected_spectrum_other_q():
    ctx = QContext("0.9", prec=128)
    rows, max_dev = sphere_spectrum_table(ctx, 5)
    with ctx.guard():
        assert max_dev < TOL
    assert all(r["measured_mult"] == r["mult"] for r in rows)


def test_sector_ratio_limits():
    rep = sector_ratio_report(CTX, 9)
    with CTX.guard():
        # the distinct magnitudes grow by ~q^-1 per shell; q^-2 is off by ~50%
        assert rep["tail_deviation_qinv"] < mpmath.mpf("0.05")
        assert rep["tail_deviation_qinv2"] > mpmath.mpf("0.4")
        assert rep["growth_r2"] > mpmath.mpf("0.99")
        assert rep["rate_vs_qinv"] < rep["rate_vs_qinv2"]


def test_triple_report_stability():
    rep = sphere_triple_report(CTX, 9)
    with CTX.guard():
        assert rep["commutator_drift_B"] < mpmath.mpf("0.01")
        assert rep["heat_drift"] < mpmath.mpf("1e-6")
        assert rep["rho_leakage"] < TOL
        assert rep["equivariance"] < TOL
        norms = rep["commutator_norms"]
        assert abs(norms["A@9"] - norms["Astar@9"]) < mpmath.mpf("1e-20")
        assert all(v < 10 for v in norms.values())
