"""Rank-two covariant Clifford family: representation, generators, kernels."""

import mpmath
import pytest

from qdirac.cliffordsu3 import (
    GT_BASIS,
    SPINOR_BASIS,
    adjoint_rep_su3,
    classical_limit_report,
    closed_form_bracket_variant,
    closed_form_solutions,
    constraint_b_minus,
    covariance_report,
    covariance_suite,
    intertwiner,
    intertwiner_residual,
    match_solutions,
    omega_rho_image,
    omega_zero_scalar,
    psi_family,
    solve_b_minus_numeric,
    solve_omega_rho,
    su3_relation_residuals,
    top_square_residual,
)
from qdirac.scalars import QContext

CTX = QContext("0.5", prec=128)
TOL = mpmath.mpf("1e-30")


@pytest.mark.parametrize("q_str", ["0.3", "0.7", "0.9"])
def test_adjoint_rep_relations(q_str):
    ctx = QContext(q_str, prec=128)
    res = su3_relation_residuals(ctx)
    with ctx.guard():
        assert max(res.values()) < TOL
    assert "serre_raise" in res and "ladder_offdiag" in res


def test_adjoint_rep_torus_diagonal_frozen():
    gens = adjoint_rep_su3(CTX)
    with CTX.guard():
        k1_exps = (1, -1, 2, 0, 0, -2, 1, -1)
        k2_exps = (1, 2, -1, 0, 0, 1, -2, -1)
        for i, (e1, e2) in enumerate(zip(k1_exps, k2_exps), start=1):
            assert abs(gens["k1"].entry(i, i) - CTX.q_pow(e1)) < TOL
            assert abs(gens["k2"].entry(i, i) - CTX.q_pow(e2)) < TOL
        for i in GT_BASIS:
            for j in GT_BASIS:
                if i != j:
                    assert abs(gens["k1"].entry(i, j)) == 0


def test_psi_entries_frozen():
    fam = psi_family(CTX, "0.37", constraint_b_minus(CTX, "0.37"))
    psi = fam["psi"]
    with CTX.guard():
        b = CTX.mpf("0.37")
        # top generator: unit leading entry, linear b entry
        assert abs(psi[1].entry(("+", 1), ("-", 4)) - 1) < TOL
        assert abs(psi[1].entry(("+", 1), ("-", 5)) - b) < TOL
        # diagonal generator: unit bottom corner entries
        assert abs(psi[4].entry(("+", 7), ("-", 7)) - 1) < TOL
        assert abs(psi[4].entry(("+", 8), ("-", 8)) - 1) < TOL
        # diagonal blocks vanish identically
        for i in GT_BASIS:
            for r in GT_BASIS:
                for c in GT_BASIS:
                    assert abs(psi[i].entry(("+", r), ("+", c))) == 0
                    assert abs(psi[i].entry(("-", r), ("-", c))) == 0


def test_constraint_examples():
    with CTX.guard():
        r3 = mpmath.sqrt(CTX.q_int(3))
        assert abs(constraint_b_minus(CTX, 1 / r3)) < TOL
        assert abs(constraint_b_minus(CTX, 0) - 1 / r3) < TOL


def test_constraint_is_involution():
    with CTX.guard():
        for b_str in ("0.1", "0.8", "-0.4", "2.3"):
            b = CTX.mpf(b_str)
            assert abs(constraint_b_minus(CTX, constraint_b_minus(CTX, b)) - b) < TOL


def test_constraint_pole_raises():
    with CTX.guard():
        pole = -mpmath.sqrt(CTX.q_int(3))
    with pytest.raises(ValueError):
        constraint_b_minus(CTX, pole)


def test_constraint_numeric_oracle():
    ctx = QContext("0.7", prec=128)
    rep = solve_b_minus_numeric(ctx, ctx.mpf("0.25"))
    with ctx.guard():
        closed = constraint_b_minus(ctx, ctx.mpf("0.25"))
        assert abs(rep["b_minus"] - closed) < mpmath.mpf("1e-20")
        assert rep["residual"] < mpmath.mpf("1e-20")


@pytest.mark.parametrize("b_str", ["0.0", "0.37", "-1.2"])
def test_top_square_vanishes_under_constraint(b_str):
    with CTX.guard():
        assert top_square_residual(CTX, CTX.mpf(b_str)) < TOL


def test_covariance_closure_and_weights():
    rep = covariance_report(CTX, CTX.mpf("0.37"))
    with CTX.guard():
        assert rep["closure_residual"] < TOL
        assert rep["relation_worst"] < TOL
        assert rep["weight_offdiag"] < TOL
        assert rep["weight_match"] < TOL
        assert rep["gram_min_sv"] > 1


def test_covariance_negative_control():
    rep = covariance_report(CTX, CTX.mpf("0.37"), perturb=(3, 1, 2, "1e-2"))
    with CTX.guard():
        assert rep["closure_residual"] > mpmath.mpf("1e-4")


def test_intertwiner_reused_across_parameters():
    rep = covariance_report(CTX, CTX.mpf("0.37"))
    tw = intertwiner(CTX, rep["expansion"])
    with CTX.guard():
        assert intertwiner_residual(CTX, rep["expansion"], tw["T"]) < TOL
        # the same change of basis must serve any other valid parameter
        other = covariance_report(CTX, CTX.mpf("-0.8"))
        assert intertwiner_residual(CTX, other["expansion"], tw["T"]) < TOL


def test_covariance_suite_random_parameters():
    suite = covariance_suite(CTX, nsamples=5, seed=7)
    with CTX.guard():
        assert suite["closure_residual"] < TOL
        assert suite["relation_worst"] < TOL
        assert suite["intertwiner_residual"] < TOL
        assert suite["perturbed_closure"] > mpmath.mpf("1e-4")


@pytest.mark.parametrize("q_str", ["0.3", "0.7", "0.9"])
def test_solver_matches_closed_forms(q_str):
    ctx = QContext(q_str, prec=128)
    sols = solve_omega_rho(ctx)
    rep = match_solutions(ctx, sols, closed_form_solutions(ctx))
    with ctx.guard():
        assert rep["count"] == 4
        assert rep["closed_to_numeric"] < mpmath.mpf("1e-10")
        assert rep["numeric_to_closed"] < mpmath.mpf("1e-10")
        assert rep["conjugation_closure"] < mpmath.mpf("1e-10")


def test_solver_kernel_and_conjugate_pairing():
    sols = solve_omega_rho(CTX)
    with CTX.guard():
        for s in sols:
            fam = psi_family(CTX, s["b_plus"], s["b_minus"])
            image = omega_rho_image(CTX, fam, s["z"])
            assert image.max_entry() < mpmath.mpf("1e-20")
            assert top_square_residual(CTX, s["b_plus"]) < mpmath.mpf("1e-20")
            # on the kernel locus the two block parameters are conjugate
            assert abs(s["b_minus"] - mpmath.conj(s["b_plus"])) < TOL


def test_solution_moduli_split_branches():
    sols = solve_omega_rho(CTX)
    with CTX.guard():
        mods = sorted(abs(s["b_plus"]) for s in sols)
        assert abs(mods[0] - CTX.q) < mpmath.mpf("1e-20")
        assert abs(mods[1] - CTX.q) < mpmath.mpf("1e-20")
        assert abs(mods[2] - 1 / CTX.q) < mpmath.mpf("1e-20")
        assert abs(mods[3] - 1 / CTX.q) < mpmath.mpf("1e-20")


def test_bracket_variant_properties():
    variant = closed_form_bracket_variant(CTX)
    sols = closed_form_solutions(CTX)
    with CTX.guard():
        # same z pair, far-off b values, and no conjugation closure
        zs = sorted({mpmath.nstr(v["z"].real, 20) for v in variant})
        assert zs == sorted({mpmath.nstr(s["z"].real, 20) for s in sols})
        worst = max(
            min(abs(v["b_plus"] - s["b_plus"]) for s in sols) for v in variant
        )
        assert worst > mpmath.mpf("0.1")
        conj_gap = max(
            min(abs(mpmath.conj(v["b_plus"]) - w["b_plus"]) for w in variant)
            for v in variant
        )
        assert conj_gap > mpmath.mpf("0.1")


def test_z_values_merge_classically():
    ctx = QContext("0.9999", prec=128)
    with ctx.guard():
        for s in closed_form_solutions(ctx):
            assert abs(s["z"] - 1) < mpmath.mpf("1e-3")
        # the b branches tend to +-i, with conjugate pairs merging
        gap = min(abs(s["b_plus"] - mpmath.mpc(0, 1)) for s in closed_form_solutions(ctx))
        assert gap < mpmath.mpf("1e-3")


def test_invariant_scalar_frozen():
    rep = omega_zero_scalar(CTX, 0)
    with CTX.guard():
        assert abs(rep["scalar"] - 85) < mpmath.mpf("1e-20")
        assert rep["match_defect"] < mpmath.mpf("1e-20")
        assert rep["off_scalar_residual"] < mpmath.mpf("1e-20")


def test_invariant_scalar_degenerate_root():
    with CTX.guard():
        r3 = mpmath.sqrt(CTX.q_int(3))
        root = (1 + mpmath.sqrt(1 + CTX.q_int(3))) / r3
        rep = omega_zero_scalar(CTX, root)
        assert abs(rep["scalar"]) < TOL


def test_invariant_scalar_pole_raises():
    with CTX.guard():
        pole = -mpmath.sqrt(CTX.q_int(3))
    with pytest.raises(ValueError):
        omega_zero_scalar(CTX, pole)


def test_classical_limit_clifford():
    rep = classical_limit_report(QContext("0.9999", prec=128))
    assert rep["off_scalar_residual"] < mpmath.mpf("1e-3")
    assert rep["z_drift"] < mpmath.mpf("1e-3")
    assert rep["conjugate_merge_defect"] < mpmath.mpf("1e-20")
    assert rep["pairing_symmetry"] < TOL
    assert rep["pairing_min_sv"] > 1
