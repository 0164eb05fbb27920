"""Batch verification harness.

Subcommands run one module suite each (or everything via ``verify-all``),
emit canonical JSON-line check reports on stdout, and exit 0 exactly when
every non-advisory check passes.  Spin-type size flags take natural
(possibly half-integer) values and are doubled internally; report
parameters always carry the doubled integers.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import mpmath

from . import cliffordsu3 as c3
from . import diracsu2 as d2
from . import podles as po
from . import uq2
from .reports import CheckReport, exit_code, render_csv, render_json_lines
from .scalars import QContext

_TOL = {
    "identity": mpmath.mpf("1e-20"),
    "relations": mpmath.mpf("1e-25"),
    "structure": mpmath.mpf("1e-30"),
    "match": mpmath.mpf("1e-10"),
}


def _twice(text: str) -> int:
    """Natural (half-integer) size flag -> doubled integer."""
    val = Fraction(text)
    doubled = val * 2
    if doubled.denominator != 1 or doubled < 0:
        raise argparse.ArgumentTypeError(f"not a half-integer size: {text!r}")
    return int(doubled)


def _report(check, params, stats, passed, topic, advisory=False):
    return CheckReport(
        check=check, params=dict(params), stats=stats, passed=bool(passed),
        topic=topic, advisory=advisory,
    )


def _su2_spectrum(ctx: QContext, twol_max: int):
    rows, max_dev = d2.spectrum_table(ctx, twol_max)
    params = {"q": ctx.q_str, "prec": ctx.prec, "two_lmax": twol_max}
    mult_ok = all(r["measured_mult"] == r["predicted_mult"] for r in rows)
    reports = [
        _report(
            "su2-spectrum.eigenvalues", params,
            {"max_deviation": max_dev, "levels": len(rows)},
            max_dev < _TOL["identity"], "su2-spectrum",
        ),
        _report(
            "su2-spectrum.multiplicities", params,
            {"levels": len(rows), "all_match": mult_ok},
            mult_ok, "su2-spectrum",
        ),
    ]
    csv_rows = [(f"{r['twoj']}:{r['branch']}", r["value"]) for r in rows]
    return reports, csv_rows


def _su2_fundamental(ctx: QContext, twol_max: int):
    rep = d2.fundamental_report(ctx, twol_max)
    params = {"q": ctx.q_str, "prec": ctx.prec, "two_lmax": twol_max}
    return [
        _report(
            "su2-fundamental.bracket-identity", params,
            {
                "direct": rep["bracket_residual_direct"],
                "spectral": rep["bracket_residual_spectral"],
                "hermiticity": rep["hermiticity_defect"],
            },
            max(rep["bracket_residual_direct"], rep["bracket_residual_spectral"])
            < _TOL["identity"],
            "su2-fundamental",
        ),
        _report(
            "su2-fundamental.exponential-gate", params,
            {"variant": rep["variant"], "spectrum_deviation": rep["spectrum_deviation"]},
            rep["variant"] == "ke-kiki" and rep["spectrum_deviation"] < _TOL["identity"],
            "su2-fundamental",
        ),
        _report(
            "su2-fundamental.linear-spectrum", params,
            {"deviation": rep["linear_spectrum_deviation"]},
            rep["linear_spectrum_deviation"] < _TOL["identity"],
            "su2-fundamental",
        ),
    ], None


def _su2_clifford(ctx: QContext):
    params = {"q": ctx.q_str, "prec": ctx.prec}
    rel = d2.clifford_numeric_residuals(ctx)
    cov = d2.clifford_covariance(ctx)
    worst_rel = max(rel.values())
    cov_resid = max(
        cov["raise_top"], cov["raise_bottom_residual"], cov["lower_top"],
        cov["lower_bottom"], cov["weight_-2"], cov["weight_0"], cov["weight_2"],
    )
    return [
        _report(
            "su2-clifford.relations", params,
            {**rel, "worst": worst_rel}, worst_rel < _TOL["relations"],
            "su2-clifford",
        ),
        _report(
            "su2-clifford.covariance", params,
            {"worst": cov_resid}, cov_resid < _TOL["relations"],
            "su2-clifford",
        ),
    ], None


def _su2_fredholm(ctx: QContext, twol_max: int, t_grid: int):
    params = {
        "q": ctx.q_str, "prec": ctx.prec, "two_lmax": twol_max, "t_grid": t_grid,
    }
    summ = d2.summability_report(ctx, twol_max)
    hom = d2.homotopy_report(ctx, twol_max, n_samples=t_grid)
    reports = [
        _report(
            "su2-fredholm.commutator-decay", params,
            {
                "level_r2": summ["commutator_level_r2"],
                "level_rate": summ["commutator_level_rate"],
                "raw_r2": summ["commutator_r2"],
            },
            summ["commutator_level_r2"] > mpmath.mpf("0.99"), "su2-fredholm",
        ),
        _report(
            "su2-fredholm.counting-exponent", params,
            {
                "exponent": summ["counting_exponent"],
                "cross_deviation": summ["counting_cross_deviation"],
            },
            mpmath.mpf("-0.8") <= summ["counting_exponent"] <= mpmath.mpf("-0.55"),
            "su2-fredholm",
        ),
        _report(
            "su2-fredholm.homotopy", params,
            {
                "endpoint_qint": hom["endpoint_qint"],
                "endpoint_linear": hom["endpoint_linear"],
                "drift": hom["drift"],
                "sign_preserved": hom["sign_preserved"],
            },
            max(hom["endpoint_qint"], hom["endpoint_linear"]) < mpmath.mpf("1e-10")
            and hom["drift"] < mpmath.mpf("0.01")
            and hom["sign_preserved"],
            "su2-fredholm",
        ),
    ]
    csv_rows = [(str(i), v) for i, v in enumerate(hom["norms"])]
    return reports, csv_rows


def _su3_clifford(ctx: QContext):
    params = {"q": ctx.q_str, "prec": ctx.prec}
    rep = c3.su3_report(ctx, nsamples=6, seed=0)
    match = rep["solution_match"]
    cov = rep["covariance"]
    inv = rep["invariant_scalar"]
    with ctx.guard():
        variant = c3.closed_form_bracket_variant(ctx)
        variant_dist = max(
            min(
                max(abs(v["b_plus"] - s["b_plus"]), abs(v["z"] - s["z"]))
                for s in rep["solutions"]
            )
            for v in variant
        )
    sol_rows = [
        {
            "z": s["z"], "b_plus": s["b_plus"], "b_minus": s["b_minus"],
            "residual": s["residual"],
        }
        for s in rep["solutions"]
    ]
    return [
        _report(
            "su3-clifford.adjoint-relations", params,
            {"worst": max(rep["relations"].values())},
            max(rep["relations"].values()) < _TOL["structure"], "su3-clifford",
        ),
        _report(
            "su3-clifford.covariance", params,
            {
                "closure": cov["closure_residual"],
                "relation_worst": cov["relation_worst"],
                "intertwiner": cov["intertwiner_residual"],
                "perturbed_control": cov["perturbed_closure"],
            },
            cov["closure_residual"] < _TOL["identity"]
            and cov["perturbed_closure"] > mpmath.mpf("1e-4"),
            "su3-clifford",
        ),
        _report(
            "su3-clifford.solutions", params,
            {"table": sol_rows, "count": match["count"]},
            match["count"] == 4
            and all(s["residual"] < mpmath.mpf("1e-18") for s in rep["solutions"]),
            "su3-clifford",
        ),
        _report(
            "su3-clifford.closed-form-match", params,
            {
                "closed_to_numeric": match["closed_to_numeric"],
                "numeric_to_closed": match["numeric_to_closed"],
                "conjugation_closure": match["conjugation_closure"],
            },
            max(match["closed_to_numeric"], match["numeric_to_closed"])
            < _TOL["match"]
            and match["conjugation_closure"] < _TOL["match"],
            "su3-clifford",
        ),
        _report(
            "su3-clifford.bracket-variant-distance", params,
            {"distance": variant_dist},
            variant_dist < _TOL["match"], "su3-clifford", advisory=True,
        ),
        _report(
            "su3-clifford.invariant-scalar", params,
            {
                "scalar": inv["scalar"],
                "match_defect": inv["match_defect"],
                "off_scalar": inv["off_scalar_residual"],
            },
            max(inv["match_defect"], inv["off_scalar_residual"]) < _TOL["identity"],
            "su3-clifford",
        ),
        _report(
            "su3-clifford.pairing-constraint", params,
            {
                "oracle_defect": rep["constraint_oracle_defect"],
                "top_square": rep["top_square_residual"],
            },
            max(rep["constraint_oracle_defect"], rep["top_square_residual"])
            < _TOL["identity"],
            "su3-clifford",
        ),
    ], None


def _podles(ctx: QContext, twol_max: int):
    params = {"q": ctx.q_str, "prec": ctx.prec, "two_lmax": twol_max}
    rel = po.sphere_relation_residuals(ctx)
    haar = po.haar_report(ctx)
    sub = po.invariant_subspace_report(ctx, twol_max)
    rows, spec_dev = po.sphere_spectrum_table(ctx, twol_max)
    triple = po.sphere_triple_report(ctx, twol_max)
    ratio = po.sector_ratio_report(ctx, twol_max)
    reports = [
        _report(
            "podles.relations", params,
            {**rel, "worst": max(rel.values())},
            max(rel.values()) < _TOL["relations"], "podles",
        ),
        _report(
            "podles.haar", params, dict(haar),
            haar["difference"] < _TOL["identity"], "podles",
        ),
        _report(
            "podles.invariant-subspace", params,
            {
                "rank": sub["rank"],
                "matches_displayed": sub["matches_displayed"],
                "sector_counts_match": sub["sector_counts_match"],
                "even_shells_empty": sub["even_shells_empty"],
            },
            sub["matches_displayed"] and sub["sector_counts_match"]
            and sub["even_shells_empty"],
            "podles",
        ),
        _report(
            "podles.spectrum", params,
            {
                "max_deviation": spec_dev,
                "levels": len(rows),
                "mult_match": all(r["mult"] == r["measured_mult"] for r in rows),
            },
            spec_dev < _TOL["identity"]
            and all(r["mult"] == r["measured_mult"] for r in rows),
            "podles",
        ),
        _report(
            "podles.triple", params,
            {
                "equivariance": triple["equivariance"],
                "rho_leakage": triple["rho_leakage"],
                "commutator_drift_B": triple["commutator_drift_B"],
            },
            triple["equivariance"] < _TOL["identity"]
            and triple["rho_leakage"] < _TOL["identity"],
            "podles",
        ),
        _report(
            "podles.sector-ratio", params,
            {
                "tail_deviation_qinv": ratio["tail_deviation_qinv"],
                "growth_r2": ratio["growth_r2"],
            },
            ratio["tail_deviation_qinv"] < mpmath.mpf("0.05"), "podles",
        ),
        _report(
            "podles.sector-ratio-band", params,
            {"tail_deviation_qinv2": ratio["tail_deviation_qinv2"]},
            ratio["tail_deviation_qinv2"] < mpmath.mpf("0.05"),
            "podles", advisory=True,
        ),
    ]
    csv_rows = [(f"{r['twol']}:{r['sign']}", r["value"]) for r in rows]
    return reports, csv_rows


def _uq2(ctx: QContext, twol_max: int, twoc_max: int, probe_order: int):
    params = {
        "q": ctx.q_str, "prec": ctx.prec, "two_lmax": twol_max,
        "two_cmax": twoc_max, "probe_order": probe_order,
    }
    rep = uq2.full_report(ctx, twol_max, twoc_max, probe_order=probe_order)
    alg, drep, dim, cnt = rep["algebra"], rep["dirac"], rep["dimension"], rep["count_check"]
    probes = rep["probes"]
    drifts = rep["comm_drifts"]
    probe_stats = {}
    probe_ok = True
    for name, p in probes.items():
        worst_norm = max(lv["small"] for lv in p["norms"].values())
        worst_drift = max(lv["drift"] for lv in p["norms"].values())
        identity = max(p["derivation_identity_defect"], p["weight_identity_defect"])
        stats = {
            "worst_norm": worst_norm,
            "worst_drift": worst_drift,
            "identity_defect": identity,
            "remainder_levels": p["remainder_levels"],
            "comm_drift": drifts[name]["drift"],
        }
        ok = (
            worst_norm < 10
            and worst_drift < 0.01
            and identity < _TOL["identity"]
            and drifts[name]["drift"] < mpmath.mpf("0.01")
        )
        if name == "C":
            stats["first_order_sup"] = p["first_order_sup"]
            ok = ok and p["first_order_le_one"]
        probe_stats[name] = stats
        probe_ok = probe_ok and ok
    return [
        _report(
            "uq2.algebra", params,
            {
                "unitarity": alg["unitarity_defect"],
                "centrality": alg["centrality_defect"],
                "involution": alg["involution_defect"],
                "norm_example": alg["norm_example_defect"],
                "parity_closed": alg["parity_closed"],
            },
            max(alg["unitarity_defect"], alg["centrality_defect"],
                alg["involution_defect"], alg["norm_example_defect"])
            < _TOL["relations"] and alg["parity_closed"],
            "uq2",
        ),
        _report(
            "uq2.representation", params,
            {
                "isometry": rep["rep"]["isometry_defect"],
                "adjoint": rep["rep"]["adjoint_defect"],
                "sector_mismatch": rep["rep"]["sector_mismatch"],
            },
            rep["rep"]["isometry_defect"] < _TOL["identity"]
            and rep["rep"]["sector_mismatch"] == 0,
            "uq2",
        ),
        _report(
            "uq2.dirac", params,
            {
                "base_n": drep["base_n_defect"],
                "circle_identity": drep["circle_identity_defect"],
                "selfadjoint": drep["selfadjoint_defect"],
                "gamma_anticommutator": drep["gamma_anticommutator"],
                "equivariance": drep["equivariance_defect"],
            },
            max(drep["base_n_defect"], drep["circle_identity_defect"],
                drep["selfadjoint_defect"], drep["gamma_anticommutator"])
            < _TOL["identity"],
            "uq2",
        ),
        _report(
            "uq2.regularity-probes", params, probe_stats, probe_ok, "uq2",
        ),
        _report(
            "uq2.dimension-fit", params,
            {
                "exponent": dim["exponent"],
                "r2": dim["r2"],
                "exact_count_exponent": dim["exact_count_exponent"],
                "control_exponent": dim["control_exponent"],
            },
            mpmath.mpf("3.7") <= dim["exact_count_exponent"] <= mpmath.mpf("4.3"),
            "uq2",
        ),
        _report(
            "uq2.truncation-count", params, dict(cnt), cnt["match"], "uq2",
        ),
    ], None


def _add_common(sub, *names):
    sub.add_argument("--q", default=None, help="deformation parameter, decimal string in (0,1)")
    sub.add_argument("--prec", default=None, type=int, help="working precision in bits")
    sub.add_argument("--config", default=None, help="flat key=value config file; flags override")
    if "jmax" in names:
        sub.add_argument("--jmax", default=None, help="largest spin (half-integers allowed)")
    if "lmax" in names:
        sub.add_argument("--lmax", default=None, help="largest orbital label (half-integers allowed)")
    if "cmax" in names:
        sub.add_argument("--cmax", default=None, help="largest charge (half-integers allowed)")
    if "probe_order" in names:
        sub.add_argument("--probe-order", default=None, type=int, dest="probe_order")
    if "t_grid" in names:
        sub.add_argument("--t-grid", default=None, type=int, dest="t_grid")
    if "format" in names:
        sub.add_argument("--format", default=None, choices=("json", "csv"))


_DEFAULTS = {
    "q": "0.5",
    "prec": 128,
    "jmax": None,
    "lmax": None,
    "cmax": None,
    "probe_order": 2,
    "t_grid": 11,
    "format": "json",
}


def _load_config(path: str, parser: argparse.ArgumentParser) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            parser.error(f"config line {lineno} is not key=value: {line!r}")
        key, val = body.split("=", 1)
        pairs[key.strip().replace("-", "_")] = val.strip()
    if not pairs:
        parser.error("config file is empty")
    return pairs


def _resolve(args, parser, spins=(), ints=()):
    """Merge CLI flags over config file over defaults."""
    merged = {}
    config = _load_config(args.config, parser) if args.config else {}
    for key, fallback in _DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in config:
            merged[key] = config[key]
        else:
            merged[key] = fallback
    for key in spins:
        if merged[key] is not None:
            try:
                merged[key] = _twice(str(merged[key]))
            except argparse.ArgumentTypeError as exc:
                parser.error(str(exc))
    for key in ints:
        if merged[key] is not None:
            merged[key] = int(merged[key])
    q = str(merged["q"])
    try:
        if not 0 < Fraction(q) < 1:
            parser.error("q must lie in (0,1)")
    except ValueError:
        parser.error(f"q is not a decimal number: {q!r}")
    merged["prec"] = int(merged["prec"])
    if merged["prec"] < 64:
        parser.error("precision must be at least 64 bits")
    return merged


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qdirac",
        description="verification reports for finite q-deformed Dirac models",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    _add_common(subs.add_parser("su2-spectrum", help="q-integer spectrum and multiplicities"), "jmax", "format")
    _add_common(subs.add_parser("su2-fundamental", help="bracket identity and exponential gate"), "jmax")
    _add_common(subs.add_parser("su2-clifford", help="rank-one Clifford relations"))
    _add_common(subs.add_parser("su2-fredholm", help="sign operator, summability, homotopy"), "jmax", "t_grid", "format")
    _add_common(subs.add_parser("su3-clifford", help="rank-two covariant family and kernels"))
    _add_common(subs.add_parser("podles", help="invariant sphere triple"), "lmax", "format")
    _add_common(subs.add_parser("uq2", help="charge-extended model"), "jmax", "cmax", "probe_order")
    _add_common(subs.add_parser("verify-all", help="every module suite at moderate size"))
    args = parser.parse_args(argv)

    t0 = time.time()
    command = args.command
    if command == "su2-spectrum":
        cfg = _resolve(args, parser, spins=("jmax",))
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _su2_spectrum(ctx, cfg["jmax"] if cfg["jmax"] is not None else 8)
    elif command == "su2-fundamental":
        cfg = _resolve(args, parser, spins=("jmax",))
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _su2_fundamental(ctx, cfg["jmax"] if cfg["jmax"] is not None else 6)
    elif command == "su2-clifford":
        cfg = _resolve(args, parser)
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _su2_clifford(ctx)
    elif command == "su2-fredholm":
        cfg = _resolve(args, parser, spins=("jmax",), ints=("t_grid",))
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _su2_fredholm(
            ctx, cfg["jmax"] if cfg["jmax"] is not None else 13, cfg["t_grid"]
        )
    elif command == "su3-clifford":
        cfg = _resolve(args, parser)
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _su3_clifford(ctx)
    elif command == "podles":
        cfg = _resolve(args, parser, spins=("lmax",))
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _podles(ctx, cfg["lmax"] if cfg["lmax"] is not None else 7)
    elif command == "uq2":
        cfg = _resolve(args, parser, spins=("jmax", "cmax"), ints=("probe_order",))
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports, csv_rows = _uq2(
            ctx,
            cfg["jmax"] if cfg["jmax"] is not None else 6,
            cfg["cmax"] if cfg["cmax"] is not None else 8,
            cfg["probe_order"],
        )
    else:
        cfg = _resolve(args, parser)
        ctx = QContext(cfg["q"], prec=cfg["prec"])
        reports = []
        for part in (
            lambda: _su2_spectrum(ctx, 6),
            lambda: _su2_fundamental(ctx, 6),
            lambda: _su2_clifford(ctx),
            lambda: _su2_fredholm(ctx, 13, 5),
            lambda: _su3_clifford(ctx),
            lambda: _podles(ctx, 7),
            lambda: _uq2(ctx, 6, 8, 2),
        ):
            part_reports, _ = part()
            reports.extend(part_reports)
        csv_rows = None

    fmt = cfg.get("format") or "json"
    if fmt == "csv":
        if csv_rows is None:
            parser.error(f"{command} has no CSV table")
        sys.stdout.write(render_csv(csv_rows))
    else:
        sys.stdout.write(render_json_lines(reports))
    print(f"{command}: {time.time() - t0:.1f}s", file=sys.stderr)
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
