"""Deterministic check reports: canonical JSON lines and CSV tables.

Every verification emits ``CheckReport`` records.  Serialization is
canonical so that reruns with the same configuration produce byte-identical
output: numbers become fixed-precision strings, keys are sorted, and the
records themselves are sorted by check id.  Timing never enters the JSON
stream (the CLI prints it on stderr).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .scalars import ExactScalar

_MPF_DIGITS = 24


@dataclass
class CheckReport:
    """One verified claim: identity, inputs, measured statistics, verdict.

    ``advisory`` marks companion diagnostics excluded from exit-code
    aggregation; their pass flag is informational.
    """

    check: str
    params: dict
    stats: dict
    passed: bool
    topic: str
    advisory: bool = field(default=False)


def canon(value):
    """Map a value to a JSON-stable form (numbers as canonical strings)."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return value
    if value is None:
        return None
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, _MPF_DIGITS)
    if isinstance(value, mpmath.mpc):
        return (
            mpmath.nstr(value.real, _MPF_DIGITS)
            + ("+" if value.imag >= 0 else "-")
            + mpmath.nstr(abs(value.imag), _MPF_DIGITS)
            + "j"
        )
    if isinstance(value, ExactScalar):
        return str(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [canon(v) for v in value]
    if isinstance(value, dict):
        return {str(k): canon(v) for k, v in value.items()}
    raise TypeError(f"cannot canonicalize {type(value).__name__}")


def report_dict(report: CheckReport) -> dict:
    return {
        "check": report.check,
        "params": canon(report.params),
        "stats": canon(report.stats),
        "pass": report.passed,
        "topic": report.topic,
        "advisory": report.advisory,
    }


def render_json_lines(reports) -> str:
    """Canonical JSON-lines rendering, one report per line, sorted by id."""
    lines = [
        json.dumps(report_dict(r), sort_keys=True, separators=(",", ":"))
        for r in sorted(reports, key=lambda r: r.check)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def render_csv(rows) -> str:
    """Two-column ``k,value`` table for spectra and decay fits."""
    out = ["k,value"]
    for k, v in rows:
        out.append(f"{k},{canon(v)}")
    return "\n".join(out) + "\n"


def exit_code(reports) -> int:
    """0 iff every non-advisory check passed."""
    return 0 if all(r.passed for r in reports if not r.advisory) else 1
