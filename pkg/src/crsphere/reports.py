"""Inequality reports and report documents with JSON and CSV output.

Every check in the package ends in an :class:`IneqReport` of the form
``lhs ≤ rhs`` with ``slack = rhs - lhs`` and a tolerance; the verdict is

* ``holds_equality`` when |slack| ≤ tolerance,
* ``violated`` when slack < -tolerance,
* ``holds_strict`` otherwise.

For Monte Carlo checks the tolerance is three combined standard errors, so
``holds_*`` means "not rejected at 3σ" rather than a certificate.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

from . import __version__

__all__ = [
    "HOLDS_STRICT",
    "HOLDS_EQUALITY",
    "VIOLATED",
    "IneqReport",
    "Table",
    "ReportDocument",
    "decide",
    "make_report",
]

HOLDS_STRICT = "holds_strict"
HOLDS_EQUALITY = "holds_equality"
VIOLATED = "violated"

SIGMA_RULE = 3.0
MC_NOTE = (
    "Monte Carlo verdict: tolerance is 3 combined standard errors; "
    "holds_* means not rejected at 3 sigma, not a proof"
)


def decide(slack: float, tolerance: float) -> str:
    if abs(slack) <= tolerance:
        return HOLDS_EQUALITY
    if slack < -tolerance:
        return VIOLATED
    return HOLDS_STRICT


@dataclass
class IneqReport:
    inequality_id: str
    params: dict[str, Any]
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    verdict: str
    sigma: float | None = None
    diagnostics: list[str] = field(default_factory=list)
    parts: list["IneqReport"] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict != decide(self.slack, self.tolerance):
            raise ValueError("verdict inconsistent with slack and tolerance")

    @property
    def holds(self) -> bool:
        return self.verdict != VIOLATED

    def to_dict(self) -> dict:
        d = {
            "inequality_id": self.inequality_id,
            "params": {k: _plain(v) for k, v in self.params.items()},
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "slack": _num(self.slack),
            "tolerance": _num(self.tolerance),
            "verdict": self.verdict,
            "sigma": _num(self.sigma),
            "diagnostics": list(self.diagnostics),
        }
        if self.parts:
            d["parts"] = [p.to_dict() for p in self.parts]
        return d


def make_report(
    inequality_id: str,
    params: dict,
    lhs: float,
    rhs: float,
    tolerance: float,
    *,
    sigma: float | None = None,
    diagnostics=(),
    parts=(),
    strict_margin: float | None = None,
) -> IneqReport:
    """Build a report for ``lhs ≤ rhs``; a strict verdict whose slack is
    below ``strict_margin`` gets a near-equality diagnostic."""
    lhs, rhs = float(lhs), float(rhs)
    slack = rhs - lhs
    verdict = decide(slack, tolerance)
    diags = list(diagnostics)
    if strict_margin is not None and verdict == HOLDS_STRICT and slack <= strict_margin:
        diags.append(
            f"near-equality: slack {slack:.3e} is below strict_margin {strict_margin:.3e}"
        )
    if sigma is not None and MC_NOTE not in diags:
        diags.append(MC_NOTE)
    return IneqReport(
        inequality_id, dict(params), lhs, rhs, slack, float(tolerance), verdict,
        None if sigma is None else float(sigma), diags, list(parts),
    )


@dataclass
class Table:
    """A plain numeric table (eigenvalues, quadrature comparisons, samples)."""

    columns: list[str]
    rows: list[list[Any]]

    def to_dict(self):
        return {"columns": list(self.columns),
                "rows": [[_plain(v) for v in row] for row in self.rows]}


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return None


def _plain(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return int(v)
    if isinstance(v, complex):
        return {"re": _num(v.real), "im": _num(v.imag)}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    try:
        f = float(v)
    except (TypeError, ValueError):
        return str(v)
    if hasattr(v, "imag") and getattr(v, "imag", 0) != 0:
        return {"re": _num(v.real), "im": _num(v.imag)}
    return _num(f)


def _fmt(v) -> str:
    """17 significant digits, '.' decimal; complex as a+bi."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}i"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    try:
        return format(float(v), ".17g")
    except (TypeError, ValueError):
        return str(v)


@dataclass
class ReportDocument:
    command: str
    config: dict[str, Any]
    reports: list[IneqReport] = field(default_factory=list)
    table: Table | None = None
    timestamp: str | None = None
    version: str = __version__

    def summary(self) -> dict:
        counts = {HOLDS_STRICT: 0, HOLDS_EQUALITY: 0, VIOLATED: 0}
        for r in self.reports:
            counts[r.verdict] += 1
        slacks = [r.slack for r in self.reports if r.verdict != HOLDS_EQUALITY]
        return {
            "total": len(self.reports),
            HOLDS_STRICT: counts[HOLDS_STRICT],
            HOLDS_EQUALITY: counts[HOLDS_EQUALITY],
            VIOLATED: counts[VIOLATED],
            "min_slack": _num(min(slacks)) if slacks else None,
        }

    @property
    def any_violated(self) -> bool:
        return any(r.verdict == VIOLATED for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "tool": "crsphere",
            "version": self.version,
            "command": self.command,
            "timestamp": self.timestamp,
            "config": {k: _plain(v) for k, v in self.config.items()},
            "summary": self.summary(),
            "reports": [r.to_dict() for r in self.reports],
            "table": None if self.table is None else self.table.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        """RFC 4180 CSV: the table if present, otherwise one row per report."""
        buf = io.StringIO()
        w = csv.writer(buf)
        if self.table is not None:
            w.writerow(self.table.columns)
            for row in self.table.rows:
                w.writerow([_fmt(v) for v in row])
        else:
            w.writerow(["inequality_id", "params", "lhs", "rhs", "slack",
                        "tolerance", "verdict", "sigma"])
            for r in self.reports:
                params = {k: _plain(v) for k, v in r.params.items()}
                w.writerow([r.inequality_id, _fmt(params), _fmt(r.lhs), _fmt(r.rhs),
                            _fmt(r.slack), _fmt(r.tolerance), r.verdict, _fmt(r.sigma)])
        return buf.getvalue()
