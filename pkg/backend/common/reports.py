"""
Verification reports.

A ``VerificationReport`` records one inequality or identity: both sides, the
margin, the tolerance, pass/fail, where each side came from, and any flags
raised by the estimators that produced the numbers. A report carrying flags
never passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

RELATIONS = ('>=', '<=', '==')


@dataclass(frozen=True)
class VerificationReport:
    name: str
    lhs: float
    rhs: float
    relation: str
    margin: float
    tolerance: float
    passed: bool
    provenance: dict = field(default_factory=dict)
    flags: tuple = ()
    details: dict = field(default_factory=dict)

    @property
    def failed(self):
        return not self.passed


def compare(name, lhs, rhs, tolerance, relation='>=', provenance=None, flags=(), details=None):
    """
    Build a report for ``lhs <relation> rhs`` checked up to ``tolerance``.

    Args:
        name (str): Report name, e.g. ``'thm12'``.
        lhs (float): Left-hand side value.
        rhs (float): Right-hand side value.
        tolerance (float): Absolute slack, must be positive.
        relation (str): One of ``'>='``, ``'<='``, ``'=='``.
        provenance (dict, optional): Description of each side's origin.
        flags (iterable of str): Estimator flags; any flag fails the report.
        details (dict, optional): Extra diagnostics embedded in the JSON.

    Returns:
        VerificationReport: With ``margin`` signed so that a non-negative
        margin means the relation holds exactly.
    """
    if relation not in RELATIONS:
        raise ValueError(f'unknown relation {relation!r}')
    lhs, rhs = float(lhs), float(rhs)
    if relation == '>=':
        margin = lhs - rhs if not (math.isinf(lhs) and math.isinf(rhs)) else 0.0
    elif relation == '<=':
        margin = rhs - lhs if not (math.isinf(lhs) and math.isinf(rhs)) else 0.0
    else:
        margin = -abs(lhs - rhs)
    flags = tuple(dict.fromkeys(flags))
    passed = (not math.isnan(margin)) and margin >= -tolerance and not flags
    return VerificationReport(
        name=name,
        lhs=lhs,
        rhs=rhs,
        relation=relation,
        margin=margin,
        tolerance=float(tolerance),
        passed=passed,
        provenance=dict(provenance or {}),
        flags=flags,
        details=dict(details or {}),
    )


def combine(name, reports, details=None):
    """Fold several reports into one that passes only if all of them pass."""
    reports = list(reports)
    worst = min(reports, key=lambda r: r.margin + r.tolerance)
    flags = [flag for report in reports for flag in report.flags]
    merged = {r.name: {'lhs': r.lhs, 'rhs': r.rhs, 'margin': r.margin, 'passed': r.passed} for r in reports}
    merged.update(details or {})
    return VerificationReport(
        name=name,
        lhs=worst.lhs,
        rhs=worst.rhs,
        relation=worst.relation,
        margin=worst.margin,
        tolerance=worst.tolerance,
        passed=all(r.passed for r in reports),
        provenance={'parts': [r.name for r in reports]},
        flags=tuple(dict.fromkeys(flags)),
        details=merged,
    )
