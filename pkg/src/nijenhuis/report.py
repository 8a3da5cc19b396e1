"""Verification reports, box sampling, and the shared sweep runner.

Every verification sweep reduces to the same shape: draw seeded sample
points from a box, reject points on the singular locus (counted, never
silent), evaluate a residual at the rest, and report the raw maximum, the
relative maximum that gates pass/fail, and the worst point. The JSON form
is stable: schema, subject, params, accepted, rejected, max_residual,
worst_point, checks[] (name, max, pass), pass, wall_ms — with wall_ms the
only field that varies between identical runs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .jet import SingularPointError

__all__ = [
    "CheckResult",
    "VerificationReport",
    "DomainEntirelySingular",
    "normalize_box",
    "sample_box",
    "run_sweep",
]


class DomainEntirelySingular(ArithmeticError):
    """Every sampled point was rejected; the sweep has nothing to verify."""

    def __init__(self, samples: int):
        self.samples = samples
        super().__init__(
            f"domain entirely singular: all {samples} sampled points rejected")


@dataclass
class CheckResult:
    name: str
    max: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "max": self.max, "pass": self.passed}


@dataclass
class VerificationReport:
    subject: str
    params: dict
    accepted: int
    rejected: int
    max_residual: float
    worst_point: Optional[np.ndarray]
    checks: list
    passed: bool
    wall_ms: float
    # Per-point rows (point, raw, rel, extras) kept only when a sweep is
    # asked to collect them (CSV output); absent from the JSON form.
    points: Optional[list] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "subject": self.subject,
            "params": self.params,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "max_residual": self.max_residual,
            "worst_point": (None if self.worst_point is None
                            else [float(v) for v in self.worst_point]),
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
            "wall_ms": self.wall_ms,
        }


def normalize_box(box, n: int) -> np.ndarray:
    """Expand a box spec to an (n, 2) array of finite (low, high) bounds.

    Accepted forms: (lo, hi) applied to every axis, or a sequence of n
    (lo, hi) pairs.
    """
    arr = np.asarray(box, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (n, 1))
    if arr.shape != (n, 2):
        raise ValueError(
            f"box must be (lo, hi) or {n} per-axis pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("box bounds must be finite")
    if not np.all(arr[:, 0] < arr[:, 1]):
        raise ValueError("box bounds must satisfy low < high on every axis")
    return arr


def sample_box(box, n: int, samples: int, seed: int) -> np.ndarray:
    """Draw `samples` uniform points from the box with a seeded 64-bit PRNG."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    bounds = normalize_box(box, n)
    rng = np.random.default_rng(seed)
    return rng.uniform(bounds[:, 0], bounds[:, 1], size=(samples, n))


def run_sweep(points: Sequence[np.ndarray],
              eval_point: Callable[[np.ndarray], tuple],
              tol: float,
              subject: str,
              params: dict,
              gate_name: str,
              guard: Optional[Callable[[np.ndarray], float]] = None,
              min_margin: float = 0.0,
              extra_checks: Sequence[str] = (),
              collect: bool = False) -> VerificationReport:
    """Run a point sweep and reduce to a VerificationReport.

    eval_point(p) returns (raw, rel, extras) where raw is the absolute
    residual, rel the tolerance-gated relative residual, and extras a dict
    of named informational values (reported as non-gating checks, reduced
    by max |.|). Raising SingularPointError rejects the point, as does a
    guard margin below min_margin. The reduction is order-independent
    (max), so reports are deterministic for a fixed sample stream.
    """
    t0 = time.perf_counter()
    max_raw = 0.0
    max_rel = 0.0
    worst: Optional[np.ndarray] = None
    accepted = 0
    rejected = 0
    extras_max = {name: 0.0 for name in extra_checks}
    rows = [] if collect else None
    for p in points:
        if guard is not None:
            try:
                margin = guard(p)
            except SingularPointError:
                rejected += 1
                continue
            if margin < min_margin:
                rejected += 1
                continue
        try:
            raw, rel, extras = eval_point(p)
        except SingularPointError:
            rejected += 1
            continue
        accepted += 1
        if raw > max_raw:
            max_raw = raw
        if worst is None or rel > max_rel:
            max_rel = rel
            worst = np.asarray(p, dtype=float)
        for name, value in extras.items():
            mag = abs(float(value))
            if mag > extras_max[name]:
                extras_max[name] = mag
        if collect:
            rows.append((np.asarray(p, dtype=float), raw, rel, dict(extras)))
    if accepted == 0:
        raise DomainEntirelySingular(len(points))
    passed = max_rel <= tol
    checks = [CheckResult(gate_name, max_rel, passed)]
    checks += [CheckResult(name, extras_max[name], True) for name in extra_checks]
    wall_ms = (time.perf_counter() - t0) * 1e3
    return VerificationReport(
        subject=subject, params=params, accepted=accepted, rejected=rejected,
        max_residual=max_raw, worst_point=worst, checks=checks, passed=passed,
        wall_ms=wall_ms, points=rows)
