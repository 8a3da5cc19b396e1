"""Characteristic-polynomial coefficients and invariant-recovery sweeps.

Convention throughout: chi(t) = det(t*Id - M) = t^n + sigma_1 t^(n-1) + ...
+ sigma_n, so sigma_1 = -tr M and sigma_n = (-1)^n det M. Coefficients come
from the trace recursion M_1 = M, c_k = -tr(M_k)/k, M_(k+1) = M(M_k + c_k*Id);
every call cross-checks sigma_n against an elimination determinant computed
by unrelated code before returning.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .field import OperatorField, ScalarField, operator_eval
from .linalg import plu_det
from .report import VerificationReport, run_sweep, sample_box

__all__ = ["charpoly", "verify_sigma_fields", "verify_sigma_coords"]


def charpoly(M: np.ndarray) -> np.ndarray:
    """Coefficients (sigma_1, ..., sigma_n) of det(t*Id - M).

    Raises ValueError on non-finite entries and ArithmeticError if the
    recursion's sigma_n disagrees with the elimination determinant (the
    internal dual-route check).
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or n < 1:
        raise ValueError("matrix must be square and nonempty")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    sigma = np.empty(n)
    Mk = M.copy()
    eye = np.eye(n)
    for k in range(1, n + 1):
        c = -np.trace(Mk) / k
        sigma[k - 1] = c
        if k < n:
            Mk = M @ (Mk + c * eye)
    det = plu_det(M)
    expected_last = det if n % 2 == 0 else -det
    scale = 1.0 + abs(det) + float(np.max(np.abs(sigma)))
    if abs(sigma[n - 1] - expected_last) > 1e-8 * scale:
        raise ArithmeticError(
            "characteristic coefficient recursion disagrees with the "
            f"elimination determinant: sigma_n={sigma[n - 1]!r}, "
            f"(-1)^n det={expected_last!r}")
    return sigma


def verify_sigma_fields(L: OperatorField,
                        expected: Callable[[np.ndarray], np.ndarray],
                        domain, samples: int, seed: int, tol: float,
                        min_denominator: float = 0.0,
                        subject: str = "",
                        params: Optional[dict] = None,
                        collect: bool = False) -> VerificationReport:
    """Sweep asserting charpoly(L(p)) matches expected(p) componentwise.

    The raw residual is the absolute max deviation; the pass gate divides
    by (1 + max |L entry|) since quotient entries inflate roundoff.
    """
    points = sample_box(domain, L.dim, samples, seed)

    def eval_point(p):
        ev = operator_eval(L, p)
        sigma = charpoly(ev.values)
        raw = float(np.max(np.abs(sigma - expected(p))))
        scale = 1.0 + float(np.max(np.abs(ev.values)))
        return raw, raw / scale, {}

    return run_sweep(
        points, eval_point, tol,
        subject=subject or f"invariant recovery for {L.label or 'operator'}",
        params=params if params is not None else
        {"dim": L.dim, "samples": samples, "seed": seed, "tol": tol},
        gate_name="sigma_max_deviation",
        guard=L.guard, min_margin=min_denominator, collect=collect)


def verify_sigma_coords(L: OperatorField, f: ScalarField, n: int,
                        domain, samples: int, seed: int, tol: float,
                        signs: Optional[Sequence[int]] = None,
                        min_denominator: float = 0.0,
                        collect: bool = False) -> VerificationReport:
    """Sweep asserting sigma_i = (+/-) p_i for i < n and sigma_n = f(p).

    signs (length n-1, default all +1) covers the planar convention where
    the first coefficient is -x1 rather than x1.
    """
    if signs is None:
        signs = np.ones(n - 1)
    signs = np.asarray(signs, dtype=float)
    if signs.shape != (n - 1,):
        raise ValueError(f"signs must have length {n - 1}")

    def expected(p):
        return np.append(signs * p[:n - 1], f(p).value)

    return verify_sigma_fields(
        L, expected, domain, samples, seed, tol,
        min_denominator=min_denominator,
        subject=f"coordinate invariant recovery for {L.label or 'operator'}",
        params={"dim": n, "f": f.label, "samples": samples, "seed": seed,
                "tol": tol, "signs": [float(s) for s in signs]},
        collect=collect)
