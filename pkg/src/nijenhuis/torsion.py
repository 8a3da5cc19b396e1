"""Torsion of an operator field, evaluated two independent ways.

The coordinate route contracts exact entry values and entry gradients:

    N^i_jk = L^l_j dL^i_k/dx^l - L^l_k dL^i_j/dx^l
           - L^i_l dL^l_k/dx^j + L^i_l dL^l_j/dx^k

The oracle route starts from the invariant form
N[u, v] = L^2 [u,v] + [Lu, Lv] - L[u, Lv] - L[Lu, v] with u = d_j, v = d_k
constant coordinate fields (so [u,v] = 0) and computes the remaining Lie
brackets by central finite differences of operator VALUES only. The two
routes share no derivative code, which is what makes their agreement a
meaningful check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .field import OperatorField, OperatorEval, operator_eval
from .report import VerificationReport, run_sweep, sample_box

__all__ = [
    "TorsionValue",
    "torsion_from_eval",
    "torsion_coordinate",
    "torsion_bracket_fd",
    "verify_zero_torsion",
    "DEFAULT_MIN_DENOMINATOR",
]

# Sweeps reject sample points whose guard margin (|f_y| for the derived
# families) falls below this; near-singular entries legitimately blow up
# and would mask the torsion signal. Rejections are counted, never silent.
DEFAULT_MIN_DENOMINATOR = 0.05


@dataclass
class TorsionValue:
    """Torsion components[i, j, k] = N^i_jk at a base point."""

    components: np.ndarray
    point: np.ndarray

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components)))


def torsion_from_eval(ev: OperatorEval) -> np.ndarray:
    """Contract an operator evaluation into torsion components.

    Grouped as (t1 - t2) + (t4 - t3) where each parenthesized pair is an
    exact (j,k)-antisymmetric array, so the result is antisymmetric to the
    last bit, not just to rounding.
    """
    L = ev.values
    G = ev.entry_grads  # G[i, j, l] = dL^i_j / dx^l
    t1 = np.einsum("lj,ikl->ijk", L, G)
    t2 = np.einsum("lk,ijl->ijk", L, G)
    t3 = np.einsum("il,lkj->ijk", L, G)
    t4 = np.einsum("il,ljk->ijk", L, G)
    return (t1 - t2) + (t4 - t3)


def torsion_coordinate(L: OperatorField, p: Sequence[float]) -> TorsionValue:
    """Torsion at p from the coordinate formula (exact derivatives)."""
    ev = operator_eval(L, p)
    return TorsionValue(torsion_from_eval(ev), ev.point)


def torsion_bracket_fd(L: OperatorField, p: Sequence[float],
                       h: float = 1e-4) -> TorsionValue:
    """Torsion at p from the bracket definition with central differences.

    Uses only operator values at the 2n+1 stencil points; entry derivatives
    never enter, so this is an independent oracle for torsion_coordinate
    with O(h^2) truncation error.
    """
    p = np.asarray(p, dtype=float)
    n = L.dim
    if h <= 0.0:
        raise ValueError(f"finite-difference step must be positive, got {h}")

    def values_at(q):
        return operator_eval(L, q).values

    Lp = values_at(p)
    # D[i, j, l] ~ d L^i_j / dx^l by central differences.
    D = np.empty((n, n, n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        D[:, :, l] = (values_at(p + e) - values_at(p - e)) / (2.0 * h)

    N = np.zeros((n, n, n))
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            for i in range(n):
                bracket = 0.0
                for l in range(n):
                    # [L d_j, L d_k]^i with X = L d_j, Y = L d_k:
                    # sum_l (X^l d_l Y^i - Y^l d_l X^i)
                    bracket += Lp[l, j] * D[i, k, l] - Lp[l, k] * D[i, j, l]
                corr = 0.0
                for m in range(n):
                    # -L[u, Lv] - L[Lu, v] with constant u = d_j, v = d_k:
                    # [d_j, L d_k]^m = d_j (L d_k)^m and [L d_j, d_k]^m
                    # = -d_k (L d_j)^m.
                    corr += Lp[i, m] * (D[m, j, k] - D[m, k, j])
                N[i, j, k] = bracket + corr
    return TorsionValue(N, p)


def verify_zero_torsion(L: OperatorField, domain, samples: int, seed: int,
                        tol: float,
                        min_denominator: float = DEFAULT_MIN_DENOMINATOR,
                        collect: bool = False) -> VerificationReport:
    """Seeded sweep asserting the torsion vanishes on the sampled box.

    Pass gate is relative: max |N| / (1 + max |L entry|) <= tol at every
    accepted point. max_residual in the report is the raw component max.
    Points where evaluation fails (singular locus) or where the operator's
    guard margin drops below min_denominator are rejected and counted.
    """
    points = sample_box(domain, L.dim, samples, seed)

    def eval_point(p):
        ev = operator_eval(L, p)
        N = torsion_from_eval(ev)
        raw = float(np.max(np.abs(N)))
        scale = 1.0 + float(np.max(np.abs(ev.values)))
        return raw, raw / scale, {}

    return run_sweep(
        points, eval_point, tol,
        subject=f"zero-torsion sweep of {L.label or 'operator'}",
        params={"dim": L.dim, "samples": samples, "seed": seed, "tol": tol,
                "min_denominator": min_denominator},
        gate_name="torsion_relative",
        guard=L.guard, min_margin=min_denominator, collect=collect)
