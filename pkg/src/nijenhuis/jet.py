"""Order-2 forward-mode jets: value, gradient and Hessian pushed through arithmetic.

A ``Jet2`` carries the 2-jet of a scalar quantity at a fixed point of R^n.
All elementary operations propagate derivatives exactly (no finite
differences), so polynomial and rational expressions evaluate to their true
derivatives up to rounding. The Hessian is kept exactly symmetric: it is
symmetrized once on construction, and every arithmetic rule below combines
symmetric inputs through elementwise-symmetric formulas, so
``max |H[i,j] - H[j,i]|`` stays identically zero through any op sequence.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Jet2",
    "SingularPointError",
    "DenominatorVanishes",
    "DomainError",
    "constant_jet",
    "coordinate_jet",
    "chain",
    "DIV_EPS_REL",
]

# Division rejects denominators below this threshold, scaled by the
# numerator magnitude: |den| <= DIV_EPS_REL * max(1, |num|) is singular.
DIV_EPS_REL = 1e-12


class SingularPointError(ArithmeticError):
    """Evaluation hit a singular locus (vanishing denominator, domain edge)."""


class DenominatorVanishes(SingularPointError):
    """Division by a (numerically) zero jet value."""

    def __init__(self, denominator: float, context: str = ""):
        self.denominator = denominator
        msg = f"denominator vanishes (value {denominator:.6e})"
        if context:
            msg += f" in {context}"
        super().__init__(msg)


class DomainError(SingularPointError):
    """Argument left the domain of an elementary function (e.g. sqrt)."""


Scalar = Union[int, float, np.floating]


class Jet2:
    """2-jet (value, gradient, Hessian) of a scalar at a point of R^n."""

    __slots__ = ("value", "gradient", "hessian")

    def __init__(self, value: float, gradient, hessian=None):
        self.value = float(value)
        g = np.asarray(gradient, dtype=float)
        if g.ndim != 1:
            raise ValueError("gradient must be a 1-d array")
        self.gradient = g
        n = g.shape[0]
        if hessian is None:
            self.hessian = np.zeros((n, n))
        else:
            h = np.asarray(hessian, dtype=float)
            if h.shape != (n, n):
                raise ValueError("hessian shape does not match gradient length")
            # Symmetrize once; exact for already-symmetric input.
            self.hessian = 0.5 * (h + h.T)

    @property
    def dim(self) -> int:
        return self.gradient.shape[0]

    def __repr__(self) -> str:
        return f"Jet2({self.value!r}, {self.gradient.tolist()!r})"

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other) -> "Jet2 | None":
        if isinstance(other, Jet2):
            if other.dim != self.dim:
                raise ValueError("jet dimension mismatch")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return constant_jet(float(other), self.dim)
        return None

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet2(self.value + o.value,
                    self.gradient + o.gradient,
                    self.hessian + o.hessian)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet2(self.value - o.value,
                    self.gradient - o.gradient,
                    self.hessian - o.hessian)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o.__sub__(self)

    def __neg__(self):
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        outer = np.outer(self.gradient, o.gradient)
        return Jet2(self.value * o.value,
                    self.value * o.gradient + o.value * self.gradient,
                    self.value * o.hessian + o.value * self.hessian
                    + outer + outer.T)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if abs(o.value) <= DIV_EPS_REL * max(1.0, abs(self.value)):
            raise DenominatorVanishes(o.value)
        v = self.value / o.value
        g = (self.gradient - v * o.gradient) / o.value
        cross = np.outer(g, o.gradient)
        h = (self.hessian - v * o.hessian - cross - cross.T) / o.value
        return Jet2(v, g, h)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o.__truediv__(self)

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("jet exponent must be an integer")
        k = int(k)
        if k == 0:
            return constant_jet(1.0, self.dim)
        if k < 0:
            return constant_jet(1.0, self.dim) / (self ** (-k))
        # Left-to-right product, so tests can replay the operation order.
        acc = self
        for _ in range(k - 1):
            acc = acc * self
        return acc

    # -- elementary functions ----------------------------------------------

    def sqrt(self) -> "Jet2":
        if self.value <= 0.0:
            raise DomainError(
                f"sqrt requires a positive argument (value {self.value:.6e})")
        v = math.sqrt(self.value)
        return chain(v, 0.5 / v, -0.25 / (v * self.value), self)

    def exp(self) -> "Jet2":
        v = math.exp(self.value)
        return chain(v, v, v, self)

    def sin(self) -> "Jet2":
        s, c = math.sin(self.value), math.cos(self.value)
        return chain(s, c, -s, self)

    def cos(self) -> "Jet2":
        s, c = math.sin(self.value), math.cos(self.value)
        return chain(c, -s, -c, self)


def constant_jet(c: float, n: int) -> Jet2:
    """Jet of the constant c in n variables."""
    return Jet2(float(c), np.zeros(n))


def coordinate_jet(i: int, p: Sequence[float]) -> Jet2:
    """Jet of the i-th coordinate (1-based) at point p.

    Index n names the distinguished last coordinate.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    if not 1 <= i <= n:
        raise IndexError(f"coordinate index {i} out of range 1..{n}")
    g = np.zeros(n)
    g[i - 1] = 1.0
    return Jet2(p[i - 1], g)


def chain(g: float, dg: float, d2g: float, u: Jet2) -> Jet2:
    """Compose a scalar function (value g, derivatives dg, d2g at u.value) with u."""
    outer = np.outer(u.gradient, u.gradient)
    return Jet2(g, dg * u.gradient, dg * u.hessian + d2g * outer)
