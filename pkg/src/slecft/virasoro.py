"""Weighted vector-field operators on functions of boundary points.

For a mode ``m`` and weight ``h`` the operator acting on a function of
``x1..xn`` is::

    L_m f = sum_j [ -x_j^(m+1) d/dx_j f - h (m+1) x_j^m f ]

With ``h = 2`` and ``m = -N`` this is ``sum_j { -x_j^(1-N) d_j + 2(N-1) x_j^(-N) }``.
The family satisfies ``[L_m, L_n] = (m - n) L_(m+n)`` for every weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import X, RatFun, const, var, x_name

__all__ = [
    "WeightedVectorFieldOp",
    "apply_L",
    "arity_of",
    "commutator_defect",
    "degeneracy_apply",
]

DEFAULT_WEIGHT = Fraction(2)


def arity_of(f: RatFun) -> int:
    """Largest x-index occurring in ``f`` (0 for functions of a, k only)."""
    n = 0
    for name in f.variables:
        if name.startswith("x"):
            n = max(n, int(name[1:]))
    return n


@dataclass(frozen=True)
class WeightedVectorFieldOp:
    mode: int
    weight: Fraction = DEFAULT_WEIGHT
    arity: int | None = None

    def __call__(self, f: RatFun) -> RatFun:
        f = RatFun.coerce(f)
        n = arity_of(f) if self.arity is None else self.arity
        if f.is_zero() or n == 0:
            return const(0)
        m = self.mode
        total = const(0)
        for j in range(1, n + 1):
            xj = X(j)
            total = total - xj ** (m + 1) * f.diff(x_name(j))
            if m + 1:
                total = total - self.weight * (m + 1) * xj**m * f
        return total


def apply_L(m: int, f: RatFun, arity: int | None = None, weight=DEFAULT_WEIGHT) -> RatFun:
    """Apply the mode-``m`` operator to ``f`` of ``arity`` x-variables.

    ``arity`` defaults to the highest x-index present in ``f``.  Pass it
    explicitly for functions that happen not to depend on their last argument.
    """
    return WeightedVectorFieldOp(m, Fraction(weight), arity)(f)


def commutator_defect(m: int, n: int, f: RatFun, arity: int | None = None, weight=DEFAULT_WEIGHT) -> RatFun:
    """``L_m L_n f - L_n L_m f - (m - n) L_(m+n) f``; identically zero."""
    f = RatFun.coerce(f)
    if arity is None:
        arity = arity_of(f)
    Lm = WeightedVectorFieldOp(m, Fraction(weight), arity)
    Ln = WeightedVectorFieldOp(n, Fraction(weight), arity)
    Lmn = WeightedVectorFieldOp(m + n, Fraction(weight), arity)
    return Lm(Ln(f)) - Ln(Lm(f)) - (m - n) * Lmn(f)


def degeneracy_apply(kappa, f: RatFun, arity: int | None = None) -> RatFun:
    """``(kappa/2) L_-1 L_-1 f - 2 L_-2 f``.

    ``kappa`` is a rational number or a RatFun (typically the ring variable k).
    """
    f = RatFun.coerce(f)
    if isinstance(kappa, str):
        kappa = var(kappa)
    kappa = RatFun.coerce(Fraction(kappa) if not isinstance(kappa, RatFun) else kappa)
    if arity is None:
        arity = arity_of(f)
    L1 = WeightedVectorFieldOp(-1, DEFAULT_WEIGHT, arity)
    L2 = WeightedVectorFieldOp(-2, DEFAULT_WEIGHT, arity)
    return kappa / 2 * L1(L1(f)) - 2 * L2(f)
