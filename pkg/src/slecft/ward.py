"""Boundary correlation functions built by the Ward-type recursion.

``B_0 = 1``, ``B_1 = alpha / x1^2`` and::

    B_(n+1)(x, x1..xn) = alpha/x^2 B_n
        - sum_j { (1/(x_j - x) + 1/x) d_j - 2/(x_j - x)^2 } B_n

After each extension the fresh argument ``x`` is named ``x1`` and the old
``x_j`` becomes ``x_(j+1)``, so Laurent coefficients in the first argument
are always taken in ``x1``.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union


from .exact import (
    MAX_X,
    POLY_RING,
    X,
    RatFun,
    _GENS,
    const,
    laurent_expand,
    var,
    x_name,
)
from .virasoro import WeightedVectorFieldOp, apply_L, degeneracy_apply

__all__ = [
    "CheckRecord",
    "ConstantsDerivation",
    "CorrelationFamily",
    "FamilyVector",
    "build_family",
    "derive_constants",
    "evolution_defect",
    "l_mode",
    "lowering_compose",
    "mode_expand_check",
    "seed_family",
    "shift_up",
    "stability_check",
    "ward_extend",
    "ward_extend_termwise",
]

AlphaLike = Union[str, int, Fraction, RatFun]


def _as_param(value: AlphaLike) -> RatFun:
    if isinstance(value, RatFun):
        return value
    if isinstance(value, str):
        try:
            return RatFun.coerce(Fraction(value))
        except ValueError:
            return var(value)
    return RatFun.coerce(Fraction(value))


def shift_up(f: RatFun, n: int, by: int = 1) -> RatFun:
    """Rename x_j -> x_(j+by) for j = 1..n."""
    if n + by > MAX_X:
        raise ValueError(f"shifting {n} variables by {by} exceeds x{MAX_X}")
    return f.rename({x_name(j): x_name(j + by) for j in range(n, 0, -1)})


def shift_down(f: RatFun, n: int) -> RatFun:
    """Rename x_(j+1) -> x_j for j = 1..n (x1 must be absent)."""
    return f.rename({x_name(j + 1): x_name(j) for j in range(1, n + 1)})


@dataclass(frozen=True)
class CorrelationFamily:
    levels: tuple[RatFun, ...]
    alpha: RatFun
    provenance: tuple[str, ...] = ()

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    @property
    def degenerate(self) -> bool:
        return self.alpha.is_zero()

    def __getitem__(self, n: int) -> RatFun:
        return self.levels[n]

    def __len__(self):
        return len(self.levels)

    def substitute(self, **values) -> "CorrelationFamily":
        """Fix symbolic parameters, e.g. ``fam.substitute(a=Fraction(5, 8))``."""
        return CorrelationFamily(
            tuple(b.subs(values) for b in self.levels),
            self.alpha.subs(values),
            self.provenance + (f"substituted {values}",),
        )


def seed_family(alpha: AlphaLike = "a") -> CorrelationFamily:
    alpha = _as_param(alpha)
    if alpha.is_zero():
        warnings.warn("alpha = 0 gives the degenerate family (1, 0, 0, ...)", stacklevel=2)
    return CorrelationFamily((const(1), alpha / X(1) ** 2), alpha, ("B0 = 1", "B1 = alpha/x1^2"))


# -- Ward recursion ---------------------------------------------------------

def ward_extend_termwise(b: RatFun, n: int, alpha: RatFun) -> RatFun:
    """One Ward step evaluated term by term with rational-function arithmetic."""
    b = shift_up(b, n)
    x = X(1)
    out = alpha / x**2 * b
    for j in range(2, n + 2):
        xj = X(j)
        out = out - ((1 / (xj - x) + 1 / x) * b.diff(x_name(j)) - 2 / (xj - x) ** 2 * b)
    return out


def ward_extend_polynomial(b: RatFun, n: int, alpha: RatFun) -> RatFun:
    """One Ward step computed on numerators over the fixed denominator.

    With ``D_n = prod x_j^2 prod (x_i - x_j)^2`` and ``B_n = P/D_n`` every
    term of the recursion is rewritten as a polynomial over ``D_(n+1)``; the
    only rational pieces (logarithmic derivatives of ``D_n``) pair up into
    exact divided differences.
    """
    if not alpha.den.is_ground:
        raise ValueError("alpha must be polynomial for the numerator route")
    g = _GENS[2 : 2 + n + 1]  # x1 (fresh), x2..x_(n+1)
    x, olds = g[0], g[1:]
    bs = shift_up(b, n)
    d_old = _vandermonde_sub(olds)
    p, rem = divmod(bs.num * d_old, bs.den)
    if rem:
        raise ArithmeticError("B_n denominator does not divide the Vandermonde product")
    a_num = alpha.num.quo_ground(alpha.den.LC)
    sq = [(xj - x) ** 2 for xj in olds]

    def prod_except(j):
        out = POLY_RING.one
        for i, s in enumerate(sq):
            if i != j:
                out *= s
        return out

    full = POLY_RING.one
    for s in sq:
        full *= s
    total = a_num * p * full
    f_terms = []
    for j, xj in enumerate(olds):
        pe = prod_except(j)
        pj = p.diff(xj)
        # -(x_j/(x(x_j - x))) d_j B  expressed over D_(n+1)
        total -= xj * x * (xj - x) * pe * pj
        total += 2 * x * (xj - x) * pe * p
        f_terms.append(2 * xj * x * (xj - x) * pe * p)
        total += 2 * x**2 * pe * p
    for i, j in itertools.combinations(range(n), 2):
        q, r = divmod(f_terms[j] - f_terms[i], olds[j] - olds[i])
        if r:
            raise ArithmeticError("divided difference not exact")
        total += q
    d_new = _vandermonde_sub(g)
    return RatFun(total, d_new)


def _vandermonde_sub(gens) -> object:
    d = POLY_RING.one
    for xi in gens:
        d *= xi**2
    for i, j in itertools.combinations(range(len(gens)), 2):
        d *= (gens[i] - gens[j]) ** 2
    return d


def ward_extend(fam: CorrelationFamily, method: str = "polynomial") -> CorrelationFamily:
    """Append ``B_(n+1)`` to the family."""
    if len(fam.levels) < 1:
        raise ValueError("family must contain B_0")
    n = fam.height
    b = fam.levels[-1]
    if method == "polynomial" and fam.alpha.den.is_ground:
        new = ward_extend_polynomial(b, n, fam.alpha)
    elif method in ("polynomial", "termwise"):
        new = ward_extend_termwise(b, n, fam.alpha)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CorrelationFamily(
        fam.levels + (new,), fam.alpha, fam.provenance + (f"B{n + 1} = ward_extend(B{n}) [{method}]",)
    )


def build_family(alpha: AlphaLike = "a", height: int = 4, method: str = "polynomial") -> CorrelationFamily:
    fam = seed_family(alpha)
    while fam.height < height:
        fam = ward_extend(fam, method)
    return fam


# -- evolution equation -----------------------------------------------------

def _sum_derivative(f: RatFun, n: int) -> RatFun:
    return -WeightedVectorFieldOp(-1, Fraction(0), n)(f)


def evolution_defect(fam: CorrelationFamily, kappa: AlphaLike = "k", s: AlphaLike = 2) -> list[RatFun]:
    """Left-hand side of the evolution equation at every level of ``fam``.

    ``-2s (sum 1/x_j^2) B_n + (sum 2/x_j d_j) B_n + kappa/2 (sum d_j)^2 B_n``
    """
    kappa = _as_param(kappa)
    s = _as_param(s)
    out = []
    for n, b in enumerate(fam.levels):
        if n == 0:
            out.append(const(0))
            continue
        xs = [X(j) for j in range(1, n + 1)]
        inv_sq = sum((1 / xj**2 for xj in xs), const(0))
        drift = sum((2 / xj * b.diff(x_name(j)) for j, xj in enumerate(xs, 1)), const(0))
        d1 = _sum_derivative(b, n)
        d2 = _sum_derivative(d1, n)
        out.append(-2 * s * inv_sq * b + drift + kappa / 2 * d2)
    return out


# -- report records ---------------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    level: int
    check: str
    defect: RatFun

    @property
    def ok(self) -> bool:
        return self.defect.is_zero()

    @property
    def status(self) -> str:
        return "exact-zero" if self.ok else "defect"

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "check-name": self.check,
            "status": self.status,
            "defect": self.defect.to_text(),
        }


# -- constants --------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsDerivation:
    kappa: Fraction
    alpha: Fraction
    level1_defect: RatFun
    level2_defect: RatFun
    kappa_constraint: RatFun
    alpha_constraint: RatFun
    checks: tuple[CheckRecord, ...] = field(default=())


def _coefficient_system(f: RatFun) -> list:
    """Coefficients in a, k of every x-monomial of the numerator of ``f``."""
    coeffs: dict[tuple, dict] = {}
    for m, c in f.num.iterterms():
        xm = m[2:]
        coeffs.setdefault(xm, {})[m[:2] + (0,) * (len(m) - 2)] = c
    return [POLY_RING.from_dict(d) for d in coeffs.values()]


def _system_gcd(polys):
    g = POLY_RING.zero
    for p in polys:
        g = g.gcd(p)
    return g


def _rational_roots(g, gen_index: int) -> list[Fraction]:
    """Rational roots of the linear factors of ``g`` in one variable."""
    _, factors = g.factor_list()
    roots = []
    for fac, _mult in factors:
        degs = [i for i, e in enumerate(fac.degrees()) if e]
        if degs != [gen_index]:
            continue
        if fac.degree(_GENS[gen_index]) != 1:
            continue
        c1 = fac.coeff(_GENS[gen_index])
        c0 = fac.coeff(1)
        roots.append(-Fraction(int(c0.numerator), int(c0.denominator)) / Fraction(int(c1.numerator), int(c1.denominator)))
    return roots


def derive_constants() -> ConstantsDerivation:
    """Solve the level-1 and level-2 evolution constraints for (kappa, alpha).

    The level-1 constraint fixes kappa; the level-2 constraint at that kappa
    fixes alpha, keeping the unique positive root.
    """
    fam = build_family("a", height=2, method="termwise")
    defects = evolution_defect(fam, "k", 2)
    lvl1 = defects[1]
    g1 = _system_gcd(_coefficient_system(lvl1))
    # the factor a alone would force alpha = 0
    kappas = [r for r in _rational_roots(g1, 1)]
    a_roots_lvl1 = _rational_roots(g1, 0)
    if any(r > 0 for r in a_roots_lvl1):
        raise ArithmeticError(f"level-1 constraint {g1.as_expr()} admits positive alpha without fixing kappa")
    if len(kappas) != 1:
        raise ArithmeticError(f"level-1 constraint {g1.as_expr()} does not fix kappa uniquely")
    (kappa,) = kappas
    lvl2 = defects[2].subs({"k": kappa})
    g2 = _system_gcd(_coefficient_system(lvl2))
    alphas = [r for r in _rational_roots(g2, 0) if r > 0]
    if len(alphas) != 1:
        raise ArithmeticError(f"level-2 constraint {g2.as_expr()} has positive roots {alphas}")
    (alpha,) = alphas
    fixed = fam.substitute(a=alpha)
    checks = tuple(
        CheckRecord(n, "degeneracy", degeneracy_apply(kappa, fixed.levels[n], arity=n)) for n in (1, 2)
    )
    bad = [c for c in checks if not c.ok]
    if bad:
        raise ArithmeticError(f"degeneracy cross-check failed: {[c.to_json() for c in bad]}")
    return ConstantsDerivation(
        kappa=kappa,
        alpha=alpha,
        level1_defect=lvl1,
        level2_defect=lvl2,
        kappa_constraint=RatFun(g1),
        alpha_constraint=RatFun(g2),
        checks=checks,
    )


# -- Laurent modes ----------------------------------------------------------

@dataclass(frozen=True)
class FamilyVector:
    """Finite vector ``(w_0, ..., w_m)`` with ``w_n`` a function of x1..xn."""

    levels: tuple[RatFun, ...]

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, n):
        return self.levels[n]

    def __add__(self, other: "FamilyVector") -> "FamilyVector":
        m = min(len(self), len(other))
        return FamilyVector(tuple(self.levels[i] + other.levels[i] for i in range(m)))

    def scale(self, c) -> "FamilyVector":
        c = RatFun.coerce(c)
        return FamilyVector(tuple(c * w for w in self.levels))

    @classmethod
    def of(cls, fam: CorrelationFamily) -> "FamilyVector":
        return cls(fam.levels)


def l_mode(N: int, w: FamilyVector) -> FamilyVector:
    """``(l_N w)_n``: the ``x^(-N-2)`` coefficient of ``w_(n+1)(x, x1..xn)`` around ``x = 0``."""
    if len(w) < 2:
        raise ValueError("vector too short for a mode map")
    order = -N - 2
    out = []
    for n in range(len(w) - 1):
        series = laurent_expand(w.levels[n + 1], "x1", order, order)
        out.append(shift_down(series.coeff(order), n))
    return FamilyVector(tuple(out))


def mode_expand_check(fam: CorrelationFamily, N_max: int = 4, pairs: Sequence[int] | None = None) -> list[CheckRecord]:
    """Laurent structure of ``B_(n+1)`` in its first argument.

    For each pair (B_n, B_(n+1)): no terms below ``x^-2``, the ``x^-2``
    coefficient is ``alpha B_n`` and the ``x^(N-2)`` coefficient is
    ``L_-N B_n`` for ``1 <= N <= N_max``.
    """
    if len(fam) < 2:
        raise ValueError("need at least B_0 and B_1")
    if pairs is None:
        pairs = range(fam.height)
    records = []
    for n in pairs:
        nxt = fam.levels[n + 1]
        lo = -2 - N_max
        series = laurent_expand(nxt, "x1", lo, N_max - 2)
        below = const(0)
        for order in range(lo, -2):
            c = series.coeff(order)
            if not c.is_zero():
                below = below + c * X(1) ** order
        records.append(CheckRecord(n, "no-positive-modes", shift_down(below, n) if below.is_zero() else below))
        records.append(
            CheckRecord(n, "weight-alpha", shift_down(series.coeff(-2), n) - fam.alpha * fam.levels[n])
        )
        for N in range(1, N_max + 1):
            got = shift_down(series.coeff(N - 2), n)
            records.append(CheckRecord(n, f"L_-{N}", got - apply_L(-N, fam.levels[n], arity=n)))
    return records


def lowering_compose(fam: CorrelationFamily, modes: Sequence[int]) -> tuple[FamilyVector, list[CheckRecord]]:
    """``l_(N1) ... l_(Nr) (B)`` by Laurent extraction, compared with ``L_(N1) ... L_(Nr) B_n``."""
    if any(m >= 0 for m in modes):
        raise ValueError("lowering_compose takes negative modes only")
    if len(modes) >= len(fam):
        raise ValueError(f"tower of height {fam.height} too short for {len(modes)} mode maps")
    w = FamilyVector.of(fam)
    for N in reversed(modes):
        w = l_mode(N, w)
    records = []
    for n, wn in enumerate(w.levels):
        expected = fam.levels[n]
        for N in reversed(modes):
            expected = apply_L(N, expected, arity=n)
        records.append(CheckRecord(n, "lowering" + "".join(f"[{N}]" for N in modes), wn - expected))
    return w, records


# -- algebraic prediction of raising modes ----------------------------------

def _normal_order(word: tuple[int, ...], alpha: RatFun) -> dict[tuple[int, ...], RatFun]:
    """Rewrite ``l_(w1) ... l_(wr) B`` as a combination of purely negative words.

    Uses ``[l_M, l_N] = (M-N) l_(M+N)``, ``l_M B = 0`` for ``M > 0`` and
    ``l_0 B = alpha B``.
    """
    result: dict[tuple[int, ...], RatFun] = {}
    stack = [(word, const(1))]
    while stack:
        w, c = stack.pop()
        if c.is_zero():
            continue
        # rightmost non-negative mode
        pos = next((i for i in range(len(w) - 1, -1, -1) if w[i] >= 0), None)
        if pos is None:
            result[w] = result.get(w, const(0)) + c
            continue
        M = w[pos]
        if pos == len(w) - 1:
            if M > 0:
                continue
            stack.append((w[:-1], c * alpha))
            continue
        N = w[pos + 1]
        swapped = w[:pos] + (N, M) + w[pos + 2 :]
        stack.append((swapped, c))
        if M != N:
            stack.append((w[:pos] + (M + N,) + w[pos + 2 :], c * (M - N)))
    return {k: v for k, v in result.items() if not v.is_zero()}


def stability_check(
    fam: CorrelationFamily, raise_mode: int, modes: Sequence[int], level: int = 0
) -> list[CheckRecord]:
    """Compare ``l_M l_(N1)...l_(Nr) B`` from Laurent extraction with its commutator prediction.

    The prediction evaluates each normal-ordered word with the differential
    operators ``L_N`` on ``B_n``; the direct route never uses them.
    """
    if raise_mode <= 0:
        raise ValueError("raise_mode must be positive")
    modes = tuple(modes)
    if any(m >= 0 for m in modes):
        raise ValueError("modes must be negative")
    needed = level + len(modes) + 1
    if needed > fam.height:
        raise ValueError(f"need B_{needed}, tower has height {fam.height}")
    w = FamilyVector.of(fam)
    for N in reversed(modes):
        w = l_mode(N, w)
    direct = l_mode(raise_mode, w).levels[level]
    predicted = const(0)
    for word, coeff in _normal_order((raise_mode,) + modes, fam.alpha).items():
        term = fam.levels[level]
        for N in reversed(word):
            term = apply_L(N, term, arity=level)
        predicted = predicted + coeff * term
    name = f"l_{raise_mode}" + "".join(f"l_{N}" for N in modes)
    return [CheckRecord(level, f"stability[{name}]", direct - predicted)]
