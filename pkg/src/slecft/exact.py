"""Exact rational-function arithmetic over Q[a, k, x1, ..., x8].

Every value lives in one fixed polynomial ring with graded-lex order over the
variables ``a, k, x1, ..., x8``.  ``a`` and ``k`` stand for the restriction
exponent and the SLE parameter; fixing either one is a substitution.

A :class:`RatFun` is stored as a reduced numerator/denominator pair whose
denominator has leading coefficient 1, so two RatFun are equal exactly when
their stored pairs coincide.
"""
from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import sympy
from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, ring

__all__ = [
    "BigRational",
    "MAX_X",
    "VARIABLES",
    "LaurentSeries",
    "RatFun",
    "X",
    "const",
    "laurent_expand",
    "parse_ratfun",
    "rf_arith",
    "rf_diff",
    "rf_is_zero",
    "var",
]

BigRational = Fraction

MAX_X = 8
VARIABLES: tuple[str, ...] = ("a", "k") + tuple(f"x{i}" for i in range(1, MAX_X + 1))
_INDEX = {name: i for i, name in enumerate(VARIABLES)}
_X_OFFSET = 2

POLY_RING, *_GENS = ring(VARIABLES, QQ, grlex)
_ZERO = POLY_RING.zero
_ONE = POLY_RING.one

Scalar = Union[int, Fraction]


def _qq(c) -> object:
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    return QQ(c)


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def var_index(name: str) -> int:
    try:
        return _INDEX[name]
    except KeyError:
        raise ValueError(f"unknown variable {name!r}; ring variables are {VARIABLES}") from None


def _x_name(j: int) -> str:
    if not 1 <= j <= MAX_X:
        raise ValueError(f"x-variable index {j} outside 1..{MAX_X}")
    return f"x{j}"


def _monomial_gcd(num: PolyElement, mono: tuple[int, ...]) -> tuple[int, ...]:
    g = list(mono)
    for m in num.itermonoms():
        for i, e in enumerate(m):
            if e < g[i]:
                g[i] = e
        if not any(g):
            break
    return tuple(g)


def _div_monomial(p: PolyElement, mono: tuple[int, ...]) -> PolyElement:
    if not any(mono):
        return p
    return POLY_RING.from_dict(
        {tuple(e - d for e, d in zip(m, mono)): c for m, c in p.iterterms()}
    )


class RatFun:
    """Reduced quotient of two polynomials in the global ring."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: PolyElement, den: PolyElement | None = None, *, reduced: bool = False):
        if den is None:
            den = _ONE
        if not den:
            raise ZeroDivisionError("RatFun with zero denominator")
        if not reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # -- construction -------------------------------------------------------
    @classmethod
    def coerce(cls, value) -> "RatFun":
        if isinstance(value, RatFun):
            return value
        if isinstance(value, PolyElement):
            return cls(value, reduced=True)
        if isinstance(value, (int, Fraction)):
            return cls(POLY_RING.ground_new(_qq(value)), reduced=True)
        return NotImplemented

    # -- structure ----------------------------------------------------------
    @property
    def variables(self) -> tuple[str, ...]:
        """Ring variables that actually occur, in ring order."""
        used = [False] * len(VARIABLES)
        for p in (self.num, self.den):
            for m in p.itermonoms():
                for i, e in enumerate(m):
                    if e:
                        used[i] = True
        return tuple(name for name, u in zip(VARIABLES, used) if u)

    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return _to_fraction(self.num.LC) / _to_fraction(self.den.LC) if self.num else Fraction(0)

    def x_degree(self) -> int | None:
        """Total degree in the x-variables if homogeneous in them, else None."""

        def degrees(p):
            return {sum(m[_X_OFFSET:]) for m in p.itermonoms()}

        dn, dd = degrees(self.num), degrees(self.den)
        if not self.num:
            return 0
        if len(dn) != 1 or len(dd) != 1:
            return None
        return dn.pop() - dd.pop()

    def valuation(self, name: str) -> int:
        """Order of vanishing (negative for a pole) at ``name = 0``."""
        i = var_index(name)
        if not self.num:
            raise ValueError("valuation of zero")
        vn = min(m[i] for m in self.num.itermonoms())
        vd = min(m[i] for m in self.den.itermonoms())
        return vn - vd

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        if other.den.is_ground:
            return RatFun(self.num + other.num * self.den, self.den, reduced=other.den == _ONE)
        if self.den.is_ground:
            return RatFun(self.num * other.den + other.num, other.den, reduced=self.den == _ONE)
        g, d1, d2 = self.den.cofactors(other.den)
        return RatFun(self.num * d2 + other.num * d1, d1 * d2 * g)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return RatFun(_ZERO, reduced=True)
        # cross-cancel first so products stay small
        n1, d2 = _reduce_pair(self.num, other.den)
        n2, d1 = _reduce_pair(other.num, self.den)
        return _normalized(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise ZeroDivisionError("division by the zero rational function")
        return self * RatFun(other.den, other.num)

    def __rtruediv__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            if not self.num:
                raise ZeroDivisionError("negative power of zero")
            return RatFun(self.den**-e, self.num**-e)
        return RatFun(self.num**e, self.den**e, reduced=True) if e else RatFun.coerce(1)

    def __eq__(self, other):
        other = RatFun.coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.num.terms()), tuple(self.den.terms())))
        return self._hash

    # -- calculus and substitution -----------------------------------------
    def diff(self, name: str) -> "RatFun":
        i = var_index(name)
        gen = _GENS[i]
        dn = self.num.diff(gen)
        dd = self.den.diff(gen)
        if not dd:
            return RatFun(dn, self.den)
        # d/dv (n/d) = (n' d - n d') / d^2, with gcd(d, d') pulled out first
        g, d_red, dd_red = self.den.cofactors(dd)
        return RatFun(dn * d_red - self.num * dd_red, self.den * d_red)

    def subs(self, values: Mapping[str, Scalar]) -> "RatFun":
        """Substitute rational constants for variables."""
        num, den = self.num, self.den
        for name, value in values.items():
            gen = _GENS[var_index(name)]
            q = _qq(Fraction(value))
            num = num.subs(gen, q)
            den = den.subs(gen, q)
        if not den:
            raise ZeroDivisionError(f"substitution {dict(values)} makes the denominator vanish")
        return RatFun(num, den)

    def substitute(self, mapping: Mapping[str, "RatFun"]) -> "RatFun":
        """Simultaneous substitution of rational functions for variables."""
        num = _poly_compose(self.num, mapping)
        den = _poly_compose(self.den, mapping)
        return num / den

    def rename(self, mapping: Mapping[str, str]) -> "RatFun":
        """Apply a variable renaming (must be injective on the variables used)."""
        perm = list(range(len(VARIABLES)))
        for src, dst in mapping.items():
            perm[var_index(src)] = var_index(dst)
        used = self.variables
        targets = [perm[var_index(v)] for v in used]
        if len(set(targets)) != len(targets):
            raise ValueError(f"renaming {dict(mapping)} is not injective on {used}")

        def apply(p):
            out = {}
            for m, c in p.iterterms():
                e = [0] * len(VARIABLES)
                for i, d in enumerate(m):
                    if d:
                        e[perm[i]] += d
                out[tuple(e)] = c
            return POLY_RING.from_dict(out)

        return RatFun(apply(self.num), apply(self.den))

    def evaluate(self, values: Mapping[str, Scalar]) -> Fraction:
        """Exact value at a rational point (all occurring variables required)."""
        pt = [QQ(0)] * len(VARIABLES)
        for name, v in values.items():
            pt[var_index(name)] = _qq(Fraction(v))
        missing = set(self.variables) - set(values)
        if missing:
            raise ValueError(f"no value given for {sorted(missing)}")
        n = _to_fraction(self.num(*pt)) if self.num else Fraction(0)
        d = _to_fraction(self.den(*pt))
        if d == 0:
            raise ZeroDivisionError("evaluation at a pole")
        return n / d

    # -- text ---------------------------------------------------------------
    def to_text(self) -> str:
        """Canonical fully parenthesized infix form."""
        if self.den == _ONE:
            return f"({_poly_text(self.num)})"
        return f"({_poly_text(self.num)})/({_poly_text(self.den)})"

    def factored(self) -> str:
        """Compact human-readable factored form, e.g. ``a*(3*k-8)/x1^4``."""
        expr = sympy.factor(self.num.as_expr() / self.den.as_expr())
        return str(expr).replace("**", "^").replace(" ", "")

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"RatFun({self.to_text()})"


def _reduce_pair(num: PolyElement, den: PolyElement) -> tuple[PolyElement, PolyElement]:
    if not num:
        return num, _ONE
    if den.is_ground or num.is_ground:
        return num, den
    if len(den) == 1:
        (mono,) = den.itermonoms()
        g = _monomial_gcd(num, mono)
        return _div_monomial(num, g), _div_monomial(den, g)
    if len(num) == 1:
        (mono,) = num.itermonoms()
        g = _monomial_gcd(den, mono)
        return _div_monomial(num, g), _div_monomial(den, g)
    _, n, d = num.cofactors(den)
    return n, d


def _normalized(num: PolyElement, den: PolyElement) -> RatFun:
    if not num:
        return RatFun(_ZERO, reduced=True)
    lc = den.LC
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.monic()
    return RatFun(num, den, reduced=True)


def _reduce(num: PolyElement, den: PolyElement) -> tuple[PolyElement, PolyElement]:
    if not num:
        return _ZERO, _ONE
    n, d = _reduce_pair(num, den)
    lc = d.LC
    if lc != 1:
        n = n.quo_ground(lc)
        d = d.monic()
    return n, d


def _poly_compose(p: PolyElement, mapping: Mapping[str, RatFun]) -> RatFun:
    idx = {var_index(k): RatFun.coerce(v) for k, v in mapping.items()}
    gens = [idx.get(i, RatFun(g, reduced=True)) for i, g in enumerate(_GENS)]
    total = RatFun(_ZERO, reduced=True)
    for m, c in p.iterterms():
        term = RatFun(POLY_RING.ground_new(c), reduced=True)
        for i, e in enumerate(m):
            if e:
                term = term * gens[i] ** e
        total = total + term
    return total


def _coeff_text(c) -> str:
    f = _to_fraction(c)
    return f"({f.numerator})" if f.denominator == 1 else f"({f.numerator}/{f.denominator})"


def _mono_text(m: tuple[int, ...]) -> str:
    parts = []
    for name, e in zip(VARIABLES, m):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _poly_text(p: PolyElement) -> str:
    if not p:
        return "(0)"
    out = []
    for m, c in p.terms():
        mono = _mono_text(m)
        out.append(f"{_coeff_text(c)}*{mono}" if mono else _coeff_text(c))
    return " + ".join(out)


# -- public helpers ---------------------------------------------------------

def var(name: str) -> RatFun:
    return RatFun(_GENS[var_index(name)], reduced=True)


def X(j: int) -> RatFun:
    """The j-th boundary variable x_j (1-based)."""
    return var(_x_name(j))


def const(value: Scalar) -> RatFun:
    return RatFun.coerce(Fraction(value))


def x_name(j: int) -> str:
    return _x_name(j)


_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def rf_arith(f: RatFun, g: RatFun, op: str) -> RatFun:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(RatFun.coerce(f), RatFun.coerce(g))


def rf_diff(f: RatFun, name: str) -> RatFun:
    return RatFun.coerce(f).diff(name)


def rf_is_zero(f: RatFun) -> bool:
    return RatFun.coerce(f).is_zero()


# -- Laurent expansion ------------------------------------------------------

@dataclass(frozen=True)
class LaurentSeries:
    """Truncated Laurent expansion in one variable around 0.

    ``coeffs`` stores only the nonzero coefficients with orders in
    ``[min_order, max_order]``.
    """

    var: str
    min_order: int
    max_order: int
    coeffs: dict[int, RatFun] = field(default_factory=dict)

    def coeff(self, order: int) -> RatFun:
        if not self.min_order <= order <= self.max_order:
            raise IndexError(f"order {order} outside computed range [{self.min_order}, {self.max_order}]")
        return self.coeffs.get(order, RatFun(_ZERO, reduced=True))

    def truncation(self) -> RatFun:
        """Sum of the stored terms as a rational function."""
        v = var(self.var)
        total = RatFun(_ZERO, reduced=True)
        for order in sorted(self.coeffs):
            total = total + self.coeffs[order] * v**order
        return total


def _split_by_var(p: PolyElement, i: int) -> dict[int, PolyElement]:
    parts: dict[int, dict] = {}
    for m, c in p.iterterms():
        e = m[i]
        mm = m[:i] + (0,) + m[i + 1 :]
        parts.setdefault(e, {})[mm] = c
    return {e: POLY_RING.from_dict(d) for e, d in parts.items()}


def laurent_expand(f: RatFun, name: str, k_min: int, k_max: int) -> LaurentSeries:
    """Expand ``f`` in powers of ``name`` around 0 for orders ``k_min..k_max``."""
    f = RatFun.coerce(f)
    i = var_index(name)
    if k_max < k_min:
        raise ValueError("empty order range")
    if not f.num:
        return LaurentSeries(name, k_min, k_max, {})
    num_parts = _split_by_var(f.num, i)
    den_parts = _split_by_var(f.den, i)
    vn, vd = min(num_parts), min(den_parts)
    num_parts = {e - vn: p for e, p in num_parts.items()}
    den_parts = {e - vd: p for e, p in den_parts.items()}
    q0 = den_parts[0]
    if not q0:
        raise ArithmeticError(f"denominator has no {name}-free part")
    shift = vn - vd
    n_terms = k_max - shift + 1
    coeffs: dict[int, RatFun] = {}
    # c_j = e_j / q0^(j+1) with e_j = n_j q0^j - sum_{l=1..j} q_l e_{j-l} q0^(l-1)
    e: list[PolyElement] = []
    q0_pows = [_ONE]
    for j in range(max(n_terms, 0)):
        q0_pows.append(q0_pows[-1] * q0)
        acc = num_parts.get(j, _ZERO) * q0_pows[j]
        for l in range(1, j + 1):
            ql = den_parts.get(l)
            if ql:
                acc -= ql * e[j - l] * q0_pows[l - 1]
        e.append(acc)
        order = j + shift
        if order >= k_min and acc:
            coeffs[order] = RatFun(acc, q0_pows[j + 1])
    return LaurentSeries(name, k_min, k_max, coeffs)


# -- parsing ----------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_ratfun(text: str) -> RatFun:
    """Parse the canonical text form (or any +,-,*,/,^ expression in ring variables)."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = ev(node.right)
                if not (exp.is_constant() and exp.constant_value().denominator == 1):
                    raise ValueError("exponent must be an integer")
                return ev(node.left) ** int(exp.constant_value())
            try:
                return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
            except KeyError:
                raise ValueError(f"unsupported operator in {text!r}") from None
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -ev(node.operand)
            if isinstance(node.op, ast.UAdd):
                return ev(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return const(node.value)
        if isinstance(node, ast.Name):
            return var(node.id)
        raise ValueError(f"cannot parse {ast.dump(node)} in {text!r}")

    return ev(tree)


def poly_sum(terms: Iterable[RatFun]) -> RatFun:
    total = RatFun(_ZERO, reduced=True)
    for t in terms:
        total = total + t
    return total
