"""Closed-form scalar symbols a(x, xi) as small expression trees.

The class is deliberately narrow: rational functions of bracket weights
(1 + sum xi_i^2)^(e/2) times trigonometric coefficients in the space
variables.  It is closed under freezing coefficients at a stratum and
under the conormal frequency integral used by trace fusion.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import AxisMismatch, StratumMismatch
from .geometry import ConfigTriple, Stratum, contains

Number = Union[int, float, complex, Fraction]


@dataclass(frozen=True)
class Const:
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class SpaceVar:
    axis: int


@dataclass(frozen=True)
class FreqVar:
    axis: int


@dataclass(frozen=True)
class Add:
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class Mul:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class IntPow:
    base: object
    power: int


@dataclass(frozen=True)
class Bracket:
    """(1 + sum_{i in axes} xi_i^2) ** (exponent / 2)."""

    axes: frozenset[int]
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "axes", frozenset(self.axes))
        object.__setattr__(self, "exponent", Fraction(self.exponent))


@dataclass(frozen=True)
class Sin:
    axis: int


@dataclass(frozen=True)
class Cos:
    axis: int


Expr = object  # any of the node classes above


# ---------------------------------------------------------------------------
# structural helpers


def space_axes(e: Expr) -> frozenset[int]:
    match e:
        case SpaceVar(axis=a) | Sin(axis=a) | Cos(axis=a):
            return frozenset({a})
        case Add(terms=ts) | Mul(factors=ts):
            return frozenset().union(*(space_axes(t) for t in ts)) if ts else frozenset()
        case Neg(arg=a):
            return space_axes(a)
        case IntPow(base=b):
            return space_axes(b)
        case _:
            return frozenset()


def freq_axes(e: Expr) -> frozenset[int]:
    match e:
        case FreqVar(axis=a):
            return frozenset({a})
        case Bracket(axes=ax):
            return frozenset(ax)
        case Add(terms=ts) | Mul(factors=ts):
            return frozenset().union(*(freq_axes(t) for t in ts)) if ts else frozenset()
        case Neg(arg=a):
            return freq_axes(a)
        case IntPow(base=b):
            return freq_axes(b)
        case _:
            return frozenset()


def is_positive(e: Expr) -> bool:
    """Conservative certificate that an expression is everywhere > 0."""
    match e:
        case Const(value=v):
            return v.imag == 0 and v.real > 0
        case Bracket():
            return True
        case Mul(factors=fs):
            return all(is_positive(f) for f in fs)
        case Add(terms=ts):
            # positive constants/brackets plus even powers
            nonneg = 0
            for t in ts:
                if is_positive(t):
                    nonneg += 1
                elif not _is_nonnegative(t):
                    return False
            return nonneg >= 1
        case IntPow(base=b, power=p):
            return is_positive(b) or (p % 2 == 0 and p != 0 and _never_zero(b))
        case _:
            return False


def _is_nonnegative(e: Expr) -> bool:
    match e:
        case Const(value=v):
            return v.imag == 0 and v.real >= 0
        case IntPow(power=p):
            return p % 2 == 0
        case Mul(factors=fs):
            return all(_is_nonnegative(f) for f in fs)
        case _:
            return is_positive(e)


def _never_zero(e: Expr) -> bool:
    return is_positive(e)


def validate_expr(e: Expr) -> None:
    """Check the structural invariants of the symbol class."""
    match e:
        case Const() | SpaceVar() | FreqVar() | Sin() | Cos() | Bracket():
            pass
        case Add(terms=ts) | Mul(factors=ts):
            for t in ts:
                validate_expr(t)
        case Neg(arg=a):
            validate_expr(a)
        case IntPow(base=b, power=p):
            validate_expr(b)
            if p < 0 and not is_positive(b):
                raise AxisMismatch(
                    "negative integer power requires a certified nonvanishing base"
                )
        case _:
            raise AxisMismatch(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def _eval(e: Expr, pos: dict, freq: dict):
    """Evaluate with numpy broadcasting; dict values may be scalars or arrays."""
    match e:
        case Const(value=v):
            return v
        case SpaceVar(axis=a):
            try:
                return pos[a]
            except KeyError:
                raise AxisMismatch(f"no value for space axis {a}") from None
        case FreqVar(axis=a):
            try:
                return freq[a]
            except KeyError:
                raise AxisMismatch(f"no value for frequency axis {a}") from None
        case Sin(axis=a):
            return np.sin(_eval(SpaceVar(a), pos, freq))
        case Cos(axis=a):
            return np.cos(_eval(SpaceVar(a), pos, freq))
        case Add(terms=ts):
            return sum(_eval(t, pos, freq) for t in ts)
        case Mul(factors=fs):
            out = 1
            for f in fs:
                out = out * _eval(f, pos, freq)
            return out
        case Neg(arg=a):
            return -_eval(a, pos, freq)
        case IntPow(base=b, power=p):
            base = _eval(b, pos, freq)
            if np.isscalar(base) and not isinstance(base, np.generic):
                return base ** p
            return np.power(base, p)
        case Bracket(axes=ax, exponent=ex):
            acc = 1.0
            for a in sorted(ax):
                try:
                    v = freq[a]
                except KeyError:
                    raise AxisMismatch(f"no value for frequency axis {a}") from None
                acc = acc + np.real(v) ** 2
            return np.power(acc, float(ex) / 2.0)
        case _:
            raise AxisMismatch(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# the declared symbol: expression + home manifold + order


@dataclass(frozen=True)
class SymbolExpr:
    """An expression together with its home manifold and declared order."""

    expr: Expr
    home: Stratum
    order: Fraction
    axes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", Fraction(self.order))
        object.__setattr__(self, "axes", tuple(self.axes))


def symbol(cfg: ConfigTriple, home: Stratum, expr: Expr, order: Number) -> SymbolExpr:
    """Validate and wrap an expression as a symbol on ``home``."""
    validate_expr(expr)
    axes = cfg.axes(home)
    used = space_axes(expr) | freq_axes(expr)
    if not used.issubset(axes):
        raise AxisMismatch(
            f"symbol on {home.value} references axes {sorted(used - set(axes))} "
            f"outside its axis set {list(axes)}"
        )
    return SymbolExpr(expr=expr, home=home, order=Fraction(order), axes=axes)


def eval_expr(sym: SymbolExpr, x, xi) -> complex:
    """Pointwise value; x and xi are vectors over the home axes, in order."""
    x = list(x)
    xi = list(xi)
    if len(x) != len(sym.axes) or len(xi) != len(sym.axes):
        raise AxisMismatch(
            f"expected vectors of length {len(sym.axes)}, got {len(x)} and {len(xi)}"
        )
    pos = dict(zip(sym.axes, x))
    freq = dict(zip(sym.axes, xi))
    val = _eval(sym.expr, pos, freq)
    return complex(val) if np.isscalar(val) or getattr(val, "shape", None) == () else val


def eval_on(sym: SymbolExpr, pos: dict, freq: dict):
    """Evaluate on explicit axis->value maps (arrays allowed)."""
    return _eval(sym.expr, pos, freq)


# ---------------------------------------------------------------------------
# simplification (just enough to keep frozen trees tidy)


def simplify(e: Expr) -> Expr:
    match e:
        case Add(terms=ts):
            out = []
            const = 0j
            for t in ts:
                t = simplify(t)
                if isinstance(t, Const):
                    const += t.value
                elif isinstance(t, Add):
                    out.extend(t.terms)
                else:
                    out.append(t)
            if const != 0:
                out.append(Const(const))
            if not out:
                return Const(0)
            if len(out) == 1:
                return out[0]
            return Add(tuple(out))
        case Mul(factors=fs):
            out = []
            const = 1 + 0j
            for f in fs:
                f = simplify(f)
                if isinstance(f, Const):
                    const *= f.value
                elif isinstance(f, Mul):
                    out.extend(f.factors)
                else:
                    out.append(f)
            if const == 0:
                return Const(0)
            if const != 1:
                out.insert(0, Const(const))
            if not out:
                return Const(1)
            if len(out) == 1:
                return out[0]
            return Mul(tuple(out))
        case Neg(arg=a):
            a = simplify(a)
            if isinstance(a, Const):
                return Const(-a.value)
            return Neg(a)
        case IntPow(base=b, power=p):
            b = simplify(b)
            if p == 0:
                return Const(1)
            if p == 1:
                return b
            if isinstance(b, Const):
                return Const(b.value ** p)
            if isinstance(b, Bracket):
                return Bracket(b.axes, b.exponent * p)
            return IntPow(b, p)
        case Bracket(axes=ax, exponent=ex):
            if not ax or ex == 0:
                return Const(1)
            return e
        case _:
            return e


def _subst_zero(e: Expr, kill: frozenset[int]) -> Expr:
    """Set space variables on the given axes to zero."""
    match e:
        case SpaceVar(axis=a) if a in kill:
            return Const(0)
        case Sin(axis=a) if a in kill:
            return Const(0)
        case Cos(axis=a) if a in kill:
            return Const(1)
        case Add(terms=ts):
            return Add(tuple(_subst_zero(t, kill) for t in ts))
        case Mul(factors=fs):
            return Mul(tuple(_subst_zero(f, kill) for f in fs))
        case Neg(arg=a):
            return Neg(_subst_zero(a, kill))
        case IntPow(base=b, power=p):
            return IntPow(_subst_zero(b, kill), p)
        case _:
            return e


def freeze_expr(sym: SymbolExpr, cfg: ConfigTriple, stratum: Stratum) -> SymbolExpr:
    """Freeze coefficients at the stratum: space variables conormal to it
    (within the home manifold) are set to zero.  Frequency variables are
    untouched; the conormal ones become the operator variables of the
    model symbol."""
    if not contains(sym.home, stratum):
        raise StratumMismatch(f"{stratum.value} is not contained in {sym.home.value}")
    kill = frozenset(cfg.conormal_axes(stratum, within=sym.home))
    if not (space_axes(sym.expr) & kill):
        return sym
    frozen = simplify(_subst_zero(sym.expr, kill))
    return SymbolExpr(expr=frozen, home=sym.home, order=sym.order, axes=sym.axes)


# ---------------------------------------------------------------------------
# separable decomposition used by the quantizer: sum of p(x) * m(xi)


class NotSeparable(Exception):
    pass


def separate(e: Expr) -> list[tuple[Expr, Expr]]:
    """Write e as a sum of products (position factor, frequency factor).

    Raises NotSeparable for genuinely mixed nodes (e.g. negative powers
    of position+frequency sums), in which case the quantizer falls back
    to dense evaluation.
    """
    match e:
        case Const() | SpaceVar() | Sin() | Cos():
            return [(e, Const(1))]
        case FreqVar() | Bracket():
            return [(Const(1), e)]
        case Neg(arg=a):
            return [(simplify(Mul((Const(-1), p))), m) for p, m in separate(a)]
        case Add(terms=ts):
            out = []
            for t in ts:
                out.extend(separate(t))
            return out
        case Mul(factors=fs):
            terms = [(Const(1), Const(1))]
            for f in fs:
                sub = separate(f)
                terms = [
                    (simplify(Mul((p1, p2))), simplify(Mul((m1, m2))))
                    for (p1, m1) in terms
                    for (p2, m2) in sub
                ]
            return terms
        case IntPow(base=b, power=p):
            sa, fa = space_axes(b), freq_axes(b)
            if not fa:
                return [(e, Const(1))]
            if not sa:
                return [(Const(1), e)]
            if p > 0:
                expanded = Mul(tuple([b] * p))
                return separate(expanded)
            raise NotSeparable(e)
        case _:
            raise NotSeparable(e)
