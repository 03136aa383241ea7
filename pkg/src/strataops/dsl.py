"""Text format for configurations, morphism definitions and commands.

A program is line oriented::

    # geometry first, then named morphisms, then commands
    config n=3 S1={1,2} S2={1,3} transversal=true orders=(1,1/2,1/2)
    M = Op[X1]{1, 0} ; bd1 ; Op[X0]{(1 + xi3^2)^(-2), -2} @order 3
    G = Op[X0]{1, 0} ; cob1 ; Op[X1]{(1+xi1^2+xi2^2)^(-1), -2} ; bd1 ; Op[X0]{1, 0}
    classify M
    symbol G stratum=X1 z=0.0,0.0 zeta=1.0,0.0 M=16

Composition reads right to left: the rightmost atom applies first.  `+`
sums words into one morphism.  `@order s` fixes the domain Sobolev order
of a definition (all its words must then share a domain manifold);
without it each word starts at the config order of its domain space.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import Boundary, Coboundary, PsiDO, Word, psido, validate_word
from .errors import ParseError, StrataError, ValidationError
from .geometry import ConfigTriple, Stratum, derive_config
from .symexpr import (
    Add,
    Bracket,
    Const,
    Cos,
    Expr,
    FreqVar,
    IntPow,
    Mul,
    Neg,
    Sin,
    SpaceVar,
)

_COMMANDS = ("classify", "normalize", "symbol", "verify")
_MANIFOLDS = {"X0": Stratum.X0, "X1": Stratum.X1, "X2": Stratum.X2}
_INDEX = {Stratum.X0: 0, Stratum.X1: 1, Stratum.X2: 2}


@dataclass(frozen=True)
class Definition:
    name: str
    words: tuple[Word, ...]
    order_override: Fraction | None


@dataclass(frozen=True)
class Command:
    kind: str
    target: str | None
    options: tuple[tuple[str, str], ...]

    def opt(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.options:
            if k == key:
                return v
        return default


@dataclass(frozen=True)
class DslProgram:
    cfg: ConfigTriple
    orders: tuple
    definitions: tuple[Definition, ...]
    commands: tuple[Command, ...]

    def definition(self, name: str) -> Definition:
        for d in self.definitions:
            if d.name == name:
                return d
        raise ValidationError(f"no morphism named {name!r}")


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<sym>[\[\]{}();+\-*^,=@/])"
)


def _tokenize(line: str, lineno: int) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m:
            raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        pos = m.end()
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), m.start() + 1))
    return out


class _Stream:
    def __init__(self, tokens, lineno):
        self.tokens = tokens
        self.i = 0
        self.lineno = lineno

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.lineno)
        self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.next()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, got {tok[1]!r}", self.lineno, tok[2])
        return tok

    def done(self) -> bool:
        return self.i >= len(self.tokens)


# ---------------------------------------------------------------------------
# expression grammar


def _parse_rational(ts: _Stream) -> Fraction:
    sign = 1
    tok = ts.peek()
    if tok and tok[1] == "-":
        ts.next()
        sign = -1
    tok = ts.next()
    if tok[0] != "num":
        raise ParseError(f"expected a number, got {tok[1]!r}", ts.lineno, tok[2])
    text = tok[1]
    nxt = ts.peek()
    if nxt and nxt[1] == "/":
        ts.next()
        den = ts.next()
        if den[0] != "num":
            raise ParseError("expected a denominator", ts.lineno, den[2])
        text = f"{text}/{den[1]}"
    return sign * Fraction(text)


def _parse_expr(ts: _Stream) -> Expr:
    left = _parse_term(ts)
    while True:
        tok = ts.peek()
        if tok and tok[1] in "+-":
            ts.next()
            right = _parse_term(ts)
            if tok[1] == "-":
                right = Neg(right)
            if isinstance(left, Add):
                left = Add(left.terms + (right,))
            else:
                left = Add((left, right))
        else:
            return left


def _parse_term(ts: _Stream) -> Expr:
    left = _parse_factor(ts)
    while True:
        tok = ts.peek()
        if tok and tok[1] == "*":
            ts.next()
            right = _parse_factor(ts)
            if isinstance(left, Mul):
                left = Mul(left.factors + (right,))
            else:
                left = Mul((left, right))
        else:
            return left


def _parse_factor(ts: _Stream) -> Expr:
    base = _parse_primary(ts)
    tok = ts.peek()
    if tok and tok[1] == "^":
        ts.next()
        exp = _parse_exponent(ts)
        return _apply_power(base, exp, ts)
    return base


def _parse_exponent(ts: _Stream) -> Fraction:
    tok = ts.peek()
    if tok and tok[1] == "(":
        ts.next()
        val = _parse_rational(ts)
        ts.expect(")")
        return val
    return _parse_rational(ts)


def _bracket_axes(e: Expr) -> frozenset[int] | None:
    """Recognize 1 + sum of squared frequency variables."""
    if not isinstance(e, Add):
        return None
    axes = set()
    ones = 0
    for t in e.terms:
        if isinstance(t, Const) and t.value == 1:
            ones += 1
        elif isinstance(t, IntPow) and t.power == 2 and isinstance(t.base, FreqVar):
            axes.add(t.base.axis)
        else:
            return None
    if ones != 1 or not axes:
        return None
    return frozenset(axes)


def _apply_power(base: Expr, exp: Fraction, ts: _Stream) -> Expr:
    axes = _bracket_axes(base)
    if axes is not None:
        return Bracket(axes, 2 * exp)
    if exp.denominator == 1:
        return IntPow(base, int(exp))
    raise ParseError(
        "fractional powers apply only to bracket bases (1 + xi_i^2 + ...)", ts.lineno
    )


def _parse_primary(ts: _Stream) -> Expr:
    tok = ts.next()
    kind, text, col = tok
    if text == "-":
        return Neg(_parse_primary(ts))
    if kind == "num":
        val = float(text)
        return Const(int(val) if val.is_integer() else val)
    if text == "(":
        inner = _parse_expr(ts)
        ts.expect(")")
        return inner
    if kind == "ident":
        if text in ("sin", "cos"):
            ts.expect("(")
            var = ts.next()
            m = re.fullmatch(r"x(\d+)", var[1])
            if not m:
                raise ParseError("sin/cos take a space variable x<i>", ts.lineno, var[2])
            ts.expect(")")
            return Sin(int(m.group(1))) if text == "sin" else Cos(int(m.group(1)))
        m = re.fullmatch(r"xi(\d+)", text)
        if m:
            return FreqVar(int(m.group(1)))
        m = re.fullmatch(r"x(\d+)", text)
        if m:
            return SpaceVar(int(m.group(1)))
    raise ParseError(f"unexpected token {text!r} in expression", ts.lineno, col)


# ---------------------------------------------------------------------------
# atoms, words, definitions


@dataclass(frozen=True)
class _AtomSpec:
    kind: str  # "op", "bd", "cob"
    manifold: Stratum | None = None
    expr: Expr | None = None
    order: Fraction | None = None
    k: int | None = None


def _parse_atom(ts: _Stream) -> _AtomSpec:
    tok = ts.next()
    kind, text, col = tok
    if text == "Op":
        ts.expect("[")
        mtok = ts.next()
        if mtok[1] not in _MANIFOLDS:
            raise ParseError(f"unknown manifold {mtok[1]!r}", ts.lineno, mtok[2])
        ts.expect("]")
        ts.expect("{")
        expr = _parse_expr(ts)
        ts.expect(",")
        order = _parse_rational(ts)
        ts.expect("}")
        return _AtomSpec(kind="op", manifold=_MANIFOLDS[mtok[1]], expr=expr, order=order)
    m = re.fullmatch(r"(bd|cob)([12])", text)
    if m:
        return _AtomSpec(kind=m.group(1), k=int(m.group(2)))
    raise ParseError(f"expected an atom, got {text!r}", ts.lineno, col)


def _parse_definition(ts: _Stream, name: str, cfg: ConfigTriple, orders) -> Definition:
    words_specs: list[list[_AtomSpec]] = [[_parse_atom(ts)]]
    override = None
    while not ts.done():
        tok = ts.next()
        if tok[1] == ";":
            words_specs[-1].append(_parse_atom(ts))
        elif tok[1] == "+":
            words_specs.append([_parse_atom(ts)])
        elif tok[1] == "@":
            key = ts.next()
            if key[1] != "order":
                raise ParseError("expected @order", ts.lineno, key[2])
            override = _parse_rational(ts)
            if not ts.done():
                extra = ts.next()
                raise ParseError(f"trailing {extra[1]!r}", ts.lineno, extra[2])
            break
        else:
            raise ParseError(f"unexpected {tok[1]!r} in definition", ts.lineno, tok[2])
    words = []
    domains = set()
    for spec_list in words_specs:
        atoms = []
        for spec in spec_list:
            try:
                if spec.kind == "op":
                    atoms.append(psido(cfg, spec.manifold, spec.expr, spec.order))
                elif spec.kind == "bd":
                    atoms.append(Boundary(spec.k))
                else:
                    atoms.append(Coboundary(spec.k))
            except StrataError as exc:
                raise ValidationError(f"in {name!r}: {exc}") from exc
        from .algebra import atom_domain

        dom = atom_domain(atoms[-1])
        domains.add(dom)
        s = override if override is not None else orders[_INDEX[dom]]
        w = Word(atoms=tuple(atoms), domain_order=Fraction(s))
        try:
            validate_word(w, cfg)
        except StrataError as exc:
            raise ValidationError(f"in {name!r}: {exc}") from exc
        words.append(w)
    if override is not None and len(domains) > 1:
        raise ValidationError(
            f"in {name!r}: @order needs a single domain manifold, got {len(domains)}"
        )
    return Definition(name=name, words=tuple(words), order_override=override)


# ---------------------------------------------------------------------------
# config and command lines


def _parse_config(fields: list[str], lineno: int):
    vals = {}
    for field in fields:
        if "=" not in field:
            raise ParseError(f"config expects key=value, got {field!r}", lineno)
        key, _, raw = field.partition("=")
        vals[key] = raw
    try:
        n = int(vals.pop("n"))
        s1 = _parse_axis_set(vals.pop("S1"), lineno)
        s2 = _parse_axis_set(vals.pop("S2"), lineno)
    except KeyError as exc:
        raise ParseError(f"config misses {exc.args[0]}", lineno) from None
    transversal = vals.pop("transversal", "true").lower() == "true"
    orders_raw = vals.pop("orders", "(0,0,0)")
    m = re.fullmatch(r"\(([^)]*)\)", orders_raw)
    if not m:
        raise ParseError("orders must look like (s0,s1,s2)", lineno)
    parts = [p for p in m.group(1).split(",") if p]
    if len(parts) != 3:
        raise ParseError("orders needs three entries", lineno)
    orders = tuple(Fraction(p) for p in parts)
    if vals:
        raise ParseError(f"unknown config keys {sorted(vals)}", lineno)
    try:
        cfg = derive_config(n, s1, s2, transversal)
    except StrataError as exc:
        raise ValidationError(str(exc)) from exc
    return cfg, orders


def _parse_axis_set(raw: str, lineno: int) -> frozenset[int]:
    m = re.fullmatch(r"\{([^}]*)\}", raw)
    if not m:
        raise ParseError(f"axis set must look like {{1,2}}, got {raw!r}", lineno)
    return frozenset(int(p) for p in m.group(1).split(",") if p)


def _parse_command(fields: list[str], lineno: int) -> Command:
    kind = fields[0]
    rest = fields[1:]
    target = None
    if rest and "=" not in rest[0]:
        target = rest[0]
        rest = rest[1:]
    if target is None:
        raise ParseError(f"{kind} needs a target", lineno)
    options = []
    for field in rest:
        if "=" not in field:
            raise ParseError(f"expected key=value, got {field!r}", lineno)
        key, _, value = field.partition("=")
        options.append((key, value))
    return Command(kind=kind, target=target, options=tuple(options))


# ---------------------------------------------------------------------------
# program parse / print


def parse_dsl(text: str) -> DslProgram:
    cfg = None
    orders = None
    definitions: list[Definition] = []
    names = set()
    commands: list[Command] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        fields = line.split()
        head = fields[0]
        if head == "config":
            if cfg is not None:
                raise ParseError("duplicate config line", lineno)
            cfg, orders = _parse_config(fields[1:], lineno)
        elif head in _COMMANDS:
            commands.append(_parse_command(fields, lineno))
        else:
            tokens = _tokenize(line, lineno)
            ts = _Stream(tokens, lineno)
            name_tok = ts.next()
            if name_tok[0] != "ident":
                raise ParseError(f"expected a name, got {name_tok[1]!r}", lineno, name_tok[2])
            ts.expect("=")
            if cfg is None:
                raise ParseError("config line must precede definitions", lineno)
            if name_tok[1] in names:
                raise ParseError(f"duplicate definition {name_tok[1]!r}", lineno)
            names.add(name_tok[1])
            definitions.append(_parse_definition(ts, name_tok[1], cfg, orders))
    if cfg is None:
        raise ParseError("program has no config line", 1)
    for cmd in commands:
        if cmd.kind != "verify" and cmd.target not in names:
            raise ValidationError(f"command references unknown morphism {cmd.target!r}")
    return DslProgram(
        cfg=cfg, orders=orders, definitions=tuple(definitions), commands=tuple(commands)
    )


def frac_text(f: Fraction) -> str:
    return str(f)


def expr_text(e: Expr, prec: int = 0) -> str:
    # prec levels: 0 sum, 1 product, 2 power operand
    match e:
        case Const(value=v):
            if v.imag == 0:
                r = v.real
                s = str(int(r)) if r == int(r) else repr(r)
            else:
                s = f"({v.real}+{v.imag}j)"
            return s if prec < 2 or not s.startswith("-") else f"({s})"
        case SpaceVar(axis=a):
            return f"x{a}"
        case FreqVar(axis=a):
            return f"xi{a}"
        case Sin(axis=a):
            return f"sin(x{a})"
        case Cos(axis=a):
            return f"cos(x{a})"
        case Add(terms=ts):
            parts = []
            for i, t in enumerate(ts):
                if isinstance(t, Neg) and i > 0:
                    parts.append(f"- {expr_text(t.arg, 1)}")
                elif i > 0:
                    parts.append(f"+ {expr_text(t, 1)}")
                else:
                    parts.append(expr_text(t, 1))
            s = " ".join(parts)
            return f"({s})" if prec >= 1 else s
        case Mul(factors=fs):
            s = "*".join(expr_text(f, 2) for f in fs)
            return f"({s})" if prec >= 2 else s
        case Neg(arg=a):
            return f"-{expr_text(a, 2)}"
        case IntPow(base=b, power=p):
            ptxt = str(p) if p >= 0 else f"({p})"
            return f"{expr_text(b, 2)}^{ptxt}"
        case Bracket(axes=ax, exponent=ex):
            inner = " + ".join(["1"] + [f"xi{a}^2" for a in sorted(ax)])
            half = ex / 2
            if half.denominator == 1 and half >= 0:
                ptxt = str(half)
            else:
                ptxt = f"({half})"
            return f"({inner})^{ptxt}"
        case _:
            raise ValueError(f"cannot print {e!r}")


def _atom_text(atom) -> str:
    if isinstance(atom, PsiDO):
        return (
            f"Op[{atom.home.value}]{{{expr_text(atom.symbol.expr)}, {frac_text(atom.order)}}}"
        )
    if isinstance(atom, Boundary):
        return f"bd{atom.k}"
    return f"cob{atom.k}"


def word_text(w: Word) -> str:
    return " ; ".join(_atom_text(a) for a in w.atoms)


def print_dsl(p: DslProgram) -> str:
    lines = []
    s1 = ",".join(str(a) for a in sorted(p.cfg.S1))
    s2 = ",".join(str(a) for a in sorted(p.cfg.S2))
    orders = ",".join(frac_text(o) for o in p.orders)
    lines.append(
        f"config n={p.cfg.n} S1={{{s1}}} S2={{{s2}}} "
        f"transversal={'true' if p.cfg.transversal else 'false'} orders=({orders})"
    )
    for d in p.definitions:
        body = " + ".join(word_text(w) for w in d.words)
        if d.order_override is not None:
            body += f" @order {frac_text(d.order_override)}"
        lines.append(f"{d.name} = {body}")
    for c in p.commands:
        parts = [c.kind]
        if c.target is not None:
            parts.append(c.target)
        parts.extend(f"{k}={v}" for k, v in c.options)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
