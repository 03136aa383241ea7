"""Words of generator atoms, Sobolev bookkeeping, the 18-type classification,
the 3x3 block normal form, composition, and trace fusion.

A word is a finite composition of atoms read right to left: the last atom
of the tuple is applied first.  Validity means the manifolds chain and the
running Sobolev order satisfies every atom's precondition: a boundary
restriction needs order > nu_k/2 on the ambient space, a coboundary
extension needs negative order on the submanifold.  Orders are exact
rationals so these strict inequalities never hinge on float rounding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import ChainMismatch, NotFusible, OrderViolation
from .geometry import ConfigTriple, Stratum, contains, meet_all
from .symexpr import (
    Add,
    Bracket,
    Const,
    Mul,
    Neg,
    SymbolExpr,
    freq_axes,
    simplify,
    space_axes,
    symbol,
)

# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class PsiDO:
    home: Stratum
    symbol: SymbolExpr
    order: Fraction

    def __post_init__(self):
        object.__setattr__(self, "order", Fraction(self.order))
        if self.home is Stratum.X12:
            raise ChainMismatch("psdo atoms live on X0, X1 or X2")
        if self.symbol.home is not self.home:
            raise ChainMismatch(
                f"symbol declared on {self.symbol.home.value}, atom on {self.home.value}"
            )


@dataclass(frozen=True)
class Boundary:
    k: int

    def __post_init__(self):
        if self.k not in (1, 2):
            raise ChainMismatch("boundary index must be 1 or 2")


@dataclass(frozen=True)
class Coboundary:
    k: int

    def __post_init__(self):
        if self.k not in (1, 2):
            raise ChainMismatch("coboundary index must be 1 or 2")


Atom = Union[PsiDO, Boundary, Coboundary]


def psido(cfg: ConfigTriple, home: Stratum, expr, order) -> PsiDO:
    """Build a psdo atom, validating the symbol against the home manifold."""
    return PsiDO(home=home, symbol=symbol(cfg, home, expr, order), order=Fraction(order))


def order_reduction_atom(cfg: ConfigTriple, home: Stratum, order) -> PsiDO:
    """Invertible bracket-symbol psdo of the given order (an order reduction)."""
    order = Fraction(order)
    expr = Bracket(frozenset(cfg.axes(home)), order)
    return psido(cfg, home, expr, order)


def atom_domain(a: Atom) -> Stratum:
    if isinstance(a, PsiDO):
        return a.home
    if isinstance(a, Boundary):
        return Stratum.X0
    return Stratum.X1 if a.k == 1 else Stratum.X2


def atom_codomain(a: Atom) -> Stratum:
    if isinstance(a, PsiDO):
        return a.home
    if isinstance(a, Coboundary):
        return Stratum.X0
    return Stratum.X1 if a.k == 1 else Stratum.X2


def atom_order(a: Atom, cfg: ConfigTriple) -> Fraction:
    if isinstance(a, PsiDO):
        return a.order
    return Fraction(cfg.nu(a.k), 2)


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    atoms: tuple[Atom, ...]
    domain_order: Fraction

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "domain_order", Fraction(self.domain_order))
        if not self.atoms:
            raise ChainMismatch("a word needs at least one atom")

    def __len__(self):
        return len(self.atoms)

    @property
    def domain(self) -> Stratum:
        return atom_domain(self.atoms[-1])

    @property
    def codomain(self) -> Stratum:
        return atom_codomain(self.atoms[0])


SobolevChain = tuple  # of Fractions, domain order first


def validate_word(w: Word, cfg: ConfigTriple) -> SobolevChain:
    """Walk the word in application order; return the Sobolev orders visited.

    chain[0] is the domain order, chain[-1] the codomain order, so the
    word's total order is chain[0] - chain[-1].
    """
    s = w.domain_order
    manifold = w.domain
    chain = [s]
    for a in reversed(w.atoms):
        if atom_domain(a) is not manifold:
            raise ChainMismatch(
                f"atom {a} expects input on {atom_domain(a).value}, chain is on {manifold.value}"
            )
        if isinstance(a, PsiDO):
            if a.symbol.axes != cfg.axes(a.home):
                raise ChainMismatch("psdo symbol axes do not match the configuration")
        elif isinstance(a, Boundary):
            half = Fraction(cfg.nu(a.k), 2)
            if not s > half:
                raise OrderViolation(
                    f"boundary bd{a.k} needs order > {half}, chain has {s}"
                )
        else:
            if not s < 0:
                raise OrderViolation(
                    f"coboundary cob{a.k} needs negative order, chain has {s}"
                )
        s = s - atom_order(a, cfg)
        manifold = atom_codomain(a)
        chain.append(s)
    return tuple(chain)


def word_order(w: Word, cfg: ConfigTriple) -> Fraction:
    return sum((atom_order(a, cfg) for a in w.atoms), Fraction(0))


def codomain_order(w: Word, cfg: ConfigTriple) -> Fraction:
    return w.domain_order - word_order(w, cfg)


def localization_stratum(w: Word) -> Stratum:
    """Meet of every manifold the word touches."""
    touched = []
    for a in w.atoms:
        touched.append(atom_domain(a))
        touched.append(atom_codomain(a))
    return meet_all(touched)


def concat(w1: Word, w2: Word, cfg: ConfigTriple) -> Word:
    """Composition w1 after w2."""
    if w1.domain is not w2.codomain:
        raise ChainMismatch(
            f"cannot chain: w1 starts on {w1.domain.value}, w2 ends on {w2.codomain.value}"
        )
    if w1.domain_order != codomain_order(w2, cfg):
        raise OrderViolation(
            f"w1 expects order {w1.domain_order}, w2 delivers {codomain_order(w2, cfg)}"
        )
    out = Word(atoms=w1.atoms + w2.atoms, domain_order=w2.domain_order)
    validate_word(out, cfg)
    return out


# ---------------------------------------------------------------------------
# the 18 generator types


class GeneratorType(Enum):
    D0 = "D0"
    D1 = "D1"
    D2 = "D2"
    B1 = "B1"
    B2 = "B2"
    C1 = "C1"
    C2 = "C2"
    G1 = "G1"
    G2 = "G2"
    M0 = "M0"
    M1 = "M1"
    M2 = "M2"
    T12 = "T12"
    T21 = "T21"
    B1P = "B1'"
    B2P = "B2'"
    C1P = "C1'"
    C2P = "C2'"

    @property
    def label(self) -> str:
        return self.value

    @property
    def cell(self) -> tuple[int, int]:
        return _TYPE_CELL[self]

    @property
    def stratum(self) -> Stratum:
        return _TYPE_STRATUM[self]


_MANIFOLD_INDEX = {Stratum.X0: 0, Stratum.X1: 1, Stratum.X2: 2}
_INDEX_MANIFOLD = {0: Stratum.X0, 1: Stratum.X1, 2: Stratum.X2}

# (codomain index, domain index, localization stratum) -> type
_TYPE_TABLE = {
    (0, 0, Stratum.X0): GeneratorType.D0,
    (0, 0, Stratum.X1): GeneratorType.G1,
    (0, 0, Stratum.X2): GeneratorType.G2,
    (0, 0, Stratum.X12): GeneratorType.M0,
    (1, 0, Stratum.X1): GeneratorType.B1,
    (1, 0, Stratum.X12): GeneratorType.B1P,
    (2, 0, Stratum.X2): GeneratorType.B2,
    (2, 0, Stratum.X12): GeneratorType.B2P,
    (0, 1, Stratum.X1): GeneratorType.C1,
    (0, 1, Stratum.X12): GeneratorType.C1P,
    (0, 2, Stratum.X2): GeneratorType.C2,
    (0, 2, Stratum.X12): GeneratorType.C2P,
    (1, 1, Stratum.X1): GeneratorType.D1,
    (1, 1, Stratum.X12): GeneratorType.M1,
    (2, 2, Stratum.X2): GeneratorType.D2,
    (2, 2, Stratum.X12): GeneratorType.M2,
    (1, 2, Stratum.X12): GeneratorType.T12,
    (2, 1, Stratum.X12): GeneratorType.T21,
}
_TYPE_CELL = {t: (k, l) for (k, l, _), t in _TYPE_TABLE.items()}
_TYPE_STRATUM = {t: z for (_, _, z), t in _TYPE_TABLE.items()}

assert len(_TYPE_TABLE) == 18 and len(_TYPE_CELL) == 18


def generator_type(w: Word) -> GeneratorType:
    """Classify a valid word by (codomain, domain, localization stratum)."""
    key = (
        _MANIFOLD_INDEX[w.codomain],
        _MANIFOLD_INDEX[w.domain],
        localization_stratum(w),
    )
    return _TYPE_TABLE[key]


# ---------------------------------------------------------------------------
# the 3x3 block normal form


@dataclass(frozen=True)
class Entry:
    gtype: GeneratorType
    word: Word


@dataclass(frozen=True)
class MorMatrix:
    """A morphism as a 3x3 array of typed words plus its Sobolev spaces.

    Cell (k, l) maps H^{domain_orders[l]}(X_l) -> H^{codomain_orders[k]}(X_k).
    """

    cfg: ConfigTriple
    cells: tuple  # 3x3 nested tuples of Entry
    domain_orders: tuple
    codomain_orders: tuple

    def entries(self, k: int, l: int) -> tuple[Entry, ...]:
        return self.cells[k][l]

    def all_entries(self) -> list[tuple[int, int, Entry]]:
        return [
            (k, l, e) for k in range(3) for l in range(3) for e in self.cells[k][l]
        ]

    @property
    def total_order(self):
        diffs = {self.domain_orders[i] - self.codomain_orders[i] for i in range(3)}
        return diffs.pop() if len(diffs) == 1 else None

    def is_zero(self) -> bool:
        return not self.all_entries()


def assemble_matrix(
    words: Sequence[Word],
    cfg: ConfigTriple,
    domain_orders: Sequence | None = None,
    codomain_orders: Sequence | None = None,
) -> MorMatrix:
    """Place words into their (codomain, domain) cells and classify them.

    Space orders are taken from the arguments when given, otherwise
    inferred from the words; unused slots default to order 0.  Conflicting
    endpoint orders inside a row or column raise OrderViolation.
    """
    dom = [None if domain_orders is None else Fraction(domain_orders[i]) for i in range(3)]
    cod = [None if codomain_orders is None else Fraction(codomain_orders[i]) for i in range(3)]
    cells = [[[] for _ in range(3)] for _ in range(3)]
    for w in words:
        validate_word(w, cfg)
        k = _MANIFOLD_INDEX[w.codomain]
        l = _MANIFOLD_INDEX[w.domain]
        s_in, s_out = w.domain_order, codomain_order(w, cfg)
        if dom[l] is None:
            dom[l] = s_in
        elif dom[l] != s_in:
            raise OrderViolation(
                f"domain order on X{l} disagrees: {dom[l]} vs {s_in}"
            )
        if cod[k] is None:
            cod[k] = s_out
        elif cod[k] != s_out:
            raise OrderViolation(
                f"codomain order on X{k} disagrees: {cod[k]} vs {s_out}"
            )
        cells[k][l].append(Entry(gtype=generator_type(w), word=w))
    dom = [Fraction(0) if s is None else s for s in dom]
    cod = [Fraction(0) if s is None else s for s in cod]
    return MorMatrix(
        cfg=cfg,
        cells=tuple(tuple(tuple(cell) for cell in row) for row in cells),
        domain_orders=tuple(dom),
        codomain_orders=tuple(cod),
    )


def identity_matrix(cfg: ConfigTriple, orders: Sequence = (0, 0, 0)) -> MorMatrix:
    words = [
        Word(
            atoms=(psido(cfg, _INDEX_MANIFOLD[i], Const(1), 0),),
            domain_order=Fraction(orders[i]),
        )
        for i in range(3)
    ]
    return assemble_matrix(words, cfg, domain_orders=orders, codomain_orders=orders)


def compose(m1: MorMatrix, m2: MorMatrix) -> MorMatrix:
    """Block-matrix product; every product word is re-classified."""
    if m1.cfg != m2.cfg:
        raise OrderViolation("morphisms live over different configurations")
    if m1.domain_orders != m2.codomain_orders:
        raise OrderViolation(
            f"space mismatch: middle spaces {m2.codomain_orders} vs {m1.domain_orders}"
        )
    cfg = m1.cfg
    words = []
    for k in range(3):
        for l in range(3):
            for j in range(3):
                for e1 in m1.entries(k, j):
                    for e2 in m2.entries(j, l):
                        words.append(concat(e1.word, e2.word, cfg))
    return assemble_matrix(
        words, cfg, domain_orders=m2.domain_orders, codomain_orders=m1.codomain_orders
    )


def l2_normalize(m: MorMatrix) -> MorMatrix:
    """Conjugate with order reductions so every space becomes L^2.

    Realizes the usual reduction trick: an invertible bracket psdo of
    order s maps H^s onto L^2, so wrapping each word appropriately gives
    an equivalent morphism acting between plain L^2 spaces.
    """
    cfg = m.cfg
    words = []
    for k, l, e in m.all_entries():
        w = e.word
        s_in = m.domain_orders[l]
        s_out = m.codomain_orders[k]
        pre = order_reduction_atom(cfg, w.domain, -s_in)
        post = order_reduction_atom(cfg, w.codomain, s_out)
        words.append(Word(atoms=(post,) + w.atoms + (pre,), domain_order=Fraction(0)))
    return assemble_matrix(words, cfg, domain_orders=(0, 0, 0), codomain_orders=(0, 0, 0))


# ---------------------------------------------------------------------------
# trace fusion: bd_k . Op(a) . cob_k  ->  psdo on X_k


def _gamma_ratio(e: Fraction, nu: int) -> float:
    # integral over R^nu of (1 + |eta|^2)^(e/2), finite iff e < -nu
    return math.pi ** (nu / 2) * math.gamma(-(float(e) + nu) / 2) / math.gamma(-float(e) / 2)


def _terms_of(e) -> list:
    e = simplify(e)
    if isinstance(e, Add):
        return list(e.terms)
    return [e]


def _factors_of(e) -> tuple[complex, list]:
    sign = 1 + 0j
    while isinstance(e, Neg):
        sign = -sign
        e = e.arg
    if isinstance(e, Mul):
        factors = []
        for f in e.factors:
            s, fs = _factors_of(f)
            sign *= s
            factors.extend(fs)
        return sign, factors
    if isinstance(e, Const):
        return sign * e.value, []
    return sign, [e]


def _integrate_conormal(expr, eta_axes: frozenset[int], nu: int):
    """(2 pi)^-nu times the integral over the conormal frequencies.

    Supported form: linear combinations of products in which the eta
    dependence sits in exactly one bracket containing every eta axis.
    """
    out_terms = []
    for term in _terms_of(expr):
        coeff, factors = _factors_of(term)
        touching = [f for f in factors if freq_axes(f) & eta_axes]
        rest = [f for f in factors if not (freq_axes(f) & eta_axes)]
        if len(touching) != 1 or not isinstance(touching[0], Bracket):
            raise NotFusible(
                "symbol must carry its conormal frequencies in a single bracket factor"
            )
        br = touching[0]
        if not eta_axes.issubset(br.axes):
            raise NotFusible("bracket must contain every conormal frequency axis")
        if not br.exponent < -nu:
            raise NotFusible(
                f"bracket exponent {br.exponent} is not integrable over {nu} conormal axes"
            )
        const = coeff * _gamma_ratio(br.exponent, nu) / (2 * math.pi) ** nu
        remaining = frozenset(br.axes - eta_axes)
        pieces = [Const(const)]
        if remaining:
            pieces.append(Bracket(remaining, br.exponent + nu))
        pieces.extend(rest)
        out_terms.append(simplify(Mul(tuple(pieces))))
    return simplify(Add(tuple(out_terms)))


def fuse_trace(w: Word, cfg: ConfigTriple) -> Word:
    """Rewrite the first bd_k . psdo(X0) . cob_k run as a psdo on X_k.

    The ambient symbol must be independent of the conormal position
    variables and integrable in the conormal frequencies; the fused
    symbol is the normalized conormal frequency integral and the fused
    order is m + nu_k.
    """
    validate_word(w, cfg)
    atoms = w.atoms
    for i in range(len(atoms) - 2):
        a, b, c = atoms[i], atoms[i + 1], atoms[i + 2]
        if not (isinstance(a, Boundary) and isinstance(b, PsiDO) and isinstance(c, Coboundary)):
            continue
        if a.k != c.k or b.home is not Stratum.X0:
            continue
        k = a.k
        nu = cfg.nu(k)
        if not b.order < -nu:
            raise NotFusible(
                f"psdo order {b.order} must lie below the integrability threshold {-nu}"
            )
        y_axes = frozenset(cfg.conormal_axes(cfg.submanifold(k)))
        if space_axes(b.symbol.expr) & y_axes:
            raise NotFusible("symbol depends on the conormal position variables")
        fused_expr = _integrate_conormal(b.symbol.expr, y_axes, nu)
        fused = psido(cfg, cfg.submanifold(k), fused_expr, b.order + nu)
        new_atoms = atoms[:i] + (fused,) + atoms[i + 3 :]
        out = Word(atoms=new_atoms, domain_order=w.domain_order)
        validate_word(out, cfg)
        return out
    raise NotFusible("no boundary . psdo . coboundary pattern present")


# ---------------------------------------------------------------------------
# generator census


@dataclass(frozen=True)
class CensusRecord:
    gtype: GeneratorType
    cell: tuple[int, int]
    stratum: Stratum
    min_length: int
    count: int
    example: Word


_KINDS = (
    ("p", Stratum.X0),
    ("p", Stratum.X1),
    ("p", Stratum.X2),
    ("b", 1),
    ("b", 2),
    ("c", 1),
    ("c", 2),
)


def _kind_domain(kind) -> Stratum:
    tag, arg = kind
    if tag == "p":
        return arg
    if tag == "b":
        return Stratum.X0
    return Stratum.X1 if arg == 1 else Stratum.X2


def _kind_codomain(kind) -> Stratum:
    tag, arg = kind
    if tag == "p":
        return arg
    if tag == "c":
        return Stratum.X0
    return Stratum.X1 if arg == 1 else Stratum.X2


def realize_pattern(kinds: Sequence, cfg: ConfigTriple) -> Word:
    """Turn a chaining atom-kind pattern into a valid word.

    Pattern psdos get order 0 and unit symbol.  Where a boundary or
    coboundary precondition would fail, an order reduction psdo is
    inserted on the current manifold; this realizes the same generator
    class, so classification is unaffected by the insertions.
    """
    atoms_applied: list[Atom] = []
    first = kinds[-1]
    tag, arg = first
    if tag == "p":
        s = Fraction(0)
    elif tag == "b":
        s = Fraction(cfg.nu(arg), 2) + 1
    else:
        s = Fraction(-1)
    domain_order = s
    manifold = _kind_domain(first)
    for kind in reversed(kinds):
        tag, arg = kind
        if _kind_domain(kind) is not manifold:
            raise ChainMismatch("pattern does not chain")
        if tag == "b":
            half = Fraction(cfg.nu(arg), 2)
            if not s > half:
                target = half + 1
                atoms_applied.append(order_reduction_atom(cfg, manifold, s - target))
                s = target
            atoms_applied.append(Boundary(arg))
            s -= half
        elif tag == "c":
            if not s < 0:
                atoms_applied.append(order_reduction_atom(cfg, manifold, s + 1))
                s = Fraction(-1)
            atoms_applied.append(Coboundary(arg))
            s -= Fraction(cfg.nu(arg), 2)
        else:
            atoms_applied.append(psido(cfg, arg, Const(1), 0))
        manifold = _kind_codomain(kind)
    w = Word(atoms=tuple(reversed(atoms_applied)), domain_order=domain_order)
    validate_word(w, cfg)
    return w


def enumerate_patterns(max_len: int):
    """All chaining atom-kind sequences up to the given length."""
    for length in range(1, max_len + 1):
        for seq in itertools.product(_KINDS, repeat=length):
            if all(
                _kind_domain(seq[i]) is _kind_codomain(seq[i + 1])
                for i in range(length - 1)
            ):
                yield seq


def generator_census(cfg: ConfigTriple, max_len: int = 5) -> dict:
    """Classify every realizable pattern up to max_len atoms.

    Returns a mapping GeneratorType -> CensusRecord.  Over any valid
    configuration this hits exactly the 18 types, each in its prescribed
    cell of the block normal form.
    """
    records: dict[GeneratorType, dict] = {}
    for seq in enumerate_patterns(max_len):
        w = realize_pattern(seq, cfg)
        t = generator_type(w)
        cell = (_MANIFOLD_INDEX[w.codomain], _MANIFOLD_INDEX[w.domain])
        if t.cell != cell or not contains(localization_stratum(w), t.stratum):
            raise AssertionError(f"classification table violated by {seq}")
        rec = records.get(t)
        if rec is None:
            records[t] = {"min_length": len(seq), "count": 1, "example": w}
        else:
            rec["count"] += 1
            if len(seq) < rec["min_length"]:
                rec["min_length"] = len(seq)
                rec["example"] = w
    return {
        t: CensusRecord(
            gtype=t,
            cell=t.cell,
            stratum=t.stratum,
            min_length=r["min_length"],
            count=r["count"],
            example=r["example"],
        )
        for t, r in records.items()
    }
