"""Operator-valued symbols on the four strata as finite matrices.

At a cotangent point (z, zeta) of a stratum Z the symbol of a psdo is the
coefficient-frozen Fourier multiplier in the conormal frequencies; the
boundary symbol restricts the conormal model grid to its origin slice and
the coboundary symbol is its measure-weighted adjoint, a discrete delta
column.  Word symbols multiply in composition order, block symbols stack
cells in the layout dictated by the stratum, and the composition formula
sigma(D1 D2) = sigma(D1) sigma(D2) is then plain matrix multiplication.

Model spaces are periodic grids with M points per conormal axis (integer
frequency lattice in fft order); acceptance statements about H(R^nu) are
phrased as M-convergence.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import (
    Boundary,
    Coboundary,
    MorMatrix,
    PsiDO,
    Word,
    localization_stratum,
)
from .errors import ShapeMismatch, StratumMismatch
from .geometry import ConfigTriple, Stratum, contains
from .grids import TWO_PI, TorusGrid
from .symexpr import eval_on, freeze_expr


@dataclass(frozen=True)
class SymbolPoint:
    """A stratum together with a tangential cotangent point and the model
    grid resolution.  z and zeta are ordered by the sorted stratum axes;
    zeta = 0 is tolerated (convergence studies need it) although the
    cotangent point of the calculus proper has zeta != 0."""

    stratum: Stratum
    z: tuple[float, ...]
    zeta: tuple[float, ...]
    m: int
    period: float = TWO_PI
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        object.__setattr__(self, "zeta", tuple(float(v) for v in self.zeta))


@dataclass(frozen=True)
class ProductSpace:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def size(self) -> int:
        return sum(p.size for p in self.parts)


@dataclass(frozen=True, eq=False)
class OperatorSymbol:
    """Dense complex matrix in the position basis of the model grids."""

    dom: object  # TorusGrid or ProductSpace
    cod: object
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (self.cod.size, self.dom.size):
            raise ShapeMismatch(
                f"matrix shape {mat.shape} != ({self.cod.size}, {self.dom.size})"
            )
        object.__setattr__(self, "mat", mat)


def model_space(cfg: ConfigTriple, pt: SymbolPoint, manifold: Stratum) -> TorusGrid:
    """Grid over the axes of ``manifold`` conormal to the stratum; the
    zero-dimensional case is the scalar space C."""
    if not contains(manifold, pt.stratum):
        raise StratumMismatch(
            f"{pt.stratum.value} is not contained in {manifold.value}"
        )
    axes = cfg.conormal_axes(pt.stratum, within=manifold)
    return TorusGrid(axes=axes, n=pt.m, period=pt.period, offset=pt.offset)


def _point_maps(cfg: ConfigTriple, pt: SymbolPoint) -> tuple[dict, dict]:
    z_axes = cfg.axes(pt.stratum)
    if len(pt.z) != len(z_axes) or len(pt.zeta) != len(z_axes):
        raise StratumMismatch(
            f"point needs {len(z_axes)} tangential components, got {len(pt.z)}/{len(pt.zeta)}"
        )
    return dict(zip(z_axes, pt.z)), dict(zip(z_axes, pt.zeta))


@lru_cache(maxsize=64)
def _cached_freq_mesh(grid: TorusGrid):
    return grid.freq_mesh()


def _psdo_multiplier(atom: PsiDO, pt: SymbolPoint, cfg: ConfigTriple):
    """Frozen symbol as a multiplier on the conormal model grid of the home
    manifold (a plain number when the home equals the stratum)."""
    grid = model_space(cfg, pt, atom.home)
    pos, freq = _point_maps(cfg, pt)
    frozen = freeze_expr(atom.symbol, cfg, pt.stratum)
    fmesh = _cached_freq_mesh(grid)
    vals = eval_on(frozen, pos, {**freq, **fmesh})
    vals = np.asarray(vals, dtype=complex)
    return grid, np.broadcast_to(vals, grid.shape)


@lru_cache(maxsize=32)
def _circulant_indices(dim: int, n: int):
    multis = np.indices((n,) * dim).reshape(dim, -1)
    return tuple((row[:, None] - row[None, :]) % n for row in multis)


def _circulant(grid: TorusGrid, vec: np.ndarray) -> np.ndarray:
    """Position-basis matrix of a frequency multiplier.

    With the normalized transform the kernel is the inverse fft of the
    multiplier and the matrix is circulant in each axis.
    """
    if grid.dim == 0:
        return np.asarray(vec, dtype=complex).reshape(1, 1)
    kernel = np.fft.ifftn(np.asarray(vec, dtype=complex))
    return kernel[_circulant_indices(grid.dim, grid.n)]


def _restriction_block(big: TorusGrid, small: TorusGrid) -> np.ndarray:
    """Selector matrix picking the origin slice of the dropped axes."""
    mat = np.zeros((small.size, big.size), dtype=complex)
    zi = big.zero_index if big.dim else 0
    if small.dim == 0:
        flat = np.ravel_multi_index(tuple([zi] * big.dim), big.shape) if big.dim else 0
        mat[0, flat] = 1.0
        return mat
    small_multis = np.indices(small.shape).reshape(small.dim, -1)
    rows = []
    for a in big.axes:
        if a in small.axes:
            rows.append(small_multis[small.axes.index(a)])
        else:
            rows.append(np.full(small.size, zi, dtype=int))
    flat = np.ravel_multi_index(tuple(rows), big.shape)
    mat[np.arange(small.size), flat] = 1.0
    return mat


def atom_symbol(atom, pt: SymbolPoint, cfg: ConfigTriple) -> OperatorSymbol:
    """Symbol of a single atom at a cotangent point of a stratum."""
    if isinstance(atom, PsiDO):
        grid, vec = _psdo_multiplier(atom, pt, cfg)
        return OperatorSymbol(dom=grid, cod=grid, mat=_circulant(grid, vec))
    sub = Stratum.X1 if atom.k == 1 else Stratum.X2
    if not contains(sub, pt.stratum):
        kind = "boundary" if isinstance(atom, Boundary) else "coboundary"
        raise StratumMismatch(
            f"{kind} operator for X{atom.k} has no symbol on {pt.stratum.value}"
        )
    g0 = model_space(cfg, pt, Stratum.X0)
    gk = model_space(cfg, pt, sub)
    nu = g0.dim - gk.dim
    if isinstance(atom, Boundary):
        return OperatorSymbol(dom=g0, cod=gk, mat=_restriction_block(g0, gk))
    weight = 1.0 / g0.h ** nu
    return OperatorSymbol(dom=gk, cod=g0, mat=_restriction_block(g0, gk).T * weight)


def word_symbol(w: Word, pt: SymbolPoint, cfg: ConfigTriple) -> OperatorSymbol:
    """Ordered product of atom symbols along the word.

    Runs of consecutive psdo atoms are folded multiplicatively in the
    frequency basis before densifying, so the cost is dominated by the
    thin boundary/coboundary factors.
    """
    if not contains(localization_stratum(w), pt.stratum):
        raise StratumMismatch(
            f"word is localized at {localization_stratum(w).value}, "
            f"which does not contain {pt.stratum.value}"
        )
    factors = []
    pending = None  # (grid, multiplier) for a psdo run
    for atom in w.atoms:
        if isinstance(atom, PsiDO):
            grid, vec = _psdo_multiplier(atom, pt, cfg)
            if pending is None:
                pending = (grid, vec.copy())
            else:
                pending = (pending[0], pending[1] * vec)
        else:
            if pending is not None:
                factors.append(_as_symbol(pending))
                pending = None
            factors.append(atom_symbol(atom, pt, cfg))
    if pending is not None:
        factors.append(_as_symbol(pending))
    for left, right in zip(factors, factors[1:]):
        if left.dom != right.cod:
            raise ShapeMismatch("atom symbols do not chain")
    mats = [f.mat for f in factors]
    mat = mats[0] if len(mats) == 1 else np.linalg.multi_dot(mats)
    return OperatorSymbol(dom=factors[-1].dom, cod=factors[0].cod, mat=mat)


def _as_symbol(pending) -> OperatorSymbol:
    grid, vec = pending
    return OperatorSymbol(dom=grid, cod=grid, mat=_circulant(grid, vec))


_BLOCK_MANIFOLDS = {
    Stratum.X0: (Stratum.X0,),
    Stratum.X1: (Stratum.X0, Stratum.X1),
    Stratum.X2: (Stratum.X0, Stratum.X2),
    Stratum.X12: (Stratum.X0, Stratum.X1, Stratum.X2),
}
_CELL_INDEX = {Stratum.X0: 0, Stratum.X1: 1, Stratum.X2: 2}


def morphism_symbol(m: MorMatrix, pt: SymbolPoint, cfg: ConfigTriple) -> OperatorSymbol:
    """Block symbol of a general morphism on the stratum of ``pt``.

    Exactly the words whose localization stratum contains pt.stratum
    contribute; all other cells are zero blocks.  Layouts: X0 -> 1x1
    scalar, X1/X2 -> 2x2 on (conormal grid) + C, intersection -> 3x3 on
    the nu3 grid and the two in-submanifold tangent grids.
    """
    manifolds = _BLOCK_MANIFOLDS[pt.stratum]
    parts = tuple(model_space(cfg, pt, mf) for mf in manifolds)
    sizes = [p.size for p in parts]
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    total = int(offsets[-1])
    mat = np.zeros((total, total), dtype=complex)
    for bi, mf_i in enumerate(manifolds):
        for bj, mf_j in enumerate(manifolds):
            k, l = _CELL_INDEX[mf_i], _CELL_INDEX[mf_j]
            block = None
            for entry in m.entries(k, l):
                if not contains(localization_stratum(entry.word), pt.stratum):
                    continue
                sym = word_symbol(entry.word, pt, cfg)
                block = sym.mat if block is None else block + sym.mat
            if block is not None:
                mat[offsets[bi]:offsets[bi + 1], offsets[bj]:offsets[bj + 1]] = block
    space = ProductSpace(parts)
    return OperatorSymbol(dom=space, cod=space, mat=mat)


def compose_symbols(a: OperatorSymbol, b: OperatorSymbol) -> OperatorSymbol:
    """Matrix product a . b; domains must match."""
    if a.dom != b.cod:
        raise ShapeMismatch("domain of the left symbol != codomain of the right")
    return OperatorSymbol(dom=b.dom, cod=a.cod, mat=a.mat @ b.mat)


def symbol_to_json(sym: OperatorSymbol) -> dict:
    def describe(space):
        if isinstance(space, ProductSpace):
            return {"product": [describe(p) for p in space.parts]}
        return {
            "axes": list(space.axes),
            "points": space.n if space.dim else 1,
            "dim": space.dim,
        }

    flat = sym.mat.reshape(-1)
    return {
        "dom": describe(sym.dom),
        "cod": describe(sym.cod),
        "shape": [int(s) for s in sym.mat.shape],
        "data": [[float(c.real), float(c.imag)] for c in flat],
    }
