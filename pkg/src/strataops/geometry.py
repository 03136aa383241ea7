"""Geometry of a pair of coordinate subspaces X1, X2 inside X0 = R^n.

Everything here is axis bookkeeping: which coordinate axes span each
submanifold, the derived codimensions, and the four-element lattice of
strata X0 > X1, X2 > X1 n X2.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Iterable

from .errors import ConfigError


class Stratum(Enum):
    X0 = "X0"
    X1 = "X1"
    X2 = "X2"
    X12 = "X12"

    def __repr__(self):
        return self.value


# inclusion as subsets of X0: a >= b  iff  b is contained in a
_CONTAINS = {
    Stratum.X0: {Stratum.X0, Stratum.X1, Stratum.X2, Stratum.X12},
    Stratum.X1: {Stratum.X1, Stratum.X12},
    Stratum.X2: {Stratum.X2, Stratum.X12},
    Stratum.X12: {Stratum.X12},
}


def contains(a: Stratum, b: Stratum) -> bool:
    """True iff b is a subset of a."""
    return b in _CONTAINS[a]


def meet(a: Stratum, b: Stratum) -> Stratum:
    """Intersection of two strata as a stratum."""
    if contains(a, b):
        return b
    if contains(b, a):
        return a
    return Stratum.X12


def meet_all(strata: Iterable[Stratum]) -> Stratum:
    return reduce(meet, strata, Stratum.X0)


@dataclass(frozen=True)
class ConfigTriple:
    """A pair of coordinate subspaces of R^n given by their axis sets.

    Axes are 1-based.  S1 and S2 list the axes spanning X1 and X2; the
    remaining axes of each are conormal.  With ``transversal`` set the
    union of S1 and S2 must exhaust all axes, which makes the conormal
    bundle of the intersection split into the two conormal factors.
    """

    n: int
    S1: frozenset[int]
    S2: frozenset[int]
    transversal: bool = True

    def __post_init__(self):
        full = set(range(1, self.n + 1))
        if self.n < 2:
            raise ConfigError("need n >= 2")
        for name, s in (("S1", self.S1), ("S2", self.S2)):
            if not s.issubset(full):
                raise ConfigError(f"{name} has axes outside 1..{self.n}")
            if not s:
                raise ConfigError(f"{name} is empty")
            if len(s) >= self.n:
                raise ConfigError(f"{name} must be a proper subspace (|{name}| < n)")
        if not (self.S1 & self.S2):
            raise ConfigError("X1 and X2 must intersect: S1 & S2 is empty")
        if self.transversal and (self.S1 | self.S2) != full:
            raise ConfigError("transversal pair requires S1 | S2 = {1..n}")

    # ---- derived dimensions -------------------------------------------
    @property
    def S12(self) -> frozenset[int]:
        return self.S1 & self.S2

    @property
    def nu1(self) -> int:
        """Codimension of X1 in X0."""
        return self.n - len(self.S1)

    @property
    def nu2(self) -> int:
        return self.n - len(self.S2)

    @property
    def nu3(self) -> int:
        """Codimension of the intersection in X0."""
        return self.n - len(self.S12)

    @property
    def n1(self) -> int:
        """Codimension of the intersection inside X1."""
        return len(self.S1) - len(self.S12)

    @property
    def n2(self) -> int:
        return len(self.S2) - len(self.S12)

    def nu(self, k: int) -> int:
        if k == 1:
            return self.nu1
        if k == 2:
            return self.nu2
        raise ConfigError(f"k must be 1 or 2, got {k}")

    def submanifold(self, k: int) -> Stratum:
        return Stratum.X1 if k == 1 else Stratum.X2

    # ---- axis sets ----------------------------------------------------
    def axes(self, stratum: Stratum) -> tuple[int, ...]:
        """Sorted axes spanning a stratum."""
        if stratum is Stratum.X0:
            return tuple(range(1, self.n + 1))
        if stratum is Stratum.X1:
            return tuple(sorted(self.S1))
        if stratum is Stratum.X2:
            return tuple(sorted(self.S2))
        return tuple(sorted(self.S12))

    def conormal_axes(self, stratum: Stratum, within: Stratum = Stratum.X0) -> tuple[int, ...]:
        """Axes of ``within`` that are normal to ``stratum``."""
        if not contains(within, stratum):
            raise ConfigError(f"{stratum} is not contained in {within}")
        inner = set(self.axes(stratum))
        return tuple(a for a in self.axes(within) if a not in inner)

    def dim(self, stratum: Stratum) -> int:
        return len(self.axes(stratum))


def derive_config(n: int, S1: Iterable[int], S2: Iterable[int], transversal: bool = True) -> ConfigTriple:
    """Build and validate a configuration from raw axis sets."""
    return ConfigTriple(n=n, S1=frozenset(S1), S2=frozenset(S2), transversal=transversal)


@dataclass(frozen=True)
class AxisSplit:
    """Local coordinate split (z, x, y) relative to a stratum.

    z: tangential axes of the stratum; y: axes normal to the chosen
    submanifold; x: axes tangent to the submanifold but normal to the
    stratum (nonempty only for the intersection stratum with k given).
    """

    z: tuple[int, ...]
    x: tuple[int, ...]
    y: tuple[int, ...]


def axis_split(cfg: ConfigTriple, stratum: Stratum, k: int | None = None) -> AxisSplit:
    """Split the ambient axes relative to a stratum.

    For the intersection stratum a submanifold index k in {1, 2} selects
    the (x, y) refinement of the conormal axes: x tangent to X_k, y
    normal to it.
    """
    z = cfg.axes(stratum)
    if stratum is Stratum.X12 and k is not None:
        sk = cfg.S1 if k == 1 else cfg.S2
        x = tuple(sorted(sk - cfg.S12))
        y = tuple(a for a in range(1, cfg.n + 1) if a not in sk)
        return AxisSplit(z=z, x=x, y=y)
    y = cfg.conormal_axes(stratum)
    return AxisSplit(z=z, x=(), y=y)
