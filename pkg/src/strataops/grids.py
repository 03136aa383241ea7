"""Periodic grids, spectral quantization, restriction/extension, order
reductions, discrete Sobolev norms, and the scaling family sampler.

Conventions, fixed once: N is even, nodes are offset + j*h with h =
period/N, the frequency lattice is (2*pi/period) * {-N/2, ..., N/2-1}
stored in numpy fft order, and the normalized transform is
u_hat(xi) = N^-d sum_j u(x_j) exp(-i x_j xi).  With the measure-weighted
position inner product h^d sum u v-bar, Parseval reads
||u||^2 = period^d sum |u_hat|^2 exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import AxisMismatch, TailMass
from .geometry import ConfigTriple, Stratum
from .symexpr import Const, NotSeparable, SymbolExpr, eval_on, separate, simplify

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on a product of circles, one per listed axis.

    ``axes`` carry the global axis labels so symbols know which variable
    each dimension represents.  A zero-dimensional grid is the scalar
    space C (size one); boundary symbols use it as their codomain.
    """

    axes: tuple[int, ...]
    n: int
    period: float = TWO_PI
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if self.dim > 0 and self.n % 2 != 0:
            raise AxisMismatch("points per axis must be even")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def h(self) -> float:
        return self.period / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def zero_index(self) -> int:
        j = round(-self.offset / self.h) % self.n
        if abs(self.offset + j * self.h) > 1e-9 * self.period:
            raise AxisMismatch("grid does not contain the origin")
        return j

    def nodes1d(self) -> np.ndarray:
        return self.offset + self.h * np.arange(self.n)

    def freqs1d(self) -> np.ndarray:
        return (TWO_PI / self.period) * np.fft.fftfreq(self.n, d=1.0 / self.n)

    def node_mesh(self) -> dict:
        if self.dim == 0:
            return {}
        grids = np.meshgrid(*[self.nodes1d()] * self.dim, indexing="ij")
        return dict(zip(self.axes, grids))

    def freq_mesh(self) -> dict:
        if self.dim == 0:
            return {}
        grids = np.meshgrid(*[self.freqs1d()] * self.dim, indexing="ij")
        return dict(zip(self.axes, grids))

    def freq_norm2(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros(())
        mesh = self.freq_mesh()
        return sum(v ** 2 for v in mesh.values())

    def random_function(self, rng, decay: float = 0.0) -> np.ndarray:
        """Complex random grid function; decay > 0 damps high frequencies
        like (1+|xi|^2)^(-decay/2) for smooth test inputs."""
        coef = rng.standard_normal(self.shape) + 1j * rng.standard_normal(self.shape)
        if decay:
            coef = coef * (1.0 + self.freq_norm2()) ** (-decay / 2.0)
        return grid_ifft(self, coef)


def grid_fft(g: TorusGrid, u: np.ndarray) -> np.ndarray:
    if g.dim == 0:
        return np.asarray(u, dtype=complex)
    return np.fft.fftn(u) / g.size


def grid_ifft(g: TorusGrid, u_hat: np.ndarray) -> np.ndarray:
    if g.dim == 0:
        return np.asarray(u_hat, dtype=complex)
    return np.fft.ifftn(u_hat) * g.size


def inner(g: TorusGrid, u: np.ndarray, v: np.ndarray) -> complex:
    """Measure-weighted inner product h^d sum u * conj(v)."""
    return complex(g.h ** g.dim * np.sum(np.asarray(u) * np.conj(v)))


def norm(g: TorusGrid, u: np.ndarray) -> float:
    return math.sqrt(max(inner(g, u, u).real, 0.0))


def sobolev_norm(g: TorusGrid, u: np.ndarray, s: float) -> float:
    """(sum (1+|xi|^2)^s |u_hat|^2 * period^d)^(1/2); s = 0 is Parseval."""
    u_hat = grid_fft(g, u)
    w = (1.0 + g.freq_norm2()) ** s
    return math.sqrt(float(np.sum(w * np.abs(u_hat) ** 2).real) * g.period ** g.dim)


# ---------------------------------------------------------------------------
# grid operators


@dataclass(frozen=True)
class GridOperator:
    dom: TorusGrid
    cod: TorusGrid
    fn: Callable[[np.ndarray], np.ndarray]
    order: object = None
    name: str = ""

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        if u.shape != self.dom.shape:
            raise AxisMismatch(f"input shape {u.shape} != domain shape {self.dom.shape}")
        return self.fn(u)

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        if other.cod != self.dom:
            raise AxisMismatch("operators do not chain")
        order = None
        if self.order is not None and other.order is not None:
            order = self.order + other.order
        return GridOperator(
            dom=other.dom,
            cod=self.cod,
            fn=lambda u: self.fn(other.fn(u)),
            order=order,
            name=f"{self.name}*{other.name}".strip("*"),
        )

    def to_matrix(self, max_size: int = 4096) -> np.ndarray:
        if self.dom.size > max_size:
            raise AxisMismatch(f"refusing to materialize {self.dom.size} columns")
        mat = np.zeros((self.cod.size, self.dom.size), dtype=complex)
        basis = np.zeros(self.dom.shape, dtype=complex)
        flat = basis.reshape(-1)
        for j in range(self.dom.size):
            flat[j] = 1.0
            mat[:, j] = self.apply(basis).reshape(-1)
            flat[j] = 0.0
        return mat


def identity_operator(g: TorusGrid) -> GridOperator:
    return GridOperator(dom=g, cod=g, fn=lambda u: u.copy(), order=0, name="id")


def multiplier_operator(g: TorusGrid, values: np.ndarray, order=None, name="mult") -> GridOperator:
    values = np.asarray(values, dtype=complex)

    def fn(u):
        return grid_ifft(g, values * grid_fft(g, u))

    return GridOperator(dom=g, cod=g, fn=fn, order=order, name=name)


def order_reduction(g: TorusGrid, s) -> GridOperator:
    """Invertible Fourier multiplier (1+|xi|^2)^(s/2) of order s."""
    values = (1.0 + g.freq_norm2()) ** (float(s) / 2.0)
    return multiplier_operator(g, values, order=s, name=f"lambda^{s}")


def quantize_psido(sym: SymbolExpr, g: TorusGrid) -> GridOperator:
    """Collocation quantization (Op u)(x_j) = sum_xi e(x_j, xi) u_hat(xi) e^{i x_j xi}.

    Separable symbols (sums of position-only times frequency-only
    factors) are applied matrix-free: one fft, a multiplier, one inverse
    fft, and a pointwise coefficient per term.  Mixed symbols fall back
    to a chunked dense rule.
    """
    if tuple(sorted(sym.axes)) != tuple(sorted(g.axes)):
        raise AxisMismatch(
            f"symbol axes {sym.axes} do not match grid axes {g.axes}"
        )
    pos_mesh = g.node_mesh()
    freq_mesh = g.freq_mesh()
    try:
        terms = separate(sym.expr)
    except NotSeparable:
        terms = None

    if terms is not None:
        compiled = []
        for p_expr, m_expr in terms:
            p = None
            if simplify(p_expr) != Const(1):
                p = np.asarray(eval_on(SymbolExpr(p_expr, sym.home, sym.order, sym.axes), pos_mesh, {}), dtype=complex)
                p = np.broadcast_to(p, g.shape)
            m = np.asarray(eval_on(SymbolExpr(m_expr, sym.home, sym.order, sym.axes), {}, freq_mesh), dtype=complex)
            m = np.broadcast_to(m, g.shape)
            compiled.append((p, m))

        def fn(u):
            u_hat = grid_fft(g, u)
            out = np.zeros(g.shape, dtype=complex)
            for p, m in compiled:
                piece = grid_ifft(g, m * u_hat)
                out += piece if p is None else p * piece
            return out

        return GridOperator(dom=g, cod=g, fn=fn, order=sym.order, name="psdo")

    # dense fallback: accumulate over frequency chunks
    freq_flat = {a: v.reshape(-1) for a, v in freq_mesh.items()}
    node_flat = {a: v.reshape(-1) for a, v in pos_mesh.items()}

    def fn_dense(u):
        u_hat = grid_fft(g, u).reshape(-1)
        out = np.zeros(g.size, dtype=complex)
        x_cols = np.stack([node_flat[a] for a in g.axes], axis=1)
        chunk = max(1, (1 << 22) // max(g.size, 1))
        for start in range(0, g.size, chunk):
            sl = slice(start, min(start + chunk, g.size))
            freq_part = {a: freq_flat[a][sl][None, :] for a in g.axes}
            pos_part = {a: x_cols[:, i][:, None] for i, a in enumerate(g.axes)}
            vals = np.asarray(
                eval_on(sym, pos_part, freq_part), dtype=complex
            )
            vals = np.broadcast_to(vals, (g.size, sl.stop - sl.start))
            phase = np.exp(
                1j
                * sum(
                    pos_part[a] * freq_part[a] for a in g.axes
                )
            )
            out += (vals * phase) @ u_hat[sl]
        return out.reshape(g.shape)

    return GridOperator(dom=g, cod=g, fn=fn_dense, order=sym.order, name="psdo-dense")


# ---------------------------------------------------------------------------
# restriction and extension between manifold grids


def manifold_grid(cfg: ConfigTriple, stratum: Stratum, n: int, period: float = TWO_PI, offset: float = 0.0) -> TorusGrid:
    return TorusGrid(axes=cfg.axes(stratum), n=n, period=period, offset=offset)


def _conormal_positions(cfg: ConfigTriple, k: int) -> tuple[list, list]:
    """Positions of tangential/conormal axes inside the sorted ambient axes."""
    sub = cfg.submanifold(k)
    tang = set(cfg.axes(sub))
    keep, drop = [], []
    for i, a in enumerate(cfg.axes(Stratum.X0)):
        (keep if a in tang else drop).append(i)
    return keep, drop


def restriction_matrix(cfg: ConfigTriple, g0: TorusGrid, k: int) -> GridOperator:
    """Restrict ambient grid functions to X_k: select nodes with conormal
    coordinates at the origin."""
    if g0.axes != cfg.axes(Stratum.X0):
        raise AxisMismatch("g0 must be the full ambient grid")
    sub = cfg.submanifold(k)
    gk = TorusGrid(axes=cfg.axes(sub), n=g0.n, period=g0.period, offset=g0.offset)
    _, drop = _conormal_positions(cfg, k)
    zi = g0.zero_index
    index = tuple(zi if i in drop else slice(None) for i in range(g0.dim))

    def fn(u):
        return u[index].copy()

    return GridOperator(dom=g0, cod=gk, fn=fn, order=Fraction(cfg.nu(k), 2), name=f"bd{k}")


def extension_matrix(cfg: ConfigTriple, g0: TorusGrid, k: int) -> GridOperator:
    """Extend X_k grid functions by a discrete delta in the conormal
    directions, normalized by 1/h^nu_k so that extension is the exact
    measure-weighted adjoint of restriction."""
    if g0.axes != cfg.axes(Stratum.X0):
        raise AxisMismatch("g0 must be the full ambient grid")
    sub = cfg.submanifold(k)
    gk = TorusGrid(axes=cfg.axes(sub), n=g0.n, period=g0.period, offset=g0.offset)
    _, drop = _conormal_positions(cfg, k)
    zi = g0.zero_index
    index = tuple(zi if i in drop else slice(None) for i in range(g0.dim))
    weight = 1.0 / g0.h ** cfg.nu(k)

    def fn(u):
        out = np.zeros(g0.shape, dtype=complex)
        out[index] = u * weight
        return out

    return GridOperator(dom=gk, cod=g0, fn=fn, order=Fraction(cfg.nu(k), 2), name=f"cob{k}")


# ---------------------------------------------------------------------------
# box grids and the scaling family


def box_grid(dim: int, n: int, half_width: float, axes: Sequence[int] | None = None) -> TorusGrid:
    """Grid on [-L, L)^dim, treated as a torus of period 2L for transforms."""
    if axes is None:
        axes = tuple(range(1, dim + 1))
    return TorusGrid(axes=tuple(axes), n=n, period=2.0 * half_width, offset=-half_width)


@dataclass(frozen=True)
class RLambdaParams:
    """Parameters of the unitary scaling/modulation family.

    k tangential dimensions scale by sqrt(lambda) around z0 with a
    modulation toward the covector lambda*zeta0; nu conormal dimensions
    scale by lambda.
    """

    k: int
    nu: int
    z0: tuple[float, ...]
    zeta0: tuple[float, ...]
    lambdas: tuple[float, ...]
    half_width: float = 10.0
    n_points: int = 128

    def __post_init__(self):
        object.__setattr__(self, "z0", tuple(float(v) for v in self.z0))
        object.__setattr__(self, "zeta0", tuple(float(v) for v in self.zeta0))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if len(self.z0) != self.k or len(self.zeta0) != self.k:
            raise AxisMismatch("z0 and zeta0 must have the tangential dimension")
        if any(l2 <= l1 for l1, l2 in zip(self.lambdas, self.lambdas[1:])):
            raise AxisMismatch("lambda schedule must be strictly increasing")
        if self.k > 0 and all(v == 0.0 for v in self.zeta0):
            raise AxisMismatch("zeta0 must be nonzero")


def rlambda_grid(params: RLambdaParams) -> TorusGrid:
    return box_grid(params.k + params.nu, params.n_points, params.half_width)


def apply_rlambda(
    grid: TorusGrid,
    params_or_lam,
    f_tan: Callable,
    f_con: Callable | None = None,
    *,
    lam: float | None = None,
    z0: Sequence[float] | None = None,
    zeta0: Sequence[float] | None = None,
    k: int | None = None,
    tail_tol: float = 1e-8,
) -> np.ndarray:
    """Sample (R_lambda f)(z, y) = lam^{k/4+nu/2} e^{i lam z.zeta0}
    f_tan(sqrt(lam) (z - z0)) f_con(lam y) on a box grid.

    The first k grid dimensions are tangential.  Raises TailMass when the
    sampled function leaks more than tail_tol of its mass into the outer
    ten percent of the box.
    """
    if isinstance(params_or_lam, RLambdaParams):
        p = params_or_lam
        if lam is None:
            raise AxisMismatch("lam required")
        k, z0, zeta0 = p.k, p.z0, p.zeta0
    else:
        lam = float(params_or_lam)
        if k is None:
            k = grid.dim if f_con is None else grid.dim - 1
        z0 = tuple(z0 or (0.0,) * k)
        zeta0 = tuple(zeta0 or (0.0,) * k)
    nu = grid.dim - k
    coords = [grid.nodes1d() for _ in range(grid.dim)]
    mesh = np.meshgrid(*coords, indexing="ij") if grid.dim else []
    tan = mesh[:k]
    con = mesh[k:]
    amp = lam ** (k / 4.0 + nu / 2.0)
    phase = np.exp(1j * lam * sum(t * z for t, z in zip(tan, zeta0))) if k else 1.0
    args_tan = [math.sqrt(lam) * (t - c) for t, c in zip(tan, z0)]
    vals = amp * phase
    vals = vals * f_tan(*args_tan) if k else vals * f_tan()
    if nu:
        if f_con is None:
            raise AxisMismatch("conormal factor required when nu > 0")
        vals = vals * f_con(*[lam * y for y in con])
    vals = np.asarray(vals, dtype=complex)
    _check_tail(grid, vals, tail_tol)
    return vals


def _check_tail(grid: TorusGrid, vals: np.ndarray, tol: float) -> None:
    mass = float(np.sum(np.abs(vals) ** 2))
    if mass == 0.0:
        return
    edge = int(math.ceil(0.05 * grid.n))
    inner_slice = slice(edge, grid.n - edge)
    core = vals[tuple(inner_slice for _ in range(grid.dim))]
    tail = mass - float(np.sum(np.abs(core) ** 2))
    if tail > tol * mass:
        raise TailMass(
            f"tail mass fraction {tail / mass:.3e} exceeds {tol:.1e}; enlarge the box"
        )


# ---------------------------------------------------------------------------
# JSON export helpers


def grid_function_to_json(u: np.ndarray) -> dict:
    flat = np.asarray(u, dtype=complex).reshape(-1)
    return {
        "shape": list(np.shape(u)),
        "data": [[float(c.real), float(c.imag)] for c in flat],
    }
