import math

import numpy as np
import pytest

from strataops.errors import AxisMismatch, TailMass
from strataops.geometry import Stratum, derive_config
from strataops.grids import (
    RLambdaParams,
    TorusGrid,
    apply_rlambda,
    box_grid,
    extension_matrix,
    grid_fft,
    inner,
    manifold_grid,
    norm,
    order_reduction,
    quantize_psido,
    restriction_matrix,
    sobolev_norm,
)
from strataops.symexpr import Bracket, Const, Cos, Mul
from strataops.symexpr import symbol as mk_symbol
from strataops.verify import GaussianBump

CFG = derive_config(3, {1, 2}, {1, 3})
EXACT = 1e-12


def _rand(g, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)


def test_parseval_identity():
    g = TorusGrid(axes=(1, 2), n=8)
    u, v = _rand(g, 1), _rand(g, 2)
    pos = inner(g, u, v)
    freq = complex(np.sum(grid_fft(g, u) * np.conj(grid_fft(g, v))) * g.period ** g.dim)
    assert abs(pos - freq) <= EXACT * abs(pos)


def test_mode_is_exact_on_the_lattice():
    g = TorusGrid(axes=(1,), n=8)
    u = np.exp(1j * 3 * g.nodes1d())
    u_hat = grid_fft(g, u)
    assert abs(u_hat[3] - 1.0) <= EXACT
    assert np.sum(np.abs(u_hat) > 1e-13) == 1


# ---------------------------------------------------------------------------
# quantization


def test_quantize_constant_is_identity():
    g = manifold_grid(CFG, Stratum.X0, 8)
    op = quantize_psido(mk_symbol(CFG, Stratum.X0, Const(1), 0), g)
    u = _rand(g)
    assert np.allclose(op.apply(u), u, atol=EXACT)


def test_quantize_bracket_eigenfunction():
    g = manifold_grid(CFG, Stratum.X0, 8)
    e = mk_symbol(CFG, Stratum.X0, Bracket(frozenset({1, 2, 3}), -2), -2)
    op = quantize_psido(e, g)
    mesh = g.node_mesh()
    u = np.exp(1j * mesh[1])  # |xi0|^2 = 1
    assert np.allclose(op.apply(u), 0.5 * u, atol=EXACT)


def test_quantize_position_symbol_is_pointwise_product():
    g = manifold_grid(CFG, Stratum.X0, 8)
    e = mk_symbol(CFG, Stratum.X0, Cos(1), 0)
    op = quantize_psido(e, g)
    u = _rand(g)
    assert np.allclose(op.apply(u), np.cos(g.node_mesh()[1]) * u, atol=1e-11)


def test_quantize_separable_product_composes_exactly():
    g = manifold_grid(CFG, Stratum.X0, 8)
    pos = mk_symbol(CFG, Stratum.X0, Cos(2), 0)
    freq = mk_symbol(CFG, Stratum.X0, Bracket(frozenset({1, 2, 3}), -2), -2)
    both = mk_symbol(
        CFG, Stratum.X0, Mul((Cos(2), Bracket(frozenset({1, 2, 3}), -2))), -2
    )
    u = _rand(g)
    a = quantize_psido(both, g).apply(u)
    b = quantize_psido(pos, g).apply(quantize_psido(freq, g).apply(u))
    assert np.allclose(a, b, atol=EXACT)


def test_quantize_axis_mismatch():
    g = manifold_grid(CFG, Stratum.X1, 8)
    e = mk_symbol(CFG, Stratum.X0, Const(1), 0)
    with pytest.raises(AxisMismatch):
        quantize_psido(e, g)


def test_operator_matches_materialized_matrix():
    g = manifold_grid(CFG, Stratum.X1, 6)
    e = mk_symbol(
        CFG, Stratum.X1, Mul((Cos(1), Bracket(frozenset({1, 2}), -2))), -2
    )
    op = quantize_psido(e, g)
    mat = op.to_matrix()
    u = _rand(g)
    direct = op.apply(u).reshape(-1)
    via_mat = mat @ u.reshape(-1)
    assert np.linalg.norm(direct - via_mat) <= 1e-12 * np.linalg.norm(direct)


# ---------------------------------------------------------------------------
# restriction / extension


def test_restriction_of_constant():
    g0 = manifold_grid(CFG, Stratum.X0, 8)
    r = restriction_matrix(CFG, g0, 1)
    out = r.apply(np.ones(g0.shape, dtype=complex))
    assert out.shape == (8, 8)
    assert np.allclose(out, 1.0)


def test_restriction_kills_sine_in_conormal_direction():
    g0 = manifold_grid(CFG, Stratum.X0, 8)
    r = restriction_matrix(CFG, g0, 1)
    u = np.broadcast_to(np.sin(g0.nodes1d())[None, None, :], g0.shape)
    assert np.allclose(r.apply(u), 0.0, atol=EXACT)


def test_restriction_picks_the_zero_slice():
    g0 = manifold_grid(CFG, Stratum.X0, 8)
    r = restriction_matrix(CFG, g0, 1)
    u = np.zeros(g0.shape, dtype=complex)
    u[3, 5, 0] = 1.0  # conormal axis of X1 is axis 3, last position
    out = r.apply(u)
    assert out[3, 5] == 1.0 and np.sum(np.abs(out)) == 1.0


def test_extension_value_and_adjointness():
    g0 = manifold_grid(CFG, Stratum.X0, 8)
    ext = extension_matrix(CFG, g0, 1)
    q = np.ones((8, 8), dtype=complex)
    out = ext.apply(q)
    assert out[0, 0, 0] == pytest.approx(8 / (2 * math.pi))
    gk = ext.dom
    u = _rand(g0, 3)
    qr = _rand(gk, 4)
    lhs = inner(g0, ext.apply(qr), u)
    rhs = inner(gk, qr, restriction_matrix(CFG, g0, 1).apply(u))
    assert abs(lhs - rhs) <= EXACT * abs(lhs)


def test_extension_then_restriction_scales_by_inverse_spacing():
    g0 = manifold_grid(CFG, Stratum.X0, 8)
    ext = extension_matrix(CFG, g0, 2)
    restr = restriction_matrix(CFG, g0, 2)
    q = _rand(ext.dom, 5)
    back = restr.apply(ext.apply(q))
    assert np.allclose(back, q / g0.h ** CFG.nu2, atol=EXACT)


# ---------------------------------------------------------------------------
# order reductions and Sobolev norms


def test_order_reduction_zero_is_identity():
    g = TorusGrid(axes=(1,), n=8)
    u = _rand(g)
    assert np.allclose(order_reduction(g, 0).apply(u), u, atol=EXACT)


def test_order_reduction_scales_modes():
    g = TorusGrid(axes=(1,), n=8)
    u = np.exp(1j * 2 * g.nodes1d())  # |xi|^2 = 4
    out = order_reduction(g, 2).apply(u)
    assert np.allclose(out, 5.0 * u, atol=EXACT)


def test_order_reduction_inverts_exactly():
    g = TorusGrid(axes=(1, 2), n=8)
    u = _rand(g)
    v = order_reduction(g, 1.5).apply(order_reduction(g, -1.5).apply(u))
    assert np.linalg.norm(v - u) <= EXACT * np.linalg.norm(u)


def test_sobolev_norm_of_constant():
    g = TorusGrid(axes=(1,), n=8)
    u = np.ones(8, dtype=complex)
    # independent oracle: measure-weighted position sum
    direct = math.sqrt((g.h * np.sum(np.abs(u) ** 2)).real)
    assert direct == pytest.approx(math.sqrt(2 * math.pi), abs=1e-12)
    assert sobolev_norm(g, u, 0) == pytest.approx(direct, abs=1e-12)


def test_sobolev_norm_single_mode_scaling():
    g = TorusGrid(axes=(1,), n=16)
    u = np.exp(1j * 3 * g.nodes1d())
    base = sobolev_norm(g, u, 0)
    assert sobolev_norm(g, u, 1) == pytest.approx(math.sqrt(10.0) * base, rel=1e-12)


def test_sobolev_norm_parseval_additivity():
    g = TorusGrid(axes=(1,), n=16)
    u = np.exp(1j * 2 * g.nodes1d())
    v = np.exp(1j * 5 * g.nodes1d())
    total = sobolev_norm(g, u + v, 0) ** 2
    assert total == pytest.approx(
        sobolev_norm(g, u, 0) ** 2 + sobolev_norm(g, v, 0) ** 2, rel=1e-12
    )


def test_operator_order_probe_slope():
    g = TorusGrid(axes=(1, 2), n=64)
    for m in (0.5, 1.0):
        e_sym = mk_symbol(
            derive_config(3, {1, 2}, {1, 3}), Stratum.X1, Bracket(frozenset({1, 2}), 2 * m), 2 * m
        )
        op = quantize_psido(e_sym, g)
        lambdas = [2, 4, 8, 16]
        ratios = []
        for lam in lambdas:
            u = np.exp(1j * lam * (g.node_mesh()[1] + g.node_mesh()[2]))
            ratios.append(sobolev_norm(g, op.apply(u), 0) / sobolev_norm(g, u, 0))
        slope = np.polyfit(np.log(lambdas), np.log(ratios), 1)[0]
        assert abs(slope - 2 * m) <= 0.1 * 2 * m


# ---------------------------------------------------------------------------
# box grids and the scaling family


def test_box_grid_contains_origin():
    g = box_grid(2, 64, 8.0)
    assert g.offset == -8.0
    assert g.nodes1d()[g.zero_index] == pytest.approx(0.0, abs=1e-14)


def test_rlambda_identity_at_unit_scale():
    g = box_grid(2, 128, 10.0)
    f_tan = GaussianBump(dim=1)
    f_con = GaussianBump(dim=1)
    vals = apply_rlambda(g, 1.0, f_tan, f_con, k=1, z0=(0.0,), zeta0=(0.0,))
    mesh = np.meshgrid(g.nodes1d(), g.nodes1d(), indexing="ij")
    direct = f_tan(mesh[0]) * f_con(mesh[1])
    assert np.allclose(vals, direct, atol=EXACT)


def test_rlambda_unitarity():
    # spacing * lambda must stay below ~0.7 for the trapezoid sums of the
    # scaled Gaussians to be accurate to 1e-6
    params = RLambdaParams(
        k=1, nu=1, z0=(0.4,), zeta0=(1.5,), lambdas=(1.0, 4.0, 16.0),
        half_width=12.0, n_points=1024,
    )
    g = box_grid(2, params.n_points, params.half_width)
    f_tan = GaussianBump(dim=1)
    f_con = GaussianBump(dim=1, powers=(1,))
    mesh = np.meshgrid(g.nodes1d(), g.nodes1d(), indexing="ij")
    ref = norm(g, np.asarray(f_tan(mesh[0]) * f_con(mesh[1]), dtype=complex))
    for lam in params.lambdas:
        vals = apply_rlambda(g, params, f_tan, f_con, lam=lam)
        assert abs(norm(g, vals) - ref) <= 1e-6 * ref


def test_rlambda_weak_decay():
    params = RLambdaParams(
        k=1, nu=1, z0=(0.0,), zeta0=(2.0,), lambdas=(1.0, 4.0, 16.0),
        half_width=12.0, n_points=256,
    )
    g = box_grid(2, params.n_points, params.half_width)
    f = GaussianBump(dim=1)
    mesh = np.meshgrid(g.nodes1d(), g.nodes1d(), indexing="ij")
    w = np.asarray(
        GaussianBump(dim=1, widths=(2.0,))(mesh[0])
        * GaussianBump(dim=1, widths=(1.5,))(mesh[1]),
        dtype=complex,
    )
    pairings = [
        abs(inner(g, apply_rlambda(g, params, f, f, lam=lam), w))
        for lam in params.lambdas
    ]
    assert pairings[0] > pairings[1] > pairings[2]


def test_rlambda_tail_mass_guard():
    g = box_grid(1, 64, 2.0)  # box much too small for a unit Gaussian
    wide = GaussianBump(dim=1, widths=(4.0,))
    with pytest.raises(TailMass):
        apply_rlambda(g, 1.0, wide, None, k=1, z0=(0.0,), zeta0=(1.0,))


def test_rlambda_params_validation():
    with pytest.raises(AxisMismatch):
        RLambdaParams(k=1, nu=0, z0=(0.0,), zeta0=(0.0,), lambdas=(1.0, 2.0))
    with pytest.raises(AxisMismatch):
        RLambdaParams(k=1, nu=0, z0=(0.0,), zeta0=(1.0,), lambdas=(4.0, 2.0))
