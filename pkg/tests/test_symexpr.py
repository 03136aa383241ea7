import numpy as np
import pytest
from hypothesis import given, strategies as st

from strataops.errors import AxisMismatch, StratumMismatch
from strataops.geometry import Stratum, derive_config
from strataops.symexpr import (
    Add,
    Bracket,
    Const,
    Cos,
    FreqVar,
    IntPow,
    Mul,
    Neg,
    Sin,
    SpaceVar,
    eval_expr,
    freeze_expr,
    simplify,
    symbol,
    validate_expr,
)

CFG = derive_config(3, {1, 2}, {1, 3})


def test_eval_const():
    s = symbol(CFG, Stratum.X0, Const(1), 0)
    assert eval_expr(s, (0.3, -1.0, 2.0), (5.0, 0.0, 1.0)) == 1


def test_eval_bracket():
    s = symbol(CFG, Stratum.X0, Bracket(frozenset({3}), -2), -2)
    assert eval_expr(s, (0, 0, 0), (0, 0, 1.0)) == pytest.approx(0.5)


def test_eval_cos_times_freq():
    s = symbol(CFG, Stratum.X0, Mul((Cos(1), FreqVar(2))), 1)
    assert eval_expr(s, (0.0, 0.7, 0.0), (0.0, 3.0, 0.0)) == pytest.approx(3.0)


def test_eval_length_mismatch():
    s = symbol(CFG, Stratum.X1, Const(1), 0)
    with pytest.raises(AxisMismatch):
        eval_expr(s, (0.0,), (0.0, 0.0))


def test_symbol_axis_check():
    with pytest.raises(AxisMismatch):
        symbol(CFG, Stratum.X1, FreqVar(3), 0)  # axis 3 not on X1


def test_negative_intpow_needs_positive_base():
    with pytest.raises(AxisMismatch):
        validate_expr(IntPow(SpaceVar(1), -1))
    validate_expr(IntPow(Add((Const(1), IntPow(FreqVar(1), 2))), -1))


def test_freeze_noop_returns_same_object():
    s = symbol(CFG, Stratum.X0, Bracket(frozenset({3}), -2), -2)
    assert freeze_expr(s, CFG, Stratum.X1) is s


def test_freeze_kills_conormal_cosine():
    expr = Mul((Cos(3), Bracket(frozenset({3}), -2)))
    s = symbol(CFG, Stratum.X0, expr, -2)
    frozen = freeze_expr(s, CFG, Stratum.X1)
    assert frozen.expr == Bracket(frozenset({3}), -2)


def test_freeze_at_intersection_kills_both_conormal_axes():
    expr = Add((SpaceVar(1), SpaceVar(2), Sin(3)))
    s = symbol(CFG, Stratum.X0, expr, 0)
    frozen = freeze_expr(s, CFG, Stratum.X12)
    # axes 2 and 3 are conormal to the intersection, axis 1 survives
    assert frozen.expr == SpaceVar(1)


def test_freeze_requires_inclusion():
    s = symbol(CFG, Stratum.X1, Const(1), 0)
    with pytest.raises(StratumMismatch):
        freeze_expr(s, CFG, Stratum.X2)


# ---------------------------------------------------------------------------
# random expression properties

_axes = st.sampled_from([1, 2, 3])


def _exprs():
    leaves = st.one_of(
        st.floats(min_value=-3, max_value=3).map(lambda v: Const(round(v, 3))),
        _axes.map(SpaceVar),
        _axes.map(FreqVar),
        _axes.map(Sin),
        _axes.map(Cos),
        st.tuples(st.sets(_axes, min_size=1), st.integers(-4, 4)).map(
            lambda t: Bracket(frozenset(t[0]), t[1])
        ),
    )
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.lists(sub, min_size=2, max_size=3).map(lambda l: Add(tuple(l))),
            st.lists(sub, min_size=2, max_size=3).map(lambda l: Mul(tuple(l))),
            sub.map(Neg),
            st.tuples(sub, st.integers(0, 3)).map(lambda t: IntPow(*t)),
        ),
        max_leaves=8,
    )


@given(_exprs(), st.sampled_from([Stratum.X1, Stratum.X12]))
def test_freeze_idempotent(expr, stratum):
    s = symbol(CFG, Stratum.X0, expr, 0)
    once = freeze_expr(s, CFG, stratum)
    twice = freeze_expr(once, CFG, stratum)
    assert once.expr == twice.expr


@given(_exprs())
def test_freeze_at_intersection_factors_through_x1(expr):
    s = symbol(CFG, Stratum.X0, expr, 0)
    direct = freeze_expr(s, CFG, Stratum.X12)
    via_x1 = freeze_expr(freeze_expr(s, CFG, Stratum.X1), CFG, Stratum.X12)
    assert direct.expr == via_x1.expr


@given(_exprs(), st.tuples(*[st.floats(-2, 2) for _ in range(6)]))
def test_freeze_matches_embedded_evaluation(expr, vals):
    s = symbol(CFG, Stratum.X0, expr, 0)
    frozen = freeze_expr(s, CFG, Stratum.X1)
    x = (vals[0], vals[1], 0.0)  # conormal coordinate of X1 set to zero
    xi = vals[3:6]
    a = eval_expr(frozen, x, xi)
    b = eval_expr(s, x, xi)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(_exprs(), st.tuples(*[st.floats(-2, 2) for _ in range(6)]))
def test_simplify_preserves_values(expr, vals):
    s = symbol(CFG, Stratum.X0, expr, 0)
    t = symbol(CFG, Stratum.X0, simplify(expr), 0)
    x, xi = vals[:3], vals[3:]
    assert eval_expr(s, x, xi) == pytest.approx(eval_expr(t, x, xi), rel=1e-9, abs=1e-9)


def test_vectorized_evaluation_broadcasts():
    s = symbol(CFG, Stratum.X0, Mul((Cos(1), Bracket(frozenset({2, 3}), 2))), 2)
    from strataops.symexpr import eval_on

    x1 = np.linspace(0, 1, 5)
    out = eval_on(s, {1: x1}, {2: 1.0, 3: np.zeros(5)})
    assert out.shape == (5,)
    assert out[0] == pytest.approx(np.cos(0) * 2.0)
