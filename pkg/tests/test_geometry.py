import itertools

import pytest
from hypothesis import assume, given, strategies as st

from strataops.errors import ConfigError
from strataops.geometry import Stratum, axis_split, contains, derive_config, meet

STRATA = [Stratum.X0, Stratum.X1, Stratum.X2, Stratum.X12]


def test_derive_config_basic():
    cfg = derive_config(3, {1, 2}, {1, 3})
    assert (cfg.nu1, cfg.nu2, cfg.nu3) == (1, 1, 2)
    assert (cfg.n1, cfg.n2) == (1, 1)


def test_derive_config_four_dim():
    cfg = derive_config(4, {1, 2, 3}, {1, 4})
    assert (cfg.nu1, cfg.nu2, cfg.nu3) == (1, 2, 3)
    assert (cfg.n1, cfg.n2) == (2, 1)


def test_empty_intersection_rejected():
    with pytest.raises(ConfigError):
        derive_config(3, {1, 2}, {3}, transversal=False)


def test_full_dimensional_submanifold_rejected():
    with pytest.raises(ConfigError):
        derive_config(3, {1, 2, 3}, {1, 2})


def test_transversality_enforced():
    with pytest.raises(ConfigError):
        derive_config(4, {1, 2}, {1, 3})  # axis 4 uncovered
    # the symbolic layer accepts the same pair flagged non-transversal
    cfg = derive_config(4, {1, 2}, {1, 3}, transversal=False)
    assert cfg.nu3 == 3


@st.composite
def configs(draw):
    n = draw(st.integers(min_value=3, max_value=7))
    axes = list(range(1, n + 1))
    s1 = frozenset(draw(st.sets(st.sampled_from(axes), min_size=1, max_size=n - 1)))
    s2 = frozenset(draw(st.sets(st.sampled_from(axes), min_size=1, max_size=n - 1)))
    assume(s1 & s2)
    return derive_config(n, s1, s2, transversal=(s1 | s2 == set(axes)))


@given(configs())
def test_codimension_identities(cfg):
    assert cfg.nu3 == cfg.n1 + cfg.nu1
    assert cfg.nu3 == cfg.n2 + cfg.nu2
    if cfg.transversal:
        assert cfg.nu3 == cfg.nu1 + cfg.nu2
        assert (cfg.n1, cfg.n2) == (cfg.nu2, cfg.nu1)


def test_meet_table():
    assert meet(Stratum.X1, Stratum.X2) is Stratum.X12
    assert meet(Stratum.X0, Stratum.X1) is Stratum.X1
    assert meet(Stratum.X12, Stratum.X1) is Stratum.X12


def test_meet_lattice_laws():
    for a, b, c in itertools.product(STRATA, repeat=3):
        assert meet(a, b) is meet(b, a)
        assert meet(meet(a, b), c) is meet(a, meet(b, c))
    for a in STRATA:
        assert meet(a, a) is a
        assert meet(Stratum.X0, a) is a


def test_contains_is_a_partial_order():
    for a in STRATA:
        assert contains(a, a)
        assert contains(Stratum.X0, a)
        assert contains(a, Stratum.X12)
    assert not contains(Stratum.X1, Stratum.X2)
    assert not contains(Stratum.X2, Stratum.X1)


def test_axis_split_x1():
    cfg = derive_config(3, {1, 2}, {1, 3})
    sp = axis_split(cfg, Stratum.X1)
    assert sp.z == (1, 2) and sp.y == (3,) and sp.x == ()


@pytest.mark.parametrize("k,x,y", [(1, (2,), (3,)), (2, (3,), (2,))])
def test_axis_split_intersection(k, x, y):
    cfg = derive_config(3, {1, 2}, {1, 3})
    sp = axis_split(cfg, Stratum.X12, k=k)
    assert sp.z == (1,) and sp.x == x and sp.y == y


@given(configs())
def test_axis_split_partitions(cfg):
    for stratum in STRATA:
        ks = (1, 2) if stratum is Stratum.X12 else (None,)
        for k in ks:
            sp = axis_split(cfg, stratum, k=k)
            parts = sp.z + sp.x + sp.y
            assert sorted(parts) == list(range(1, cfg.n + 1))
            assert len(set(parts)) == cfg.n
