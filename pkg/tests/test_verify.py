import random
from fractions import Fraction

import numpy as np
import pytest

from strataops.algebra import (
    Boundary,
    Coboundary,
    GeneratorType,
    Word,
    codomain_order,
    concat,
    generator_type,
    psido,
    validate_word,
)
from strataops.errors import DegenerateFit
from strataops.geometry import Stratum, derive_config
from strataops.grids import RLambdaParams, norm
from strataops.symexpr import Bracket, Const
from strataops.verify import (
    GaussianBump,
    TestFunctionPair,
    away_cutoff,
    census_report,
    cutoff_vanishes_near,
    fuse_operator_check,
    fuse_symbol_check,
    homomorphism_check,
    localization_probe,
    localization_suite,
    near_cutoff,
    operator_oracle,
    random_word,
    representative_words,
    rlambda_case_words,
    rlambda_residual,
    rlambda_unitarity_check,
)

CFG = derive_config(3, {1, 2}, {1, 3})
X0, X1 = Stratum.X0, Stratum.X1


def test_oracle_identity():
    w = Word(atoms=(psido(CFG, X0, Const(1), 0),), domain_order=Fraction(0))
    op = operator_oracle(w, CFG, 8)
    rng = np.random.default_rng(0)
    u = op.dom.random_function(rng)
    assert np.allclose(op.apply(u), u, atol=1e-12)


def test_oracle_concatenation_is_operator_product():
    rng = random.Random(5)
    for _ in range(20):
        w2 = random_word(CFG, rng, n_atoms=2)
        w1 = random_word(
            CFG, rng, start_manifold=w2.codomain,
            start_order=codomain_order(w2, CFG), n_atoms=2,
        )
        w = concat(w1, w2, CFG)
        op1 = operator_oracle(w1, CFG, 6)
        op2 = operator_oracle(w2, CFG, 6)
        op = operator_oracle(w, CFG, 6)
        u = op2.dom.random_function(np.random.default_rng(1))
        a = op.apply(u)
        b = op1.apply(op2.apply(u))
        assert np.allclose(a, b, atol=1e-10 * max(1.0, np.abs(b).max()))


def test_fuse_operator_check_mini():
    rep = fuse_operator_check(CFG, ns=(16, 32), n_inputs=5)
    errs = rep["values"]["max_rel_errors"]
    assert errs[1] < errs[0]


def test_fuse_symbol_check_passes():
    rep = fuse_symbol_check(CFG)
    assert rep["pass"]


def test_homomorphism_check_mini():
    rep = homomorphism_check(CFG, n_pairs=5, n_points=2, m=8, seed=1)
    assert rep["pass"]
    assert rep["values"]["max_rel_error"] <= 1e-10


def test_census_report():
    rep = census_report(CFG)
    assert rep["pass"]
    assert len(rep["values"]) == 18


# ---------------------------------------------------------------------------
# scaling family


def test_rlambda_identity_word_residual_is_zero():
    w = Word(atoms=(psido(CFG, X0, Const(1), 0),), domain_order=Fraction(0))
    params = RLambdaParams(
        k=3, nu=0, z0=(0.3, -0.2, 0.3), zeta0=(2.0, -1.5, 2.0),
        lambdas=(4.0, 16.0), half_width=10.0, n_points=32,
    )
    rep = rlambda_residual(w, CFG, TestFunctionPair(u=GaussianBump(dim=3)), params)
    assert max(rep["values"]["residuals"]) <= 1e-12


def test_rlambda_case_words_are_l2_morphisms():
    for name, w in rlambda_case_words(CFG).items():
        chain = validate_word(w, CFG)
        assert chain[0] == 0 and chain[-1] == 0, name


def test_rlambda_case_i_decays():
    w = rlambda_case_words(CFG)["i-X1"]
    params = RLambdaParams(
        k=2, nu=0, z0=(0.3, -0.2), zeta0=(2.0, -1.5),
        lambdas=(4.0, 16.0, 64.0), half_width=10.0, n_points=48,
    )
    rep = rlambda_residual(w, CFG, TestFunctionPair(u=GaussianBump(dim=2)), params)
    res = rep["values"]["residuals"]
    assert res[0] > res[1] > res[2]
    assert res[2] <= 0.1 * rep["values"]["input_norm"]


def test_rlambda_case_ii_decays():
    w = rlambda_case_words(CFG)["ii"]
    assert generator_type(w) is GeneratorType.B1
    params = RLambdaParams(
        k=2, nu=1, z0=(0.3, -0.2), zeta0=(2.0, -1.5),
        lambdas=(4.0, 16.0, 64.0), half_width=10.0, n_points=48,
    )
    pair = TestFunctionPair(u=GaussianBump(dim=2), v=GaussianBump(dim=1))
    rep = rlambda_residual(w, CFG, pair, params)
    res = rep["values"]["residuals"]
    assert res[0] > res[1] > res[2]
    assert res[2] <= 0.1 * rep["values"]["input_norm"]


def test_rlambda_unitarity_check_report():
    rep = rlambda_unitarity_check()
    assert rep["pass"]


# ---------------------------------------------------------------------------
# localization probes


def test_probe_constant_cutoff_keeps_order():
    w = Word(atoms=(psido(CFG, X0, Const(1), 0),), domain_order=Fraction(0))
    res = localization_probe(w, CFG, Const(1), n_points=16)
    assert abs(res.uncut_order - res.cut_order) <= 0.1


def test_probe_away_cutoff_drops_coboundary_word():
    w = representative_words(CFG)[GeneratorType.C1]
    cut = away_cutoff(CFG, X1)
    res = localization_probe(w, CFG, cut, n_points=32, require_vanishing=True)
    assert res.drop >= 0.7


def test_probe_requires_vanishing_when_asked():
    w = representative_words(CFG)[GeneratorType.C1]
    with pytest.raises(DegenerateFit):
        localization_probe(w, CFG, Const(1), n_points=16, require_vanishing=True)


def test_cutoff_vanishing_check():
    assert cutoff_vanishes_near(away_cutoff(CFG, X1), CFG, X1)
    assert not cutoff_vanishes_near(near_cutoff(CFG), CFG, X1)
    assert not cutoff_vanishes_near(away_cutoff(CFG, Stratum.X2), CFG, X1)


def test_representatives_cover_all_types():
    words = representative_words(CFG)
    assert set(words) == set(GeneratorType)
    for t, w in words.items():
        validate_word(w, CFG)
        assert generator_type(w) is t
