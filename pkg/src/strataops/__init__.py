"""Operator algebra for a pair of transversally intersecting coordinate
subspaces: generator words, the 18-type classification and 3x3 block
normal form, operator-valued symbols on the four strata, and spectral
verification of the composition calculus."""

from .geometry import AxisSplit, ConfigTriple, Stratum, axis_split, contains, derive_config, meet
from .symexpr import (
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
    SymbolExpr,
    eval_expr,
    freeze_expr,
    symbol,
)
from .algebra import (
    Boundary,
    Coboundary,
    GeneratorType,
    MorMatrix,
    PsiDO,
    Word,
    assemble_matrix,
    compose,
    concat,
    fuse_trace,
    generator_census,
    generator_type,
    identity_matrix,
    localization_stratum,
    order_reduction_atom,
    psido,
    validate_word,
    word_order,
)
from .grids import (
    GridOperator,
    RLambdaParams,
    TorusGrid,
    apply_rlambda,
    box_grid,
    extension_matrix,
    inner,
    manifold_grid,
    norm,
    order_reduction,
    quantize_psido,
    restriction_matrix,
    sobolev_norm,
)
from .opsymbol import (
    OperatorSymbol,
    ProductSpace,
    SymbolPoint,
    atom_symbol,
    compose_symbols,
    model_space,
    morphism_symbol,
    word_symbol,
)
from .verify import (
    GaussianBump,
    TestFunctionPair,
    localization_probe,
    operator_oracle,
    rlambda_residual,
)
from .dsl import DslProgram, parse_dsl, print_dsl

__version__ = "0.1.0"
