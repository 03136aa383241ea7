from fractions import Fraction

import pytest

from strataops.algebra import GeneratorType, generator_type
from strataops.dsl import parse_dsl, print_dsl
from strataops.errors import ParseError, ValidationError
from strataops.geometry import Stratum

from dslcorpus import corpus

HEADER = "config n=3 S1={1,2} S2={1,3} transversal=true orders=(0,0,0)\n"


def test_parse_boundary_morphism():
    text = HEADER + "M = Op[X1]{1, 0} ; bd1 ; Op[X0]{(1 + xi3^2)^(-2), -2} @order 3\n"
    p = parse_dsl(text)
    d = p.definition("M")
    assert len(d.words) == 1
    w = d.words[0]
    assert generator_type(w) is GeneratorType.B1
    assert w.domain_order == 3
    assert w.atoms[2].symbol.order == -2


def test_invalid_chain_is_a_validation_error():
    with pytest.raises(ValidationError):
        parse_dsl(HEADER + "M = bd1 ; cob1\n")


def test_orders_default_to_config_spaces():
    text = (
        "config n=3 S1={1,2} S2={1,3} transversal=true orders=(1,1/2,0)\n"
        "B = bd1 ; Op[X0]{1, 0}\n"
    )
    w = parse_dsl(text).definition("B").words[0]
    assert w.domain_order == Fraction(1)


def test_sum_definition_lands_in_two_cells():
    text = (
        "config n=3 S1={1,2} S2={1,3} transversal=true orders=(1,1/2,1/2)\n"
        "S = bd1 ; Op[X0]{1, 0} + Op[X1]{(1+xi1^2+xi2^2)^(1/2), 1/2}\n"
    )
    words = parse_dsl(text).definition("S").words
    assert {generator_type(w) for w in words} == {GeneratorType.B1, GeneratorType.D1}


def test_order_override_requires_single_domain():
    text = HEADER + "S = Op[X0]{1, 0} + Op[X1]{1, 0} @order 1\n"
    with pytest.raises(ValidationError):
        parse_dsl(text)


def test_parse_error_carries_location():
    with pytest.raises(ParseError) as exc:
        parse_dsl(HEADER + "M = Op[X9]{1, 0}\n")
    assert exc.value.line == 2


def test_unknown_character_rejected():
    with pytest.raises(ParseError):
        parse_dsl(HEADER + "M = Op[X0]{1 ? 2, 0}\n")


def test_fractional_power_needs_bracket_base():
    with pytest.raises(ParseError):
        parse_dsl(HEADER + "M = Op[X0]{cos(x1)^(1/2), 0}\n")


def test_duplicate_definition_rejected():
    with pytest.raises(ParseError):
        parse_dsl(HEADER + "M = Op[X0]{1, 0}\nM = Op[X0]{1, 0}\n")


def test_command_with_unknown_target_rejected():
    with pytest.raises(ValidationError):
        parse_dsl(HEADER + "classify Q\n")


def test_non_transversal_config():
    p = parse_dsl("config n=4 S1={1,2} S2={1,3} transversal=false orders=(0,0,0)\n")
    assert not p.cfg.transversal
    assert p.cfg.nu3 == 3


@pytest.mark.parametrize("text", corpus())
def test_print_parse_round_trip(text):
    p = parse_dsl(text)
    assert parse_dsl(print_dsl(p)) == p


def test_corpus_size_is_at_least_twenty():
    assert len(corpus()) >= 20
