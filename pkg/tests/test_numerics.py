import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptmrnn.numerics import (
    FiniteDist,
    RationalSyntaxError,
    binary_expansion,
    draw_index,
    is_dyadic,
    mass_sum,
    rat_format,
    rat_parse,
    saturated_sigmoid,
)

rationals = st.fractions()
unit_open = st.fractions(min_value=0, max_value=1, max_denominator=10**4).filter(lambda p: 0 < p < 1)


@pytest.mark.parametrize(
    "text, value",
    [("1/2", Fraction(1, 2)), ("4/6", Fraction(2, 3)), ("-7", Fraction(-7)), ("0", Fraction(0)), ("3/1", Fraction(3))],
)
def test_rat_parse_accepts_canonical_and_reducible_literals(text, value):
    assert rat_parse(text) == value


@pytest.mark.parametrize("text", ["1/0", "0.5", " 1/2", "1/2 ", "+1", "1e3", "1/-2", "", "a/b", "1//2"])
def test_rat_parse_rejects_everything_else(text):
    with pytest.raises(RationalSyntaxError):
        rat_parse(text)


def test_zero_denominator_message_names_the_problem():
    with pytest.raises(RationalSyntaxError, match="zero denominator"):
        rat_parse("1/0")


@given(rationals)
def test_format_then_parse_is_identity(r):
    assert rat_parse(rat_format(r)) == r


@given(rationals)
def test_sigmoid_clamps_to_unit_interval(x):
    y = saturated_sigmoid(x)
    assert 0 <= y <= 1
    if 0 <= x <= 1:
        assert y == x


def test_sigmoid_examples():
    assert saturated_sigmoid(Fraction(-3, 2)) == 0
    assert saturated_sigmoid(Fraction(7, 10)) == Fraction(7, 10)
    assert saturated_sigmoid(5) == 1


def test_is_dyadic_examples():
    assert is_dyadic(Fraction(5, 16))
    assert is_dyadic(Fraction(3))
    assert not is_dyadic(Fraction(1, 3))
    assert not is_dyadic(Fraction(3, 10))


def test_binary_expansion_of_one_third_is_periodic_01():
    assert binary_expansion(Fraction(1, 3)) == ([0, 1], 0)


def test_binary_expansion_of_dyadic_terminates():
    assert binary_expansion(Fraction(5, 8)) == ([1, 0, 1], None)


@given(unit_open)
def test_binary_expansion_reconstructs_value(p):
    digits, cycle = binary_expansion(p)
    head = sum(Fraction(d, 2 ** (i + 1)) for i, d in enumerate(digits))
    if cycle is None:
        assert head == p
        assert digits[-1] == 1
    else:
        period = len(digits) - cycle
        block = sum(Fraction(d, 2 ** (i + 1)) for i, d in enumerate(digits) if i >= cycle)
        # The repeating tail is a geometric series with ratio 2^-period.
        prefix = head - block
        assert prefix + block / (1 - Fraction(1, 2**period)) == p


@given(unit_open)
def test_non_dyadic_iff_cycle(p):
    _, cycle = binary_expansion(p)
    assert (cycle is None) == is_dyadic(p)


def test_draw_index_is_reproducible_and_in_range():
    weights = [Fraction(1, 3), Fraction(1, 6), Fraction(1, 2)]
    a = [draw_index(random.Random(7), weights) for _ in range(5)]
    b = [draw_index(random.Random(7), weights) for _ in range(5)]
    assert a == b
    rng = random.Random(1)
    draws = [draw_index(rng, weights) for _ in range(6000)]
    assert set(draws) <= {0, 1, 2}
    for i, w in enumerate(weights):
        assert abs(draws.count(i) / len(draws) - float(w)) < 0.03


def test_draw_index_never_picks_zero_weight():
    rng = random.Random(3)
    assert all(draw_index(rng, [Fraction(0), Fraction(1)]) == 1 for _ in range(200))


def test_draw_index_rejects_unnormalized_weights():
    with pytest.raises(ValueError):
        draw_index(random.Random(0), [Fraction(1, 2)])


def test_finite_dist_checks_mass_and_support():
    d = FiniteDist({"a": Fraction(1, 2), "b": Fraction(0)}, frozenset({"a", "b"}))
    assert d["a"] == Fraction(1, 2) and d["b"] == 0
    assert d.total == Fraction(1, 2) and not d.normalized
    assert d.support() == ["a"]
    with pytest.raises(ValueError):
        FiniteDist({"a": Fraction(2, 3), "b": Fraction(2, 3)})
    with pytest.raises(ValueError):
        FiniteDist({"c": Fraction(1)}, frozenset({"a"}))
    with pytest.raises(ValueError):
        FiniteDist({"a": Fraction(-1, 2)})


@given(st.lists(rationals, max_size=8))
def test_mass_sum_is_exact(values):
    assert mass_sum(values) == sum(values, Fraction(0))
    assert isinstance(mass_sum(values), Fraction)
