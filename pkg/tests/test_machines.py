from dataclasses import replace
from fractions import Fraction

import pytest

from ptmrnn.fixtures import ALL, load_fixture
from ptmrnn.machines import (
    BLANK,
    BOTTOM,
    EOS,
    EPS,
    NameAllocator,
    Ptm,
    Qptm,
    StackRule,
    TapeAction,
    TapeRule,
    TwoPda,
    advisories,
    emission_distribution,
    is_deterministic,
    is_rd,
    is_real_time,
    is_sigma_deterministic,
    validate,
)

H = Fraction(1, 2)


def two_pda(rules, states=("q0", "qf"), gamma=(BOTTOM,), sigma=("a", "b")):
    return TwoPda(states=states, sigma=sigma, gamma=gamma, initial="q0", final="qf", rules=tuple(rules))


def geo_with_eps_weight(w):
    return two_pda(
        [
            StackRule("q0", BOTTOM, "a", "q0", EPS, EPS, EPS, EPS, H),
            StackRule("q0", BOTTOM, EPS, "qf", EPS, EPS, EPS, EPS, w),
        ]
    )


@pytest.mark.parametrize("name", ALL)
def test_every_fixture_validates(name):
    assert validate(load_fixture(name)) == []


def test_normalization_violation_quotes_the_sum():
    problems = validate(geo_with_eps_weight(Fraction(1, 3)))
    assert len(problems) == 1
    assert problems[0].config == ("q0", BOTTOM)
    assert problems[0].total == Fraction(5, 6)
    assert "sum 5/6" in str(problems[0])


def test_unreachable_state_is_an_advisory_not_a_violation():
    m = two_pda(
        [StackRule("q0", BOTTOM, "a", "qf", EPS, EPS, EPS, EPS, Fraction(1))],
        states=("q0", "q9", "qf"),
    )
    assert validate(m) == []
    assert any("q9" in note for note in advisories(m))


def test_zero_weight_rules_are_dropped():
    m = two_pda(
        [
            StackRule("q0", BOTTOM, "a", "q0", EPS, EPS, EPS, EPS, H),
            StackRule("q0", BOTTOM, "a", "qf", EPS, EPS, EPS, EPS, Fraction(0)),
            StackRule("q0", BOTTOM, EPS, "qf", EPS, EPS, EPS, EPS, H),
        ]
    )
    assert len(m.rules) == 2
    assert is_sigma_deterministic(m)


def test_two_live_rules_for_one_symbol_break_sigma_determinism():
    m = two_pda(
        [
            StackRule("q0", BOTTOM, "a", "q0", EPS, EPS, EPS, EPS, Fraction(1, 4)),
            StackRule("q0", BOTTOM, "a", "qf", EPS, EPS, EPS, EPS, Fraction(1, 4)),
            StackRule("q0", BOTTOM, "b", "qf", EPS, EPS, EPS, EPS, H),
        ]
    )
    assert validate(m) == []
    assert not is_sigma_deterministic(m)


@pytest.mark.parametrize(
    "name, sigma_det, det, real_time, rd",
    [
        ("m_geo", True, False, False, False),
        ("m_rt", True, True, True, True),
        ("m_third", True, True, True, True),
        ("m_count", True, False, False, False),
        ("m_coin", True, True, True, True),
    ],
)
def test_predicates_on_fixtures(name, sigma_det, det, real_time, rd):
    m = load_fixture(name)
    assert (is_sigma_deterministic(m), is_deterministic(m), is_real_time(m), is_rd(m)) == (
        sigma_det,
        det,
        real_time,
        rd,
    )


def test_lone_weight_one_eps_rule_is_deterministic():
    m = two_pda([StackRule("q0", BOTTOM, EPS, "qf", EPS, EPS, EPS, EPS, Fraction(1))])
    assert is_deterministic(m)
    assert not is_real_time(m)


def test_empty_rule_table_is_vacuously_real_time():
    m = two_pda([])
    assert is_real_time(m)


def test_guarded_rules_are_normalized_per_stack_two_top():
    m = load_fixture("m_six")
    assert validate(m) == []
    # Dropping one guarded alternative leaves that stack-2 top with mass 0,
    # which is a stuck configuration rather than a violation.
    trimmed = replace(m, rules=tuple(r for r in m.rules if not (r.source == "q3" and r.guard == "X")))
    assert validate(trimmed) == []
    # Doubling up a guard is a violation for that top only.
    extra = StackRule("q3", "Y", "a", "qf", EPS, EPS, "X", "X", Fraction(1, 2))
    bad = replace(m, rules=m.rules + (extra,))
    problems = validate(bad)
    assert [p.config for p in problems] == [("q3", "Y", "X")]
    assert problems[0].total == Fraction(3, 2)


@pytest.mark.parametrize(
    "rule, fragment",
    [
        (StackRule("q0", BOTTOM, "a", "qf", BOTTOM, EPS, EPS, EPS, Fraction(1)), "destroys"),
        (StackRule("q0", BOTTOM, "a", "qf", EPS, BOTTOM, EPS, EPS, Fraction(1)), "pushes"),
        (StackRule("q0", BOTTOM, "z", "qf", EPS, EPS, EPS, EPS, Fraction(1)), "output alphabet"),
        (StackRule("q0", BOTTOM, "a", "q7", EPS, EPS, EPS, EPS, Fraction(1)), "undeclared state"),
        (StackRule("q0", BOTTOM, "a", "qf", EPS, "Z", EPS, EPS, Fraction(1)), "outside the stack alphabet"),
    ],
)
def test_structural_violations(rule, fragment):
    problems = validate(two_pda([rule]))
    assert any(fragment in str(p) for p in problems), problems


def test_reserved_symbols_and_final_rules_are_rejected():
    m = TwoPda(
        states=("q0", "qf"),
        sigma=("a", EOS),
        gamma=(BOTTOM,),
        initial="q0",
        final="qf",
        rules=(
            StackRule("q0", BOTTOM, "a", "qf", EPS, EPS, EPS, EPS, Fraction(1)),
            StackRule("qf", BOTTOM, "a", "qf", EPS, EPS, EPS, EPS, Fraction(1)),
        ),
    )
    text = " ".join(map(str, validate(m)))
    assert "reserved" in text and "final state has an outgoing rule" in text


def test_ptm_tables_must_be_total():
    m = Ptm(
        states=("q0", "qf"),
        sigma=("a",),
        gamma=(BLANK, "X"),
        initial="q0",
        final="qf",
        delta1={("q0", BLANK): TapeAction("qf", BLANK, "a", "N")},
        delta2={("q0", BLANK): TapeAction("qf", BLANK, "a", "N")},
    )
    assert {str(p) for p in validate(m)} == {"(q0, X): delta1 is undefined", "(q0, X): delta2 is undefined"}


def test_ptm_rules_are_two_halves():
    m = load_fixture("m_coin")
    assert [r.weight for r in m.rules] == [H, H]


def test_qptm_normalization():
    m = Qptm(
        states=("q0", "qf"),
        sigma=("a",),
        gamma=(BLANK,),
        initial="q0",
        final="qf",
        rules=(TapeRule("q0", BLANK, "a", "qf", BLANK, "N", Fraction(2, 3)),),
    )
    (problem,) = validate(m)
    assert problem.total == Fraction(2, 3)


def test_emission_distribution():
    m = load_fixture("m_geo")
    dist = emission_distribution(m, "q0", BOTTOM, BOTTOM)
    assert dist.entries == {"a": H, EPS: H}
    assert emission_distribution(m, "qf", BOTTOM, BOTTOM).entries == {EOS: 1}


def test_name_allocator_avoids_clashes():
    names = NameAllocator({"q", "q'1"})
    assert names.fresh("q") == "q'2"
    assert names.fresh("r") == "r"
    assert names.fresh("r") == "r'1"
