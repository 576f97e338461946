import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import random_qptm, random_sigma_det_2pda
from ptmrnn.fixtures import ALL, load_fixture
from ptmrnn.machines import BOTTOM, EOS, EPS, StackRule, TwoPda, is_real_time
from ptmrnn.simulate import (
    CUTOFF,
    BudgetExceeded,
    StackConfig,
    count_paths,
    enumerate_paths,
    halting_mass,
    initial_config,
    is_halted,
    moves,
    prefix_mass,
    sample,
    semimeasure,
    step,
)

F = Fraction


def loop_machine() -> TwoPda:
    return TwoPda(
        states=("q0", "qf"),
        sigma=("a",),
        gamma=(BOTTOM,),
        initial="q0",
        final="qf",
        rules=(StackRule("q0", BOTTOM, EPS, "q0", EPS, EPS, EPS, EPS, F(1)),),
    )


def one_edge_machine() -> TwoPda:
    return TwoPda(
        states=("q0", "qf"),
        sigma=("a", "b"),
        gamma=(BOTTOM,),
        initial="q0",
        final="qf",
        rules=(StackRule("q0", BOTTOM, "b", "qf", EPS, EPS, EPS, EPS, F(1)),),
    )


def test_step_on_m_geo():
    m = load_fixture("m_geo")
    start = initial_config(m)
    assert start == StackConfig("q0", (BOTTOM,), (BOTTOM,), ())
    after = step(m, start, 0)
    assert after == StackConfig("q0", (BOTTOM,), (BOTTOM,), ("a",))


def test_step_on_m_third_halts_with_b():
    m = load_fixture("m_third")
    b_edge = next(mv for mv in moves(m, initial_config(m)) if mv.emit == "b")
    after = step(m, initial_config(m), b_edge.choice)
    assert after.state == "qf" and after.output == ("b",)
    assert is_halted(m, after)


def test_eps_self_loop_leaves_configuration_unchanged():
    m = loop_machine()
    start = initial_config(m)
    assert step(m, start, 0) == start


def test_enumerate_m_geo():
    paths = enumerate_paths(load_fixture("m_geo"), 3)
    got = sorted((p.yield_, p.weight) for p in paths)
    assert got == [((), F(1, 2)), (("a",), F(1, 4)), (("a", "a"), F(1, 8))]


def test_enumerate_m_rt():
    paths = enumerate_paths(load_fixture("m_rt"), 2)
    assert sorted((p.yield_, p.weight) for p in paths) == [(("a", "b"), F(1, 4)), (("b",), F(1, 2))]


@pytest.mark.parametrize("name", ALL)
def test_zero_steps_give_no_paths(name):
    assert enumerate_paths(load_fixture(name), 0) == []


def test_semimeasure_examples():
    table = semimeasure(load_fixture("m_geo"), 2, 16)
    assert table.masses == {(): F(1, 2), ("a",): F(1, 4), ("a", "a"): F(1, 8)}
    assert all(table.is_exact(s) for s in table.masses)
    third = semimeasure(load_fixture("m_third"), 1, 8)
    assert third.masses == {("b",): F(2, 3)} and third.is_exact(("b",))
    assert third.mass(("a",)) == 0 and third.is_exact(("a",))


def test_exactness_flags_track_live_paths():
    table = semimeasure(load_fixture("m_geo"), 4, 2)
    assert table.is_exact(())
    assert table.is_exact(("a",))
    assert not table.is_exact(("a", "a"))


def test_never_halting_machine():
    table = semimeasure(loop_machine(), None, 10)
    assert table.masses == {} and table.halting_mass == 0
    assert halting_mass(loop_machine(), 50) == 0


def test_halting_mass_examples():
    assert halting_mass(load_fixture("m_geo"), 4) == F(15, 16)
    assert halting_mass(load_fixture("m_rt"), 1) == F(1, 2)


def test_strings_are_listed_length_then_lex():
    table = semimeasure(load_fixture("m_walk"), 3, 12)
    keys = table.strings()
    assert keys == sorted(keys, key=lambda s: (len(s), s))


@pytest.mark.parametrize("name", ALL)
def test_table_agrees_with_paths_and_is_a_semimeasure(name):
    m = load_fixture(name)
    paths = enumerate_paths(m, 10)
    table = semimeasure(m, None, 10)
    by_yield = Counter()
    for p in paths:
        by_yield[p.yield_] += p.weight
    assert dict(by_yield) == table.masses
    assert table.halting_mass == sum(table.masses.values(), F(0)) <= 1
    assert count_paths(m, 10) == Counter((p.weight, p.yield_) for p in paths)
    if is_real_time(m):
        assert all(len(p.transitions) == len(p.yield_) for p in paths)


@given(st.integers(0, 10**6), st.integers(0, 8))
def test_halting_mass_is_monotone_in_the_step_bound(seed, bound):
    m = random_qptm(random.Random(seed))
    assert halting_mass(m, bound) <= halting_mass(m, bound + 1) <= 1


@given(st.integers(0, 10**6))
def test_path_weights_multiply_rule_weights(seed):
    m = random_sigma_det_2pda(random.Random(seed))
    for p in enumerate_paths(m, 6):
        config, weight = initial_config(m), F(1)
        for choice in p.transitions:
            weight *= next(mv.weight for mv in moves(m, config) if mv.choice == choice)
            config = step(m, config, choice)
        assert weight == p.weight and config.output == p.yield_ and is_halted(m, config)


def test_prefix_mass_is_monotone_and_bounded():
    m = load_fixture("m_count")
    values = [prefix_mass(m, ("a",), k) for k in range(6)]
    assert values == sorted(values)
    assert values[-1] == F(1, 2)
    assert prefix_mass(m, (), 0) == 1


def test_budget_is_read_from_the_environment(monkeypatch):
    monkeypatch.setenv("PTMRNN_NODE_BUDGET", "5")
    with pytest.raises(BudgetExceeded):
        semimeasure(load_fixture("m_count"), None, 40)


def test_sampling_is_seeded_and_shaped():
    m = load_fixture("m_rt")
    draws = [sample(m, seed, 64) for seed in range(200)]
    assert draws == [sample(m, seed, 64) for seed in range(200)]
    for d in draws:
        assert d is CUTOFF or (d[-1] == "b" and set(d[:-1]) <= {"a"})


def test_single_edge_machine_always_yields_its_string():
    assert {sample(one_edge_machine(), seed, 5) for seed in range(20)} == {("b",)}


def test_cutoff_marker():
    assert sample(loop_machine(), 0, 10) is CUTOFF


def test_sampling_frequency_matches_enumeration():
    m = load_fixture("m_geo")
    draws = [sample(m, seed, 64) for seed in range(4000)]
    assert abs(draws.count(()) / len(draws) - 0.5) < 0.05


def test_compiled_rnn_step_semantics():
    from ptmrnn.simulate import output_distribution, rnn_phase, rnn_step
    from ptmrnn.transforms import compile_rnn

    rnn = compile_rnn(load_fixture("m_geo"))
    h, dist = rnn_step(rnn, rnn.h0, "BOS")
    assert rnn_phase(rnn, h) == rnn.emission_phase
    assert dist.entries == {"a": F(1, 2), EPS: F(1, 2)}
    # Take the ε-edge; the next three updates are padding.
    for _ in range(3):
        h, dist = rnn_step(rnn, h, EPS)
        assert dist.entries == {EPS: 1}
    h, dist = rnn_step(rnn, h, EPS)
    assert dist.entries == {EOS: 1}
    assert output_distribution(rnn, h).entries == {EOS: 1}
