"""Removing the dependence on the top of stack 2."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

from ptmrnn.machines import EPS, FullStackRule, MachineError, NameAllocator, StackRule, TwoPda, TwoPdaFull


def reduce_both_stack_dependence(m: TwoPdaFull) -> TwoPda:
    """Turns rules keyed on both stack tops into rules keyed on stack 1 only.

    For each ``(q, top1, top2)`` that has rules, one weight-1 ε rule at
    ``(q, top1)`` pops ``top2`` from stack 2 and pushes it straight back. That
    pop only fires when ``top2`` really is on top, so the rule reveals it while
    leaving the stack unchanged. It leads to a fresh helper state ``q''``, where
    the original rules fire with their own weights and emissions.

    Inside ``q''`` every rule is guarded on ``top2`` so that local
    normalization holds for each possible top of stack 2. A rule that pushes
    onto stack 2 without popping cannot also re-push ``top2``. Its push is
    therefore deferred to one more weight-1 ε step.
    """
    names = NameAllocator(set(m.states))
    states, aux = list(m.states), set(m.aux)
    rules: list[StackRule] = []
    grouped: dict[tuple[str, str, str], list] = defaultdict(list)
    for r in m.rules:
        grouped[r.source, r.top, r.top2].append(r)
    for (q, top, top2), group in sorted(grouped.items()):
        hub = names.fresh(f"{q}/{top}/{top2}/exposed")
        states.append(hub)
        aux.add(hub)
        rules.append(StackRule(q, top, EPS, hub, EPS, EPS, top2, top2, Fraction(1)))
        for r in group:
            if r.pop2 != EPS:
                rules.append(StackRule(hub, r.top, r.emit, r.target, r.pop1, r.push1, r.pop2, r.push2, r.weight))
            elif r.push2 == EPS:
                rules.append(StackRule(hub, r.top, r.emit, r.target, r.pop1, r.push1, top2, top2, r.weight))
            else:
                later = names.fresh(f"{hub}/push")
                states.append(later)
                aux.add(later)
                rules.append(StackRule(hub, r.top, r.emit, later, r.pop1, r.push1, top2, top2, r.weight))
                for g in m.gamma:
                    rules.append(StackRule(later, g, EPS, r.target, EPS, EPS, EPS, r.push2, Fraction(1)))
    return TwoPda(tuple(states), m.sigma, m.gamma, m.initial, m.final, tuple(rules), frozenset(aux), m.name)


def lift_to_full(m: TwoPda) -> TwoPdaFull:
    """Views a guard-free 2PDA as one that ignores the top of stack 2."""
    if any(r.guard is not None for r in m.rules):
        raise MachineError("rules that pop stack 2 already depend on its top")
    rules = [
        FullStackRule(r.source, r.top, x, r.emit, r.target, r.pop1, r.push1, r.pop2, r.push2, r.weight)
        for r in m.rules
        for x in m.gamma
    ]
    return TwoPdaFull(m.states, m.sigma, m.gamma, m.initial, m.final, tuple(rules), m.aux, m.name)

