"""Passes between the two tape-machine classes.

* ``ptm_to_qptm`` turns the two coin-flip transition functions into weighted rules.
* ``binarize`` splits wide branchings into a chain of at most two-way branchings.
* ``dyadicize`` simulates each rational two-way branch with fair coin flips that
  follow the binary expansion of its weight.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

from ptmrnn.machines import EPS, MachineError, NameAllocator, Ptm, Qptm, TapeAction, TapeRule
from ptmrnn.numerics import HALF, binary_expansion


def ptm_to_qptm(m: Ptm) -> tuple[Qptm, bool]:
    """Reads a PTM as a QPTM.

    Returns:
        ``(qptm, strong)``. ``strong`` is false when some configuration had
        ``delta1 == delta2``. Those two coin outcomes merge into one weight-1
        rule, so paths no longer correspond one to one.
    """
    rules = []
    merged = False
    for key in sorted(set(m.delta1) | set(m.delta2)):
        first, second = m.delta1.get(key), m.delta2.get(key)
        if first == second:
            merged = True
            rules.append(_rule(key, first, Fraction(1)))
            continue
        for action in (first, second):
            if action is not None:
                rules.append(_rule(key, action, HALF))
    out = Qptm(m.states, m.sigma, m.gamma, m.initial, m.final, tuple(rules), m.blank, m.aux, m.name)
    return out, not merged


def _rule(key: tuple[str, str], a: TapeAction, weight: Fraction) -> TapeRule:
    return TapeRule(key[0], key[1], a.emit, a.target, a.write, a.move, weight)


def binarize(m: Qptm) -> Qptm:
    """Limits every configuration to at most two outgoing rules.

    A configuration with rules ``t_1 .. t_k`` (``k > 2``) keeps ``t_1`` at weight
    ``p``. Its other branch is an ε, stay-in-place rule of weight ``1 - p`` into
    a fresh auxiliary state. That state holds ``t_2 .. t_k`` rescaled by
    ``1 / (1 - p)`` and is split again if still too wide.
    """
    names = NameAllocator(set(m.states))
    states, aux = list(m.states), set(m.aux)
    rules: list[TapeRule] = []
    for (q, g), group in sorted(m.by_config.items()):
        pending = [r for _, r in group]
        source = q
        while len(pending) > 2:
            head, rest = pending[0], pending[1:]
            remainder = 1 - head.weight
            fresh = names.fresh(f"{q}/{g}/split")
            states.append(fresh)
            aux.add(fresh)
            rules.append(_retarget(head, source))
            rules.append(TapeRule(source, g, EPS, fresh, g, "N", remainder))
            pending = [_retarget(r, fresh, r.weight / remainder) for r in rest]
            source = fresh
        rules.extend(_retarget(r, source) for r in pending)
    return Qptm(tuple(states), m.sigma, m.gamma, m.initial, m.final, tuple(rules), m.blank, frozenset(aux), m.name)


def _retarget(r: TapeRule, source: str, weight: Fraction | None = None) -> TapeRule:
    return TapeRule(source, r.read, r.emit, r.target, r.write, r.move, r.weight if weight is None else weight)


def dyadicize(m: Qptm) -> Ptm:
    """Replaces every weighted branch by fair coin flips.

    Take a branch ``(p, 1 - p)`` with ``p != 1/2``, and let ``b_1 b_2 ...`` be the
    binary digits of ``p``. At gadget position ``i`` one flip is made: heads
    (``delta1``) takes the left rule if ``b_i = 1`` and tails (``delta2``) takes
    the right rule if ``b_i = 0``. The other outcome moves on to position
    ``i + 1`` with an ε, stay-in-place step. A dyadic ``p`` ends with a flip
    that takes the left rule on heads and the right rule on tails. A periodic
    expansion loops back to the start of its period. Gadget states are
    ordinary states, so step counts differ from the source and only the
    semimeasure is preserved.

    Configurations with no rules become ε self-loops, which never halt, as
    required for total transition functions.

    Raises:
        MachineError: If some configuration has more than two rules.
    """
    names = NameAllocator(set(m.states))
    states = list(m.states)
    delta1: dict[tuple[str, str], TapeAction] = {}
    delta2: dict[tuple[str, str], TapeAction] = {}

    for (q, g), group in sorted(m.by_config.items()):
        rules = [r for _, r in group]
        if len(rules) > 2:
            raise MachineError(f"configuration ({q}, {g}) has {len(rules)} rules; binarize first")
        if len(rules) == 1:
            delta1[q, g] = delta2[q, g] = _action(rules[0])
            continue
        left, right = rules
        if left.weight == HALF:
            delta1[q, g], delta2[q, g] = _action(left), _action(right)
            continue
        digits, cycle = binary_expansion(left.weight)
        gadget = [q] + [names.fresh(f"{q}/{g}/coin{i}") for i in range(1, len(digits))]
        states.extend(gadget[1:])
        for i, (s, bit) in enumerate(zip(gadget, digits)):
            last = i == len(digits) - 1
            onward = gadget[cycle] if last and cycle is not None else (None if last else gadget[i + 1])
            go_on = TapeAction(onward, g, EPS, "N") if onward is not None else None
            if onward is None:
                delta1[s, g], delta2[s, g] = _action(left), _action(right)
            elif bit:
                delta1[s, g], delta2[s, g] = _action(left), go_on
            else:
                delta1[s, g], delta2[s, g] = go_on, _action(right)

    for q in states:
        if q == m.final:
            continue
        for g in m.gamma:
            if (q, g) not in delta1:
                loop = TapeAction(q, g, EPS, "N")
                delta1[q, g] = delta2[q, g] = loop
    return Ptm(tuple(states), m.sigma, m.gamma, m.initial, m.final, delta1, delta2, m.blank, frozenset(), m.name)


def _action(r: TapeRule) -> TapeAction:
    return TapeAction(r.target, r.write, r.emit, r.move)


def fan_out(m: Qptm) -> dict[tuple[str, str], int]:
    """Number of rules per configuration."""
    counts: dict[tuple[str, str], int] = defaultdict(int)
    for r in m.rules:
        counts[r.source, r.read] += 1
    return dict(counts)
