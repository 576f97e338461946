"""Compiling a Σ-deterministic 2PDA into an Elman RNN language model.

Each 2PDA transition takes four recurrence steps:

1. Consume the sampled symbol. Together with the exposed ``(top1, state)``
   pair, and the top of stack 2 for guarded rules, this lights up exactly one
   rule selector.
2. Compute, for every rule in parallel, what both stack neurons would become.
   Only the selected rule's candidates are non-zero. The old stack values are
   cleared.
3. Add the candidates into the stack neurons, compare them against each
   symbol's threshold to find the new tops, and latch the target state.
4. Expose the one-hot ``(top1, state)`` pair and both stack tops. This is the
   only phase where ``E h`` puts mass on real symbols. In the other phases it
   puts all its mass on ε.

Stack symbols get fixed-width binary codes, with the bottom symbol all zeros.
A symbol push or pop is the composition of its bit pushes or pops, applied as
one affine map (see :mod:`ptmrnn.stackcode`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ptmrnn.machines import (
    BOS,
    BOTTOM,
    EOS,
    EPS,
    MachineError,
    RnnLm,
    StackRule,
    TwoPda,
    emission_distribution,
    is_sigma_deterministic,
    validate,
)
from ptmrnn.stackcode import assign_codes, code_value, encode_symbols

PHASES = 4
EMISSION_PHASE = 3


class NotSigmaDeterministic(MachineError):
    """The source has two rules for the same configuration and emitted symbol."""


@dataclass(frozen=True)
class _Affine:
    slope: Fraction
    offset: Fraction

    def then(self, other: "_Affine") -> "_Affine":
        return _Affine(self.slope * other.slope, other.slope * self.offset + other.offset)


def _stack_map(pop: str, push: str, codes: dict[str, tuple[int, ...]], width: int) -> _Affine:
    scale = Fraction(10**width)
    op = _Affine(Fraction(1), Fraction(0))
    if pop == BOTTOM:
        return op
    if pop != EPS:
        op = op.then(_Affine(scale, Fraction(-code_value(codes[pop]))))
    if push != EPS:
        op = op.then(_Affine(1 / scale, Fraction(code_value(codes[push])) / scale))
    return op


def compile_rnn(m: TwoPda) -> RnnLm:
    """Builds an RNN whose padded generation process mirrors ``m`` path for path.

    Raises:
        NotSigmaDeterministic: If two rules share a configuration and symbol.
        MachineError: If ``m`` is invalid, or if its next-symbol distribution
            at some ``(state, top1)`` depends on the top of stack 2.
    """
    problems = validate(m)
    if problems:
        raise MachineError(f"cannot compile an invalid machine: {problems[0]}")
    if not is_sigma_deterministic(m):
        raise NotSigmaDeterministic(
            "compile_rnn needs a Σ-deterministic 2PDA: some (state, stack top, symbol) has two rules"
        )
    for q, top in m.by_config:
        dists = {tuple(sorted(emission_distribution(m, q, top, x).entries.items())) for x in m.gamma}
        if len(dists) > 1:
            raise MachineError(f"next-symbol distribution at ({q}, {top}) depends on the top of stack 2")

    gamma, states, sigma = m.gamma, m.states, m.sigma
    codes = assign_codes(gamma, BOTTOM)
    width = len(codes[BOTTOM])
    scale = 10**width
    by_value = sorted(gamma, key=lambda c: code_value(codes[c]))
    successor = {c: (by_value[i + 1] if i + 1 < len(by_value) else None) for i, c in enumerate(by_value)}

    selectors: list[StackRule] = list(m.rules)
    for q in states:
        if q == m.final:
            continue
        for c in gamma:
            if (q, c) not in m.by_config:
                selectors.append(StackRule(q, c, EPS, q, EPS, EPS, EPS, EPS, Fraction(1)))

    labels: list[str] = []
    layout: list[tuple[str, int, int]] = []

    def block(name: str, items: list[str]) -> dict[str, int]:
        start = len(labels)
        labels.extend(items)
        layout.append((name, start, len(labels)))
        return {item: start + i for i, item in enumerate(items)}

    stack = block("stack", ["enc1", "enc2"])
    readout = block("readout", [f"top1[{c}]" for c in gamma] + [f"top2[{c}]" for c in gamma])
    state = block("state", [f"state[{q}]" for q in states])
    pair_cols = [(c, q) for c in gamma for q in states]
    pair = block("pair", [f"pair[{c},{q}]" for c, q in pair_cols])
    phase = block("phase", [f"phase{i}" for i in range(1, PHASES + 1)])
    scratch_items = (
        [f"ge1[{c}]" for c in gamma]
        + [f"ge2[{c}]" for c in gamma]
        + [f"sel[{i}]" for i in range(len(selectors))]
        + [f"cand1[{i}]" for i in range(len(selectors))]
        + [f"cand2[{i}]" for i in range(len(selectors))]
    )
    scratch = block("scratch", scratch_items)

    inputs = tuple(sigma) + (EPS, BOS)
    outputs = tuple(sigma) + (EPS, EOS)
    D, R = len(labels), len(inputs)
    U = [[Fraction(0)] * D for _ in range(D)]
    V = [[Fraction(0)] * R for _ in range(D)]
    b = [Fraction(0)] * D
    E = [[Fraction(0)] * D for _ in range(len(outputs))]
    enc1, enc2 = stack["enc1"], stack["enc2"]
    p1, p2, p3, p4 = (phase[f"phase{i}"] for i in range(1, PHASES + 1))
    K = Fraction(scale + 1)

    # Phase counter.
    for src, dst in ((p4, p1), (p1, p2), (p2, p3), (p3, p4)):
        U[dst][src] = Fraction(1)

    # Stack neurons hold, clear after phase 1, then take the selected candidate.
    for which, enc in ((1, enc1), (2, enc2)):
        U[enc][enc] = Fraction(1)
        U[enc][p1] = Fraction(-1)
        for i in range(len(selectors)):
            U[enc][scratch[f"cand{which}[{i}]"]] = Fraction(1)

    # Threshold neurons: ge[c] is 1 iff the new top's code value is at least c's.
    for which in (1, 2):
        for c in gamma:
            row = scratch[f"ge{which}[{c}]"]
            b[row] = Fraction(1 - code_value(codes[c]))
            for i in range(len(selectors)):
                U[row][scratch[f"cand{which}[{i}]"]] = Fraction(scale)
        for c in gamma:
            row = readout[f"top{which}[{c}]"]
            U[row][scratch[f"ge{which}[{c}]"]] = Fraction(1)
            if successor[c] is not None:
                U[row][scratch[f"ge{which}[{successor[c]}]"]] = Fraction(-1)

    for c, q in pair_cols:
        row = pair[f"pair[{c},{q}]"]
        U[row][scratch[f"ge1[{c}]"]] = Fraction(1)
        if successor[c] is not None:
            U[row][scratch[f"ge1[{successor[c]}]"]] = Fraction(-1)
        U[row][state[f"state[{q}]"]] = Fraction(1)
        b[row] = Fraction(-1)

    for q in states:
        row = state[f"state[{q}]"]
        U[row][row] = Fraction(1)
        U[row][p3] = Fraction(-1)

    for i, rule in enumerate(selectors):
        sel = scratch[f"sel[{i}]"]
        U[sel][pair[f"pair[{rule.top},{rule.source}]"]] = Fraction(1)
        V[sel][inputs.index(rule.emit)] = Fraction(1)
        if rule.guard is not None:
            U[sel][readout[f"top2[{rule.guard}]"]] = Fraction(1)
            b[sel] = Fraction(-2)
        else:
            b[sel] = Fraction(-1)
        U[state[f"state[{rule.target}]"]][sel] += 1
        for which, enc, (pop, push) in (
            (1, enc1, (rule.pop1, rule.push1)),
            (2, enc2, (rule.pop2, rule.push2)),
        ):
            op = _stack_map(pop, push, codes, width)
            row = scratch[f"cand{which}[{i}]"]
            U[row][enc] = op.slope
            U[row][sel] = K
            b[row] = op.offset - K

    sym_row = {sym: i for i, sym in enumerate(outputs)}
    for c, q in pair_cols:
        col = pair[f"pair[{c},{q}]"]
        if q == m.final:
            E[sym_row[EOS]][col] = Fraction(1)
        elif (q, c) in m.by_config:
            for sym, w in emission_distribution(m, q, c, BOTTOM).entries.items():
                E[sym_row[sym]][col] = w
        else:
            E[sym_row[EPS]][col] = Fraction(1)
    for col in (p1, p2, p3):
        E[sym_row[EPS]][col] = Fraction(1)

    h0 = [Fraction(0)] * D
    h0[enc1] = h0[enc2] = encode_symbols([BOTTOM], codes)
    h0[scratch[f"ge1[{BOTTOM}]"]] = h0[scratch[f"ge2[{BOTTOM}]"]] = Fraction(1)
    h0[state[f"state[{m.initial}]"]] = Fraction(1)
    h0[p3] = Fraction(1)

    return RnnLm(
        sigma=tuple(sigma),
        labels=tuple(labels),
        inputs=inputs,
        outputs=outputs,
        U=tuple(map(tuple, U)),
        V=tuple(map(tuple, V)),
        b=tuple(b),
        h0=tuple(h0),
        E=tuple(map(tuple, E)),
        layout=tuple(layout),
        phases=PHASES,
        emission_phase=EMISSION_PHASE,
        pair_columns=tuple(pair_cols),
        stack_codes=tuple((c, "".join(map(str, codes[c]))) for c in gamma),
        name=m.name,
    )
