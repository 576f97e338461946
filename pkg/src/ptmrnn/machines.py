"""Machine definitions and the structural predicates that gate compiler passes.

Four machine classes share one vocabulary:

* :class:`Ptm` keeps two explicit transition functions, each taken with
  probability 1/2.
* :class:`Qptm` has finitely many rationally weighted tape rules per
  ``(state, read symbol)`` configuration.
* :class:`TwoPda` is a weighted two-stack pushdown automaton whose rules are
  keyed on the state and the top of stack 1.
* :class:`TwoPdaFull` also keys its rules on the top of stack 2.

A :class:`TwoPda` rule that pops a concrete symbol from stack 2 only fires when
that symbol is on top of stack 2. Local normalization is therefore checked once
per possible top of stack 2. Machines without stack-2 pops reduce to the usual
"weights at ``(q, top1)`` sum to 1" rule.

All machines are immutable. Zero-weight rules are dropped on construction and
everything else is sorted, so two machines with the same content compare equal.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union

from ptmrnn.numerics import ZERO, FiniteDist, mass_sum

EPS = "ε"
EOS = "EOS"
BOS = "BOS"
BOTTOM = "⊥"
BLANK = "⊔"
MOVES = ("L", "N", "R")
RESERVED = frozenset({EPS, EOS, BOS})


class MachineError(ValueError):
    """Raised when a machine is structurally unusable for an operation."""


@dataclass(frozen=True, order=True)
class TapeRule:
    """One weighted tape transition.

    When in ``source`` reading ``read``: write ``write``, emit ``emit``
    (``EPS`` for nothing), move the head by ``move`` and enter ``target``.
    """

    source: str
    read: str
    emit: str
    target: str
    write: str
    move: str
    weight: Fraction


@dataclass(frozen=True, order=True)
class TapeAction:
    """The unweighted outcome of one PTM transition function at a configuration."""

    target: str
    write: str
    emit: str
    move: str


@dataclass(frozen=True, order=True)
class StackRule:
    """One weighted 2PDA transition keyed on ``(source, top)``.

    ``pop1``/``pop2`` are ``EPS`` or the symbol to remove; ``push1``/``push2``
    are ``EPS`` or the symbol to add. A non-``EPS`` ``pop2`` doubles as a guard
    on the top of stack 2.
    """

    source: str
    top: str
    emit: str
    target: str
    pop1: str
    push1: str
    pop2: str
    push2: str
    weight: Fraction

    @property
    def guard(self) -> str | None:
        return None if self.pop2 == EPS else self.pop2


@dataclass(frozen=True, order=True)
class FullStackRule:
    """A 2PDA transition keyed on the state and both stack tops."""

    source: str
    top: str
    top2: str
    emit: str
    target: str
    pop1: str
    push1: str
    pop2: str
    push2: str
    weight: Fraction


def _sorted_unique(items: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(items)))


def _freeze_common(obj, rules) -> None:
    kept = tuple(sorted(r for r in rules if r.weight != 0))
    object.__setattr__(obj, "rules", kept)
    object.__setattr__(obj, "states", _sorted_unique(obj.states))
    object.__setattr__(obj, "sigma", _sorted_unique(obj.sigma))
    object.__setattr__(obj, "gamma", _sorted_unique(obj.gamma))
    object.__setattr__(obj, "aux", frozenset(obj.aux))


@dataclass(frozen=True)
class Qptm:
    """A rationally weighted probabilistic Turing machine.

    Attributes:
        states: State names.
        sigma: Output alphabet, without ``EPS``.
        gamma: Tape alphabet, including ``blank``.
        initial: Start state.
        final: Halting state; it has no outgoing rules.
        rules: Weighted tape rules.
        blank: The blank tape symbol.
        aux: Helper states introduced by a compiler pass. Entering one does
            not count as a step of the simulated machine.
        name: Identifier used in reports.
    """

    states: tuple[str, ...]
    sigma: tuple[str, ...]
    gamma: tuple[str, ...]
    initial: str
    final: str
    rules: tuple[TapeRule, ...]
    blank: str = BLANK
    aux: frozenset[str] = frozenset()
    name: str = "qptm"

    def __post_init__(self) -> None:
        _freeze_common(self, self.rules)

    @cached_property
    def by_config(self) -> dict[tuple[str, str], tuple[tuple[int, TapeRule], ...]]:
        table: dict[tuple[str, str], list[tuple[int, TapeRule]]] = defaultdict(list)
        for tid, rule in enumerate(self.rules):
            table[rule.source, rule.read].append((tid, rule))
        return {k: tuple(v) for k, v in table.items()}


@dataclass(frozen=True)
class Ptm:
    """A probabilistic Turing machine with two transition functions.

    Each step follows ``delta1`` or ``delta2`` with probability 1/2. Both maps
    are keyed on ``(state, read symbol)``. They must cover every
    configuration of a non-final state, and the final state has no entries.
    """

    states: tuple[str, ...]
    sigma: tuple[str, ...]
    gamma: tuple[str, ...]
    initial: str
    final: str
    delta1: dict[tuple[str, str], TapeAction]
    delta2: dict[tuple[str, str], TapeAction]
    blank: str = BLANK
    aux: frozenset[str] = frozenset()
    name: str = "ptm"

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", _sorted_unique(self.states))
        object.__setattr__(self, "sigma", _sorted_unique(self.sigma))
        object.__setattr__(self, "gamma", _sorted_unique(self.gamma))
        object.__setattr__(self, "delta1", dict(sorted(self.delta1.items())))
        object.__setattr__(self, "delta2", dict(sorted(self.delta2.items())))
        object.__setattr__(self, "aux", frozenset(self.aux))

    @cached_property
    def rules(self) -> tuple[TapeRule, ...]:
        """Both transition functions as weight-1/2 rules, ``delta1`` first."""
        half = Fraction(1, 2)
        out = []
        for delta in (self.delta1, self.delta2):
            for (q, g), a in delta.items():
                out.append(TapeRule(q, g, a.emit, a.target, a.write, a.move, half))
        return tuple(out)

    @cached_property
    def by_config(self) -> dict[tuple[str, str], tuple[tuple[int, TapeRule], ...]]:
        table: dict[tuple[str, str], list[tuple[int, TapeRule]]] = defaultdict(list)
        for tid, rule in enumerate(self.rules):
            table[rule.source, rule.read].append((tid, rule))
        return {k: tuple(v) for k, v in table.items()}


@dataclass(frozen=True)
class TwoPda:
    """A weighted two-stack pushdown automaton keyed on ``(state, top of stack 1)``.

    Both stacks start as ``[BOTTOM]``. ``BOTTOM`` may only be popped if it is
    pushed straight back.
    """

    states: tuple[str, ...]
    sigma: tuple[str, ...]
    gamma: tuple[str, ...]
    initial: str
    final: str
    rules: tuple[StackRule, ...]
    aux: frozenset[str] = frozenset()
    name: str = "2pda"

    def __post_init__(self) -> None:
        _freeze_common(self, self.rules)

    @cached_property
    def by_config(self) -> dict[tuple[str, str], tuple[tuple[int, StackRule], ...]]:
        table: dict[tuple[str, str], list[tuple[int, StackRule]]] = defaultdict(list)
        for tid, rule in enumerate(self.rules):
            table[rule.source, rule.top].append((tid, rule))
        return {k: tuple(v) for k, v in table.items()}

    def enabled(self, state: str, top1: str, top2: str) -> tuple[tuple[int, StackRule], ...]:
        """Rules that can fire given both stack tops."""
        return tuple(
            (tid, r) for tid, r in self.by_config.get((state, top1), ()) if r.pop2 in (EPS, top2)
        )


@dataclass(frozen=True)
class TwoPdaFull:
    """A weighted 2PDA whose rules are keyed on ``(state, top1, top2)``."""

    states: tuple[str, ...]
    sigma: tuple[str, ...]
    gamma: tuple[str, ...]
    initial: str
    final: str
    rules: tuple[FullStackRule, ...]
    aux: frozenset[str] = frozenset()
    name: str = "2pda-full"

    def __post_init__(self) -> None:
        _freeze_common(self, self.rules)

    @cached_property
    def by_config(self) -> dict[tuple[str, str, str], tuple[tuple[int, FullStackRule], ...]]:
        table: dict[tuple[str, str, str], list[tuple[int, FullStackRule]]] = defaultdict(list)
        for tid, rule in enumerate(self.rules):
            table[rule.source, rule.top, rule.top2].append((tid, rule))
        return {k: tuple(v) for k, v in table.items()}


Machine = Union[Ptm, Qptm, TwoPda, TwoPdaFull]


@dataclass(frozen=True)
class RnnLm:
    """An Elman RNN language model with exact rational parameters.

    The update is ``h' = σ(U h + V onehot(y) + b)`` with the saturated sigmoid.
    The next-symbol distribution is ``E h``, which must already lie on the
    probability simplex.

    Attributes:
        sigma: Output alphabet.
        labels: A readable name for each hidden neuron (length ``D``).
        inputs: Symbols in embedding order, drawn from ``sigma`` plus ``EPS`` and
            ``BOS``. Each one is embedded as the matching one-hot vector.
        outputs: Row symbols of ``E``, drawn from ``sigma`` plus ``EPS`` and ``EOS``.
        U: ``D x D`` recurrence matrix.
        V: ``D x R`` input matrix.
        b: Bias vector.
        h0: Initial hidden state.
        E: ``len(outputs) x D`` output matrix.
        layout: Named half-open index ranges over the hidden vector.
        phases: Update steps per simulated transition.
        emission_phase: Phase-neuron index (0-based) at which real symbols are sampled.
        pair_columns: ``(stack-1 top, state)`` for each neuron of the ``pair`` range.
        stack_codes: ``(symbol, bit string)`` for each stack symbol.
        name: Identifier used in reports.
    """

    sigma: tuple[str, ...]
    labels: tuple[str, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    U: tuple[tuple[Fraction, ...], ...]
    V: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    h0: tuple[Fraction, ...]
    E: tuple[tuple[Fraction, ...], ...]
    layout: tuple[tuple[str, int, int], ...]
    phases: int
    emission_phase: int
    pair_columns: tuple[tuple[str, str], ...]
    stack_codes: tuple[tuple[str, str], ...]
    name: str = "rnn"

    @property
    def D(self) -> int:
        return len(self.labels)

    @property
    def R(self) -> int:
        return len(self.inputs)

    def span(self, block: str) -> range:
        for name, start, stop in self.layout:
            if name == block:
                return range(start, stop)
        raise KeyError(block)

    @cached_property
    def input_index(self) -> dict[str, int]:
        return {sym: i for i, sym in enumerate(self.inputs)}

    @cached_property
    def sparse_columns(self) -> tuple[tuple[tuple[int, Fraction | int], ...], ...]:
        """Non-zero entries of ``U`` grouped by column, for cheap updates."""
        return tuple(
            tuple((i, _compact(self.U[i][j])) for i in range(self.D) if self.U[i][j] != 0)
            for j in range(self.D)
        )

    @cached_property
    def sparse_inputs(self) -> dict[str, tuple[tuple[int, Fraction | int], ...]]:
        return {
            sym: tuple((i, _compact(self.V[i][j])) for i in range(self.D) if self.V[i][j] != 0)
            for sym, j in self.input_index.items()
        }

    @cached_property
    def sparse_outputs(self) -> tuple[tuple[tuple[int, Fraction | int], ...], ...]:
        """Non-zero entries of ``E`` grouped by hidden column."""
        return tuple(
            tuple((row, _compact(self.E[row][j])) for row in range(len(self.outputs)) if self.E[row][j] != 0)
            for j in range(self.D)
        )

    def violations(self) -> list[Violation]:
        out = []
        d, r = self.D, self.R
        shapes = (("U", self.U, d, d), ("V", self.V, d, r), ("E", self.E, len(self.outputs), d))
        for label, matrix, rows, cols in shapes:
            if len(matrix) != rows or any(len(row) != cols for row in matrix):
                out.append(Violation((), f"matrix {label} is not {rows}x{cols}"))
        if len(self.b) != d or len(self.h0) != d:
            out.append(Violation((), f"bias or initial state is not of length {d}"))
        if any(not 0 <= v <= 1 for v in self.h0):
            out.append(Violation((), "initial hidden state leaves [0, 1]"))
        if set(self.inputs) - set(self.sigma) - {EPS, BOS}:
            out.append(Violation((), "embedding covers unknown symbols"))
        if set(self.outputs) - set(self.sigma) - {EPS, EOS}:
            out.append(Violation((), "output rows cover unknown symbols"))
        used: set[int] = set()
        for name, start, stop in self.layout:
            block = set(range(start, stop))
            if not 0 <= start <= stop <= d or block & used:
                out.append(Violation((name,), "layout range overlaps or leaves the hidden vector"))
            used |= block
        if out:
            return out
        pair = self.span("pair") if any(n == "pair" for n, _, _ in self.layout) else range(0)
        if len(pair) != len(self.pair_columns):
            out.append(Violation(("pair",), "pair columns do not match the pair range"))
        for j in pair:
            total = sum((self.E[row][j] for row in range(len(self.outputs))), ZERO)
            if total != 1:
                out.append(Violation(("E", self.labels[j]), "output column does not sum to 1", total))
        return out


def _compact(value: Fraction) -> Fraction | int:
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class Violation:
    """A structural or normalization defect.

    Attributes:
        config: The offending configuration, or an empty tuple for global issues.
        message: What is wrong.
        total: The actual weight sum for normalization violations.
    """

    config: tuple
    message: str
    total: Fraction | None = None

    def __str__(self) -> str:
        where = "(" + ", ".join(self.config) + ")" if self.config else "machine"
        suffix = f" (sum {self.total})" if self.total is not None else ""
        return f"{where}: {self.message}{suffix}"


def validate(machine: Machine) -> list[Violation]:
    """Checks structural invariants and local normalization.

    Returns:
        Violations, empty iff the machine is well formed. Normalization
        violations quote the actual weight sum.
    """
    if isinstance(machine, RnnLm):
        return machine.violations()
    out = _common_violations(machine)
    if isinstance(machine, Ptm):
        out += _ptm_violations(machine)
    elif isinstance(machine, Qptm):
        out += _tape_rule_violations(machine, machine.rules)
        out += _sum_violations(_group(machine.rules, lambda r: (r.source, r.read)))
    elif isinstance(machine, TwoPda):
        out += _stack_violations(machine)
    elif isinstance(machine, TwoPdaFull):
        out += _full_stack_violations(machine)
    else:
        raise TypeError(f"not a machine: {type(machine).__name__}")
    return out


def _common_violations(m: Machine) -> list[Violation]:
    out = []
    states = set(m.states)
    for sym in set(m.sigma) & RESERVED:
        out.append(Violation((), f"reserved symbol {sym} in the output alphabet"))
    for sym in set(m.gamma) & RESERVED:
        out.append(Violation((), f"reserved symbol {sym} in the tape/stack alphabet"))
    for label, q in (("initial", m.initial), ("final", m.final)):
        if q not in states:
            out.append(Violation((q,), f"{label} state is not declared"))
    if m.initial == m.final:
        out.append(Violation((m.initial,), "initial and final states coincide"))
    for stray in set(m.aux) - states:
        out.append(Violation((stray,), "auxiliary state is not declared"))
    if m.final in m.aux:
        out.append(Violation((m.final,), "final state cannot be auxiliary"))
    tape = isinstance(m, (Ptm, Qptm))
    if tape and m.blank not in m.gamma:
        out.append(Violation((), f"blank {m.blank} missing from the tape alphabet"))
    if not tape and BOTTOM not in m.gamma:
        out.append(Violation((), f"bottom symbol {BOTTOM} missing from the stack alphabet"))
    for rule in m.rules:
        key = _key(rule)
        if rule.source not in states or rule.target not in states:
            out.append(Violation(key, "rule uses an undeclared state"))
        if rule.emit != EPS and rule.emit not in m.sigma:
            out.append(Violation(key, f"emission {rule.emit} outside the output alphabet"))
        if not 0 <= rule.weight <= 1:
            out.append(Violation(key, f"weight {rule.weight} outside [0, 1]"))
        if rule.source == m.final:
            out.append(Violation(key, "final state has an outgoing rule"))
    return out


def _key(rule) -> tuple[str, ...]:
    if isinstance(rule, TapeRule):
        return (rule.source, rule.read)
    if isinstance(rule, FullStackRule):
        return (rule.source, rule.top, rule.top2)
    return (rule.source, rule.top)


def _tape_rule_violations(m: Qptm | Ptm, rules: Iterable[TapeRule]) -> list[Violation]:
    out = []
    gamma = set(m.gamma)
    for r in rules:
        if r.read not in gamma or r.write not in gamma:
            out.append(Violation(_key(r), "tape symbol outside the tape alphabet"))
        if r.move not in MOVES:
            out.append(Violation(_key(r), f"unknown head move {r.move}"))
    return out


def _group(rules, keyfn) -> dict:
    groups: dict = defaultdict(list)
    for r in rules:
        groups[keyfn(r)].append(r)
    return groups


def _sum_violations(groups: dict) -> list[Violation]:
    out = []
    for key, rules in sorted(groups.items()):
        total = mass_sum(r.weight for r in rules)
        if total != 1:
            out.append(Violation(key, "outgoing weights do not sum to 1", total))
    return out


def _ptm_violations(m: Ptm) -> list[Violation]:
    out = _tape_rule_violations(m, m.rules)
    for delta_name, delta in (("delta1", m.delta1), ("delta2", m.delta2)):
        for q in m.states:
            if q == m.final:
                continue
            for g in m.gamma:
                if (q, g) not in delta:
                    out.append(Violation((q, g), f"{delta_name} is undefined"))
    return out


def _stack_symbol_violations(key, gamma, top, pop, push, which: str) -> list[Violation]:
    out = []
    for sym in (pop, push):
        if sym != EPS and sym not in gamma:
            out.append(Violation(key, f"stack {which} symbol {sym} outside the stack alphabet"))
    if pop != EPS and top is not None and pop != top:
        out.append(Violation(key, f"stack {which} pops {pop} but its top is {top}"))
    if pop == BOTTOM and push != BOTTOM:
        out.append(Violation(key, f"stack {which} destroys {BOTTOM}"))
    if push == BOTTOM and pop != BOTTOM:
        out.append(Violation(key, f"stack {which} pushes {BOTTOM}"))
    return out


def _stack_violations(m: TwoPda) -> list[Violation]:
    out = []
    gamma = set(m.gamma)
    for r in m.rules:
        key = _key(r)
        if r.top not in gamma:
            out.append(Violation(key, "stack top outside the stack alphabet"))
        out += _stack_symbol_violations(key, gamma, r.top, r.pop1, r.push1, "1")
        out += _stack_symbol_violations(key, gamma, None, r.pop2, r.push2, "2")
    for (q, top), rules in sorted(_group(m.rules, lambda r: (r.source, r.top)).items()):
        free = mass_sum(r.weight for r in rules if r.guard is None)
        if all(r.guard is None for r in rules):
            if free != 1:
                out.append(Violation((q, top), "outgoing weights do not sum to 1", free))
            continue
        sums = {x: free + mass_sum(r.weight for r in rules if r.guard == x) for x in m.gamma}
        bad = {x: t for x, t in sums.items() if t not in (0, 1)}
        if bad and len(set(sums.values())) == 1:
            out.append(Violation((q, top), "outgoing weights do not sum to 1", free))
            continue
        for x, total in bad.items():
            out.append(Violation((q, top, x), "weights enabled under this stack-2 top do not sum to 1", total))
    return out


def _full_stack_violations(m: TwoPdaFull) -> list[Violation]:
    out = []
    gamma = set(m.gamma)
    for r in m.rules:
        key = _key(r)
        if r.top not in gamma or r.top2 not in gamma:
            out.append(Violation(key, "stack top outside the stack alphabet"))
        out += _stack_symbol_violations(key, gamma, r.top, r.pop1, r.push1, "1")
        out += _stack_symbol_violations(key, gamma, r.top2, r.pop2, r.push2, "2")
    out += _sum_violations(_group(m.rules, lambda r: (r.source, r.top, r.top2)))
    return out


def advisories(machine: Machine) -> list[str]:
    """Non-fatal notes, currently declared states unreachable from the start."""
    edges: dict[str, set[str]] = defaultdict(set)
    for r in machine.rules:
        edges[r.source].add(r.target)
    seen = {machine.initial}
    queue = deque([machine.initial])
    while queue:
        for nxt in edges[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return [f"state {q} is unreachable from {machine.initial}" for q in machine.states if q not in seen]


def _emission_groups(m: Machine) -> dict[tuple, list]:
    """Groups rules by everything that selects them except the emitted symbol."""
    if isinstance(m, (Qptm, Ptm)):
        return _group(m.rules, lambda r: (r.source, r.read))
    if isinstance(m, TwoPdaFull):
        return _group(m.rules, lambda r: (r.source, r.top, r.top2))
    if isinstance(m, TwoPda):
        groups: dict[tuple, list] = {}
        for (q, top) in m.by_config:
            for x in m.gamma:
                enabled = [r for _, r in m.enabled(q, top, x)]
                if enabled:
                    groups[q, top, x] = enabled
        return groups
    raise MachineError(f"predicate undefined for {type(m).__name__}")


def is_sigma_deterministic(m: Machine) -> bool:
    """True iff each configuration has at most one rule per emitted symbol.

    Halting is implicit, so ``EOS`` never takes part.
    """
    for rules in _emission_groups(m).values():
        emits = [r.emit for r in rules]
        if len(emits) != len(set(emits)):
            return False
    return True


def is_deterministic(m: Machine) -> bool:
    """Σ-deterministic, and any enabled ε-rule is the only rule, at weight 1."""
    if not is_sigma_deterministic(m):
        return False
    for rules in _emission_groups(m).values():
        if any(r.emit == EPS for r in rules) and not (len(rules) == 1 and rules[0].weight == 1):
            return False
    return True


def is_real_time(m: Machine) -> bool:
    """True iff no rule emits ε."""
    return all(r.emit != EPS for r in m.rules)


def is_rd(m: Machine) -> bool:
    """Real-time and deterministic."""
    return is_real_time(m) and is_deterministic(m)


def emission_distribution(m: TwoPda, state: str, top1: str, top2: str) -> FiniteDist:
    """The next-symbol distribution of a 2PDA configuration, ``EOS`` at the final state."""
    alphabet = frozenset(m.sigma) | {EPS, EOS}
    if state == m.final:
        return FiniteDist({EOS: Fraction(1)}, alphabet)
    weights: dict[str, Fraction] = defaultdict(lambda: ZERO)
    for _, r in m.enabled(state, top1, top2):
        weights[r.emit] += r.weight
    return FiniteDist(weights, alphabet)


@dataclass
class NameAllocator:
    """Hands out state or symbol names that do not clash with existing ones."""

    taken: set[str] = field(default_factory=set)

    def fresh(self, stem: str) -> str:
        name, i = stem, 1
        while name in self.taken:
            name = f"{stem}'{i}"
            i += 1
        self.taken.add(name)
        return name
