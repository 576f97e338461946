"""Operational semantics: stepping, path enumeration, semimeasures and sampling.

Every machine class, RNNs included, is driven through the same three hooks:
``initial_config``, ``moves`` and ``is_halted``. A move carries a choice id,
its exact weight, its emission, the successor configuration, and whether it
counts as a step of the simulated machine. Moves into auxiliary states created
by compiler passes do not count, and neither do the padding updates of a
compiled RNN. Hence a source machine and its compilation can be compared at
the same step bound.

Step bounds count those macro steps. The number of expanded nodes is capped by
``PTMRNN_NODE_BUDGET`` (default ``10**6``).
"""

from __future__ import annotations

import os
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple

from ptmrnn.machines import (
    BOS,
    BOTTOM,
    EOS,
    EPS,
    Machine,
    Ptm,
    Qptm,
    RnnLm,
    TwoPda,
    TwoPdaFull,
    emission_distribution,
)
from ptmrnn.numerics import ONE, ZERO, FiniteDist, draw_index, saturated_sigmoid
from ptmrnn.stackcode import encode_symbols

BUDGET_ENV = "PTMRNN_NODE_BUDGET"
DEFAULT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """Raised when enumeration expands more nodes than the budget allows."""


class SimulationError(RuntimeError):
    """Raised for an invalid step or a distribution that leaves the simplex."""


class TapeConfig(NamedTuple):
    """State, non-blank tape cells as sorted ``(position, symbol)`` pairs, head, output."""

    state: str
    tape: tuple[tuple[int, str], ...]
    head: int
    output: tuple[str, ...]


class StackConfig(NamedTuple):
    """State, both stacks bottom first, output."""

    state: str
    stack1: tuple[str, ...]
    stack2: tuple[str, ...]
    output: tuple[str, ...]


class RnnConfig(NamedTuple):
    """Hidden vector, output so far, and whether ``EOS`` has been sampled."""

    hidden: tuple
    output: tuple[str, ...]
    halted: bool = False


Config = TapeConfig | StackConfig | RnnConfig


class Move(NamedTuple):
    choice: int
    weight: Fraction
    emit: str
    config: Config
    counts: bool


@dataclass(frozen=True)
class Path:
    """A halting path.

    Attributes:
        transitions: Choice ids in order. For RNNs these index ``rnn.outputs``.
        weight: Product of the transition weights.
        yield_: Emitted symbols with ε removed.
        steps: Number of counted steps.
        halted: Always true for enumerated paths.
    """

    transitions: tuple[int, ...]
    weight: Fraction
    yield_: tuple[str, ...]
    steps: int
    halted: bool = True


@dataclass
class SemimeasureTable:
    """Per-string halting mass within a step bound.

    Attributes:
        masses: Mass per yield, restricted to ``len <= max_len``.
        halting_mass: Sum of ``masses``.
        max_steps: The step bound used.
        max_len: The yield-length cap, or ``None`` for no cap.
        live: Yields of paths that were still running at the step bound.
    """

    masses: dict[tuple[str, ...], Fraction]
    halting_mass: Fraction
    max_steps: int
    max_len: int | None
    live: frozenset[tuple[str, ...]] = field(default_factory=frozenset)

    def mass(self, string: tuple[str, ...]) -> Fraction:
        return self.masses.get(tuple(string), ZERO)

    def is_exact(self, string: tuple[str, ...]) -> bool:
        """True iff no path alive at the bound could still yield ``string``."""
        string = tuple(string)
        return not any(string[: len(prefix)] == prefix for prefix in self.live)

    def strings(self) -> list[tuple[str, ...]]:
        return sorted(self.masses, key=lambda s: (len(s), s))


def node_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise BudgetExceeded(f"{BUDGET_ENV}={raw!r} is not an integer") from None
    if value <= 0:
        raise BudgetExceeded(f"{BUDGET_ENV} must be positive")
    return value


# ---------------------------------------------------------------- semantics


def initial_config(machine: Machine | RnnLm) -> Config:
    if isinstance(machine, (Ptm, Qptm)):
        return TapeConfig(machine.initial, (), 0, ())
    if isinstance(machine, (TwoPda, TwoPdaFull)):
        return StackConfig(machine.initial, (BOTTOM,), (BOTTOM,), ())
    if isinstance(machine, RnnLm):
        hidden, _ = rnn_step(machine, machine.h0, BOS)
        return RnnConfig(hidden, ())
    raise TypeError(f"cannot simulate {type(machine).__name__}")


def is_halted(machine: Machine | RnnLm, config: Config) -> bool:
    if isinstance(config, RnnConfig):
        return config.halted
    return config.state == machine.final


def moves(machine: Machine | RnnLm, config: Config) -> list[Move]:
    """All non-zero-weight successors of a configuration, in choice order."""
    if isinstance(machine, RnnLm):
        return _rnn_moves(machine, config)
    if isinstance(config, TapeConfig):
        cells = dict(config.tape)
        read = cells.get(config.head, machine.blank)
        return [
            Move(tid, r.weight, r.emit, _apply_tape(machine, config, cells, r), r.target not in machine.aux)
            for tid, r in machine.by_config.get((config.state, read), ())
        ]
    if isinstance(machine, TwoPda):
        rules = machine.enabled(config.state, config.stack1[-1], config.stack2[-1])
    else:
        rules = machine.by_config.get((config.state, config.stack1[-1], config.stack2[-1]), ())
    return [
        Move(tid, r.weight, r.emit, _apply_stack(config, r), r.target not in machine.aux)
        for tid, r in rules
    ]


def step(machine: Machine | RnnLm, config: Config, choice: int) -> Config:
    """Takes the enabled transition ``choice`` from ``config``.

    Raises:
        SimulationError: If ``choice`` is not enabled at ``config``.
    """
    for move in moves(machine, config):
        if move.choice == choice:
            return move.config
    raise SimulationError(f"choice {choice} is not enabled at {config}")


def _emit(output: tuple[str, ...], symbol: str) -> tuple[str, ...]:
    return output if symbol == EPS else output + (symbol,)


def _apply_tape(machine, config: TapeConfig, cells: dict[int, str], rule) -> TapeConfig:
    cells = dict(cells)
    if rule.write == machine.blank:
        cells.pop(config.head, None)
    else:
        cells[config.head] = rule.write
    head = config.head + {"L": -1, "N": 0, "R": 1}[rule.move]
    return TapeConfig(rule.target, tuple(sorted(cells.items())), head, _emit(config.output, rule.emit))


def _apply_stack(config: StackConfig, rule) -> StackConfig:
    s1, s2 = config.stack1, config.stack2
    if rule.pop1 != EPS:
        if s1[-1] != rule.pop1:
            raise SimulationError(f"rule pops {rule.pop1} but stack 1 shows {s1[-1]}")
        s1 = s1[:-1]
    if rule.push1 != EPS:
        s1 = s1 + (rule.push1,)
    if rule.pop2 != EPS:
        if s2[-1] != rule.pop2:
            raise SimulationError(f"rule pops {rule.pop2} but stack 2 shows {s2[-1]}")
        s2 = s2[:-1]
    if rule.push2 != EPS:
        s2 = s2 + (rule.push2,)
    if not s1 or not s2 or s1[0] != BOTTOM or s2[0] != BOTTOM:
        raise SimulationError("stack lost its bottom symbol")
    return StackConfig(rule.target, s1, s2, _emit(config.output, rule.emit))


# ---------------------------------------------------------------- RNN


def rnn_update(rnn: RnnLm, h, y_in: str) -> tuple:
    """``σ(U h + V onehot(y_in) + b)`` computed sparsely in exact arithmetic."""
    if y_in not in rnn.input_index:
        raise SimulationError(f"symbol {y_in} has no embedding")
    acc = list(rnn.b)
    for j, value in enumerate(h):
        if value:
            for i, coeff in rnn.sparse_columns[j]:
                acc[i] += coeff * value
    for i, coeff in rnn.sparse_inputs[y_in]:
        acc[i] += coeff
    return tuple(_compact(saturated_sigmoid(v)) for v in acc)


def _compact(value):
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


def output_weights(rnn: RnnLm, h) -> dict[str, Fraction]:
    """``E h`` as a map from output symbol to weight, without any checks."""
    acc: dict[str, Fraction] = defaultdict(lambda: ZERO)
    for j, value in enumerate(h):
        if value:
            for row, coeff in rnn.sparse_outputs[j]:
                acc[rnn.outputs[row]] += coeff * value
    return {sym: Fraction(w) for sym, w in acc.items() if w != 0}


def output_distribution(rnn: RnnLm, h) -> FiniteDist:
    """The next-symbol distribution at ``h``; the projection is the identity.

    Raises:
        SimulationError: If ``E h`` is not a probability distribution.
    """
    weights = output_weights(rnn, h)
    if any(w < 0 or w > 1 for w in weights.values()) or sum(weights.values(), ZERO) != 1:
        raise SimulationError(f"output {weights} is off the probability simplex")
    return FiniteDist(weights, frozenset(rnn.outputs))


def rnn_step(rnn: RnnLm, h, y_in: str) -> tuple[tuple, FiniteDist]:
    """One recurrence step and the distribution it exposes.

    Returns:
        ``(h', dist)`` where ``dist`` is the distribution of the next symbol.
    """
    h_next = rnn_update(rnn, h, y_in)
    return h_next, output_distribution(rnn, h_next)


def rnn_phase(rnn: RnnLm, h) -> int | None:
    """Index of the active phase neuron, or ``None`` if the model has none."""
    try:
        span = rnn.span("phase")
    except KeyError:
        return None
    for offset, i in enumerate(span):
        if h[i] == 1:
            return offset
    return None


def _rnn_moves(rnn: RnnLm, config: RnnConfig) -> list[Move]:
    counts = rnn_phase(rnn, config.hidden) in (rnn.emission_phase, None)
    dist = output_distribution(rnn, config.hidden)
    out = []
    for choice, sym in enumerate(rnn.outputs):
        w = dist[sym]
        if w == 0:
            continue
        if sym == EOS:
            out.append(Move(choice, w, EPS, RnnConfig(config.hidden, config.output, True), False))
        else:
            nxt = RnnConfig(rnn_update(rnn, config.hidden, sym), _emit(config.output, sym))
            out.append(Move(choice, w, sym, nxt, counts))
    return out


# ---------------------------------------------------------------- enumeration


def enumerate_paths(machine: Machine | RnnLm, max_steps: int) -> list[Path]:
    """All halting paths with at most ``max_steps`` counted steps.

    Returns:
        Paths sorted lexicographically by their choice sequences.

    Raises:
        BudgetExceeded: If more than the node budget is expanded.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    budget = node_budget()
    expanded = 0
    halted: list[Path] = []
    frontier = [(initial_config(machine), ONE, (), 0)]
    while frontier:
        nxt = []
        for config, weight, choices, steps in frontier:
            expanded += 1
            if expanded > budget:
                raise BudgetExceeded(f"path enumeration exceeded {budget} nodes")
            if is_halted(machine, config):
                halted.append(Path(choices, weight, config.output, steps))
                continue
            for move in moves(machine, config):
                taken = steps + move.counts
                if taken <= max_steps:
                    nxt.append((move.config, weight * move.weight, choices + (move.choice,), taken))
        frontier = nxt
    return sorted(halted, key=lambda p: p.transitions)


def count_paths(machine: Machine | RnnLm, max_steps: int) -> Counter:
    """Number of halting paths per ``(weight, yield)`` within ``max_steps``.

    Equals counting the output of :func:`enumerate_paths`, but merges paths
    that agree on configuration, step count and weight, so it never
    materializes them one by one.

    Raises:
        BudgetExceeded: If more than the node budget is expanded.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    budget = node_budget()
    expanded = 0
    counts: Counter = Counter()
    frontier: Counter = Counter({(initial_config(machine), 0, ONE): 1})
    while frontier:
        nxt: Counter = Counter()
        for (config, steps, weight), n in frontier.items():
            expanded += 1
            if expanded > budget:
                raise BudgetExceeded(f"path counting exceeded {budget} nodes")
            if is_halted(machine, config):
                counts[weight, config.output] += n
                continue
            for move in moves(machine, config):
                taken = steps + move.counts
                if taken <= max_steps:
                    nxt[move.config, taken, weight * move.weight] += n
        frontier = nxt
    return counts


def semimeasure(machine: Machine | RnnLm, max_len: int | None, max_steps: int) -> SemimeasureTable:
    """Per-string halting mass within ``max_steps``, with exactness tracking.

    Configurations reached by different paths are merged, so this scales
    with the number of distinct configurations rather than paths.

    Raises:
        BudgetExceeded: If more than the node budget is expanded.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    budget = node_budget()
    expanded = 0
    masses: dict[tuple[str, ...], Fraction] = defaultdict(lambda: ZERO)
    live: set[tuple[str, ...]] = set()
    frontier: dict[tuple[Config, int], Fraction] = {(initial_config(machine), 0): ONE}
    while frontier:
        nxt: dict[tuple[Config, int], Fraction] = defaultdict(lambda: ZERO)
        for (config, steps), weight in frontier.items():
            expanded += 1
            if expanded > budget:
                raise BudgetExceeded(f"semimeasure enumeration exceeded {budget} nodes")
            if is_halted(machine, config):
                masses[config.output] += weight
                continue
            for move in moves(machine, config):
                if max_len is not None and len(move.config.output) > max_len:
                    continue
                taken = steps + move.counts
                if taken > max_steps:
                    live.add(config.output)
                    continue
                nxt[move.config, taken] += weight * move.weight
        frontier = nxt
    kept = {s: m for s, m in masses.items() if m != 0}
    return SemimeasureTable(kept, sum(kept.values(), ZERO), max_steps, max_len, frozenset(live))


def halting_mass(machine: Machine | RnnLm, max_steps: int) -> Fraction:
    """Total weight of halting paths within ``max_steps``."""
    return semimeasure(machine, None, max_steps).halting_mass


def prefix_mass(machine: Machine | RnnLm, prefix: tuple[str, ...], max_steps: int) -> Fraction:
    """Weight of runs whose output starts with ``prefix`` within ``max_steps``.

    A run counts at the step its output first reaches ``len(prefix)``
    symbols, whether or not it later halts. The value is non-decreasing in
    ``max_steps``.

    Raises:
        BudgetExceeded: If more than the node budget is expanded.
    """
    prefix = tuple(prefix)
    if not prefix:
        return ONE
    budget = node_budget()
    expanded = 0
    total = ZERO
    frontier: dict[tuple[Config, int], Fraction] = {(initial_config(machine), 0): ONE}
    while frontier:
        nxt: dict[tuple[Config, int], Fraction] = defaultdict(lambda: ZERO)
        for (config, steps), weight in frontier.items():
            expanded += 1
            if expanded > budget:
                raise BudgetExceeded(f"prefix enumeration exceeded {budget} nodes")
            if is_halted(machine, config):
                continue
            for move in moves(machine, config):
                taken = steps + move.counts
                out = move.config.output
                if taken > max_steps or out != prefix[: len(out)]:
                    continue
                if len(out) == len(prefix):
                    total += weight * move.weight
                else:
                    nxt[move.config, taken] += weight * move.weight
        frontier = nxt
    return total


# ---------------------------------------------------------------- sampling


class Cutoff:
    """Marker returned by :func:`sample` when the step bound is hit first."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "CUTOFF"


CUTOFF = Cutoff()


def sample(machine: Machine | RnnLm, seed: int, max_steps: int) -> tuple[str, ...] | Cutoff:
    """Draws one ancestral sample using exact weights and a seeded bit stream.

    Returns:
        The yield if the machine halts within ``max_steps`` counted steps,
        otherwise :data:`CUTOFF`. A configuration with no moves never halts, so
        it also yields :data:`CUTOFF`.
    """
    rng = random.Random(seed)
    budget = node_budget()
    config, steps = initial_config(machine), 0
    for _ in range(budget):
        if is_halted(machine, config):
            return config.output
        options = moves(machine, config)
        if not options:
            return CUTOFF
        move = options[draw_index(rng, [m.weight for m in options])]
        steps += move.counts
        if steps > max_steps:
            return CUTOFF
        config = move.config
    return CUTOFF


# ---------------------------------------------------------------- lockstep


@dataclass(frozen=True)
class LockstepReport:
    """Outcome of co-simulating a compiled RNN with its source 2PDA.

    Attributes:
        clean: True iff no divergence was found.
        step: Counted step at which the first divergence appeared.
        path: Symbols fed to reach the divergence.
        detail: What differed.
        checked: Number of emission-phase states compared.
    """

    clean: bool
    step: int | None = None
    path: tuple[str, ...] = ()
    detail: str = ""
    checked: int = 0


def rnn_lockstep(rnn: RnnLm, source: TwoPda, max_steps: int) -> LockstepReport:
    """Co-simulates every branch of ``source`` and ``rnn`` up to ``max_steps``.

    At every emission-phase state the RNN must expose the same
    ``(stack-1 top, state)`` pair as the 2PDA. Its stack neurons must encode
    both stacks. ``E h`` must equal the 2PDA's next-symbol distribution, and
    every padding update in between must emit ε with weight 1.
    """
    pair = list(rnn.span("pair"))
    enc1, enc2 = rnn.span("stack")[0], rnn.span("stack")[1]
    codes = {sym: tuple(int(c) for c in bits) for sym, bits in rnn.stack_codes}
    position = {col: pair[i] for i, col in enumerate(rnn.pair_columns)}
    eps_only = {EPS: ONE}

    start = StackConfig(source.initial, (BOTTOM,), (BOTTOM,), ())
    h_start = rnn_update(rnn, rnn.h0, BOS)
    frontier = [(start, h_start, (), 0)]
    seen: set = set()
    checked = 0

    def diverged(step, path, detail):
        return LockstepReport(False, step, path, detail, checked)

    while frontier:
        nxt = []
        for config, h, path, steps in frontier:
            key = (config.state, config.stack1, config.stack2, steps)
            if key in seen:
                continue
            seen.add(key)
            checked += 1
            top1, top2 = config.stack1[-1], config.stack2[-1]
            expected_col = position.get((top1, config.state))
            block = {i for i in pair if h[i] != 0}
            if expected_col is None or block != {expected_col} or h[expected_col] != 1:
                return diverged(steps, path, f"pair block {sorted(block)} does not expose ({top1}, {config.state})")
            if h[enc1] != encode_symbols(config.stack1, codes) or h[enc2] != encode_symbols(config.stack2, codes):
                return diverged(steps, path, "stack neurons do not encode the 2PDA stacks")
            rules = source.enabled(config.state, top1, top2)
            if rules or config.state == source.final:
                want = emission_distribution(source, config.state, top1, top2).entries
                got = output_weights(rnn, h)
                if got != want:
                    return diverged(steps, path, f"emission distribution {got} differs from {want}")
            if steps == max_steps:
                continue
            for _, rule in rules:
                h_next = rnn_update(rnn, h, rule.emit)
                for _ in range(rnn.phases - 1):
                    if output_weights(rnn, h_next) != eps_only:
                        return diverged(steps + 1, path + (rule.emit,), "padding update does not emit ε")
                    h_next = rnn_update(rnn, h_next, EPS)
                nxt.append((_apply_stack(config, rule)._replace(output=()), h_next, path + (rule.emit,), steps + 1))
        frontier = nxt
    return LockstepReport(True, checked=checked)


def iter_configs(machine: Machine | RnnLm, max_steps: int) -> Iterator[Config]:
    """Yields every configuration reachable within ``max_steps``, once each."""
    seen = set()
    frontier = [(initial_config(machine), 0)]
    while frontier:
        nxt = []
        for config, steps in frontier:
            if config in seen:
                continue
            seen.add(config)
            yield config
            if is_halted(machine, config):
                continue
            for move in moves(machine, config):
                if steps + move.counts <= max_steps:
                    nxt.append((move.config, steps + move.counts))
        frontier = nxt


__all__ = [
    "BudgetExceeded",
    "CUTOFF",
    "LockstepReport",
    "Path",
    "SemimeasureTable",
    "count_paths",
    "enumerate_paths",
    "halting_mass",
    "prefix_mass",
    "initial_config",
    "moves",
    "rnn_lockstep",
    "rnn_step",
    "sample",
    "semimeasure",
    "step",
]
