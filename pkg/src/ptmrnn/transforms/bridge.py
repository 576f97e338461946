"""Translations between tape machines and two-stack automata.

Tape to stacks: stack 1 holds the head cell and everything to its right, with
the head cell on top. Stack 2 holds the cells to the left of the head, with
the nearest one on top. Blank cells past either end are never stored. When
the head walks onto such a cell the machine reads the bottom symbol, treats
it as a blank, and materializes the blank as soon as it is written or passed.

Stacks to tape: the tape holds stack 2, bottom to top, then stack 1, top to
bottom. The head rests on the top of stack 1, so the cell to its left is the
top of stack 2. The bottom symbols become the blanks on either side. Pushes
and pops that change the length of the written block shift everything to the
right of the head by one cell. Each rule becomes a short program of helper
states. Its first leg carries the rule's weight and emission, and all other
legs have weight 1 and emit ε.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ptmrnn.machines import (
    BLANK,
    BOTTOM,
    EPS,
    MachineError,
    NameAllocator,
    Qptm,
    StackRule,
    TapeRule,
    TwoPda,
)

ONE = Fraction(1)
MARKER = "↓"


# ---------------------------------------------------------------- tape -> stacks


def qptm_to_2pda(m: Qptm) -> TwoPda:
    """Simulates a QPTM on two stacks, path for path.

    * A stay-in-place rule rewrites the top of stack 1.
    * A right move pops stack 1 and pushes the written symbol to stack 2.
    * A left move writes, then enters a helper state unique to the rule. From
      there one weight-1 ε step moves the top of stack 2 onto stack 1. If
      stack 2 is empty, that step pushes a fresh blank instead.

    Raises:
        MachineError: If the tape alphabet already contains the bottom symbol.
    """
    if BOTTOM in m.gamma:
        raise MachineError(f"tape alphabet uses the reserved stack bottom {BOTTOM}")
    names = NameAllocator(set(m.states))
    gamma = tuple(m.gamma) + (BOTTOM,)
    states, aux = list(m.states), set(m.aux)
    rules: list[StackRule] = []

    for tid, r in enumerate(m.rules):
        tops = [r.read] + ([BOTTOM] if r.read == m.blank else [])
        hop = None
        if r.move == "L":
            hop = names.fresh(f"{r.source}/{r.read}/left{tid}")
            states.append(hop)
            aux.add(hop)
        for top in tops:
            pop1 = top if top != BOTTOM else EPS
            if r.move == "N":
                if top == BOTTOM and r.write == m.blank:
                    rules.append(StackRule(r.source, top, r.emit, r.target, EPS, EPS, EPS, EPS, r.weight))
                else:
                    rules.append(StackRule(r.source, top, r.emit, r.target, pop1, r.write, EPS, EPS, r.weight))
            elif r.move == "R":
                rules.append(StackRule(r.source, top, r.emit, r.target, pop1, EPS, EPS, r.write, r.weight))
            else:
                rules.append(StackRule(r.source, top, r.emit, hop, pop1, r.write, EPS, EPS, r.weight))
        if hop is not None:
            for x in gamma:
                if x == BOTTOM:
                    rules.append(StackRule(hop, r.write, EPS, r.target, EPS, m.blank, BOTTOM, BOTTOM, ONE))
                else:
                    rules.append(StackRule(hop, r.write, EPS, r.target, EPS, x, x, EPS, ONE))
    return TwoPda(tuple(states), m.sigma, gamma, m.initial, m.final, tuple(rules), frozenset(aux), m.name)


# ---------------------------------------------------------------- stacks -> tape


def classify_backward_case(rule: StackRule) -> str:
    """Names the shape of a 2PDA rule's stack effect.

    Re-pushing a popped bottom symbol counts as no change. The labels are
    ``"i"`` (no change), ``"ii-a"``/``"ii-b"`` (replace the top of stack 1/2),
    ``"iii-a"`` (stack 1 to stack 2), ``"iii-b"`` (stack 2 to stack 1),
    ``"iv"`` (more pushes than pops), ``"v"`` (more pops than pushes) and
    ``"vi"`` (replace both tops).
    """
    p1, u1, p2, u2 = _effective_ops(rule)
    pops = (p1 != EPS, p2 != EPS)
    pushes = (u1 != EPS, u2 != EPS)
    shape = pops + pushes
    if not any(shape):
        return "i"
    named = {
        (True, False, True, False): "ii-a",
        (False, True, False, True): "ii-b",
        (True, False, False, True): "iii-a",
        (False, True, True, False): "iii-b",
        (True, True, True, True): "vi",
    }
    if shape in named:
        return named[shape]
    return "iv" if sum(pushes) > sum(pops) else "v"


def _effective_ops(rule: StackRule) -> tuple[str, str, str, str]:
    p1, u1, p2, u2 = rule.pop1, rule.push1, rule.pop2, rule.push2
    if p1 == BOTTOM:
        p1 = u1 = EPS
    if p2 == BOTTOM:
        p2 = u2 = EPS
    return p1, u1, p2, u2


@dataclass
class _Programs:
    """Builds chains of tape rules through fresh helper states."""

    symbols: tuple[str, ...]
    blank: str
    marker: str
    names: NameAllocator
    rules: list[TapeRule] = field(default_factory=list)
    helpers: list[str] = field(default_factory=list)

    def fresh(self, stem: str) -> str:
        name = self.names.fresh(stem)
        self.helpers.append(name)
        return name

    def leg(self, source, read, write, move, target, weight=ONE, emit=EPS) -> None:
        self.rules.append(TapeRule(source, read, emit, target, write, move, weight))

    def reads(self, known: str | None) -> tuple[str, ...]:
        return (known,) if known is not None else self.symbols + (self.blank,)


def twopda_to_qptm(m: TwoPda) -> Qptm:
    """Simulates a 2PDA on a tape, path for path.

    Stack-2 guards are resolved by a weight-1 peek: step left, step back right
    into a state that remembers the symbol seen. Rules are then translated
    under that knowledge. Every helper state belongs to exactly one rule or
    peek, and none of them counts as a simulated step.
    """
    taken = set(m.states)
    symbols = set(m.gamma) - {BOTTOM}
    names = NameAllocator(taken | symbols)
    blank = names.fresh(BLANK)
    marker = names.fresh(MARKER)
    prog = _Programs(tuple(sorted(symbols)), blank, marker, names)

    def cell(sym: str) -> str:
        return blank if sym == BOTTOM else sym

    for (q, top), group in sorted(m.by_config.items()):
        rules = [(tid, r) for tid, r in group]
        if all(r.guard is None for _, r in rules):
            for tid, r in rules:
                _translate(prog, r, tid, q, cell(top), None, cell)
            continue
        peek = prog.fresh(f"{q}/{top}/peek")
        prog.leg(q, cell(top), cell(top), "L", peek)
        for x in m.gamma:
            seen = prog.fresh(f"{q}/{top}/saw{x}")
            prog.leg(peek, cell(x), cell(x), "R", seen)
            for tid, r in rules:
                if r.guard in (None, x):
                    _translate(prog, r, tid, seen, cell(top), x, cell, suffix=f"@{x}")
    states = tuple(m.states) + tuple(prog.helpers)
    gamma = tuple(sorted(symbols)) + (blank, marker)
    aux = frozenset(m.aux) | frozenset(prog.helpers)
    return Qptm(states, m.sigma, gamma, m.initial, m.final, tuple(prog.rules), blank, aux, m.name)


def _translate(prog: _Programs, r: StackRule, tid: int, source: str, read: str, top2, cell, suffix="") -> None:
    """Emits the tape program for one 2PDA rule starting at ``(source, read)``.

    ``top2`` is the known top of stack 2 (after a peek), or ``None``.
    """
    p1, u1, p2, u2 = _effective_ops(r)
    stem = f"{r.source}/{tid}{suffix}"
    first = {"weight": r.weight, "emit": r.emit}

    def next_state(last: bool) -> str:
        return r.target if last else prog.fresh(f"{stem}/s")

    case = classify_backward_case(r)
    if case == "i":
        prog.leg(source, read, read, "N", r.target, **first)
        return
    if case == "ii-a":
        prog.leg(source, read, cell(u1), "N", r.target, **first)
        return
    if case == "iii-a":
        prog.leg(source, read, cell(u2), "R", r.target, **first)
        return
    if case in ("ii-b", "iii-b", "vi"):
        below = cell(top2)
        mid = prog.fresh(f"{stem}/s")
        # iii-b keeps the old stack-1 top in place; it only moves the head.
        written = cell(u1) if u1 != EPS and case != "iii-b" else read
        prog.leg(source, read, written, "L", mid, **first)
        if case == "iii-b":
            # The old stack-2 top becomes the new stack-1 top under the head.
            prog.leg(mid, below, cell(u1), "N", r.target)
            return
        prog.leg(mid, below, cell(u2), "R", r.target)
        return

    # Mixed shapes: run the stack-1 change, then the stack-2 change.
    ops = []
    if p1 != EPS and u1 != EPS:
        ops.append(("write", cell(u1)))
    elif p1 != EPS:
        ops.append(("delete", None))
    elif u1 != EPS:
        ops.append(("insert", cell(u1)))
    if p2 != EPS and u2 != EPS:
        ops.append(("replace2", cell(u2)))
    elif p2 != EPS:
        ops.append(("delete2", None))
    elif u2 != EPS:
        ops.append(("insert2", cell(u2)))

    state, known = source, read
    for index, (op, sym) in enumerate(ops):
        last = index == len(ops) - 1
        exit_state = next_state(last)
        leg_args = first
        first = {}
        below = cell(top2) if top2 is not None else None
        if op == "write":
            for g in prog.reads(known):
                prog.leg(state, g, sym, "N", exit_state, **leg_args)
            known = sym
        elif op == "delete":
            _delete(prog, stem, state, known, exit_state, leg_args)
            known = None
        elif op == "insert":
            _insert(prog, stem, state, known, sym, exit_state, leg_args)
            known = sym
        elif op == "replace2":
            mid = prog.fresh(f"{stem}/s")
            for g in prog.reads(known):
                prog.leg(state, g, g, "L", mid, **leg_args)
            for g in prog.reads(below):
                prog.leg(mid, g, sym, "R", exit_state)
            known = None
        elif op == "delete2":
            mid = prog.fresh(f"{stem}/s")
            for g in prog.reads(known):
                prog.leg(state, g, g, "L", mid, **leg_args)
            _delete(prog, stem, mid, below, exit_state, {})
            known = None
        elif op == "insert2":
            mid = prog.fresh(f"{stem}/s")
            _insert(prog, stem, state, known, sym, mid, leg_args)
            prog.leg(mid, sym, sym, "R", exit_state)
            known = None
        state = exit_state


def _delete(prog: _Programs, stem: str, source: str, known, exit_state: str, first: dict) -> None:
    """Removes the head cell and shifts the rest of the block one cell left."""
    goend = prog.fresh(f"{stem}/end")
    for g in prog.reads(known):
        prog.leg(source, g, prog.marker, "R", goend, **first)
    carry = {k: prog.fresh(f"{stem}/carry{k}") for k in prog.symbols + (prog.blank,)}
    for g in prog.symbols:
        prog.leg(goend, g, g, "R", goend)
    prog.leg(goend, prog.blank, prog.blank, "L", carry[prog.blank])
    for k, state in carry.items():
        for g in prog.symbols:
            prog.leg(state, g, k, "L", carry[g])
        prog.leg(state, prog.marker, k, "N", exit_state)


def _insert(prog: _Programs, stem: str, source: str, known, sym: str, exit_state: str, first: dict) -> None:
    """Shifts the block from the head rightwards by one cell and writes ``sym`` at the head."""
    carry = {k: prog.fresh(f"{stem}/carry{k}") for k in prog.symbols + (prog.blank,)}
    back = prog.fresh(f"{stem}/back")
    for g in prog.reads(known):
        prog.leg(source, g, prog.marker, "R", carry[g], **first)
    for k in prog.symbols:
        for g in prog.symbols + (prog.blank,):
            prog.leg(carry[k], g, k, "R", carry[g])
    prog.leg(carry[prog.blank], prog.blank, prog.blank, "L", back)
    for g in prog.symbols:
        prog.leg(back, g, g, "L", back)
    prog.leg(back, prog.marker, sym, "N", exit_state)
