"""Compiler passes between machine classes, and a small pipeline driver."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from ptmrnn.machines import MachineError, Ptm, Qptm, RnnLm, TwoPda, TwoPdaFull
from ptmrnn.transforms.bridge import classify_backward_case, qptm_to_2pda, twopda_to_qptm
from ptmrnn.transforms.rnn import NotSigmaDeterministic, compile_rnn
from ptmrnn.transforms.stacks import lift_to_full, reduce_both_stack_dependence
from ptmrnn.transforms.tape import binarize, dyadicize, fan_out, ptm_to_qptm


@dataclass(frozen=True)
class PassReport:
    """Summary of one pass.

    Attributes:
        pass_name: CLI name of the pass.
        source: Identifier of the input machine.
        target: Identifier of the output machine.
        states_added: Growth in state count, or neuron count for RNN output.
        transitions_added: Growth in rule count, or non-zero weights for RNN output.
        grade: ``"strong"`` or ``"weak"``, the equivalence the pass guarantees.
    """

    pass_name: str
    source: str
    target: str
    states_added: int
    transitions_added: int
    grade: str


def _size(m) -> tuple[int, int]:
    if isinstance(m, RnnLm):
        nonzero = sum(1 for row in m.U for v in row if v) + sum(1 for row in m.V for v in row if v)
        return m.D, nonzero
    return len(m.states), len(m.rules)


def _ptm_to_qptm(m: Ptm) -> tuple[Qptm, str]:
    out, strong = ptm_to_qptm(m)
    return out, "strong" if strong else "weak"


PASSES: dict[str, tuple[type, Callable]] = {
    "ptm-to-qptm": (Ptm, _ptm_to_qptm),
    "binarize": (Qptm, lambda m: (binarize(m), "strong")),
    "dyadicize": (Qptm, lambda m: (dyadicize(m), "weak")),
    "qptm-to-2pda": (Qptm, lambda m: (qptm_to_2pda(m), "strong")),
    "2pda-to-qptm": (TwoPda, lambda m: (twopda_to_qptm(m), "strong")),
    "reduce-full": (TwoPdaFull, lambda m: (reduce_both_stack_dependence(m), "strong")),
    "2pda-to-rnn": (TwoPda, lambda m: (compile_rnn(m), "strong")),
}


def run_pass(name: str, machine):
    """Applies the pass called ``name``.

    Returns:
        ``(output, PassReport)``.

    Raises:
        MachineError: If the pass does not accept the machine's class.
    """
    if name not in PASSES:
        raise MachineError(f"unknown pass {name!r}; choose from {', '.join(PASSES)}")
    accepts, fn = PASSES[name]
    if not isinstance(machine, accepts):
        raise MachineError(f"pass {name} expects {accepts.__name__}, got {type(machine).__name__}")
    out, grade = fn(machine)
    before, after = _size(machine), _size(out)
    target = f"{machine.name}>{name}"
    out = _renamed(out, target)
    report = PassReport(name, machine.name, target, max(0, after[0] - before[0]), max(0, after[1] - before[1]), grade)
    return out, report


def _renamed(m, name: str):
    return replace(m, name=name)


def run_pipeline(names: list[str], machine):
    """Runs passes in order; the overall grade is the weakest step's grade."""
    reports = []
    for name in names:
        machine, report = run_pass(name, machine)
        reports.append(report)
    return machine, reports


__all__ = [
    "PASSES",
    "NotSigmaDeterministic",
    "PassReport",
    "binarize",
    "classify_backward_case",
    "compile_rnn",
    "dyadicize",
    "fan_out",
    "lift_to_full",
    "ptm_to_qptm",
    "qptm_to_2pda",
    "reduce_both_stack_dependence",
    "run_pass",
    "run_pipeline",
    "twopda_to_qptm",
]
