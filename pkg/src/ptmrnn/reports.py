"""Plain-text reports with stable field names.

Every report starts with ``report KIND``. It continues with ``FIELD VALUE``
lines and then ``row ...`` lines in a documented column order. Strings are
written by concatenating their symbols. A string is spelled ``ε`` when empty,
and its symbols are joined with ``·`` when any symbol is longer than one
character.
"""

from __future__ import annotations

from fractions import Fraction

from ptmrnn.equivalence import EquivReport
from ptmrnn.numerics import rat_format
from ptmrnn.simulate import LockstepReport, Path, SemimeasureTable


def format_string(symbols) -> str:
    if isinstance(symbols, str):
        return symbols
    if not symbols:
        return "ε"
    if all(len(s) == 1 for s in symbols):
        return "".join(symbols)
    return "·".join(symbols)


def _flag(value: bool) -> str:
    return "exact" if value else "lower-bound"


def render_table(table: SemimeasureTable, machine: str = "") -> str:
    """Rows: ``row STRING MASS exact|lower-bound``, in length-then-lex order."""
    lines = ["report semimeasure"]
    if machine:
        lines.append(f"machine {machine}")
    lines.append(f"max_len {'none' if table.max_len is None else table.max_len}")
    lines.append(f"max_steps {table.max_steps}")
    lines.append(f"halting_mass {rat_format(table.halting_mass)}")
    lines.append(f"rows {len(table.masses)}")
    for s in table.strings():
        lines.append(f"row {format_string(s)} {rat_format(table.masses[s])} {_flag(table.is_exact(s))}")
    return "\n".join(lines) + "\n"


def render_paths(paths: list[Path], machine: str = "", max_steps: int | None = None) -> str:
    """Rows: ``row YIELD WEIGHT STEPS CHOICES`` in enumeration order."""
    lines = ["report paths"]
    if machine:
        lines.append(f"machine {machine}")
    if max_steps is not None:
        lines.append(f"max_steps {max_steps}")
    lines.append(f"halting_mass {rat_format(sum((p.weight for p in paths), Fraction(0)))}")
    lines.append(f"rows {len(paths)}")
    for p in paths:
        choices = ",".join(map(str, p.transitions)) or "-"
        lines.append(f"row {format_string(p.yield_)} {rat_format(p.weight)} {p.steps} {choices}")
    return "\n".join(lines) + "\n"


def render_equiv(report: EquivReport) -> str:
    """Rows depend on the mode.

    * weak-exact: ``row STRING MASS_A MASS_B FLAG_A FLAG_B STATUS``
    * strong-multiset: ``row YIELD WEIGHT COUNT_A COUNT_B STATUS``
    * statistical: ``row OUTCOME FREQ_A FREQ_B``
    """
    lines = ["report check-equiv", f"mode {report.mode}", f"verdict {report.verdict}"]
    lines.append(f"worst {rat_format(report.worst)}")
    for key, value in report.params.items():
        lines.append(f"param {key} {value}")
    if report.note:
        lines.append(f"note {report.note}")
    lines.append(f"rows {len(report.rows)}")
    for r in report.rows:
        if report.mode == "weak-exact":
            lines.append(
                f"row {format_string(r.key)} {rat_format(r.mass_a)} {rat_format(r.mass_b)} "
                f"{_flag(r.exact_a)} {_flag(r.exact_b)} {r.status}"
            )
        elif report.mode == "strong-multiset":
            weight, yield_ = r.key
            lines.append(
                f"row {format_string(yield_)} {rat_format(weight)} {r.mass_a.numerator} {r.mass_b.numerator} {r.status}"
            )
        else:
            lines.append(f"row {format_string(r.key)} {rat_format(r.mass_a)} {rat_format(r.mass_b)}")
    return "\n".join(lines) + "\n"


def render_lockstep(report: LockstepReport) -> str:
    lines = ["report lockstep", f"verdict {'clean' if report.clean else 'divergence'}", f"checked {report.checked}"]
    if not report.clean:
        lines.append(f"step {report.step}")
        lines.append(f"path {format_string(report.path)}")
        lines.append(f"detail {report.detail}")
    return "\n".join(lines) + "\n"


def render(obj) -> str:
    """Dispatches to the matching renderer."""
    if isinstance(obj, SemimeasureTable):
        return render_table(obj)
    if isinstance(obj, EquivReport):
        return render_equiv(obj)
    if isinstance(obj, LockstepReport):
        return render_lockstep(obj)
    raise TypeError(f"no text form for {type(obj).__name__}")
