"""Bounded equivalence checks between any two machines.

Exact checks compare enumerated lower bounds. A row in which either side may
still gain mass beyond the step bound is reported as inconclusive and never
as a mismatch. Such rows do not block an ``equal`` verdict as long as both
lower bounds agree, which keeps the check reflexive at every bound; the
verdict is then a claim about the enumerated prefix only.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from ptmrnn.machines import Machine, MachineError, Ptm, RnnLm
from ptmrnn.simulate import CUTOFF, BudgetExceeded, count_paths, enumerate_paths, sample, semimeasure

EQUAL, MISMATCH, INCONCLUSIVE = "equal", "mismatch", "inconclusive"


@dataclass(frozen=True)
class Row:
    """One compared outcome.

    ``key`` is a yield for weak checks, ``(weight, yield)`` for multiset checks,
    and a yield or ``"CUTOFF"`` for statistical checks.
    """

    key: object
    mass_a: Fraction
    mass_b: Fraction
    exact_a: bool = True
    exact_b: bool = True
    status: str = EQUAL


@dataclass(frozen=True)
class EquivReport:
    """Result of an equivalence check.

    Attributes:
        mode: ``"weak-exact"``, ``"strong-multiset"`` or ``"statistical"``.
        verdict: ``"equal"``, ``"mismatch"`` or ``"inconclusive"``.
        rows: Per-outcome comparisons.
        worst: Largest absolute difference over rows that count, or the
            estimated total-variation distance in statistical mode.
        params: Bounds and sample sizes used.
        note: Extra context, e.g. a budget overrun.
    """

    mode: str
    verdict: str
    rows: tuple[Row, ...] = ()
    worst: Fraction = Fraction(0)
    params: dict = field(default_factory=dict)
    note: str = ""

    def first_mismatch(self) -> Row | None:
        return next((r for r in self.rows if r.status == MISMATCH), None)


def _row_status(a: Fraction, b: Fraction, exact_a: bool, exact_b: bool) -> str:
    if exact_a and exact_b:
        return EQUAL if a == b else MISMATCH
    return INCONCLUSIVE


def _verdict(rows: list[Row]) -> str:
    if any(r.status == MISMATCH for r in rows):
        return MISMATCH
    if any(r.status == INCONCLUSIVE and r.mass_a != r.mass_b for r in rows):
        return INCONCLUSIVE
    return EQUAL


def check_weak(a: Machine | RnnLm, b: Machine | RnnLm, max_len: int, max_steps: int) -> EquivReport:
    """Compares the two semimeasures on every string of length at most ``max_len``.

    Rows cover every string either machine produces within the bound, plus
    the yields of paths still running at the bound. Any other string has
    exact mass 0 on both sides.
    """
    params = {"max_len": max_len, "max_steps": max_steps}
    try:
        ta = semimeasure(a, max_len, max_steps)
        tb = semimeasure(b, max_len, max_steps)
    except BudgetExceeded as exc:
        return EquivReport("weak-exact", INCONCLUSIVE, params=params, note=str(exc))
    keys = set(ta.masses) | set(tb.masses) | {s for s in ta.live | tb.live if len(s) <= max_len}
    rows = []
    for s in sorted(keys, key=lambda s: (len(s), s)):
        ma, mb = ta.mass(s), tb.mass(s)
        ea, eb = ta.is_exact(s), tb.is_exact(s)
        rows.append(Row(s, ma, mb, ea, eb, _row_status(ma, mb, ea, eb)))
    worst = max((abs(r.mass_a - r.mass_b) for r in rows if r.status != INCONCLUSIVE), default=Fraction(0))
    return EquivReport("weak-exact", _verdict(rows), tuple(rows), worst, params)


def path_multiset(machine: Machine | RnnLm, max_steps: int) -> Counter:
    """Counts halting paths by ``(weight, yield)``."""
    return count_paths(machine, max_steps)


def check_strong_multiset(a: Machine | RnnLm, b: Machine | RnnLm, max_steps: int) -> EquivReport:
    """Compares the multisets of ``(weight, yield)`` over halting paths.

    Equal multisets are exactly what a weight- and yield-preserving bijection
    between the two bounded path sets requires. The claim is bounded by
    ``max_steps``.
    """
    params = {"max_steps": max_steps}
    try:
        ca, cb = path_multiset(a, max_steps), path_multiset(b, max_steps)
    except BudgetExceeded as exc:
        return EquivReport("strong-multiset", INCONCLUSIVE, params=params, note=str(exc))
    rows = []
    for key in sorted(set(ca) | set(cb), key=lambda k: (len(k[1]), k[1], k[0])):
        na, nb = ca[key], cb[key]
        rows.append(Row(key, Fraction(na), Fraction(nb), status=EQUAL if na == nb else MISMATCH))
    worst = max((abs(r.mass_a - r.mass_b) for r in rows), default=Fraction(0))
    return EquivReport("strong-multiset", _verdict(rows), tuple(rows), worst, params)


def check_statistical(
    a: Machine | RnnLm,
    b: Machine | RnnLm,
    n_samples: int,
    max_steps: int,
    tolerance: float,
    seed: int = 0,
) -> EquivReport:
    """Estimates the total-variation distance between sampled yields.

    Sample ``i`` of both machines uses seed ``seed + i``. Cutoff samples form
    their own bin.

    Raises:
        ValueError: If ``n_samples`` is not positive.
    """
    if n_samples <= 0:
        raise ValueError("check_statistical needs n_samples > 0")
    ca = Counter(_outcome(sample(a, seed + i, max_steps)) for i in range(n_samples))
    cb = Counter(_outcome(sample(b, seed + i, max_steps)) for i in range(n_samples))
    rows = []
    distance = Fraction(0)
    for key in sorted(set(ca) | set(cb), key=lambda k: (k == "CUTOFF", len(k), k)):
        fa, fb = Fraction(ca[key], n_samples), Fraction(cb[key], n_samples)
        distance += abs(fa - fb)
        rows.append(Row(key, fa, fb, status=EQUAL))
    distance /= 2
    limit = Fraction(str(tolerance)) if isinstance(tolerance, float) else Fraction(tolerance)
    verdict = EQUAL if distance <= limit else MISMATCH
    params = {"n_samples": n_samples, "max_steps": max_steps, "tolerance": tolerance, "seed": seed}
    return EquivReport("statistical", verdict, tuple(rows), distance, params)


def _outcome(result) -> object:
    return "CUTOFF" if result is CUTOFF else result


def check_ptm_path_law(m: Ptm, max_steps: int) -> bool:
    """True iff every halting path of length ``n`` has weight exactly ``2^-n``.

    Raises:
        MachineError: If ``m`` is not a :class:`Ptm`.
    """
    if not isinstance(m, Ptm):
        raise MachineError(f"the path law applies to Ptm machines, not {type(m).__name__}")
    return all(p.weight == Fraction(1, 2 ** len(p.transitions)) for p in enumerate_paths(m, max_steps))
