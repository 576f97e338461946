"""Exact rational arithmetic helpers and finite distributions.

Every weight, probability and hidden-state entry in the package is a
:class:`fractions.Fraction` (aliased here as ``Rational``). Fractions are
always stored in lowest terms with a positive denominator, so equality is
structural.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

Rational = Fraction

_LITERAL = re.compile(r"(-?[0-9]+)(?:/([0-9]+))?")

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


class RationalSyntaxError(ValueError):
    """Raised for a malformed or zero-denominator fraction literal."""


def rat_parse(text: str) -> Fraction:
    """Parses a strict ``p`` or ``p/q`` literal into a canonical fraction.

    Unlike ``Fraction(str)`` this rejects whitespace, decimals, exponents and
    a leading ``+``, so that machine files have exactly one spelling per value
    once serialized.

    Args:
        text: The literal, e.g. ``"4/6"`` or ``"-7"``.

    Returns:
        The value in lowest terms.

    Raises:
        RationalSyntaxError: If the literal is malformed or divides by zero.
    """
    match = _LITERAL.fullmatch(text)
    if match is None:
        raise RationalSyntaxError(f"malformed fraction literal {text!r}")
    numerator, denominator = match.group(1), match.group(2)
    if denominator is None:
        return Fraction(int(numerator))
    if int(denominator) == 0:
        raise RationalSyntaxError(f"zero denominator in fraction literal {text!r}")
    return Fraction(int(numerator), int(denominator))


def rat_format(value: Fraction | int) -> str:
    """Formats a rational in the canonical literal form read by :func:`rat_parse`."""
    return str(Fraction(value))


def saturated_sigmoid(x: Fraction | int) -> Fraction | int:
    """Clamps ``x`` to the unit interval.

    Returns plain ``0`` or ``1`` ints on saturation; ints compare and hash
    equal to the matching fractions and keep simulation loops cheap.
    """
    if x < 0:
        return 0
    if x > 1:
        return 1
    return x


def is_dyadic(r: Fraction | int) -> bool:
    """True iff the canonical denominator of ``r`` is a power of two."""
    denominator = Fraction(r).denominator
    return denominator & (denominator - 1) == 0


def binary_expansion(p: Fraction) -> tuple[list[int], int | None]:
    """Computes the binary digits of ``p`` in ``(0, 1)`` by long division.

    Args:
        p: A rational strictly between 0 and 1.

    Returns:
        ``(digits, cycle_start)``. For a dyadic ``p`` the digits end at the last
        1-bit and ``cycle_start`` is ``None``. Otherwise the digit sequence is
        eventually periodic and ``digits[cycle_start:]`` is the repeating block.
    """
    if not 0 < p < 1:
        raise ValueError(f"binary expansion needs 0 < p < 1, got {p}")
    digits: list[int] = []
    seen: dict[int, int] = {}
    remainder, denominator = p.numerator, p.denominator
    while remainder and remainder not in seen:
        seen[remainder] = len(digits)
        remainder *= 2
        digits.append(1 if remainder >= denominator else 0)
        if remainder >= denominator:
            remainder -= denominator
    if remainder == 0:
        return digits, None
    return digits, seen[remainder]


def draw_index(rng: random.Random, weights: Sequence[Fraction]) -> int:
    """Draws an index with probability proportional to exact ``weights``.

    A uniform point in [0, 1) is revealed one random bit at a time; bisection
    stops as soon as the dyadic interval known to contain the point lies inside
    a single cumulative bin. No floating point is involved, and the weights
    must sum to exactly 1.
    """
    if sum(weights) != 1:
        raise ValueError("draw_index needs weights summing to 1")
    bounds: list[Fraction] = []
    total = ZERO
    for w in weights:
        total += w
        bounds.append(total)
    low, width = ZERO, ONE
    while True:
        lo_bin = _bin_of(bounds, low)
        hi_point = low + width
        if bounds[lo_bin] >= hi_point:
            return lo_bin
        width /= 2
        if rng.getrandbits(1):
            low += width


def _bin_of(bounds: Sequence[Fraction], point: Fraction) -> int:
    for i, bound in enumerate(bounds):
        if point < bound:
            return i
    raise AssertionError("point outside the unit interval")


@dataclass(frozen=True)
class FiniteDist:
    """A sub-probability distribution over a declared alphabet.

    Attributes:
        entries: Weight per symbol. Symbols absent from the map have weight 0.
        alphabet: The declared support.
    """

    entries: Mapping[Hashable, Fraction]
    alphabet: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        cleaned = {k: Fraction(v) for k, v in self.entries.items() if v != 0}
        alphabet = frozenset(self.alphabet) if self.alphabet else frozenset(cleaned)
        object.__setattr__(self, "entries", cleaned)
        object.__setattr__(self, "alphabet", alphabet)
        stray = set(cleaned) - alphabet
        if stray:
            raise ValueError(f"symbols outside the alphabet: {sorted(map(str, stray))}")
        if any(not 0 <= w <= 1 for w in cleaned.values()):
            raise ValueError("distribution weight outside [0, 1]")
        if self.total > 1:
            raise ValueError(f"distribution mass {self.total} exceeds 1")

    @property
    def total(self) -> Fraction:
        return sum(self.entries.values(), ZERO)

    @property
    def normalized(self) -> bool:
        return self.total == 1

    def __getitem__(self, symbol: Hashable) -> Fraction:
        return self.entries.get(symbol, ZERO)

    def support(self) -> list:
        return sorted(self.entries, key=str)


def mass_sum(values: Iterable[Fraction]) -> Fraction:
    """Sums rationals exactly, returning a Fraction even for an empty input."""
    return sum(values, ZERO)
