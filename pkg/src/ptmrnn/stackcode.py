"""Stacks as rational numbers in base 10.

A bit stack ``b_1 ... b_N`` (``b_N`` on top) is stored as the decimal fraction
``0.d_N ... d_1``, where bit 0 becomes digit 1 and bit 1 becomes digit 3. Push
and pop are single affine maps followed by the saturated sigmoid, which is
what lets a recurrent layer run a stack.

Stack alphabets larger than two symbols are first given fixed-width binary
codes. Pushing or popping a whole symbol of width ``w`` is the ``w``-fold
composition of the bit maps, and it collapses into one affine map
(:func:`push_code`, :func:`pop_code`).
"""

from __future__ import annotations

from fractions import Fraction
from math import ceil, log2
from typing import Sequence

from ptmrnn.numerics import saturated_sigmoid as sigma

DIGIT = {0: 1, 1: 3}


def encode_bits(bits: Sequence[int]) -> Fraction:
    """Encodes a bit stack given bottom first."""
    enc = Fraction(0)
    for bit in bits:
        enc = push_bit(enc, bit)
    return Fraction(enc)


def push_bit(enc: Fraction, bit: int) -> Fraction:
    """``σ(enc/10 + d/10)`` with ``d`` the digit for ``bit``."""
    return sigma(Fraction(enc) / 10 + Fraction(DIGIT[bit], 10))


def pop_bit(enc: Fraction, bit: int) -> Fraction:
    """``σ(10 enc - d)``; exact only when ``bit`` is really on top."""
    return sigma(10 * Fraction(enc) - DIGIT[bit])


def top_bit(enc: Fraction) -> int | None:
    """Reads the top bit with two threshold neurons, ``None`` for an empty stack.

    ``σ(10 enc)`` is 1 iff the stack is non-empty and ``σ(10 enc - 2)`` is 1
    iff the top digit is 3. Both are exactly 0 or 1 on valid encodings.
    """
    nonempty = sigma(10 * Fraction(enc))
    one = sigma(10 * Fraction(enc) - 2)
    if nonempty not in (0, 1) or one not in (0, 1):
        raise ValueError(f"{enc} is not a stack encoding")
    if nonempty == 0:
        return None
    return int(one)


def code_width(n_symbols: int) -> int:
    """Bits per symbol for an alphabet of ``n_symbols``, at least 1."""
    return max(1, ceil(log2(n_symbols))) if n_symbols > 1 else 1


def assign_codes(symbols: Sequence[str], bottom: str) -> dict[str, tuple[int, ...]]:
    """Gives ``bottom`` the all-zero code and the other symbols 1, 2, ... in order."""
    width = code_width(len(symbols))
    others = [s for s in symbols if s != bottom]
    codes = {bottom: (0,) * width}
    for value, sym in enumerate(others, start=1):
        codes[sym] = tuple(int(c) for c in format(value, f"0{width}b"))
    return codes


def code_value(code: Sequence[int]) -> int:
    """The integer ``d_1 d_2 ... d_w`` formed by the digits of a code, first bit leftmost."""
    value = 0
    for bit in code:
        value = 10 * value + DIGIT[bit]
    return value


def encode_symbols(stack: Sequence[str], codes: dict[str, tuple[int, ...]]) -> Fraction:
    """Encodes a symbol stack given bottom first.

    Each symbol's first code bit ends up leftmost, i.e. nearest the top.
    """
    enc = Fraction(0)
    for sym in stack:
        enc = push_code(enc, codes[sym])
    return enc


def push_code(enc: Fraction, code: Sequence[int]) -> Fraction:
    """Pushes a whole code in one affine step: ``enc/10^w + v/10^w``."""
    scale = 10 ** len(code)
    return sigma(Fraction(enc) / scale + Fraction(code_value(code), scale))


def pop_code(enc: Fraction, code: Sequence[int]) -> Fraction:
    """Pops a whole code in one affine step: ``10^w enc - v``."""
    return sigma(10 ** len(code) * Fraction(enc) - code_value(code))
