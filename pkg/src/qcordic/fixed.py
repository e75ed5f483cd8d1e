"""Two's-complement fixed-point words with explicit rounding and overflow policy.

A ``QFormat`` is the Q(x).(b) layout: ``int_bits`` integer bits (sign bit
included) plus ``frac_bits`` fractional bits.  Values are carried as raw
integers scaled by 2**-frac_bits; every operation that can leave the
representable range raises ``FixedPointOverflowError`` instead of wrapping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

MAX_WORD_BITS = 63


class RoundingMode(enum.Enum):
    # values double as the integer codes handed to the kernels
    NEAREST_TIES_AWAY = 0
    NEAREST_TIES_EVEN = 1
    TRUNCATE = 2


DEFAULT_ROUNDING = RoundingMode.NEAREST_TIES_AWAY


class FixedPointOverflowError(OverflowError):
    """Result does not fit the target format (no silent wraparound, ever)."""


class HexFormatError(ValueError):
    """Malformed hex word for the given format."""


@dataclass(frozen=True)
class QFormat:
    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 1:
            raise ValueError("int_bits must be >= 1 (sign bit is counted here)")
        if self.frac_bits < 1:
            raise ValueError("frac_bits must be >= 1")
        if self.width > MAX_WORD_BITS:
            raise ValueError(
                f"width {self.width} exceeds {MAX_WORD_BITS}-bit word limit"
            )

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def resolution(self) -> float:
        return math.ldexp(1.0, -self.frac_bits)

    @property
    def min_raw(self) -> int:
        return -(1 << (self.width - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.width - 1)) - 1

    @property
    def min_value(self) -> float:
        return math.ldexp(self.min_raw, -self.frac_bits)

    @property
    def max_value(self) -> float:
        return math.ldexp(self.max_raw, -self.frac_bits)

    @property
    def hex_digits(self) -> int:
        return (self.width + 3) // 4

    def __str__(self) -> str:
        return f"Q{self.int_bits}.{self.frac_bits}"


@dataclass(frozen=True)
class Fixed:
    raw: int
    fmt: QFormat

    def __post_init__(self):
        if not isinstance(self.raw, int):
            raise TypeError(f"raw must be int, got {type(self.raw).__name__}")
        if not self.fmt.min_raw <= self.raw <= self.fmt.max_raw:
            raise FixedPointOverflowError(
                f"raw {self.raw} outside {self.fmt} range "
                f"[{self.fmt.min_raw}, {self.fmt.max_raw}]"
            )


def _round_shift(n: int, shift: int, mode: RoundingMode) -> int:
    """Round n / 2**shift to an integer.  shift < 0 is an exact left shift."""
    if shift <= 0:
        return n << -shift
    if mode is RoundingMode.TRUNCATE:
        # arithmetic right shift == floor division
        return n >> shift
    half = 1 << (shift - 1)
    if mode is RoundingMode.NEAREST_TIES_AWAY:
        if n >= 0:
            return (n + half) >> shift
        return -((-n + half) >> shift)
    q = n >> shift
    r = n - (q << shift)
    if r > half or (r == half and q & 1):
        q += 1
    return q


def _round_ratio(num: int, den: int, mode: RoundingMode) -> int:
    """Round num / den (den > 0) to an integer under the same modes."""
    q, r = divmod(num, den)  # floor division, 0 <= r < den
    if r == 0 or mode is RoundingMode.TRUNCATE:
        return q
    twice = 2 * r
    if mode is RoundingMode.NEAREST_TIES_AWAY:
        if twice > den or (twice == den and num > 0):
            q += 1
        return q
    if twice > den or (twice == den and q & 1):
        q += 1
    return q


def quantize(value, fmt: QFormat, mode: RoundingMode = DEFAULT_ROUNDING) -> Fixed:
    """Round a real value onto the format grid.

    Exact for every float input (goes through Fraction, so double rounding
    cannot happen).  Raises FixedPointOverflowError when the rounded result
    falls outside the format.
    """
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"cannot quantize non-finite value {value!r}")
    scaled = Fraction(value) * (1 << fmt.frac_bits)
    raw = _round_ratio(scaled.numerator, scaled.denominator, mode)
    if not fmt.min_raw <= raw <= fmt.max_raw:
        raise FixedPointOverflowError(f"{value!r} does not fit {fmt}")
    return Fixed(raw, fmt)


def to_real(f: Fixed) -> float:
    """Exact for widths up to 53 bits; format widths are capped well below
    the point where ldexp would round."""
    return math.ldexp(f.raw, -f.fmt.frac_bits)


def add(a: Fixed, b: Fixed) -> Fixed:
    if a.fmt != b.fmt:
        raise ValueError(f"format mismatch: {a.fmt} vs {b.fmt}")
    return Fixed(a.raw + b.raw, a.fmt)  # Fixed() checks the range


def sub(a: Fixed, b: Fixed) -> Fixed:
    if a.fmt != b.fmt:
        raise ValueError(f"format mismatch: {a.fmt} vs {b.fmt}")
    return Fixed(a.raw - b.raw, a.fmt)


def neg(a: Fixed) -> Fixed:
    return Fixed(-a.raw, a.fmt)


def shift_right(a: Fixed, amount: int, mode: RoundingMode = DEFAULT_ROUNDING) -> Fixed:
    """Multiply by 2**-amount with the selected rounding.

    Cannot overflow: the rounded magnitude never exceeds the input magnitude
    for amount >= 1, and amount == 0 is the identity.
    """
    if amount < 0:
        raise ValueError("shift amount must be >= 0")
    return Fixed(_round_shift(a.raw, amount, mode), a.fmt)


def mul(a: Fixed, b: Fixed, out_fmt: QFormat,
        mode: RoundingMode = DEFAULT_ROUNDING) -> Fixed:
    """Full-precision product rounded once into out_fmt."""
    prod = a.raw * b.raw
    shift = a.fmt.frac_bits + b.fmt.frac_bits - out_fmt.frac_bits
    raw = _round_shift(prod, shift, mode)
    if not out_fmt.min_raw <= raw <= out_fmt.max_raw:
        raise FixedPointOverflowError(
            f"product {to_real(a)} * {to_real(b)} does not fit {out_fmt}"
        )
    return Fixed(raw, out_fmt)


def to_hex(f: Fixed) -> str:
    """Two's-complement image, fixed width, lowercase, no prefix."""
    mask = (1 << f.fmt.width) - 1
    return format(f.raw & mask, f"0{f.fmt.hex_digits}x")


_HEX_CHARS = set("0123456789abcdef")


def from_hex(s: str, fmt: QFormat) -> Fixed:
    if len(s) != fmt.hex_digits or not set(s) <= _HEX_CHARS:
        raise HexFormatError(
            f"expected {fmt.hex_digits} lowercase hex digits for {fmt}, got {s!r}"
        )
    word = int(s, 16)
    # bits above the word width must be zero (the sign bit is not smeared
    # into the pad nibble)
    if word >> fmt.width:
        raise HexFormatError(f"{s!r} has bits set above width {fmt.width}")
    if word >> (fmt.width - 1):  # sign bit
        word -= 1 << fmt.width
    return Fixed(word, fmt)
