"""Bit-level IEEE-754 kernel.

Everything in this package is built on the primitives here: decoding bit
patterns into integer (sign, significand, scale) triples, correctly rounded
encoding in all four IEEE rounding modes, exact FP16 products, a reference
FP32 adder with classic guard/round/sticky handling, exact power-of-two
scaling, and an arbitrary-precision dyadic-rational type that serves as the
ground-truth oracle.

No host floating point is used anywhere; all arithmetic is on Python
integers, so results are bit-exact and platform independent.

NaN policy: every NaN produced by this module is quiet with a canonical
payload (0x7E00 / 0x7FC00000 / 0x7FF8000000000000).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import ClassVar, Iterable, Union


class RoundingMode(Enum):
    """The four IEEE-754 rounding-direction attributes."""

    RNE = "rne"  # to nearest, ties to even
    RTZ = "rtz"  # toward zero
    RTN = "rtn"  # toward negative infinity
    RTP = "rtp"  # toward positive infinity


RNE = RoundingMode.RNE
RTZ = RoundingMode.RTZ
RTN = RoundingMode.RTN
RTP = RoundingMode.RTP

ALL_ROUNDING_MODES = (RNE, RTZ, RTN, RTP)

# Term classification used by the integer-level helpers.
FINITE = 0
INFINITE = 1
NAN = 2


class FloatFormat:
    """Static parameters of one IEEE binary interchange format."""

    __slots__ = (
        "name", "width", "exp_bits", "frac_bits", "bias", "emin", "emax",
        "sig_bits", "exp_mask", "frac_mask", "sign_mask", "qnan", "inf",
        "max_finite", "hex_digits",
    )

    def __init__(self, name: str, width: int, exp_bits: int, frac_bits: int):
        assert width == 1 + exp_bits + frac_bits
        self.name = name
        self.width = width
        self.exp_bits = exp_bits
        self.frac_bits = frac_bits
        self.bias = (1 << (exp_bits - 1)) - 1
        self.emin = 1 - self.bias
        self.emax = self.bias
        self.sig_bits = frac_bits + 1
        self.exp_mask = (1 << exp_bits) - 1
        self.frac_mask = (1 << frac_bits) - 1
        self.sign_mask = 1 << (width - 1)
        self.inf = self.exp_mask << frac_bits
        self.qnan = self.inf | (1 << (frac_bits - 1))
        self.max_finite = ((self.exp_mask - 1) << frac_bits) | self.frac_mask
        self.hex_digits = width // 4

    def __repr__(self) -> str:
        return self.name


FP16 = FloatFormat("f16", 16, 5, 10)
FP32 = FloatFormat("f32", 32, 8, 23)
FP64 = FloatFormat("f64", 64, 11, 52)

_FORMATS_BY_NAME = {"f16": FP16, "f32": FP32, "f64": FP64}


@dataclass(frozen=True, slots=True)
class _Bits:
    """A raw bit pattern of one format, with field accessors."""

    bits: int

    FORMAT: ClassVar[FloatFormat]

    def __post_init__(self):
        fmt = self.FORMAT
        if not 0 <= self.bits < (1 << fmt.width):
            raise ValueError(f"{fmt.name} pattern out of range: {self.bits:#x}")

    @property
    def sign(self) -> int:
        return self.bits >> (self.FORMAT.width - 1)

    @property
    def exp_field(self) -> int:
        return (self.bits >> self.FORMAT.frac_bits) & self.FORMAT.exp_mask

    @property
    def fraction(self) -> int:
        return self.bits & self.FORMAT.frac_mask

    @property
    def is_nan(self) -> bool:
        return self.exp_field == self.FORMAT.exp_mask and self.fraction != 0

    @property
    def is_inf(self) -> bool:
        return self.exp_field == self.FORMAT.exp_mask and self.fraction == 0

    @property
    def is_zero(self) -> bool:
        return self.bits & ~self.FORMAT.sign_mask == 0

    @property
    def is_subnormal(self) -> bool:
        return self.exp_field == 0 and self.fraction != 0

    @property
    def is_finite(self) -> bool:
        return self.exp_field != self.FORMAT.exp_mask

    def __repr__(self) -> str:
        return f"{type(self).__name__}(0x{self.bits:0{self.FORMAT.hex_digits}X})"


class F16Bits(_Bits):
    FORMAT = FP16


class F32Bits(_Bits):
    FORMAT = FP32


class F64Bits(_Bits):
    FORMAT = FP64


AnyBits = Union[F16Bits, F32Bits, F64Bits]

_BITS_CLASS = {FP16: F16Bits, FP32: F32Bits, FP64: F64Bits}


def wrap_bits(bits: int, fmt: FloatFormat) -> AnyBits:
    return _BITS_CLASS[fmt](bits)


# ---------------------------------------------------------------------------
# Integer-level decode / correctly rounded encode
# ---------------------------------------------------------------------------


def decode_parts(bits: int, fmt: FloatFormat) -> tuple[int, int, int, int]:
    """Split a pattern into (kind, sign, significand, scale).

    For finite values the triple satisfies value == (-1)^sign * M * 2^q
    with M >= 0. Subnormals use the hidden-0 reading (M = fraction,
    q = emin - frac_bits). For infinities and NaNs M and q are zero.
    """
    sign = bits >> (fmt.width - 1)
    exp_f = (bits >> fmt.frac_bits) & fmt.exp_mask
    frac = bits & fmt.frac_mask
    if exp_f == fmt.exp_mask:
        return (NAN if frac else INFINITE), sign, 0, 0
    if exp_f == 0:
        return FINITE, sign, frac, fmt.emin - fmt.frac_bits
    return FINITE, sign, frac | (1 << fmt.frac_bits), exp_f - fmt.bias - fmt.frac_bits


def _shift_round(m: int, shift: int, sign: int, rm: RoundingMode) -> tuple[int, bool]:
    """Round m / 2^shift to an integer under rm; sign selects direction
    for RTP/RTN. Returns (quotient, inexact)."""
    if shift <= 0:
        return m << -shift, False
    q = m >> shift
    r = m & ((1 << shift) - 1)
    if r == 0:
        return q, False
    if rm is RNE:
        half = 1 << (shift - 1)
        if r > half or (r == half and q & 1):
            q += 1
    elif rm is RTP:
        if sign == 0:
            q += 1
    elif rm is RTN:
        if sign == 1:
            q += 1
    # RTZ: truncate
    return q, True


def round_to_bits(sign: int, m: int, q: int, fmt: FloatFormat,
                  rm: RoundingMode) -> tuple[int, bool]:
    """Correctly round the nonzero value (-1)^sign * m * 2^q into fmt.

    Returns (bits, inexact). Overflow follows the IEEE rules per mode:
    RNE goes to infinity, RTZ saturates at the largest finite value, and
    the directed modes saturate on the side they cannot cross.
    """
    assert m > 0
    length = m.bit_length()
    e = q + length - 1  # floor(log2 |value|)
    if e < fmt.emin:
        # Subnormal quantum; may round up into the smallest normal.
        f, inexact = _shift_round(m, (fmt.emin - fmt.frac_bits) - q, sign, rm)
        return (sign << (fmt.width - 1)) | f, inexact
    sig, inexact = _shift_round(m, length - fmt.sig_bits, sign, rm)
    if sig == 1 << fmt.sig_bits:
        sig >>= 1
        e += 1
    if e > fmt.emax:
        if rm is RNE or (rm is RTP and sign == 0) or (rm is RTN and sign == 1):
            return (sign << (fmt.width - 1)) | fmt.inf, True
        return (sign << (fmt.width - 1)) | fmt.max_finite, True
    bits = ((sign << (fmt.width - 1))
            | ((e + fmt.bias) << fmt.frac_bits)
            | (sig & fmt.frac_mask))
    return bits, inexact


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def f16_to_f32_exact_bits(a: int) -> int:
    kind, sign, m, q = decode_parts(a, FP16)
    if kind == NAN:
        return FP32.qnan
    if kind == INFINITE:
        return (sign << 31) | FP32.inf
    if m == 0:
        return sign << 31
    bits, inexact = round_to_bits(sign, m, q, FP32, RNE)
    assert not inexact  # every finite FP16 value is exact in FP32
    return bits


def f16_to_f32_exact(a: F16Bits) -> F32Bits:
    """Widen an FP16 pattern to FP32, preserving the value exactly."""
    return F32Bits(f16_to_f32_exact_bits(a.bits))


def f32_to_f16_bits(x: int, rm: RoundingMode) -> int:
    kind, sign, m, q = decode_parts(x, FP32)
    if kind == NAN:
        return FP16.qnan
    if kind == INFINITE:
        return (sign << 15) | FP16.inf
    if m == 0:
        return sign << 15
    return round_to_bits(sign, m, q, FP16, rm)[0]


def f32_to_f16(x: F32Bits, rm: RoundingMode) -> F16Bits:
    """Round an FP32 pattern to FP16 under rm (IEEE-correct, with gradual
    underflow and per-mode overflow handling)."""
    return F16Bits(f32_to_f16_bits(x.bits, rm))


def mul_f16_exact_bits(a: int, b: int) -> int:
    ka, sa, ma, qa = decode_parts(a, FP16)
    kb, sb, mb, qb = decode_parts(b, FP16)
    sign = sa ^ sb
    if ka == NAN or kb == NAN:
        return FP32.qnan
    if ka == INFINITE or kb == INFINITE:
        if (ka == FINITE and ma == 0) or (kb == FINITE and mb == 0):
            return FP32.qnan  # inf * 0
        return (sign << 31) | FP32.inf
    m = ma * mb
    if m == 0:
        return sign << 31
    bits, inexact = round_to_bits(sign, m, qa + qb, FP32, RNE)
    assert not inexact  # 11x11-bit products always fit the 24-bit significand
    return bits


def mul_f16_exact(a: F16Bits, b: F16Bits) -> F32Bits:
    """Exact product of two FP16 values as an FP32 pattern.

    11-bit significand products fit in 24 bits and the exponent range of
    FP16 products stays within FP32 normal range, so no rounding ever
    happens; IEEE special rules apply (inf*0 -> NaN, sign is the XOR).
    """
    return F32Bits(mul_f16_exact_bits(a.bits, b.bits))


# ---------------------------------------------------------------------------
# Reference IEEE addition (classic guard/round/sticky adder)
# ---------------------------------------------------------------------------

_GRS = 3  # guard, round, sticky positions appended below the significand


def _round_grs(sign: int, sig: int, rm: RoundingMode) -> int:
    """Round a significand carrying three trailing GRS bits."""
    grs = sig & 0b111
    sig >>= _GRS
    if grs == 0:
        return sig
    if rm is RNE:
        if grs > 0b100 or (grs == 0b100 and sig & 1):
            sig += 1
    elif rm is RTP:
        if sign == 0:
            sig += 1
    elif rm is RTN:
        if sign == 1:
            sig += 1
    return sig


def add_ieee_bits(x: int, y: int, fmt: FloatFormat, rm: RoundingMode) -> int:
    """IEEE-correct addition of two patterns of fmt under rm.

    Implemented in the classic hardware style: align the smaller operand
    with a sticky bit, add or subtract magnitudes, renormalize, and round
    on guard/round/sticky. Kept deliberately independent of the exact
    dyadic oracle so the two routes cross-check each other.
    """
    kx, sx, mx, qx = decode_parts(x, fmt)
    ky, sy, my, qy = decode_parts(y, fmt)
    if kx == NAN or ky == NAN:
        return fmt.qnan
    if kx == INFINITE or ky == INFINITE:
        if kx == INFINITE and ky == INFINITE and sx != sy:
            return fmt.qnan
        return x if kx == INFINITE else y
    if mx == 0 and my == 0:
        if sx == sy:
            return sx << (fmt.width - 1)
        return (1 if rm is RTN else 0) << (fmt.width - 1)
    if mx == 0:
        return y
    if my == 0:
        return x

    # Operate on significands extended by GRS bits at a common scale.
    if qx < qy:
        (sx, mx, qx), (sy, my, qy) = (sy, my, qy), (sx, mx, qx)
    ax = mx << _GRS
    shift = qx - qy
    if shift == 0:
        ay = my << _GRS
    elif shift < my.bit_length() + _GRS:
        ay = my << _GRS
        lost = ay & ((1 << shift) - 1)
        ay = (ay >> shift) | (1 if lost else 0)
    else:
        ay = 1  # fully shifted out: sticky only
    if sx == sy:
        sig = ax + ay
        sign = sx
    elif ax > ay:
        sig = ax - ay
        sign = sx
    elif ay > ax:
        sig = ay - ax
        sign = sy
    else:
        return (1 if rm is RTN else 0) << (fmt.width - 1)

    # Renormalize so exactly GRS + sig_bits bits remain, folding any extra
    # low bits into sticky, then round.
    q = qx - _GRS
    target = fmt.sig_bits + _GRS
    length = sig.bit_length()
    e_floor = q + length - 1
    if e_floor < fmt.emin:
        # Denormal result range: align to the subnormal quantum instead.
        target_q = fmt.emin - fmt.frac_bits - _GRS
    else:
        target_q = q + length - target
    if target_q > q:
        d = target_q - q
        lost = sig & ((1 << d) - 1)
        sig = (sig >> d) | (1 if lost else 0)
    elif target_q < q:
        sig <<= q - target_q
    sig = _round_grs(sign, sig, rm)
    if sig == 0:
        return sign << (fmt.width - 1)
    q = target_q + _GRS
    length = sig.bit_length()
    e = q + length - 1
    if e < fmt.emin:
        return (sign << (fmt.width - 1)) | (sig << (q - (fmt.emin - fmt.frac_bits)))
    if length > fmt.sig_bits:  # rounding carried out one position
        sig >>= 1
        q += 1
        e = q + fmt.sig_bits - 1
    if e > fmt.emax:
        if rm is RNE or (rm is RTP and sign == 0) or (rm is RTN and sign == 1):
            return (sign << (fmt.width - 1)) | fmt.inf
        return (sign << (fmt.width - 1)) | fmt.max_finite
    if length < fmt.sig_bits:  # subnormal: encode with exponent field 0
        return (sign << (fmt.width - 1)) | (sig << (q - (fmt.emin - fmt.frac_bits)))
    return ((sign << (fmt.width - 1))
            | ((e + fmt.bias) << fmt.frac_bits)
            | (sig & fmt.frac_mask))


def add_f32_ieee(x: F32Bits, y: F32Bits, rm: RoundingMode) -> F32Bits:
    """Reference IEEE binary32 addition; the behavior the accumulator model
    is discriminated against."""
    return F32Bits(add_ieee_bits(x.bits, y.bits, FP32, rm))


def scale_pow2_flagged(x: F32Bits, k: int) -> tuple[F32Bits, bool]:
    """Multiply by 2^k. Exact while the result stays normal; overflow goes
    to +/-inf, and results entering the subnormal range are rounded RNE
    with the inexact flag set."""
    kind, sign, m, q = decode_parts(x.bits, FP32)
    if kind == NAN:
        return F32Bits(FP32.qnan), False
    if kind == INFINITE or m == 0:
        return x, False
    bits, inexact = round_to_bits(sign, m, q + k, FP32, RNE)
    return F32Bits(bits), inexact


def scale_pow2(x: F32Bits, k: int) -> F32Bits:
    return scale_pow2_flagged(x, k)[0]


def negate(x: AnyBits) -> AnyBits:
    """Flip the sign bit (IEEE negate; NaN payload untouched)."""
    return type(x)(x.bits ^ x.FORMAT.sign_mask)


# ---------------------------------------------------------------------------
# Exact dyadic rationals (the oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ExactDyadic:
    """sign * mantissa * 2^exponent with arbitrary-precision mantissa.

    Canonical form: mantissa is odd or zero (trailing zeros folded into the
    exponent); zero has mantissa 0, exponent 0. Finite arithmetic on these
    values is exact -- no rounding ever happens.
    """

    sign: int = 1
    mantissa: int = 0
    exponent: int = 0
    kind: int = FINITE

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.mantissa < 0:
            raise ValueError("mantissa must be nonnegative")
        if self.kind == FINITE:
            m, e = self.mantissa, self.exponent
            if m == 0:
                e = 0
            else:
                tz = (m & -m).bit_length() - 1
                m >>= tz
                e += tz
            object.__setattr__(self, "mantissa", m)
            object.__setattr__(self, "exponent", e)
        else:
            object.__setattr__(self, "mantissa", 0)
            object.__setattr__(self, "exponent", 0)

    @property
    def is_zero(self) -> bool:
        return self.kind == FINITE and self.mantissa == 0

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    def to_fraction(self) -> Fraction:
        if self.kind != FINITE:
            raise ValueError("not finite")
        v = Fraction(self.mantissa) * Fraction(2) ** self.exponent
        return v if self.sign > 0 else -v

    @classmethod
    def from_fraction(cls, f: Fraction) -> "ExactDyadic":
        num, den = f.numerator, f.denominator
        if den & (den - 1):
            raise ValueError(f"{f} is not dyadic")
        sign = 1 if num >= 0 else -1
        return cls(sign, abs(num), -(den.bit_length() - 1))

    @classmethod
    def from_int(cls, n: int) -> "ExactDyadic":
        return cls(1 if n >= 0 else -1, abs(n), 0)

    def __str__(self) -> str:
        if self.kind == NAN:
            return "nan"
        if self.kind == INFINITE:
            return "+inf" if self.sign > 0 else "-inf"
        if self.mantissa == 0:
            return "0"
        s = "-" if self.sign < 0 else ""
        return f"{s}{self.mantissa}*2^{self.exponent}"


EXACT_ZERO = ExactDyadic()
EXACT_NAN = ExactDyadic(kind=NAN)


def to_exact(x: AnyBits) -> ExactDyadic:
    """Decode any pattern into the exact dyadic it denotes."""
    kind, sign, m, q = decode_parts(x.bits, x.FORMAT)
    if kind == NAN:
        return EXACT_NAN
    s = -1 if sign else 1
    if kind == INFINITE:
        return ExactDyadic(s, 0, 0, INFINITE)
    return ExactDyadic(s, m, q)


def exact_neg(a: ExactDyadic) -> ExactDyadic:
    if a.kind == NAN:
        return a
    return ExactDyadic(-a.sign, a.mantissa, a.exponent, a.kind)


def exact_abs(a: ExactDyadic) -> ExactDyadic:
    if a.kind == NAN:
        return a
    return ExactDyadic(1, a.mantissa, a.exponent, a.kind)


def exact_add(a: ExactDyadic, b: ExactDyadic) -> ExactDyadic:
    if a.kind == NAN or b.kind == NAN:
        return EXACT_NAN
    if a.kind == INFINITE or b.kind == INFINITE:
        if a.kind == INFINITE and b.kind == INFINITE and a.sign != b.sign:
            return EXACT_NAN
        return a if a.kind == INFINITE else b
    q = min(a.exponent, b.exponent)
    total = (a.sign * (a.mantissa << (a.exponent - q))
             + b.sign * (b.mantissa << (b.exponent - q)))
    return ExactDyadic(1 if total >= 0 else -1, abs(total), q)


def exact_sub(a: ExactDyadic, b: ExactDyadic) -> ExactDyadic:
    return exact_add(a, exact_neg(b))


def exact_mul(a: ExactDyadic, b: ExactDyadic) -> ExactDyadic:
    if a.kind == NAN or b.kind == NAN:
        return EXACT_NAN
    sign = a.sign * b.sign
    if a.kind == INFINITE or b.kind == INFINITE:
        if a.is_zero or b.is_zero:
            return EXACT_NAN
        return ExactDyadic(sign, 0, 0, INFINITE)
    return ExactDyadic(sign, a.mantissa * b.mantissa, a.exponent + b.exponent)


def exact_compare(a: ExactDyadic, b: ExactDyadic) -> int | None:
    """Trichotomy on finite/infinite values: -1, 0, or +1. NaN comparisons
    are unordered and reported as None."""
    if a.kind == NAN or b.kind == NAN:
        return None
    d = exact_sub(a, b)
    if d.kind == NAN:  # inf - inf of equal sign
        return 0
    if d.is_zero:
        return 0
    return d.sign


def exact_sum(items: Iterable[ExactDyadic]) -> ExactDyadic:
    total = EXACT_ZERO
    for it in items:
        total = exact_add(total, it)
    return total


def round_dyadic(d: ExactDyadic, fmt: FloatFormat, rm: RoundingMode) -> int:
    """Correctly round an exact dyadic into fmt (bits). Exact zero maps to
    +0; sign of zero is the caller's business."""
    if d.kind == NAN:
        return fmt.qnan
    sign = 0 if d.sign > 0 else 1
    if d.kind == INFINITE:
        return (sign << (fmt.width - 1)) | fmt.inf
    if d.mantissa == 0:
        return 0
    return round_to_bits(sign, d.mantissa, d.exponent, fmt, rm)[0]


# ---------------------------------------------------------------------------
# Numeric text I/O
# ---------------------------------------------------------------------------
#
# A float literal is one of:
#   * a hex bit pattern "0x...." with exactly the format's digit count
#     (authoritative bits);
#   * a C99-style hex float such as -0x1.8p-40;
#   * the form m*2^e (also m.2^e with a middle dot, or a bare 2^e) with a
#     decimal significand m;
#   * a plain decimal, which must have a unique nearest representable
#     value (exact halfway points are rejected);
#   * inf, -inf, nan.
# An optional f16/f32/f64 suffix selects the format when parsing untyped
# text (see parse_typed).

_BIT_PATTERN_RE = re.compile(r"0[xX][0-9a-fA-F]+$")
_HEX_FLOAT_RE = re.compile(
    r"([+-]?)0[xX]([0-9a-fA-F]+)(?:\.([0-9a-fA-F]*))?[pP]([+-]?\d+)$")
_POW2_RE = re.compile(r"([+-]?)(?:([0-9.]+)\s*[*x·⋅]\s*)?2\^([+-]?\d+)$")
_DECIMAL_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


def _nearest_bits(v: Fraction, fmt: FloatFormat, text: str) -> int:
    """Encode the unique nearest representable value of v, rejecting exact
    ties and magnitudes beyond the largest finite value."""
    if v == 0:
        return 0
    sign = 0 if v > 0 else 1
    a = abs(v)
    # Exact dyadics encode directly when representable.
    num, den = a.numerator, a.denominator
    if den & (den - 1) == 0:
        d = ExactDyadic(1, num, -(den.bit_length() - 1))
        lo = round_to_bits(0, d.mantissa, d.exponent, fmt, RTZ)
        if not lo[1]:
            bits = lo[0]
            if (bits & fmt.exp_mask << fmt.frac_bits) != fmt.inf:
                return (sign << (fmt.width - 1)) | bits
    lo_bits, _ = _fraction_round(a, fmt, down=True)
    hi_bits, _ = _fraction_round(a, fmt, down=False)
    if hi_bits is None:
        raise ValueError(f"literal {text!r} exceeds the largest finite {fmt.name} value")
    if lo_bits == hi_bits:
        return (sign << (fmt.width - 1)) | lo_bits
    lo_v = _bits_fraction(lo_bits, fmt)
    hi_v = _bits_fraction(hi_bits, fmt)
    if a - lo_v == hi_v - a:
        raise ValueError(f"literal {text!r} is exactly halfway between two "
                         f"{fmt.name} values; use a hex pattern instead")
    bits = lo_bits if a - lo_v < hi_v - a else hi_bits
    return (sign << (fmt.width - 1)) | bits


def _fraction_round(a: Fraction, fmt: FloatFormat, down: bool) -> tuple[int | None, bool]:
    """Magnitude of a rounded down/up to the fmt grid; None when rounding up
    would leave the finite range."""
    # Find floor(log2 a).
    num, den = a.numerator, a.denominator
    e = num.bit_length() - den.bit_length()
    if (num << max(0, -e)) < (den << max(0, e)):
        e -= 1
    grid = (max(e, fmt.emin)) - fmt.frac_bits
    scaled = Fraction(num, den) / (Fraction(2) ** grid)
    idx = scaled.numerator // scaled.denominator  # floor
    exact = scaled.denominator == 1 or idx * scaled.denominator == scaled.numerator
    if not down and not exact:
        idx += 1
    if idx == 0:
        return 0, exact
    bits, _ = round_to_bits(0, idx, grid, fmt, RTZ)
    if (bits & (fmt.exp_mask << fmt.frac_bits)) == fmt.inf:
        return None, exact
    return bits, exact


def _bits_fraction(bits: int, fmt: FloatFormat) -> Fraction:
    kind, sign, m, q = decode_parts(bits, fmt)
    assert kind == FINITE
    v = Fraction(m) * Fraction(2) ** q
    return -v if sign else v


def parse_literal(text: str, fmt: FloatFormat) -> int:
    """Parse one float literal into a bit pattern of fmt."""
    t = text.strip()
    if not t:
        raise ValueError("empty float literal")
    low = t.lower()
    if low in ("inf", "+inf"):
        return fmt.inf
    if low == "-inf":
        return fmt.sign_mask | fmt.inf
    if low == "nan":
        return fmt.qnan
    m = _BIT_PATTERN_RE.fullmatch(t)
    if m:
        digits = t[2:]
        if len(digits) != fmt.hex_digits:
            raise ValueError(
                f"bit pattern {text!r} must have exactly {fmt.hex_digits} "
                f"hex digits for {fmt.name}")
        return int(digits, 16)
    m = _HEX_FLOAT_RE.fullmatch(t)
    if m:
        sgn, ip, fp, ex = m.groups()
        fp = fp or ""
        v = Fraction(int(ip + fp, 16) if ip + fp else 0, 16 ** len(fp))
        v *= Fraction(2) ** int(ex)
        if sgn == "-":
            v = -v
        return _nearest_bits(v, fmt, text)
    m = _POW2_RE.fullmatch(t)
    if m:
        sgn, sig, ex = m.groups()
        v = (Fraction(sig) if sig else Fraction(1)) * Fraction(2) ** int(ex)
        if sgn == "-":
            v = -v
        return _nearest_bits(v, fmt, text)
    if _DECIMAL_RE.fullmatch(t):
        return _nearest_bits(Fraction(t), fmt, text)
    raise ValueError(f"cannot parse float literal {text!r}")


_SUFFIX_RE = re.compile(r"(.(?:.*?))(f16|f32|f64)$")


def parse_typed(text: str, default_fmt: FloatFormat) -> tuple[int, FloatFormat]:
    """Parse a literal with an optional f16/f32/f64 suffix."""
    t = text.strip()
    m = _SUFFIX_RE.fullmatch(t)
    if m:
        body, suffix = m.groups()
        fmt = _FORMATS_BY_NAME[suffix]
        try:
            return parse_literal(body, fmt), fmt
        except ValueError:
            pass  # the "suffix" was part of the literal itself
    return parse_literal(t, default_fmt), default_fmt


def format_hex(bits: int, fmt: FloatFormat) -> str:
    return f"0x{bits:0{fmt.hex_digits}X}"


def format_pow2(bits: int, fmt: FloatFormat) -> str:
    """Render a pattern as an exact sign/significand/power-of-two string,
    e.g. 1.5*2^-12. The significand is printed exactly (dyadic, so the
    decimal expansion terminates)."""
    kind, sign, m, q = decode_parts(bits, fmt)
    s = "-" if sign else ""
    if kind == NAN:
        return "nan"
    if kind == INFINITE:
        return s + "inf"
    if m == 0:
        return s + "0"
    length = m.bit_length()
    e = q + length - 1
    frac_len = length - 1
    # significand m / 2^frac_len in [1, 2), printed exactly in decimal
    tz = (m & -m).bit_length() - 1
    m >>= tz
    frac_len -= tz
    if frac_len == 0:  # power of two
        return f"{s}2^{e}"
    digits = str(m * 5 ** frac_len)
    digits = digits.rjust(frac_len + 1, "0")
    sig_str = digits[:-frac_len] + "." + digits[-frac_len:]
    return f"{s}{sig_str}*2^{e}"


def format_value(x: AnyBits) -> str:
    return format_pow2(x.bits, x.FORMAT)


def is_exact_in_format(v: Fraction | ExactDyadic, fmt: FloatFormat) -> bool:
    """True when v is exactly representable (finite) in fmt."""
    if isinstance(v, ExactDyadic):
        if v.kind != FINITE:
            return False
        if v.mantissa == 0:
            return True
        sign = 0 if v.sign > 0 else 1
        bits, inexact = round_to_bits(sign, v.mantissa, v.exponent, fmt, RTZ)
        return not inexact and (bits & (fmt.exp_mask << fmt.frac_bits)) != fmt.inf
    num, den = v.numerator, v.denominator
    if den & (den - 1):
        return False
    return is_exact_in_format(
        ExactDyadic(1 if num >= 0 else -1, abs(num), -(den.bit_length() - 1)), fmt)
