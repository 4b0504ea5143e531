"""Parametric non-normalizing multi-term dot-product engine.

The model of one block-FMA dot step: multiply the FP16 pairs exactly into
FP32 terms, collect them with the addend, align every significand to the
largest exponent discarding all shifted-out bits (except the configured
guard bits), sum the aligned terms as plain integers in any order, then
renormalize once with truncation toward zero. Guard-bit and carry-bit
counts, term count, and output precision are all configurable;
architecture presets bundle the observed hardware parameters.

The internal sum is kept sign/magnitude: an exact signed integer whose
magnitude is wrapped modulo 2^(24+guard+carry), modeling a magnitude
register of that width. Presets never wrap (their carry widths cover the
worst case); narrower experimental widths wrap and lose high bits.

Everything here is pure and deterministic; concurrent evaluation of
independent dot products is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .bitfloat import (
    FINITE, INFINITE, NAN, FP16, FP32, F16Bits, F32Bits, RoundingMode,
    add_ieee_bits, decode_parts, f32_to_f16_bits, format_hex, format_pow2,
    mul_f16_exact_bits,
)


@dataclass(frozen=True, slots=True)
class AccumulatorConfig:
    """All parameters of one dot-product step.

    k_products: number of a*b product terms (k_products + 1 terms are
        accumulated, the addend included).
    guard_bits: extra low-order bits appended to each significand before
        alignment (0 on Volta/Turing, 1 on Ampere).
    carry_bits: extra high-order magnitude bits in the internal sum;
        ceil(log2(terms)) are needed for the sum never to wrap.
    out_precision: "f32" or "f16".
    fp16_final_rounding: rounding applied when producing an FP16 result
        from the already-truncated FP32 value.
    """

    k_products: int = 4
    guard_bits: int = 0
    carry_bits: int = 3
    out_precision: str = "f32"
    fp16_final_rounding: RoundingMode = RoundingMode.RNE

    def __post_init__(self):
        if self.k_products < 1:
            raise ValueError("k_products must be >= 1")
        if self.guard_bits < 0 or self.carry_bits < 0:
            raise ValueError("guard_bits and carry_bits must be >= 0")
        if self.out_precision not in ("f16", "f32"):
            raise ValueError(f"bad out_precision {self.out_precision!r}")

    @property
    def sum_width(self) -> int:
        """Total aligned-significand width: 24 + guard + carry bits."""
        return 24 + self.guard_bits + self.carry_bits


class ArchPreset(Enum):
    VOLTA = "volta"
    TURING = "turing"
    AMPERE = "ampere"

    def config(self) -> AccumulatorConfig:
        if self is ArchPreset.AMPERE:
            return AccumulatorConfig(k_products=8, guard_bits=1, carry_bits=4)
        # Volta and Turing behave identically.
        return AccumulatorConfig(k_products=4, guard_bits=0, carry_bits=3)


def resolve_config(cfg: AccumulatorConfig | ArchPreset | str) -> AccumulatorConfig:
    if isinstance(cfg, AccumulatorConfig):
        return cfg
    if isinstance(cfg, ArchPreset):
        return cfg.config()
    return ArchPreset(cfg.lower()).config()


class Special(Enum):
    NAN = "nan"
    POS_INF = "+inf"
    NEG_INF = "-inf"


@dataclass(frozen=True, slots=True)
class AlignedTermSet:
    """Sign/magnitude terms on the shared alignment grid.

    max_exponent is the largest floor(log2) over the nonzero finite terms
    (None for all-zero input); each magnitude is the term's significand,
    guard-extended, right-shifted by its exponent distance with excess bits
    discarded. Grid spacing is 2^(max_exponent - 23 - guard_bits).
    """

    max_exponent: int | None
    terms: tuple[tuple[int, int], ...]  # (sign, magnitude) per input term
    guard_bits: int
    special: Special | None = None


@dataclass(frozen=True, slots=True)
class RawSum:
    """Signed integer sum of the aligned terms, magnitude wrapped to the
    configured width."""

    value: int
    max_exponent: int | None
    guard_bits: int
    width: int


@dataclass(frozen=True, slots=True)
class DotTrace:
    """Intermediate states of one dot-product evaluation."""

    products: tuple[int, ...]          # exact FP32 product patterns
    addend_bits: int
    addend_is_f16: bool
    special: Special | None
    max_exponent: int | None
    aligned: tuple[tuple[int, int], ...]
    partials: tuple[int, ...]          # running signed sums, input order
    raw_sum: int
    norm_sig: int | None               # truncated 24-bit significand
    norm_exp: int | None               # its unbiased exponent
    result_bits: int
    out_precision: str
    truncated_f32: int | None = None   # pre-FP16 value when out is f16

    def render(self) -> str:
        """Line-oriented dump, one stage per line; format is stable and
        golden-file tested."""
        lines = []
        prods = " ".join(format_hex(p, FP32) for p in self.products)
        lines.append(f"products: {prods}")
        cfmt = FP16 if self.addend_is_f16 else FP32
        lines.append(f"addend: {format_hex(self.addend_bits, cfmt)} ({cfmt.name})")
        lines.append(f"special: {self.special.value if self.special else 'none'}")
        if self.special is None:
            lines.append(f"max_exp: {self.max_exponent}")
            lines.append("aligned: " + " ".join(
                ("-" if s else "+") + hex(m) for s, m in self.aligned))
            lines.append("partials: " + " ".join(
                ("-" if p < 0 else "+") + hex(abs(p)) for p in self.partials))
            lines.append(
                f"raw_sum: {'-' if self.raw_sum < 0 else '+'}{hex(abs(self.raw_sum))}")
            if self.norm_sig is not None:
                lines.append(f"normalized: sig={hex(self.norm_sig)} exp={self.norm_exp}")
            else:
                lines.append("normalized: zero")
        if self.truncated_f32 is not None:
            lines.append(f"truncated_f32: {format_hex(self.truncated_f32, FP32)}")
        ofmt = FP16 if self.out_precision == "f16" else FP32
        lines.append(f"result: {format_hex(self.result_bits, ofmt)} = "
                     f"{format_pow2(self.result_bits, ofmt)}")
        return "\n".join(lines)

    def replay(self, cfg: AccumulatorConfig | ArchPreset) -> int:
        """Recompute the final pattern from the recorded raw sum; must
        reproduce result_bits."""
        cfg = resolve_config(cfg)
        raw = RawSum(self.raw_sum, self.max_exponent, cfg.guard_bits, cfg.sum_width)
        out = normalize_round(raw, cfg, special=self.special)
        return out.bits


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def _term_parts(bits: int, fmt) -> tuple[int, int, int, int]:
    """kind, sign, magnitude, scale for one input term (value = M * 2^q)."""
    return decode_parts(bits, fmt)


def align_terms(products: Sequence[F32Bits], c: F32Bits | F16Bits,
                cfg: AccumulatorConfig | ArchPreset) -> AlignedTermSet:
    """Find the largest exponent over all finite nonzero terms and shift
    every guard-extended significand onto that grid, discarding excess
    bits. NaNs and infinities of different signs tag the set as NaN."""
    cfg = resolve_config(cfg)
    if len(products) != cfg.k_products:
        raise ValueError(
            f"expected {cfg.k_products} products, got {len(products)}")
    g = cfg.guard_bits
    raw = [(p.bits, FP32) for p in products] + [(c.bits, c.FORMAT)]
    decoded = []
    special = None
    seen_pos_inf = seen_neg_inf = False
    for bits, fmt in raw:
        kind, sign, m, q = _term_parts(bits, fmt)
        if kind == NAN:
            special = Special.NAN
        elif kind == INFINITE:
            if sign:
                seen_neg_inf = True
            else:
                seen_pos_inf = True
        decoded.append((kind, sign, m, q))
    if special is None and (seen_pos_inf or seen_neg_inf):
        if seen_pos_inf and seen_neg_inf:
            special = Special.NAN
        else:
            special = Special.POS_INF if seen_pos_inf else Special.NEG_INF
    if special is not None:
        return AlignedTermSet(None, tuple((s, 0) for _, s, _, _ in decoded),
                              g, special)
    max_exp = None
    for kind, sign, m, q in decoded:
        if m:
            e = q + m.bit_length() - 1
            if max_exp is None or e > max_exp:
                max_exp = e
    if max_exp is None:
        return AlignedTermSet(None, tuple((s, 0) for _, s, _, _ in decoded), g)
    grid = max_exp - 23 - g
    terms = []
    for kind, sign, m, q in decoded:
        d = q - grid
        terms.append((sign, (m << d) if d >= 0 else (m >> -d)))
    return AlignedTermSet(max_exp, tuple(terms), g)


def accumulate(aligned: AlignedTermSet, cfg: AccumulatorConfig | ArchPreset) -> RawSum:
    """Exact signed integer sum of the aligned terms; the magnitude is
    wrapped to the configured width (wide enough never to wrap on the
    presets). Order independent by construction."""
    cfg = resolve_config(cfg)
    if aligned.special is not None:
        raise ValueError("cannot accumulate a special-tagged term set")
    total = 0
    for sign, mag in aligned.terms:
        total += -mag if sign else mag
    wrapped = abs(total) & ((1 << cfg.sum_width) - 1)
    value = -wrapped if total < 0 else wrapped
    return RawSum(value, aligned.max_exponent, cfg.guard_bits, cfg.sum_width)


def _normalize_bits(total: int, max_exp: int, g: int) -> tuple[int, int | None, int | None]:
    """Truncating renormalization of a raw signed sum on the grid
    2^(max_exp - 23 - g). Returns (f32 bits, norm_sig, norm_exp)."""
    if total == 0:
        return 0, None, None
    sign = 1 if total < 0 else 0
    mag = abs(total)
    grid = max_exp - 23 - g
    length = mag.bit_length()
    e = grid + length - 1
    if e > 127:
        return (sign << 31) | FP32.inf, None, e
    if e < -126:
        sh = -149 - grid
        frac = (mag >> sh) if sh >= 0 else (mag << -sh)
        return (sign << 31) | frac, frac, -126 if frac else None
    sig = (mag >> (length - 24)) if length >= 24 else (mag << (24 - length))
    bits = (sign << 31) | ((e + 127) << 23) | (sig & FP32.frac_mask)
    return bits, sig, e


def normalize_round(raw: RawSum, cfg: AccumulatorConfig | ArchPreset, *,
                    special: Special | None = None) -> F32Bits | F16Bits:
    """Normalize the wrapped sum into FP32, discarding every bit shifted
    out (truncation toward zero in magnitude); exponent overflow saturates
    to infinity and values below the normal range become truncated
    subnormals. FP16 output applies the configured rounding (RNE) to the
    truncated FP32 value."""
    cfg = resolve_config(cfg)
    if special is not None:
        if special is Special.NAN:
            bits32 = FP32.qnan
        else:
            bits32 = FP32.inf | (0 if special is Special.POS_INF else FP32.sign_mask)
    elif raw.value == 0:
        bits32 = 0
    else:
        bits32, _, _ = _normalize_bits(raw.value, raw.max_exponent, raw.guard_bits)
    if cfg.out_precision == "f16":
        return F16Bits(f32_to_f16_bits(bits32, cfg.fp16_final_rounding))
    return F32Bits(bits32)


# ---------------------------------------------------------------------------
# Fused fast path + public dot products
# ---------------------------------------------------------------------------

# Per-pattern FP16 decode tables: kind, sign, significand, scale with
# value = sig * 2^scale. Built once at import.
_F16_KIND: list[int] = []
_F16_SIGN: list[int] = []
_F16_SIG: list[int] = []
_F16_EXP: list[int] = []


def _build_f16_tables() -> None:
    for bits in range(1 << 16):
        kind, sign, m, q = decode_parts(bits, FP16)
        _F16_KIND.append(kind)
        _F16_SIGN.append(sign)
        _F16_SIG.append(m)
        _F16_EXP.append(q)


_build_f16_tables()


def _dot_align_sum(a: Sequence[int], b: Sequence[int], c_bits: int,
                   c_fmt, k: int, g: int,
                   trace_sink: list | None = None):
    """Product/align/sum stages shared by every carry width. Returns
    (special, exact signed total, max_exponent); special handling and the
    all-zero case short-circuit with total None."""
    kinds = _F16_KIND
    signs = _F16_SIGN
    sigs = _F16_SIG
    exps = _F16_EXP
    nan = False
    pos_inf = neg_inf = False
    terms = []  # (sign, M, q)
    prod_bits = [] if trace_sink is not None else None
    for i in range(k):
        ai = a[i]
        bi = b[i]
        if kinds[ai] or kinds[bi]:
            ka, kb = kinds[ai], kinds[bi]
            if ka == NAN or kb == NAN or (ka == INFINITE and sigs[bi] == 0 and kb == FINITE) \
                    or (kb == INFINITE and sigs[ai] == 0 and ka == FINITE):
                nan = True
            elif signs[ai] ^ signs[bi]:
                neg_inf = True
            else:
                pos_inf = True
            if prod_bits is not None:
                prod_bits.append(mul_f16_exact_bits(ai, bi))
            continue
        m = sigs[ai] * sigs[bi]
        s = signs[ai] ^ signs[bi]
        if m:
            terms.append((s, m, exps[ai] + exps[bi]))
        if prod_bits is not None:
            prod_bits.append(mul_f16_exact_bits(ai, bi))
    ck, cs, cm, cq = decode_parts(c_bits, c_fmt)
    if ck == NAN:
        nan = True
    elif ck == INFINITE:
        if cs:
            neg_inf = True
        else:
            pos_inf = True
    elif cm:
        terms.append((cs, cm, cq))
    if nan or (pos_inf and neg_inf):
        if trace_sink is not None:
            trace_sink.append((prod_bits, Special.NAN, None, None, None))
        return Special.NAN, None, None
    if pos_inf or neg_inf:
        sp = Special.POS_INF if pos_inf else Special.NEG_INF
        if trace_sink is not None:
            trace_sink.append((prod_bits, sp, None, None, None))
        return sp, None, None
    if not terms:
        if trace_sink is not None:
            trace_sink.append((prod_bits, None, None, (), ()))
        return None, None, None
    max_exp = None
    for s, m, q in terms:
        e = q + m.bit_length() - 1
        if max_exp is None or e > max_exp:
            max_exp = e
    grid = max_exp - 23 - g
    total = 0
    aligned = [] if trace_sink is not None else None
    partials = [] if trace_sink is not None else None
    for s, m, q in terms:
        d = q - grid
        v = (m << d) if d >= 0 else (m >> -d)
        total += -v if s else v
        if aligned is not None:
            aligned.append((s, v))
            partials.append(total)
    if trace_sink is not None:
        trace_sink.append((prod_bits, None, max_exp, tuple(aligned),
                           tuple(partials)))
    return None, total, max_exp


_SPECIAL_F32 = {
    Special.NAN: FP32.qnan,
    Special.POS_INF: FP32.inf,
    Special.NEG_INF: FP32.sign_mask | FP32.inf,
}


def _wrap_total(total: int, width: int) -> int:
    wrapped = abs(total) & ((1 << width) - 1)
    return -wrapped if total < 0 else wrapped


def _dot_f32_bits(a: Sequence[int], b: Sequence[int], c_bits: int,
                  c_fmt, k: int, g: int, w: int,
                  trace_sink: list | None = None) -> int:
    """Fused product/align/accumulate/normalize on raw patterns, returning
    the truncated FP32 pattern. The hot path for searches; identical in
    behavior to composing the staged operations (property-tested)."""
    special, total, max_exp = _dot_align_sum(a, b, c_bits, c_fmt, k, g,
                                             trace_sink)
    if special is not None:
        if trace_sink is not None:
            trace_sink[-1] = trace_sink[-1] + (0,)
        return _SPECIAL_F32[special]
    if total is None:
        if trace_sink is not None:
            trace_sink[-1] = trace_sink[-1] + (0,)
        return 0
    value = _wrap_total(total, 24 + g + w)
    if trace_sink is not None:
        trace_sink[-1] = trace_sink[-1] + (value,)
    if value == 0:
        return 0
    return _normalize_bits(value, max_exp, g)[0]


def dot_carry_variants_bits(a_bits: Sequence[int], b_bits: Sequence[int],
                            c_bits: int, c_is_f16: bool,
                            base: AccumulatorConfig,
                            carry_widths: Sequence[int]) -> list[int]:
    """Evaluate one FP32-out dot under several carry widths, sharing the
    product/align/sum stages; used by the carry-width searches."""
    special, total, max_exp = _dot_align_sum(
        a_bits, b_bits, c_bits, FP16 if c_is_f16 else FP32,
        base.k_products, base.guard_bits, None)
    if special is not None:
        return [_SPECIAL_F32[special]] * len(carry_widths)
    if total is None:
        return [0] * len(carry_widths)
    g = base.guard_bits
    out = []
    last_value = None
    last_bits = 0
    for w in carry_widths:
        value = _wrap_total(total, 24 + g + w)
        if value != last_value:
            last_value = value
            last_bits = 0 if value == 0 else _normalize_bits(value, max_exp, g)[0]
        out.append(last_bits)
    return out


def tensor_dot(a: Sequence[F16Bits], b: Sequence[F16Bits],
               c: F32Bits | F16Bits, cfg: AccumulatorConfig | ArchPreset,
               ) -> tuple[F32Bits | F16Bits, DotTrace]:
    """One dot-product step of the modeled unit: exact FP16 products, guard
    extension, alignment with truncation, order-independent integer
    accumulation, truncating renormalization. Returns the result in the
    configured precision together with a full trace."""
    cfg = resolve_config(cfg)
    k = cfg.k_products
    if len(a) != k or len(b) != k:
        raise ValueError(f"vectors must have length {k}")
    sink: list = []
    a_bits = [x.bits for x in a]
    b_bits = [x.bits for x in b]
    bits32 = _dot_f32_bits(a_bits, b_bits, c.bits, c.FORMAT,
                           k, cfg.guard_bits, cfg.carry_bits, sink)
    prods, special, max_exp, aligned, partials, raw = sink[0]
    norm_sig = norm_exp = None
    if special is None and raw:
        _, norm_sig, norm_exp = _normalize_bits(raw, max_exp, cfg.guard_bits)
    if cfg.out_precision == "f16":
        out_bits = f32_to_f16_bits(bits32, cfg.fp16_final_rounding)
        result: F32Bits | F16Bits = F16Bits(out_bits)
        truncated = bits32
    else:
        result = F32Bits(bits32)
        truncated = None
    trace = DotTrace(
        products=tuple(prods),
        addend_bits=c.bits,
        addend_is_f16=c.FORMAT is FP16,
        special=special,
        max_exponent=max_exp,
        aligned=aligned or (),
        partials=partials or (),
        raw_sum=raw or 0,
        norm_sig=norm_sig,
        norm_exp=norm_exp,
        result_bits=result.bits,
        out_precision=cfg.out_precision,
        truncated_f32=truncated,
    )
    return result, trace


def tensor_dot_bits(a_bits: Sequence[int], b_bits: Sequence[int], c_bits: int,
                    c_is_f16: bool, cfg: AccumulatorConfig) -> int:
    """Raw-pattern fast path used by the search engine. Returns the output
    pattern in the configured precision."""
    bits32 = _dot_f32_bits(a_bits, b_bits, c_bits,
                           FP16 if c_is_f16 else FP32,
                           cfg.k_products, cfg.guard_bits, cfg.carry_bits)
    if cfg.out_precision == "f16":
        return f32_to_f16_bits(bits32, cfg.fp16_final_rounding)
    return bits32


def ieee_sequential_dot(a: Sequence[F16Bits], b: Sequence[F16Bits],
                        c: F32Bits | F16Bits, rm: RoundingMode,
                        order: Sequence[int] | None = None) -> F32Bits:
    """Normalized reference: the exact products and the addend chained
    through IEEE FP32 addition under rm, left-associated in the given term
    order (products first, addend last by default)."""
    k = len(a)
    if len(b) != k:
        raise ValueError("vectors must have equal length")
    terms = [mul_f16_exact_bits(a[i].bits, b[i].bits) for i in range(k)]
    if c.FORMAT is FP16:
        from .bitfloat import f16_to_f32_exact_bits
        terms.append(f16_to_f32_exact_bits(c.bits))
    else:
        terms.append(c.bits)
    idx = list(range(k + 1)) if order is None else list(order)
    if sorted(idx) != list(range(k + 1)):
        raise ValueError("order must be a permutation of the k+1 terms")
    acc = terms[idx[0]]
    for i in idx[1:]:
        acc = add_ieee_bits(acc, terms[i], FP32, rm)
    return F32Bits(acc)


def with_out_precision(cfg: AccumulatorConfig | ArchPreset,
                       precision: str) -> AccumulatorConfig:
    return replace(resolve_config(cfg), out_precision=precision)
