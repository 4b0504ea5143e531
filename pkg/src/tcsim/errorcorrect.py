"""FP32-recovery schemes built on the dot-product model.

Two published ways to recover single-precision accuracy from half-precision
block-FMA hardware are implemented against the model:

* the Markidis scheme: split each FP32 input into an FP16 head and an FP16
  residual, then chain all four head/residual product combinations through
  the unit, feeding each partial result in as the next addend;
* the Ootomo-Yokota (O-Y) scheme: scale the residuals by 2^11 before
  rounding them to FP16, evaluate the three correction dots with a zero
  addend, and combine the pieces outside the unit with IEEE round-to-
  nearest additions.

Both are compared against an exact dyadic oracle (strictly finer than a
binary64 reference; a binary64 mode is available for faithfulness runs).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .accumulator import AccumulatorConfig, ArchPreset, DotTrace, \
    resolve_config, tensor_dot
from .bitfloat import (
    FP16, FP32, FP64, F16Bits, F32Bits, ExactDyadic, RoundingMode,
    add_f32_ieee, add_ieee_bits, decode_parts, exact_abs, exact_add,
    exact_compare, exact_mul, exact_sub, exact_sum, f16_to_f32_exact,
    f32_to_f16, format_hex, negate, round_dyadic, scale_pow2_flagged,
    to_exact, FINITE,
)

RNE = RoundingMode.RNE


@dataclass(frozen=True, slots=True)
class ResidualPair:
    """FP16 head plus FP16 residual of one FP32 value.

    residual == RNE16((x - widen(head)) * 2^scale_log2); the FP32
    subtraction is exact whenever the head is finite. scale_log2 is 0 for
    the Markidis split and 11 for O-Y. A head that overflows FP16 is
    flagged and leaves the residual undefined.
    """

    head: F16Bits
    residual: F16Bits | None
    scale_log2: int
    head_overflow: bool = False
    scale_inexact: bool = False


def split_residual(x: F32Bits, scale_log2: int) -> ResidualPair:
    """Split x into an RNE-rounded FP16 head and the scaled FP16 residual."""
    head = f32_to_f16(x, RNE)
    if head.is_inf and x.is_finite:
        return ResidualPair(head, None, scale_log2, head_overflow=True)
    diff = add_f32_ieee(x, negate(f16_to_f32_exact(head)), RNE)
    scaled, inexact = scale_pow2_flagged(diff, scale_log2)
    return ResidualPair(head, f32_to_f16(scaled, RNE), scale_log2,
                        scale_inexact=inexact)


def _split_vector(v: Sequence[F32Bits], scale_log2: int,
                  ) -> tuple[list[F16Bits], list[F16Bits]]:
    heads, residuals = [], []
    for x in v:
        pair = split_residual(x, scale_log2)
        heads.append(pair.head)
        # An overflowed split has no meaningful residual; propagate NaN so
        # downstream results are visibly poisoned.
        residuals.append(F16Bits(FP16.qnan) if pair.residual is None
                         else pair.residual)
    return heads, residuals


def markidis_dot_traced(a32: Sequence[F32Bits], b32: Sequence[F32Bits],
                        c: F32Bits, cfg: AccumulatorConfig | ArchPreset,
                        ) -> tuple[F32Bits, list[DotTrace]]:
    """Markidis recovery with per-step traces: four chained unit calls,
    residual-residual first, heads last, the addend threaded through."""
    cfg = resolve_config(cfg)
    ha, ra = _split_vector(a32, 0)
    hb, rb = _split_vector(b32, 0)
    traces = []
    m1, t1 = tensor_dot(ra, rb, c, cfg)
    m2, t2 = tensor_dot(ha, rb, m1, cfg)
    m3, t3 = tensor_dot(ra, hb, m2, cfg)
    out, t4 = tensor_dot(ha, hb, m3, cfg)
    traces.extend([t1, t2, t3, t4])
    return out, traces


def markidis_dot(a32: Sequence[F32Bits], b32: Sequence[F32Bits], c: F32Bits,
                 cfg: AccumulatorConfig | ArchPreset) -> F32Bits:
    return markidis_dot_traced(a32, b32, c, cfg)[0]


def ootomo_dot_traced(a32: Sequence[F32Bits], b32: Sequence[F32Bits],
                      c: F32Bits, cfg: AccumulatorConfig | ArchPreset,
                      ) -> tuple[F32Bits, dict[str, DotTrace], dict[str, F32Bits]]:
    """O-Y recovery with traces for the three unit calls and the values of
    the outside IEEE-RNE combination chain."""
    cfg = resolve_config(cfg)
    ha, ra = _split_vector(a32, 11)
    hb, rb = _split_vector(b32, 11)
    zero = F32Bits(0)
    t1, tr1 = tensor_dot(ra, rb, zero, cfg)
    inner, tr_inner = tensor_dot(ra, hb, zero, cfg)
    t2, tr2 = tensor_dot(ha, rb, inner, cfg)
    t3, tr3 = tensor_dot(ha, hb, zero, cfg)
    s1 = scale_pow2_flagged(t1, -22)[0]
    s2 = scale_pow2_flagged(t2, -11)[0]
    sum1 = add_f32_ieee(s1, s2, RNE)
    sum2 = add_f32_ieee(sum1, t3, RNE)
    out = add_f32_ieee(sum2, c, RNE)
    traces = {"rr": tr1, "rh": tr_inner, "hr": tr2, "hh": tr3}
    steps = {"t1": t1, "t2": t2, "t3": t3, "t1_scaled": s1, "t2_scaled": s2,
             "sum_residuals": sum1, "sum_all": sum2, "result": out}
    return out, traces, steps


def ootomo_dot(a32: Sequence[F32Bits], b32: Sequence[F32Bits], c: F32Bits,
               cfg: AccumulatorConfig | ArchPreset) -> F32Bits:
    return ootomo_dot_traced(a32, b32, c, cfg)[0]


def exact_dot(a32: Sequence[F32Bits], b32: Sequence[F32Bits],
              c: F32Bits) -> ExactDyadic:
    """Ground truth: the dot product evaluated without any rounding."""
    terms = [exact_mul(to_exact(x), to_exact(y)) for x, y in zip(a32, b32)]
    terms.append(to_exact(c))
    return exact_sum(terms)


def binary64_dot(a32: Sequence[F32Bits], b32: Sequence[F32Bits],
                 c: F32Bits) -> ExactDyadic:
    """Faithfulness-mode reference: the dot product chained through IEEE
    binary64 (exact products, left-associated RNE additions)."""
    def widen(x: F32Bits) -> int:
        kind, sign, m, q = decode_parts(x.bits, FP32)
        d = ExactDyadic(-1 if sign else 1, m, q) if kind == FINITE \
            else to_exact(x)
        return round_dyadic(d, FP64, RNE)

    acc = 0  # +0 in binary64
    for x, y in zip(a32, b32):
        px, py = to_exact(x), to_exact(y)
        p = round_dyadic(exact_mul(px, py), FP64, RNE)
        acc = add_ieee_bits(acc, p, FP64, RNE)
    acc = add_ieee_bits(acc, widen(c), FP64, RNE)
    from .bitfloat import F64Bits
    return to_exact(F64Bits(acc))


@dataclass(frozen=True, slots=True)
class ErrorReport:
    """Per-instance comparison of the two recovery schemes against the
    oracle, with exact absolute errors."""

    a32: tuple[int, ...]
    b32: tuple[int, ...]
    c: int
    markidis: F32Bits
    ootomo: F32Bits
    oracle: ExactDyadic
    oracle_f32: F32Bits          # oracle rounded RNE to FP32
    err_markidis: ExactDyadic    # |markidis - oracle|, exact
    err_ootomo: ExactDyadic
    markidis_strictly_better: bool
    traces: tuple = ()

    def to_record(self) -> dict:
        return {
            "a": [format_hex(x, FP32) for x in self.a32],
            "b": [format_hex(x, FP32) for x in self.b32],
            "c": format_hex(self.c, FP32),
            "markidis": format_hex(self.markidis.bits, FP32),
            "ootomo": format_hex(self.ootomo.bits, FP32),
            "oracle": str(self.oracle),
            "oracle_f32": format_hex(self.oracle_f32.bits, FP32),
            "err_markidis": str(self.err_markidis),
            "err_ootomo": str(self.err_ootomo),
            "markidis_strictly_better": self.markidis_strictly_better,
        }


def compare_error(a32: Sequence[F32Bits], b32: Sequence[F32Bits], c: F32Bits,
                  cfg: AccumulatorConfig | ArchPreset, *,
                  oracle: str = "exact", with_traces: bool = False,
                  ) -> ErrorReport:
    """Evaluate both schemes and compare their absolute errors exactly.

    oracle: "exact" uses the dyadic ground truth; "binary64" uses an IEEE
    double-precision chain instead.
    """
    cfg = resolve_config(cfg)
    m, m_traces = markidis_dot_traced(a32, b32, c, cfg)
    o, o_traces, o_steps = ootomo_dot_traced(a32, b32, c, cfg)
    truth = exact_dot(a32, b32, c) if oracle == "exact" \
        else binary64_dot(a32, b32, c)
    err_m = exact_abs(exact_sub(to_exact(m), truth))
    err_o = exact_abs(exact_sub(to_exact(o), truth))
    cmp = exact_compare(err_m, err_o)
    return ErrorReport(
        a32=tuple(x.bits for x in a32),
        b32=tuple(x.bits for x in b32),
        c=c.bits,
        markidis=m,
        ootomo=o,
        oracle=truth,
        oracle_f32=F32Bits(round_dyadic(truth, FP32, RNE)),
        err_markidis=err_m,
        err_ootomo=err_o,
        markidis_strictly_better=(cmp == -1),
        traces=(tuple(m_traces), o_traces, o_steps) if with_traces else (),
    )


def summarize(reports: Sequence[ErrorReport]) -> dict:
    """Aggregate a batch of comparisons: verdict counts and the largest
    exact error seen for each scheme."""
    counts = {"markidis_strictly_better": 0, "ootomo_strictly_better": 0,
              "equal_error": 0, "unordered": 0}
    max_m = max_o = ExactDyadic()
    for r in reports:
        cmp = exact_compare(r.err_markidis, r.err_ootomo)
        if cmp is None:
            counts["unordered"] += 1
        elif cmp < 0:
            counts["markidis_strictly_better"] += 1
        elif cmp > 0:
            counts["ootomo_strictly_better"] += 1
        else:
            counts["equal_error"] += 1
        if r.err_markidis.is_finite and exact_compare(r.err_markidis, max_m) == 1:
            max_m = r.err_markidis
        if r.err_ootomo.is_finite and exact_compare(r.err_ootomo, max_o) == 1:
            max_o = r.err_ootomo
    return {"count": len(reports), **counts,
            "max_err_markidis": str(max_m), "max_err_ootomo": str(max_o)}
