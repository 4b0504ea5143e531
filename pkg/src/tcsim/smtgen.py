"""SMT-LIB v2.6 emission of the unit properties and the bitvector
accumulator, for external solvers.

Documents are standalone quantifier-free queries over floating point and
bitvectors whose satisfying models are exactly the discriminating inputs
of the matching search property. The non-normalizing accumulator is
encoded over bitvectors as a reusable define-fun (`no-normalize-sum`),
since the SMT FP theory normalizes after every operation and cannot
express it directly.

No solver is invoked here; documents end with check-sat/get-model
commands and are consumed externally. A small interpreter over the
emitted bitvector operations (`SmtEvaluator`) lets the test suite run the
emitted accumulator definition directly and compare it against the
executable model bit for bit.

Emission is deterministic: identical inputs yield byte-identical text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .accumulator import AccumulatorConfig, ArchPreset, resolve_config
from .bitfloat import ALL_ROUNDING_MODES, RoundingMode
from .discriminator import PropertyId, default_candidates

Sx = tuple  # s-expressions are nested tuples of strings

F16_SORT = ("_", "FloatingPoint", "5", "11")
F32_SORT = ("_", "FloatingPoint", "8", "24")
F64_SORT = ("_", "FloatingPoint", "11", "53")

_RM_NAME = {RoundingMode.RNE: "RNE", RoundingMode.RTZ: "RTZ",
            RoundingMode.RTN: "RTN", RoundingMode.RTP: "RTP"}


def bv(value: int, width: int) -> str:
    """A bitvector literal; hex when the width is a nibble multiple."""
    value &= (1 << width) - 1
    if width % 4 == 0:
        return f"#x{value:0{width // 4}x}"
    return f"#b{value:0{width}b}"


def _bv16(fmt_sort):  # input sort per precision tag
    return ("_", "BitVec", "16") if fmt_sort is F16_SORT else ("_", "BitVec", "32")


def render(expr) -> str:
    """Deterministic rendering: one line up to 100 characters, otherwise
    the head stays on the first line and children are indented."""
    return _render(expr, 0)


def _render(expr, indent: int) -> str:
    if isinstance(expr, str):
        return expr
    flat = "(" + " ".join(_flat(e) for e in expr) + ")"
    if len(flat) + indent <= 100:
        return flat
    head = expr[0]
    if head == "let":
        # (let ((name val) ...) body) with one binding per line
        bindings, body = expr[1], expr[2]
        pad = " " * (indent + 2)
        parts = [f"(let ("]
        for name, val in bindings:
            parts.append(pad + "(" + name + " " + _render(val, indent + 4 + len(name)) + ")")
        parts.append(" " * indent + " )")
        parts.append(pad + _render(body, indent + 2))
        parts.append(" " * indent + ")")
        return "\n".join(parts)
    pad = " " * (indent + 2)
    items = [_render(e, indent + 2) for e in expr[1:]]
    if isinstance(head, tuple):
        headstr = _flat(head)
    else:
        headstr = head
    return "(" + headstr + "\n" + "\n".join(pad + it for it in items) + ")"


def _flat(expr) -> str:
    if isinstance(expr, str):
        return expr
    return "(" + " ".join(_flat(e) for e in expr) + ")"


@dataclass(frozen=True)
class SmtDocument:
    """One renderable SMT-LIB document: header comments, a logic line, and
    an ordered command list."""

    description: str
    logic: str
    commands: tuple[str, ...]

    def render(self) -> str:
        lines = [f"; {ln}" for ln in self.description.splitlines()]
        lines.append(f"(set-logic {self.logic})")
        lines.extend(self.commands)
        return "\n".join(lines) + "\n"


class _DocBuilder:
    def __init__(self, description: str):
        self.description = description
        self.commands: list[str] = []

    def raw(self, text: str) -> None:
        self.commands.append(text)

    def emit(self, *expr) -> None:
        self.commands.append(render(expr))

    def comment(self, text: str) -> None:
        self.commands.append(f"; {text}")

    def declare_bv(self, name: str, width: int) -> None:
        self.emit("declare-const", name, ("_", "BitVec", str(width)))

    def define(self, name: str, sort, body) -> None:
        self.emit("define-fun", name, (), sort, body)

    def finish(self, value_names: list[str]) -> SmtDocument:
        self.emit("check-sat")
        self.emit("get-value", tuple(value_names))
        self.comment("witness-assignment: " + " ".join(value_names))
        return SmtDocument(self.description, "QF_BVFP", tuple(self.commands))


def _fp16_view(name: str):
    return (("_", "to_fp", "5", "11"), name)


def _fp32_view(name: str):
    return (("_", "to_fp", "8", "24"), name)


def _widen(x):
    return (("_", "to_fp", "8", "24"), "RTZ", x)


def _finite(x) -> Sx:
    return ("and", ("not", ("fp.isNaN", x)), ("not", ("fp.isInfinite", x)))


# ---------------------------------------------------------------------------
# The bitvector accumulator definition
# ---------------------------------------------------------------------------


def accumulator_fun_sexpr(cfg: AccumulatorConfig, name: str = "no-normalize-sum"):
    """define-fun of the k+1-term non-normalizing accumulator over 32-bit
    patterns: field split, alignment to the largest exponent with guard
    extension, wide signed sum, magnitude wrap to 24+g+w bits, truncating
    renormalization, special-value screening."""
    k, g, w = cfg.k_products, cfg.guard_bits, cfg.carry_bits
    if w > 8:
        raise ValueError("emitted accumulator supports carry widths up to 8")
    n = k + 1
    aw = 24 + g            # aligned magnitude width
    sw = aw + 8            # wide exact-sum width (two's complement)
    mw = 24 + g + w        # wrapped magnitude width
    sh_w = mw + 22         # shift workspace for subnormal encoding

    params = tuple((f"t{i}", ("_", "BitVec", "32")) for i in range(n))
    bindings = []
    for i in range(n):
        t = f"t{i}"
        bindings.append((f"s{i}", (("_", "extract", "31", "31"), t)))
        bindings.append((f"e{i}", (("_", "extract", "30", "23"), t)))
        bindings.append((f"f{i}", (("_", "extract", "22", "0"), t)))
    for i in range(n):
        bindings.append((f"nan{i}", ("and", ("=", f"e{i}", bv(0xFF, 8)),
                                     ("distinct", f"f{i}", bv(0, 23)))))
        bindings.append((f"inf{i}", ("and", ("=", f"e{i}", bv(0xFF, 8)),
                                     ("=", f"f{i}", bv(0, 23)))))
        bindings.append((f"m{i}", ("concat",
                                   ("ite", ("=", f"e{i}", bv(0, 8)), "#b0", "#b1"),
                                   f"f{i}")))
        bindings.append((f"eb{i}", ("ite", ("=", f"e{i}", bv(0, 8)),
                                    bv(1, 8), f"e{i}")))
    # largest alignment exponent (zeros are harmless: magnitude 0)
    emax = "eb0"
    for i in range(1, n):
        emax = ("ite", ("bvuge", emax, f"eb{i}"), emax, f"eb{i}")
    bindings.append(("emax", emax))
    for i in range(n):
        mg = ("concat", f"m{i}", bv(0, g)) if g else f"m{i}"
        shift = (("_", "zero_extend", str(aw - 8)), ("bvsub", "emax", f"eb{i}"))
        bindings.append((f"am{i}", ("bvlshr", mg, shift)))
    total = None
    for i in range(n):
        ext = (("_", "zero_extend", str(sw - aw)), f"am{i}")
        signed = ("ite", ("=", f"s{i}", "#b1"), ("bvneg", ext), ext)
        total = signed if total is None else ("bvadd", total, signed)
    bindings.append(("total", total))
    bindings.append(("isneg", ("=", (("_", "extract", str(sw - 1), str(sw - 1)),
                                     "total"), "#b1")))
    bindings.append(("magfull", ("ite", "isneg", ("bvneg", "total"), "total")))
    bindings.append(("mag", (("_", "extract", str(mw - 1), "0"), "magfull")))
    bindings.append(("sgn", ("ite", "isneg", "#b1", "#b0")))
    bindings.append(("ebase", (("_", "zero_extend", "4"), "emax")))
    # subnormal shift amount: (1 + g) - biased max exponent, signed 12-bit
    bindings.append(("shv", ("bvsub", bv(1 + g, 12), "ebase")))
    bindings.append(("magx", (("_", "zero_extend", str(sh_w - mw)), "mag")))
    bindings.append(("subfrac", (("_", "extract", "22", "0"),
                                 ("ite", ("bvsge", "shv", bv(0, 12)),
                                  ("bvlshr", "magx",
                                   (("_", "zero_extend", str(sh_w - 12)), "shv")),
                                  ("bvshl", "magx",
                                   (("_", "zero_extend", str(sh_w - 12)),
                                    ("bvneg", "shv")))))))

    # truncating normalization: scan the leading one from the top
    encode = ("concat", "sgn", bv(0, 31))  # mag == 0 -> signed zero? model: +0
    encode = bv(0, 32)
    for length in range(1, mw + 1):
        if length >= 24:
            sig24 = (("_", "extract", str(length - 1), str(length - 24)), "mag")
        else:
            sig24 = ("concat", (("_", "extract", str(length - 1), "0"), "mag"),
                     bv(0, 24 - length))
        ebx = ("bvadd", "ebase", bv(length - 24 - g, 12))
        normal = ("concat", "sgn",
                  ("concat", (("_", "extract", "7", "0"), ebx),
                   (("_", "extract", "22", "0"), sig24)))
        body = ("ite", ("bvsge", ebx, bv(255, 12)),
                ("concat", "sgn", bv(0x7F800000, 31)),
                ("ite", ("bvsle", ebx, bv(0, 12)),
                 ("concat", "sgn", ("concat", bv(0, 8), "subfrac")),
                 normal))
        encode = ("ite",
                  ("=", (("_", "extract", str(length - 1), str(length - 1)),
                         "mag"), "#b1"),
                  body, encode)
    finite_result = encode

    any_nan = ("or",) + tuple(f"nan{i}" for i in range(n))
    any_pinf = ("or",) + tuple(("and", f"inf{i}", ("=", f"s{i}", "#b0"))
                               for i in range(n))
    any_ninf = ("or",) + tuple(("and", f"inf{i}", ("=", f"s{i}", "#b1"))
                               for i in range(n))
    result = ("ite", ("or", any_nan, ("and", any_pinf, any_ninf)),
              bv(0x7FC00000, 32),
              ("ite", any_pinf, bv(0x7F800000, 32),
               ("ite", any_ninf, bv(0xFF800000, 32), finite_result)))

    body = result
    for bname, bval in reversed(bindings):
        body = ("let", ((bname, bval),), body)
    return ("define-fun", name, params, ("_", "BitVec", "32"), body)


def emit_accumulator_definition(cfg: AccumulatorConfig | ArchPreset,
                                name: str = "no-normalize-sum") -> SmtDocument:
    """Standalone document containing just the accumulator define-fun for
    the given configuration."""
    cfg = resolve_config(cfg)
    desc = (f"non-normalizing block accumulator over bitvectors\n"
            f"config: k={cfg.k_products} guard={cfg.guard_bits} "
            f"carry={cfg.carry_bits} (internal width "
            f"{cfg.sum_width} bits)")
    return SmtDocument(desc, "QF_BVFP",
                       (render(accumulator_fun_sexpr(cfg, name)),))


# ---------------------------------------------------------------------------
# Property documents
# ---------------------------------------------------------------------------


def _declare_f16_inputs(b: _DocBuilder, names: list[str],
                        positive: bool = False, nonzero: bool = False) -> None:
    for nm in names:
        b.declare_bv(nm, 16)
        b.define(f"{nm}_fp", F16_SORT, _fp16_view(nm))
    for nm in names:
        b.emit("assert", _finite(f"{nm}_fp"))
        if nonzero:
            b.emit("assert", ("not", ("fp.isZero", f"{nm}_fp")))
        if positive:
            b.emit("assert", ("fp.isPositive", f"{nm}_fp"))


def _declare_f32_input(b: _DocBuilder, name: str,
                       positive: bool = False, nonzero: bool = False) -> None:
    b.declare_bv(name, 32)
    b.define(f"{name}_fp", F32_SORT, _fp32_view(name))
    b.emit("assert", _finite(f"{name}_fp"))
    if nonzero:
        b.emit("assert", ("not", ("fp.isZero", f"{name}_fp")))
    if positive:
        b.emit("assert", ("fp.isPositive", f"{name}_fp"))


def _bind_product(b: _DocBuilder, name: str, fp_expr) -> None:
    """Bind an FP32-valued expression to a fresh 32-bit pattern constant so
    it can feed the bitvector accumulator."""
    b.declare_bv(name, 32)
    b.emit("assert", ("=", _fp32_view(name), fp_expr))
    b.emit("assert", ("not", ("fp.isNaN", _fp32_view(name))))


def _mul16(a: str, bq: str, rm: str = "RNE"):
    return ("fp.mul", rm, _widen(f"{a}_fp"), _widen(f"{bq}_fp"))


def _cfg_desc(cfg: AccumulatorConfig) -> str:
    return (f"config: k={cfg.k_products} guard={cfg.guard_bits} "
            f"carry={cfg.carry_bits}")


def emit_property(prop: PropertyId, cfg: AccumulatorConfig | ArchPreset,
                  candidates: tuple | None = None) -> SmtDocument:
    """Document whose satisfying models are the discriminating inputs for
    prop under cfg. Candidate overrides follow the search module: a
    rounding-mode pair for the rounding properties, width pairs for the
    carry/guard properties."""
    cfg = resolve_config(cfg)
    if candidates is None:
        candidates = default_candidates(prop, cfg)
    k = cfg.k_products

    if prop is PropertyId.EXACT_MUL:
        b = _DocBuilder("property: exact-mul\n"
                        "fp16 pairs whose rounded fp16 product differs from "
                        "the exact fp32 product under every rounding mode\n"
                        + _cfg_desc(cfg))
        _declare_f16_inputs(b, ["a", "b"])
        for rm in ALL_ROUNDING_MODES:
            nm = _RM_NAME[rm]
            b.emit("assert", ("not", ("=",
                                      (("_", "to_fp", "8", "24"), "RTZ",
                                       ("fp.mul", nm, "a_fp", "b_fp")),
                                      _mul16("a", "b", nm))))
        return b.finish(["a", "b"])

    if prop is PropertyId.ACCUM_PRECISION:
        b = _DocBuilder("property: accum-precision\n"
                        "fp16 products outside fp16 whose sum is in fp16 and "
                        "differs between an fp16 chain and an fp32 chain\n"
                        + _cfg_desc(cfg))
        _declare_f16_inputs(b, ["a", "b", "c", "d"], nonzero=True)
        b.define("p1_32", F32_SORT, _mul16("a", "b", "RTZ"))
        b.define("p2_32", F32_SORT, _mul16("c", "d", "RTZ"))
        b.define("p1_16", F16_SORT, ("fp.mul", "RTZ", "a_fp", "b_fp"))
        b.define("p2_16", F16_SORT, ("fp.mul", "RTZ", "c_fp", "d_fp"))
        b.define("sum_32", F32_SORT, ("fp.add", "RTZ", "p1_32", "p2_32"))
        b.define("sum_16", F16_SORT, ("fp.add", "RTZ", "p1_16", "p2_16"))

        def trip(x):  # round-trip through fp16 and back
            return (("_", "to_fp", "8", "24"), "RTZ",
                    (("_", "to_fp", "5", "11"), "RTZ", x))

        b.emit("assert", ("not", ("=", trip("p1_32"), "p1_32")))
        b.emit("assert", ("not", ("=", trip("p2_32"), "p2_32")))
        b.emit("assert", ("=", trip("sum_32"), "sum_32"))
        b.emit("assert", ("not", ("=", _widen("sum_16"), "sum_32")))
        return b.finish(["a", "b", "c", "d"])

    if prop is PropertyId.FINAL_ROUNDING:
        b = _DocBuilder("property: final-rounding\n"
                        "fp16 pairs whose exact product rounds to fp16 "
                        "differently under different rounding modes\n"
                        + _cfg_desc(cfg))
        _declare_f16_inputs(b, ["a", "b"])
        b.define("prod", F32_SORT, _mul16("a", "b"))
        for rm in ALL_ROUNDING_MODES:
            nm = _RM_NAME[rm]
            b.define(f"r_{nm.lower()}", F16_SORT,
                     (("_", "to_fp", "5", "11"), nm, "prod"))
        pairs = [(candidates[0], candidates[1])] if candidates else []
        if not pairs:
            import itertools
            pairs = list(itertools.combinations(ALL_ROUNDING_MODES, 2))
        if len(candidates) == 2:
            pairs = [tuple(candidates)]
        for rm1, rm2 in pairs:
            n1, n2 = _RM_NAME[rm1].lower(), _RM_NAME[rm2].lower()
            b.emit("push", "1")
            b.comment(f"pair {n1} vs {n2}")
            b.emit("assert", ("distinct", f"r_{n1}", f"r_{n2}"))
            b.emit("check-sat")
            b.emit("get-value", ("a", "b"))
            b.emit("pop", "1")
        b.comment("witness-assignment: a b")
        return SmtDocument(b.description, "QF_BVFP", tuple(b.commands))

    if prop is PropertyId.ACCUM_ROUNDING:
        _, rm = candidates
        nm = _RM_NAME[rm]
        b = _DocBuilder("property: accum-rounding\n"
                        f"single product plus addend where the unit differs "
                        f"from ieee {nm} addition\n" + _cfg_desc(cfg))
        _declare_f16_inputs(b, ["a", "b"], nonzero=True)
        _declare_f32_input(b, "c", nonzero=True)
        b.raw(render(accumulator_fun_sexpr(cfg)))
        _bind_product(b, "p0", _mul16("a", "b"))
        zeros = [bv(0, 32)] * (k - 1)
        b.define("model", ("_", "BitVec", "32"),
                 ("no-normalize-sum", "p0", *zeros, "c"))
        b.define("ieee", F32_SORT,
                 ("fp.add", nm, _fp32_view("p0"), "c_fp"))
        b.emit("assert", ("not", ("=", _fp32_view("model"), "ieee")))
        return b.finish(["a", "b", "c"])

    if prop is PropertyId.ACCUM_ORDER:
        o1, o2 = candidates
        b = _DocBuilder("property: accum-order\n"
                        "three products whose ieee rtz chains differ between "
                        f"term orders {list(o1)} and {list(o2)}\n"
                        + _cfg_desc(cfg))
        names = ["a0", "a1", "a2", "b0", "b1", "b2"]
        _declare_f16_inputs(b, names, nonzero=True)
        for i in range(3):
            b.define(f"p{i}", F32_SORT, _mul16(f"a{i}", f"b{i}"))
        terms = ["p0", "p1", "p2", (("_", "to_fp", "8", "24"), "RTZ", "0.0")]

        def chain(order):
            acc = terms[order[0]]
            for i in order[1:]:
                acc = ("fp.add", "RTZ", acc, terms[i])
            return acc

        b.define("left", F32_SORT, chain(o1))
        b.define("right", F32_SORT, chain(o2))
        b.emit("assert", ("distinct", "left", "right"))
        return b.finish(names)

    if prop is PropertyId.NORMALIZATION:
        b = _DocBuilder("property: normalization\n"
                        "positive products plus addend where the normalized "
                        "ieee rtz chain differs from the non-normalizing "
                        "unit\n" + _cfg_desc(cfg))
        names = ["a0", "a1", "b0", "b1"]
        _declare_f16_inputs(b, names, positive=True, nonzero=True)
        _declare_f32_input(b, "c", positive=True, nonzero=True)
        b.raw(render(accumulator_fun_sexpr(cfg)))
        _bind_product(b, "p0", _mul16("a0", "b0"))
        _bind_product(b, "p1", _mul16("a1", "b1"))
        zeros = [bv(0, 32)] * (k - 2)
        b.define("model", ("_", "BitVec", "32"),
                 ("no-normalize-sum", "p0", "p1", *zeros, "c"))
        b.define("chain", F32_SORT,
                 ("fp.add", "RTZ",
                  ("fp.add", "RTZ", _fp32_view("p0"), _fp32_view("p1")),
                  "c_fp"))
        b.emit("assert", ("not", ("=", _fp32_view("model"), "chain")))
        return b.finish(names + ["c"])

    if prop in (PropertyId.CARRY_BITS, PropertyId.GUARD_BITS):
        v1, v2 = candidates
        if prop is PropertyId.CARRY_BITS:
            cfg1 = AccumulatorConfig(k, cfg.guard_bits, v1)
            cfg2 = AccumulatorConfig(k, cfg.guard_bits, v2)
            n1, n2 = f"no-normalize-sum-w{v1}", f"no-normalize-sum-w{v2}"
            what = f"carry widths w={v1} vs w={v2}"
            slug = "carry-bits"
        else:
            cfg1 = AccumulatorConfig(k, v1, cfg.carry_bits)
            cfg2 = AccumulatorConfig(k, v2, cfg.carry_bits)
            n1, n2 = f"no-normalize-sum-g{v1}", f"no-normalize-sum-g{v2}"
            what = f"guard widths g={v1} vs g={v2}"
            slug = "guard-bits"
        b = _DocBuilder(f"property: {slug}\n"
                        f"{2 * k + 1} inputs on which accumulators with "
                        f"{what} disagree\n" + _cfg_desc(cfg))
        names = [f"a{i}" for i in range(k)] + [f"b{i}" for i in range(k)]
        positive = prop is PropertyId.CARRY_BITS
        _declare_f16_inputs(b, names, positive=positive, nonzero=True)
        _declare_f32_input(b, "c", positive=positive, nonzero=True)
        b.raw(render(accumulator_fun_sexpr(cfg1, n1)))
        b.raw(render(accumulator_fun_sexpr(cfg2, n2)))
        for i in range(k):
            _bind_product(b, f"p{i}", _mul16(f"a{i}", f"b{i}"))
        args = [f"p{i}" for i in range(k)] + ["c"]
        b.emit("assert", ("distinct", (n1, *args), (n2, *args)))
        return b.finish(names + ["c"])

    if prop is PropertyId.MARKIDIS_VS_OOTOMO:
        return _emit_markidis_vs_ootomo(cfg)

    raise ValueError(f"unsupported property {prop}")


def _f32_const_pow2(e: int) -> Sx:
    """FP32 power-of-two constant via the fp literal constructor."""
    return ("fp", "#b0", bv(e + 127, 8), bv(0, 23))


def _emit_markidis_vs_ootomo(cfg: AccumulatorConfig) -> SmtDocument:
    k = cfg.k_products
    b = _DocBuilder("property: markidis-vs-ootomo\n"
                    "fp32 inputs on which the plain residual scheme has "
                    "strictly smaller error than the scaled-residual scheme "
                    "with outside accumulation\n" + _cfg_desc(cfg)
                    + "\ninput magnitudes restricted to [2^-15, 2^14]")
    names = [f"a{i}" for i in range(k)] + [f"b{i}" for i in range(k)]
    for nm in names + ["c"]:
        _declare_f32_input(b, nm)
    lo, hi = _f32_const_pow2(-15), _f32_const_pow2(14)
    for nm in names:
        b.emit("assert", ("fp.geq", ("fp.abs", f"{nm}_fp"), lo))
        b.emit("assert", ("fp.leq", ("fp.abs", f"{nm}_fp"), hi))
    b.emit("assert", ("fp.leq", ("fp.abs", "c_fp"), hi))
    b.raw(render(accumulator_fun_sexpr(cfg)))

    def split(nm: str, scale: int | None) -> None:
        b.define(f"{nm}_h", F16_SORT, (("_", "to_fp", "5", "11"), "RNE",
                                       f"{nm}_fp"))
        diff = ("fp.sub", "RNE", f"{nm}_fp", _widen(f"{nm}_h"))
        suffix = "r" if scale is None else "rs"
        if scale is not None:
            diff = ("fp.mul", "RNE", diff, _f32_const_pow2(scale))
        b.define(f"{nm}_{suffix}", F16_SORT,
                 (("_", "to_fp", "5", "11"), "RNE", diff))

    for nm in names:
        split(nm, None)   # plain residual
        split(nm, 11)     # scaled residual

    def prod(pname: str, x: str, y: str) -> str:
        _bind_product(b, pname, ("fp.mul", "RNE", _widen(x), _widen(y)))
        return pname

    def call(out: str, pnames: list[str], addend) -> str:
        b.define(out, ("_", "BitVec", "32"),
                 ("no-normalize-sum", *pnames, addend))
        return out

    # plain-residual chain, addend threaded through
    m_stages = [("m1", "a{i}_r", "b{i}_r", "c"),
                ("m2", "a{i}_h", "b{i}_r", "m1"),
                ("m3", "a{i}_r", "b{i}_h", "m2"),
                ("m_out", "a{i}_h", "b{i}_h", "m3")]
    for out, xa, xb, addend in m_stages:
        ps = [prod(f"{out}_p{i}", xa.format(i=i), xb.format(i=i))
              for i in range(k)]
        call(out, ps, addend)

    # scaled-residual chain with outside RNE accumulation
    o_stages = [("t1", "a{i}_rs", "b{i}_rs", bv(0, 32)),
                ("tin", "a{i}_rs", "b{i}_h", bv(0, 32)),
                ("t2", "a{i}_h", "b{i}_rs", "tin"),
                ("t3", "a{i}_h", "b{i}_h", bv(0, 32))]
    for out, xa, xb, addend in o_stages:
        ps = [prod(f"{out}_p{i}", xa.format(i=i), xb.format(i=i))
              for i in range(k)]
        call(out, ps, addend)
    b.define("oy_out", F32_SORT,
             ("fp.add", "RNE",
              ("fp.add", "RNE",
               ("fp.add", "RNE",
                ("fp.mul", "RNE", _fp32_view("t1"), _f32_const_pow2(-22)),
                ("fp.mul", "RNE", _fp32_view("t2"), _f32_const_pow2(-11))),
               _fp32_view("t3")),
              "c_fp"))

    # double-precision reference, left-associated
    def to64(x) -> Sx:
        return (("_", "to_fp", "11", "53"), "RNE", x)

    actual = None
    for i in range(k):
        p = ("fp.mul", "RNE", to64(f"a{i}_fp"), to64(f"b{i}_fp"))
        actual = p if actual is None else ("fp.add", "RNE", actual, p)
    actual = ("fp.add", "RNE", actual, to64("c_fp"))
    b.define("actual", F64_SORT, actual)
    b.define("err_m", F64_SORT,
             ("fp.abs", ("fp.sub", "RNE", to64(_fp32_view("m_out")), "actual")))
    b.define("err_oy", F64_SORT,
             ("fp.abs", ("fp.sub", "RNE", to64("oy_out"), "actual")))
    b.emit("assert", ("fp.lt", "err_m", "err_oy"))
    return b.finish(names + ["c"])


# ---------------------------------------------------------------------------
# A small interpreter over the emitted operations
# ---------------------------------------------------------------------------


def _tokenize(text: str):
    for line in text.splitlines():
        line = line.split(";", 1)[0]
        yield from line.replace("(", " ( ").replace(")", " ) ").split()


def _read_all(tokens: list[str]):
    forms = []
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(read())
            pos += 1
            return items
        return tok

    while pos < len(tokens):
        forms.append(read())
    return forms


class SmtEvaluator:
    """Interprets the bitvector fragment of emitted documents, enough to
    run `no-normalize-sum` (and its width variants) on concrete inputs.

    Values are (int, width) pairs for bitvectors and plain bools for the
    boolean sort.
    """

    def __init__(self, text: str):
        self.funs: dict[str, tuple[list[tuple[str, int]], list]] = {}
        for form in _read_all(list(_tokenize(text))):
            if isinstance(form, list) and form and form[0] == "define-fun":
                name, params, _sort, body = form[1], form[2], form[3], form[4]
                plist = []
                for p in params:
                    pname, psort = p[0], p[1]
                    if not (isinstance(psort, list) and psort[:2] == ["_", "BitVec"]):
                        break  # only bitvector-sorted functions are callable
                    plist.append((pname, int(psort[2])))
                else:
                    self.funs[name] = (plist, body)

    def call(self, name: str, args: list[int]) -> int:
        params, body = self.funs[name]
        if len(args) != len(params):
            raise ValueError(f"{name} expects {len(params)} arguments")
        env = {pname: (val & ((1 << w) - 1), w)
               for (pname, w), val in zip(params, args)}
        val = self._eval(body, env)
        return val[0]

    def _eval(self, e, env):
        if isinstance(e, str):
            if e in env:
                return env[e]
            if e.startswith("#b"):
                return int(e[2:], 2), len(e) - 2
            if e.startswith("#x"):
                return int(e[2:], 16), (len(e) - 2) * 4
            if e == "true":
                return True
            if e == "false":
                return False
            raise ValueError(f"unbound symbol {e!r}")
        head = e[0]
        if isinstance(head, list):  # indexed operator application
            op = head[1]
            if op == "bv" or head[1].startswith("bv") and head[1][2:].isdigit():
                pass
            if head[0] == "_":
                if head[1].startswith("bv"):
                    return int(head[1][2:]), int(head[2])
                if head[1] == "extract":
                    hi, lo = int(head[2]), int(head[3])
                    v, _w = self._eval(e[1], env)
                    return (v >> lo) & ((1 << (hi - lo + 1)) - 1), hi - lo + 1
                if head[1] in ("zero_extend", "sign_extend"):
                    n = int(head[2])
                    v, w = self._eval(e[1], env)
                    if head[1] == "sign_extend" and v >> (w - 1):
                        v |= ((1 << n) - 1) << w
                    return v, w + n
            raise ValueError(f"unsupported operator {head!r}")
        if head == "_":  # bare indexed literal (_ bvN w)
            return int(e[1][2:]), int(e[2])
        if head == "let":
            new_env = dict(env)
            for name, expr in e[1]:
                new_env[name] = self._eval(expr, env)
            return self._eval(e[2], new_env)
        if head == "ite":
            c = self._eval(e[1], env)
            return self._eval(e[2] if c else e[3], env)
        if head in ("and", "or"):
            vals = [self._eval(x, env) for x in e[1:]]
            return all(vals) if head == "and" else any(vals)
        if head == "not":
            return not self._eval(e[1], env)
        if head == "=":
            a = self._eval(e[1], env)
            bvv = self._eval(e[2], env)
            return a == bvv
        if head == "distinct":
            a = self._eval(e[1], env)
            bvv = self._eval(e[2], env)
            return a != bvv
        args = [self._eval(x, env) for x in e[1:]]
        if head in self.funs:
            params, body = self.funs[head]
            env2 = {p: v for (p, _w), v in zip(params, args)}
            return self._eval(body, env2)
        if head == "concat":
            (va, wa), (vb, wb) = args
            return (va << wb) | vb, wa + wb
        if head == "bvadd":
            (va, wa), (vb, _) = args
            return (va + vb) & ((1 << wa) - 1), wa
        if head == "bvsub":
            (va, wa), (vb, _) = args
            return (va - vb) & ((1 << wa) - 1), wa
        if head == "bvneg":
            (va, wa), = args
            return (-va) & ((1 << wa) - 1), wa
        if head == "bvmul":
            (va, wa), (vb, _) = args
            return (va * vb) & ((1 << wa) - 1), wa
        if head in ("bvand", "bvor", "bvxor", "bvnot"):
            (va, wa) = args[0]
            if head == "bvnot":
                return (~va) & ((1 << wa) - 1), wa
            vb = args[1][0]
            op = {"bvand": va & vb, "bvor": va | vb, "bvxor": va ^ vb}[head]
            return op, wa
        if head == "bvlshr":
            (va, wa), (sh, _) = args
            return (va >> sh) if sh < wa else 0, wa
        if head == "bvshl":
            (va, wa), (sh, _) = args
            return ((va << sh) & ((1 << wa) - 1)) if sh < wa else 0, wa
        if head in ("bvult", "bvule", "bvugt", "bvuge"):
            (va, _), (vb, _) = args
            return {"bvult": va < vb, "bvule": va <= vb,
                    "bvugt": va > vb, "bvuge": va >= vb}[head]
        if head in ("bvslt", "bvsle", "bvsgt", "bvsge"):
            (va, wa), (vb, wb) = args

            def s(v, w):
                return v - (1 << w) if v >> (w - 1) else v

            sa, sb = s(va, wa), s(vb, wb)
            return {"bvslt": sa < sb, "bvsle": sa <= sb,
                    "bvsgt": sa > sb, "bvsge": sa >= sb}[head]
        raise ValueError(f"unsupported operation {head!r}")
