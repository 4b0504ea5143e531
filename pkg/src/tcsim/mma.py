"""Matrix-level semantics built from the dot-product model.

One instruction step computes D = A x B + C with every output element an
independent dot product of a row of A and a column of B plus the matching
addend element. Larger inner dimensions are handled by chaining steps over
k-wide slices in ascending order, feeding each step's D in as the next
step's C (which is not associative with a single wide step and is not
claimed to be).

Matrix file format: a header line `# f16|f32 rows cols` followed by one
CSV row per matrix row. Cells follow the shared numeric literal rules;
files written here use hex patterns, so round-trips are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .accumulator import AccumulatorConfig, ArchPreset, resolve_config, \
    tensor_dot
from .bitfloat import FP16, FP32, F16Bits, F32Bits, FloatFormat, format_hex, \
    parse_literal


@dataclass(frozen=True, slots=True)
class Matrix:
    """Row-major matrix of raw patterns in one precision ("f16"/"f32")."""

    rows: int
    cols: int
    precision: str
    elements: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if self.precision not in ("f16", "f32"):
            raise ValueError(f"bad precision {self.precision!r}")
        if len(self.elements) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs "
                f"{self.rows * self.cols} elements, got {len(self.elements)}")
        fmt = self.format
        for e in self.elements:
            if not 0 <= e < (1 << fmt.width):
                raise ValueError(f"element {e:#x} out of {fmt.name} range")

    @property
    def format(self) -> FloatFormat:
        return FP16 if self.precision == "f16" else FP32

    def at(self, i: int, j: int) -> int:
        return self.elements[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.elements[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[int, ...]:
        return self.elements[j::self.cols]

    @classmethod
    def zeros(cls, rows: int, cols: int, precision: str) -> "Matrix":
        return cls(rows, cols, precision, (0,) * (rows * cols))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], precision: str) -> "Matrix":
        flat = tuple(x for r in rows for x in r)
        return cls(len(rows), len(rows[0]), precision, flat)


@dataclass(frozen=True, slots=True)
class MmaShape:
    """Per-instruction geometry (m, n, k); k matches the preset's product
    count."""

    m: int
    n: int
    k: int


def shape_for(preset: ArchPreset) -> MmaShape:
    if preset is ArchPreset.AMPERE:
        return MmaShape(8, 8, 8)
    return MmaShape(4, 4, 4)


def _wrap_vec(bits: Sequence[int], fmt: FloatFormat):
    cls = F16Bits if fmt is FP16 else F32Bits
    return [cls(b) for b in bits]


def mma_step(a: Matrix, b: Matrix, c: Matrix,
             cfg: AccumulatorConfig | ArchPreset) -> Matrix:
    """One instruction step: D[i][j] = dot(row i of A, col j of B, C[i][j]).

    A and B must be f16 with inner dimension equal to the configured
    product count; C may be f16 or f32 independently of the output
    precision. Elements are computed independently.
    """
    cfg = resolve_config(cfg)
    if a.precision != "f16" or b.precision != "f16":
        raise ValueError("A and B must be f16 matrices")
    if a.cols != cfg.k_products:
        raise ValueError(
            f"inner dimension {a.cols} does not match k={cfg.k_products}")
    if b.rows != a.cols:
        raise ValueError(f"A is {a.rows}x{a.cols} but B is {b.rows}x{b.cols}")
    if c.rows != a.rows or c.cols != b.cols:
        raise ValueError(
            f"C must be {a.rows}x{b.cols}, got {c.rows}x{c.cols}")
    c_cls = F16Bits if c.precision == "f16" else F32Bits
    out = []
    for i in range(a.rows):
        row = _wrap_vec(a.row(i), FP16)
        for j in range(b.cols):
            col = _wrap_vec(b.col(j), FP16)
            d, _ = tensor_dot(row, col, c_cls(c.at(i, j)), cfg)
            out.append(d.bits)
    return Matrix(a.rows, b.cols, cfg.out_precision, tuple(out))


def gemm_chained(a: Matrix, b: Matrix, c: Matrix,
                 cfg: AccumulatorConfig | ArchPreset) -> Matrix:
    """Chain instruction steps over k-wide slices of the inner dimension in
    ascending order, each step's D feeding the next step's C. The inner
    dimension is zero-padded up to a multiple of k when needed."""
    cfg = resolve_config(cfg)
    if a.precision != "f16" or b.precision != "f16":
        raise ValueError("A and B must be f16 matrices")
    if a.cols != b.rows:
        raise ValueError(f"A is {a.rows}x{a.cols} but B is {b.rows}x{b.cols}")
    if c.rows != a.rows or c.cols != b.cols:
        raise ValueError(
            f"C must be {a.rows}x{b.cols}, got {c.rows}x{c.cols}")
    k = cfg.k_products
    big_k = -(-a.cols // k) * k
    if big_k != a.cols:
        a = _pad_cols(a, big_k)
        b = _pad_rows(b, big_k)
    d = c
    for s in range(0, big_k, k):
        a_slice = Matrix(a.rows, k, "f16", tuple(
            x for i in range(a.rows) for x in a.row(i)[s:s + k]))
        b_slice = Matrix(k, b.cols, "f16", tuple(
            x for i in range(s, s + k) for x in b.row(i)))
        d = mma_step(a_slice, b_slice, d, cfg)
    return d


def _pad_cols(m: Matrix, cols: int) -> Matrix:
    rows = []
    for i in range(m.rows):
        rows.append(tuple(m.row(i)) + (0,) * (cols - m.cols))
    return Matrix(m.rows, cols, m.precision, tuple(x for r in rows for x in r))


def _pad_rows(m: Matrix, rows: int) -> Matrix:
    flat = m.elements + (0,) * ((rows - m.rows) * m.cols)
    return Matrix(rows, m.cols, m.precision, flat)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------


def write_matrix(m: Matrix, path: str | Path) -> None:
    fmt = m.format
    lines = [f"# {m.precision} {m.rows} {m.cols}"]
    for i in range(m.rows):
        lines.append(",".join(format_hex(x, fmt) for x in m.row(i)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path: str | Path) -> Matrix:
    text = Path(path).read_text()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# precision rows cols' header")
    parts = lines[0][1:].split()
    if len(parts) != 3 or parts[0] not in ("f16", "f32"):
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    precision, rows, cols = parts[0], int(parts[1]), int(parts[2])
    fmt = FP16 if precision == "f16" else FP32
    if len(lines) - 1 != rows:
        raise ValueError(f"{path}: expected {rows} rows, found {len(lines) - 1}")
    elements = []
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != cols:
            raise ValueError(f"{path}: expected {cols} cells per row")
        elements.extend(parse_literal(c, fmt) for c in cells)
    return Matrix(rows, cols, precision, tuple(elements))
