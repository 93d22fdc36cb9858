"""Dense bit-packed linear algebra over GF(2).

Matrices are immutable; every row is stored as one Python int used as a
bitset (bit j = column j), which makes a whole-row XOR a single integer
operation.  All entries live in {0, 1} and arithmetic is mod 2, so
addition is XOR and multiplication is AND.

Gaussian elimination records a replayable transcript of its row
operations.  Decoding replays that transcript on byte blocks instead of
bits, which is what keeps the expensive elimination on the small bit
matrix and off the payload.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import DimensionError, SingularMatrixError

T = TypeVar("T")

SWAP = "swap"
XOR = "xor"


def _row_bytes(cols: int) -> int:
    return (cols + 7) // 8


@dataclass(frozen=True)
class BitMatrix:
    """Immutable rows x cols matrix over GF(2).

    ``row_bits[i]`` holds row i, bit j = entry (i, j).  Bits at or above
    ``cols`` are guaranteed zero (checked at construction).
    """

    cols: int
    row_bits: tuple[int, ...]

    def __post_init__(self):
        if self.cols < 1 or not self.row_bits:
            raise DimensionError("matrix dimensions must be at least 1x1")
        limit = 1 << self.cols
        for r in self.row_bits:
            if r < 0 or r >= limit:
                raise DimensionError(f"row value out of range for {self.cols} columns")

    @property
    def rows(self) -> int:
        return len(self.row_bits)

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise DimensionError(f"entry ({i}, {j}) out of range for {self.rows}x{self.cols}")
        return (self.row_bits[i] >> j) & 1

    def to_rows(self) -> list[list[int]]:
        """Entries as nested lists (test/debug convenience)."""
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self.row_bits]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        if not rows or not rows[0]:
            raise DimensionError("matrix dimensions must be at least 1x1")
        cols = len(rows[0])
        packed = []
        for row in rows:
            if len(row) != cols:
                raise DimensionError("ragged rows")
            bits = 0
            for j, v in enumerate(row):
                if v not in (0, 1):
                    raise ValueError(f"entry {v!r} not a bit")
                bits |= v << j
            packed.append(bits)
        return cls(cols, tuple(packed))

    def to_bytes(self) -> bytes:
        """Row-major packing: each row occupies ceil(cols/8) bytes, low bit
        of each byte first (column j sits at byte j//8, bit j%8)."""
        nb = _row_bytes(self.cols)
        return b"".join(r.to_bytes(nb, "little") for r in self.row_bits)

    @classmethod
    def from_bytes(cls, rows: int, cols: int, raw: bytes) -> "BitMatrix":
        nb = _row_bytes(cols)
        if len(raw) != rows * nb:
            raise DimensionError(f"expected {rows * nb} bytes for {rows}x{cols}, got {len(raw)}")
        return cls(cols, tuple(int.from_bytes(raw[i * nb:(i + 1) * nb], "little") for i in range(rows)))

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, rows: int, cols: int, hexstr: str) -> "BitMatrix":
        return cls.from_bytes(rows, cols, bytes.fromhex(hexstr))


@dataclass(frozen=True)
class BitVector:
    """Packed bit vector; bit i of ``bits`` is element i."""

    length: int
    bits: int

    def __post_init__(self):
        if self.length < 1:
            raise DimensionError("vector length must be at least 1")
        if self.bits < 0 or self.bits >> self.length:
            raise DimensionError(f"bit value out of range for length {self.length}")

    def get(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise DimensionError(f"index {i} out of range")
        return (self.bits >> i) & 1

    def to_bits(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.length)]

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value = 0
        n = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"entry {b!r} not a bit")
            value |= b << n
            n += 1
        return cls(n, value)


def zeros(rows: int, cols: int) -> BitMatrix:
    if rows < 1 or cols < 1:
        raise DimensionError("matrix dimensions must be at least 1x1")
    return BitMatrix(cols, (0,) * rows)


def identity(n: int) -> BitMatrix:
    if n < 1:
        raise DimensionError("identity order must be at least 1")
    return BitMatrix(n, tuple(1 << i for i in range(n)))


def multiply(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product over GF(2): entry (i,j) = XOR_l a(i,l) & b(l,j).

    Row i of the product is the XOR of the rows of ``b`` selected by the
    set bits of row i of ``a``.
    """
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    out = []
    brow = b.row_bits
    for bits in a.row_bits:
        acc = 0
        while bits:
            low = bits & -bits
            acc ^= brow[low.bit_length() - 1]
            bits ^= low
        out.append(acc)
    return BitMatrix(b.cols, tuple(out))


def transpose(m: BitMatrix) -> BitMatrix:
    out = [0] * m.cols
    for i, bits in enumerate(m.row_bits):
        mark = 1 << i
        while bits:
            low = bits & -bits
            out[low.bit_length() - 1] |= mark
            bits ^= low
    return BitMatrix(m.rows, tuple(out))


def vstack(top: BitMatrix, bottom: BitMatrix) -> BitMatrix:
    if top.cols != bottom.cols:
        raise DimensionError(f"column mismatch: {top.cols} vs {bottom.cols}")
    return BitMatrix(top.cols, top.row_bits + bottom.row_bits)


def _check_indices(indices: Sequence[int], limit: int, what: str) -> None:
    if not indices:
        raise DimensionError(f"empty {what} selection")
    prev = -1
    for i in indices:
        if not 0 <= i < limit:
            raise DimensionError(f"{what} index {i} out of range 0..{limit - 1}")
        if i <= prev:
            raise DimensionError(f"{what} indices must be strictly increasing")
        prev = i


def select_rows(m: BitMatrix, indices: Sequence[int]) -> BitMatrix:
    _check_indices(indices, m.rows, "row")
    return BitMatrix(m.cols, tuple(m.row_bits[i] for i in indices))


def select_cols(m: BitMatrix, indices: Sequence[int]) -> BitMatrix:
    _check_indices(indices, m.cols, "column")
    out = []
    for bits in m.row_bits:
        packed = 0
        for new_j, old_j in enumerate(indices):
            packed |= ((bits >> old_j) & 1) << new_j
        out.append(packed)
    return BitMatrix(len(indices), tuple(out))


def rank(m: BitMatrix) -> int:
    """Row rank via forward Gaussian elimination."""
    work = list(m.row_bits)
    nrows = len(work)
    r = 0
    for col in range(m.cols):
        mask = 1 << col
        pivot = -1
        for i in range(r, nrows):
            if work[i] & mask:
                pivot = i
                break
        if pivot < 0:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        prow = work[r]
        for i in range(r + 1, nrows):
            if work[i] & mask:
                work[i] ^= prow
        r += 1
        if r == nrows:
            break
    return r


@dataclass(frozen=True)
class Transcript:
    """Row-operation log from one elimination, replayable on any payload.

    ``steps`` holds ("swap", i, j) and ("xor", src, dst) entries in
    execution order; dst ^= src for xor.  Replaying them on the byte
    blocks that sit in the same row positions performs the identical
    linear transformation without re-eliminating.
    """

    n_rows: int
    n_cols: int
    steps: tuple[tuple[str, int, int], ...]
    pivot_cols: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)

    @property
    def xor_count(self) -> int:
        return sum(1 for kind, _, _ in self.steps if kind == XOR)

    def replay(self, items: Sequence[T], xor: Callable[[T, T], T]) -> list[T]:
        """Apply the recorded row operations to ``items`` (one per row)."""
        if len(items) != self.n_rows:
            raise DimensionError(f"expected {self.n_rows} items, got {len(items)}")
        out = list(items)
        for kind, i, j in self.steps:
            if kind == SWAP:
                out[i], out[j] = out[j], out[i]
            else:
                out[j] = xor(out[j], out[i])
        return out


def eliminate(m: BitMatrix) -> tuple[BitMatrix, Transcript]:
    """Reduce ``m`` to reduced row-echelon form, recording every row op.

    Pivot rule: for each column, the first row at or below the current
    pivot row holding a 1 (deterministic, so transcripts are
    reproducible).  Each pivot clears its column in all other rows.
    """
    work = list(m.row_bits)
    nrows = len(work)
    steps: list[tuple[str, int, int]] = []
    pivot_cols: list[int] = []
    r = 0
    for col in range(m.cols):
        mask = 1 << col
        pivot = -1
        for i in range(r, nrows):
            if work[i] & mask:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            work[r], work[pivot] = work[pivot], work[r]
            steps.append((SWAP, r, pivot))
        prow = work[r]
        for i in range(nrows):
            if i != r and work[i] & mask:
                work[i] ^= prow
                steps.append((XOR, r, i))
        pivot_cols.append(col)
        r += 1
        if r == nrows:
            break
    reduced = BitMatrix(m.cols, tuple(work))
    return reduced, Transcript(nrows, m.cols, tuple(steps), tuple(pivot_cols))


def solve(a: BitMatrix, rhs: BitVector) -> tuple[BitVector, Transcript]:
    """Solve a*x = rhs for the unique x; requires full column rank.

    Returns the solution together with the elimination transcript so
    callers can replay the same row operations on block payloads.
    Raises SingularMatrixError when rank(a) < a.cols.
    """
    if a.rows < a.cols:
        raise DimensionError(f"underdetermined system: {a.rows} rows < {a.cols} cols")
    if rhs.length != a.rows:
        raise DimensionError(f"rhs length {rhs.length} != {a.rows} rows")
    _, transcript = eliminate(a)
    if transcript.rank < a.cols:
        raise SingularMatrixError(f"rank {transcript.rank} < {a.cols} columns")
    y = transcript.replay(rhs.to_bits(), operator.xor)
    # Full column rank puts pivot i in row i, so the solution is the head.
    if any(y[a.cols:]):
        raise ValueError("inconsistent system: nonzero residual rows")
    bits = 0
    for i in range(a.cols):
        bits |= y[i] << i
    return BitVector(a.cols, bits), transcript
