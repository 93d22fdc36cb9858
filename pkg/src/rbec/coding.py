"""Systematic XOR erasure code with an identity-over-random generator.

An (n, k) code keeps the k data blocks verbatim and derives n-k parity
blocks, each the XOR of the data blocks selected by one row of a seeded
random bit matrix.  Any set of surviving blocks whose generator rows
reach rank k recovers the data exactly; with 10 or more spare blocks
that holds with probability better than 0.999, and the failure case is
reported as a recoverable error rather than hidden.

Row and column identities are stable for the lifetime of a code, so
specs derived by adding or dropping disks keep every surviving random
entry bit-identical (see rbec.randmat).

Block payloads are only ever copied or XORed.  The count_ops context
manager captures how much of each happened, which the benchmark and the
complexity tests rely on.
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .errors import CodewordError, DecodeFailure, InsufficientBlocksError
from .gf2 import BitMatrix
from .randmat import RandomMatrixSpec, matrix_for_ids, prob_tall_full_rank


# --- payload instrumentation -------------------------------------------------

@dataclass
class OpCounter:
    """Tally of payload work: XORs in 8-byte words and whole blocks, plus
    bit-level elimination effort (row XORs x row width)."""

    xor_words: int = 0
    xor_blocks: int = 0
    elim_row_xors: int = 0
    elim_bit_ops: int = 0


_active_counter: ContextVar[OpCounter | None] = ContextVar("rbec_op_counter", default=None)


@contextmanager
def count_ops():
    """Collect an OpCounter for all coding work inside the block."""
    counter = OpCounter()
    token = _active_counter.set(counter)
    try:
        yield counter
    finally:
        _active_counter.reset(token)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    """XOR two equal-length blocks, charging the active counter."""
    if len(a) != len(b):
        raise CodewordError(f"block length mismatch: {len(a)} vs {len(b)}")
    out = (np.frombuffer(a, dtype=np.uint8) ^ np.frombuffer(b, dtype=np.uint8)).tobytes()
    counter = _active_counter.get()
    if counter is not None:
        counter.xor_words += (len(a) + 7) // 8
        counter.xor_blocks += 1
    return out


def _charge_elimination(transcript: gf2.Transcript, width: int) -> None:
    counter = _active_counter.get()
    if counter is not None:
        counter.elim_row_xors += transcript.xor_count
        counter.elim_bit_ops += transcript.xor_count * width


# --- domain types --------------------------------------------------------------

@dataclass(frozen=True)
class CodeSpec:
    """Everything needed to regenerate one code's matrices bit-exactly."""

    n: int
    k: int
    seed: int
    data_col_ids: tuple[int, ...]
    parity_row_ids: tuple[int, ...]
    version: int = 1

    def __post_init__(self):
        if not self.n > self.k >= 1:
            raise CodewordError(f"need n > k >= 1, got n={self.n} k={self.k}")
        if len(self.data_col_ids) != self.k:
            raise CodewordError(f"expected {self.k} column ids, got {len(self.data_col_ids)}")
        if len(self.parity_row_ids) != self.n - self.k:
            raise CodewordError(
                f"expected {self.n - self.k} parity row ids, got {len(self.parity_row_ids)}")
        if len(set(self.data_col_ids)) != self.k or len(set(self.parity_row_ids)) != self.n - self.k:
            raise CodewordError("ids must be unique")

    @classmethod
    def fresh(cls, n: int, k: int, seed: int) -> "CodeSpec":
        return cls(n, k, seed, tuple(range(k)), tuple(range(n - k)))

    @property
    def parity_count(self) -> int:
        return self.n - self.k


@dataclass(frozen=True)
class Codeword:
    """n equal-size blocks, data first; None marks an erased block."""

    block_size: int
    blocks: tuple[bytes | None, ...]

    def __post_init__(self):
        if self.block_size < 1:
            raise CodewordError("block size must be positive")
        if not self.blocks:
            raise CodewordError("codeword has no blocks")
        for i, blk in enumerate(self.blocks):
            if blk is not None and len(blk) != self.block_size:
                raise CodewordError(f"block {i} has {len(blk)} bytes, expected {self.block_size}")

    @property
    def present(self) -> tuple[bool, ...]:
        return tuple(b is not None for b in self.blocks)

    @property
    def present_count(self) -> int:
        return sum(1 for b in self.blocks if b is not None)

    def erase(self, indices) -> "Codeword":
        dead = set(indices)
        for i in dead:
            if not 0 <= i < len(self.blocks):
                raise CodewordError(f"block index {i} out of range")
        return Codeword(self.block_size,
                        tuple(None if i in dead else b for i, b in enumerate(self.blocks)))


@dataclass(frozen=True)
class CodeMetrics:
    fault_tolerance_estimate: int
    storage_efficiency: float
    parity_ones: int


@dataclass(frozen=True)
class ScrubReport:
    consistent: bool
    fired: tuple[int, ...] = field(default=())


# --- matrix construction ---------------------------------------------------------

def parity_pattern(spec: CodeSpec) -> BitMatrix:
    """The (n-k) x k random submatrix: row i selects which data blocks
    feed parity block i."""
    return matrix_for_ids(RandomMatrixSpec(spec.seed), spec.parity_row_ids, spec.data_col_ids)


def build_generator(spec: CodeSpec) -> BitMatrix:
    """n x k generator: identity on top (systematic), random rows below."""
    return gf2.vstack(gf2.identity(spec.k), parity_pattern(spec))


def build_parity_check(spec: CodeSpec) -> BitMatrix:
    """n x (n-k) parity-check: transposed random rows over an identity.
    Satisfies transpose(G) * H == 0 exactly, since each column doubles
    (and thus cancels) one random row."""
    return gf2.vstack(gf2.transpose(parity_pattern(spec)), gf2.identity(spec.n - spec.k))


# --- encode / decode / scrub -------------------------------------------------------

def _check_data_blocks(spec: CodeSpec, data: list[bytes]) -> int:
    if len(data) != spec.k:
        raise CodewordError(f"expected {spec.k} data blocks, got {len(data)}")
    size = len(data[0])
    if size == 0:
        raise CodewordError("data blocks must be non-empty")
    for i, blk in enumerate(data):
        if len(blk) != size:
            raise CodewordError(f"block {i} has {len(blk)} bytes, expected {size}")
    return size


def encode(spec: CodeSpec, data: list[bytes]) -> Codeword:
    """Systematic encode: data passes through, parity i XORs the data
    blocks picked by pattern row i (exactly ones(row) block XORs)."""
    size = _check_data_blocks(spec, data)
    pattern = parity_pattern(spec)
    blocks: list[bytes | None] = [bytes(b) for b in data]
    zero = bytes(size)
    for bits in pattern.row_bits:
        acc = zero
        while bits:
            low = bits & -bits
            acc = xor_bytes(acc, data[low.bit_length() - 1])
            bits ^= low
        blocks.append(acc)
    return Codeword(size, tuple(blocks))


def decode(spec: CodeSpec, word: Codeword) -> list[bytes]:
    """Recover the k data blocks from any >= k surviving blocks.

    Present data blocks return verbatim.  Missing ones are solved from
    all surviving parity blocks: substitute the known data into each
    parity equation, eliminate the bit matrix of the missing columns,
    and replay the elimination transcript on the adjusted payloads.
    Raises DecodeFailure when the surviving rows fall short of rank k.
    """
    if len(word.blocks) != spec.n:
        raise CodewordError(f"expected {spec.n} blocks, got {len(word.blocks)}")
    if word.present_count < spec.k:
        raise InsufficientBlocksError(
            f"{word.present_count} blocks present, need at least {spec.k}")

    blocks = word.blocks
    missing = [j for j in range(spec.k) if blocks[j] is None]
    if not missing:
        return [blocks[j] for j in range(spec.k)]

    pattern = parity_pattern(spec)
    parity_rows = [i for i in range(spec.parity_count) if blocks[spec.k + i] is not None]
    # Substitute known data into each surviving parity equation.
    adjusted: list[bytes] = []
    for i in parity_rows:
        acc = blocks[spec.k + i]
        bits = pattern.row_bits[i]
        while bits:
            low = bits & -bits
            j = low.bit_length() - 1
            if blocks[j] is not None:
                acc = xor_bytes(acc, blocks[j])
            bits ^= low
        adjusted.append(acc)

    sub = gf2.select_cols(gf2.select_rows(pattern, parity_rows), missing)
    _, transcript = gf2.eliminate(sub)
    _charge_elimination(transcript, sub.cols)
    if transcript.rank < len(missing):
        raise DecodeFailure(
            f"surviving blocks reach rank {spec.k - len(missing) + transcript.rank}, need {spec.k}")

    solved = transcript.replay(adjusted, xor_bytes)
    out: list[bytes] = [None] * spec.k  # type: ignore[list-item]
    for j in range(spec.k):
        if blocks[j] is not None:
            out[j] = blocks[j]
    for pos, j in enumerate(missing):
        out[j] = solved[pos]
    return out


def scrub(spec: CodeSpec, word: Codeword) -> ScrubReport:
    """Check every parity equation of a complete codeword; reports the
    indices of parity rows whose syndrome is nonzero."""
    if len(word.blocks) != spec.n:
        raise CodewordError(f"expected {spec.n} blocks, got {len(word.blocks)}")
    if word.present_count != spec.n:
        raise CodewordError("scrub needs a complete codeword")
    pattern = parity_pattern(spec)
    fired = []
    for i, bits in enumerate(pattern.row_bits):
        syndrome = word.blocks[spec.k + i]
        while bits:
            low = bits & -bits
            syndrome = xor_bytes(syndrome, word.blocks[low.bit_length() - 1])
            bits ^= low
        if any(syndrome):
            fired.append(i)
    return ScrubReport(consistent=not fired, fired=tuple(fired))


# --- figures of merit ------------------------------------------------------------

def metrics(spec: CodeSpec) -> CodeMetrics:
    """Headline numbers: estimated whole-block fault tolerance
    max(0, n-k-10), storage efficiency k/n, and the parity density that
    drives encode cost."""
    ones = sum(r.bit_count() for r in parity_pattern(spec).row_bits)
    return CodeMetrics(
        fault_tolerance_estimate=max(0, spec.n - spec.k - 10),
        storage_efficiency=spec.k / spec.n,
        parity_ones=ones,
    )


def survival_probability(spec: CodeSpec, lost_blocks: int) -> float:
    """Probability that losing that many blocks still leaves a decodable
    set, under the tall-random-matrix model (0 when fewer than k remain)."""
    if lost_blocks < 0:
        raise CodewordError("lost block count must be nonnegative")
    remaining = spec.n - lost_blocks
    if remaining < spec.k:
        return 0.0
    if lost_blocks == 0:
        return 1.0
    return prob_tall_full_rank(spec.k, remaining - spec.k)
