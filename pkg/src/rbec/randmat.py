"""Seeded random {0,1} matrices and full-rank probability tools.

Entry derivation is counter-mode: every entry is a pure function of
(seed, row_id, col_id), so a matrix can grow or shrink by rows/columns
without disturbing any existing entry.  That stability is what makes
online array expansion cheap, and it is why a sequential PRNG stream
will not do here.

The mixing function is fixed and versioned (DERIVATION_ID); persisted
metadata names it so matrices regenerate bit-identically forever.

Analytic formulas give the probability that such a matrix has full
column rank; monte_carlo_full_rank estimates the same probability
empirically and doubles as an ongoing quality check of the mixer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .gf2 import BitMatrix

DERIVATION_ID = "rbec-splitmix64-v1"

_MASK64 = (1 << 64) - 1
# Odd 64-bit constants; GOLDEN is the usual 2^64/phi increment.
_GOLDEN = 0x9E3779B97F4A7C15
_ROW_MUL = 0xD1B54A32D192ED03
_COL_MUL = 0xC2B2AE3D27D4EB4F
_COL_ADD = 0x243F6A8885A308D3


def _mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford mix13): bijective on 64-bit ints."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def _row_key(seed: int, row_id: int) -> int:
    return _mix64(seed ^ (row_id * _ROW_MUL & _MASK64))


def _col_key(col_id: int) -> int:
    return _mix64((col_id * _COL_MUL + _COL_ADD) & _MASK64)


def _threshold(p: float) -> int:
    """Entries map hash >= threshold to 1, mirroring the draw-and-compare
    construction: a uniform u = h/2^64 in [0,1) yields 0 when u <= 1-p.
    Clamped so the comparison stays within 64 bits (p = 1/2 gives 2^63)."""
    return min(math.ceil((1.0 - p) * 2.0 ** 64), _MASK64)


@dataclass(frozen=True)
class RandomMatrixSpec:
    """Seed plus one-probability for a family of random bit matrices."""

    seed: int
    p: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie strictly between 0 and 1, got {self.p}")
        object.__setattr__(self, "seed", self.seed & _MASK64)


@dataclass(frozen=True)
class EntryAddress:
    """Stable logical coordinates of one entry; ids are never reused."""

    row_id: int
    col_id: int


def derive_entry(spec: RandomMatrixSpec, addr: EntryAddress) -> int:
    """The defining scalar path: entry = f(seed, row_id, col_id)."""
    h = _mix64(_row_key(spec.seed, addr.row_id & _MASK64) ^ _col_key(addr.col_id & _MASK64))
    return 1 if h >= _threshold(spec.p) else 0


# --- vectorized derivation (numpy, identical bits to derive_entry) ---------

_U64 = np.uint64


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def _row_keys_np(seeds: np.ndarray, row_ids: np.ndarray) -> np.ndarray:
    return _mix64_np(seeds ^ (row_ids * _U64(_ROW_MUL)))


def _col_keys_np(col_ids: np.ndarray) -> np.ndarray:
    return _mix64_np(col_ids * _U64(_COL_MUL) + _U64(_COL_ADD))


def matrix_for_ids(spec: RandomMatrixSpec, row_ids, col_ids) -> BitMatrix:
    """Random matrix addressed by explicit stable ids (one per row/column)."""
    row_ids = np.asarray(list(row_ids), dtype=np.uint64)
    col_ids = np.asarray(list(col_ids), dtype=np.uint64)
    if row_ids.size == 0 or col_ids.size == 0:
        raise DimensionError("matrix dimensions must be at least 1x1")
    thr = _U64(_threshold(spec.p))
    rk = _row_keys_np(np.full(row_ids.shape, spec.seed, dtype=np.uint64), row_ids)
    ck = _col_keys_np(col_ids)
    h = _mix64_np(rk[:, None] ^ ck[None, :])
    bits = (h >= thr).astype(np.uint8)
    packed = np.packbits(bits, axis=1, bitorder="little")
    return BitMatrix(int(col_ids.size),
                     tuple(int.from_bytes(row.tobytes(), "little") for row in packed))


def random_matrix(spec: RandomMatrixSpec, rows: int, cols: int) -> BitMatrix:
    """Matrix whose (i, j) entry is derive_entry at row_id=i, col_id=j."""
    if rows < 1 or cols < 1:
        raise DimensionError("matrix dimensions must be at least 1x1")
    return matrix_for_ids(spec, range(rows), range(cols))


# --- analytic rank probabilities -------------------------------------------

def prob_square_nonsingular(n: int) -> float:
    """Probability an n x n fair random GF(2) matrix is nonsingular:
    prod_{i=1..n} (1 - 2^-i).  Decreases toward ~0.288788 as n grows."""
    return prob_tall_full_rank(n, 0)


def prob_tall_full_rank(n: int, extra: int) -> float:
    """Probability an (n+extra) x n fair random matrix has rank n:
    prod_{i=extra+1..n+extra} (1 - 2^-i)."""
    if n < 1:
        raise DimensionError(f"column count must be at least 1, got {n}")
    if extra < 0:
        raise DimensionError(f"extra rows must be nonnegative, got {extra}")
    prod = 1.0
    # Large-i factors first (closest to 1).
    for i in range(n + extra, extra, -1):
        prod *= 1.0 - 2.0 ** -i
    return prod


def monotone_check(n_max: int) -> list[float]:
    """[S(1), ..., S(n_max)] where S(n) = prob_square_nonsingular(n); the
    sequence is strictly decreasing, which callers may assert."""
    if n_max < 2:
        raise DimensionError(f"n_max must be at least 2, got {n_max}")
    return [prob_square_nonsingular(n) for n in range(1, n_max + 1)]


# --- Monte-Carlo estimation --------------------------------------------------

@dataclass(frozen=True)
class MonteCarloResult:
    probability: float
    stderr: float
    trials: int
    successes: int


def trial_seed(base_seed: int, index: int) -> int:
    """Independent per-trial seed; trials can therefore run in any order
    or in parallel and merge by count."""
    return _mix64((base_seed + (index + 1) * _GOLDEN) & _MASK64)


def monte_carlo_full_rank(spec: RandomMatrixSpec, rows: int, cols: int,
                          trials: int, chunk: int = 16384) -> MonteCarloResult:
    """Fraction of freshly seeded rows x cols matrices with rank == cols.

    Trial i draws its matrix exactly as random_matrix would under
    trial_seed(spec.seed, i).  For cols <= 64 the whole batch runs
    through a vectorized elimination; wider matrices fall back to the
    scalar path.
    """
    if rows < 1 or cols < 1:
        raise DimensionError("matrix dimensions must be at least 1x1")
    if trials < 1:
        raise DimensionError(f"trials must be at least 1, got {trials}")
    if cols > rows:
        raise DimensionError("full-column-rank estimation needs rows >= cols")

    if cols <= 64:
        successes = 0
        for start in range(0, trials, chunk):
            stop = min(start + chunk, trials)
            successes += _batch_full_rank_count(spec, rows, cols, start, stop)
    else:
        from .gf2 import rank
        successes = 0
        for i in range(trials):
            m = random_matrix(RandomMatrixSpec(trial_seed(spec.seed, i), spec.p), rows, cols)
            if rank(m) == cols:
                successes += 1

    p_hat = successes / trials
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return MonteCarloResult(p_hat, stderr, trials, successes)


def _trial_seeds_np(base_seed: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start + 1, stop + 1, dtype=np.uint64)
    return _mix64_np(_U64(base_seed) + idx * _U64(_GOLDEN))


def _packed_trial_rows(spec: RandomMatrixSpec, rows: int, cols: int,
                       start: int, stop: int, dtype) -> np.ndarray:
    """(trials, rows) array; bit j of word (t, i) is entry (i, j) of trial t."""
    seeds = _trial_seeds_np(spec.seed, start, stop)
    row_ids = np.arange(rows, dtype=np.uint64)
    rk = _row_keys_np(seeds[:, None], row_ids[None, :])        # (B, rows)
    ck = _col_keys_np(np.arange(cols, dtype=np.uint64))
    thr = _U64(_threshold(spec.p))
    packed = np.zeros((stop - start, rows), dtype=dtype)
    for j in range(cols):
        h = _mix64_np(rk ^ ck[j])
        packed |= (h >= thr).astype(dtype) << dtype(j)
    return packed


def _batch_full_rank_count(spec: RandomMatrixSpec, rows: int, cols: int,
                           start: int, stop: int) -> int:
    """Vectorized Gaussian elimination over a batch of packed matrices;
    returns how many reach full column rank."""
    dtype = np.uint32 if cols <= 32 else np.uint64
    m = _packed_trial_rows(spec, rows, cols, start, stop, dtype)
    batch = m.shape[0]
    bidx = np.arange(batch)
    rowidx = np.arange(rows, dtype=np.int64)[None, :]
    npivots = np.zeros(batch, dtype=np.int64)
    one = dtype(1)
    for col in range(cols):
        bit = (m >> dtype(col)) & one
        eligible = (bit == one) & (rowidx >= npivots[:, None])
        has = eligible.any(axis=1)
        # argmax returns the first eligible row; 0 for dead matrices, where
        # the zeroed pivot value below turns every update into a no-op.
        pivot = np.argmax(eligible, axis=1)
        prow = np.where(has, npivots, 0)
        a = m[bidx, prow]
        b = m[bidx, pivot]
        m[bidx, prow] = b
        m[bidx, pivot] = a
        pivot_vals = np.where(has, m[bidx, prow], dtype(0))
        bit = (m >> dtype(col)) & one
        bit[bidx, prow] = 0
        m ^= bit * pivot_vals[:, None]
        npivots += has
    return int((npivots == cols).sum())
