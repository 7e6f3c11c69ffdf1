"""Parameterized matrix-vector engine.

Every matvec is evaluated the way a tiled hardware datapath would do it:
output rows are processed in chunks of ``num_parallel_out``; within one dot
product the input indices are dealt round-robin to ``num_parallel_in``
accumulators, each accumulator MACs its share sequentially, and the partials
are combined by a pairwise reduction tree.  The order is part of the contract
— two calls with the same operands and parameters produce identical results,
in real or fixed-point mode, regardless of how the work is batched.

``matvec_cols`` evaluates many input columns in one call.  Each column sees
exactly the arithmetic ``matvec`` would apply to it (elementwise IEEE ops are
deterministic per element), so batching never changes a result; it only
amortizes call overhead.

``estimate_cycles`` is the analytic cost model for the same datapath: one
cycle per MAC round per accumulator, plus tree depth, plus one accumulate,
for each row chunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RealMode

_REAL = RealMode()


class ShapeMismatchError(ValueError):
    """Operand shapes disagree."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class ParallelismParams:
    """Engine parallelism degrees: concurrent output rows, and concurrent
    input partitions per dot product (power of two, for the reduction tree)."""

    num_parallel_out: int
    num_parallel_in: int

    def __post_init__(self):
        if self.num_parallel_out < 1:
            raise ValueError(f"num_parallel_out must be >= 1, got {self.num_parallel_out}")
        if not _is_pow2(self.num_parallel_in):
            raise ValueError(
                f"num_parallel_in must be a power of two >= 1, got {self.num_parallel_in}"
            )


DEFAULT_PARALLELISM = ParallelismParams(8, 4)


@dataclass
class OpStats:
    """Running operation counters, threaded through matvec calls."""

    matvec_calls: int = 0
    mac_ops: int = 0

    def record(self, rows: int, cols: int, n_vectors: int = 1) -> None:
        self.matvec_calls += n_vectors
        self.mac_ops += rows * cols * n_vectors

    def reset(self) -> None:
        self.matvec_calls = 0
        self.mac_ops = 0


@dataclass(frozen=True)
class CostEstimate:
    mac_count: int
    estimated_cycles: int
    weight_buffer_elems: int


def _as_native(arr, mode):
    """Coerce to the mode's array representation.

    Fixed-point arrays are integer raws; handing real-valued floats to a
    fixed-mode op would truncate them silently, so that is rejected — convert
    with ``mode.from_real`` first.
    """
    a = np.asarray(arr)
    if a.dtype == mode.dtype:
        return a
    if mode.dtype == np.int64 and np.issubdtype(a.dtype, np.floating):
        raise TypeError(
            "fixed-point ops take raw integer arrays; use mode.from_real for real values"
        )
    return a.astype(mode.dtype)


def _tree_reduce(arr, mode):
    """Pairwise-reduce the last axis to width 1.

    Adjacent pairs are summed level by level; an odd trailing element passes
    through to the next level unchanged.
    """
    while arr.shape[-1] > 1:
        n = arr.shape[-1]
        pairs = n // 2
        nxt = mode.add(arr[..., 0 : 2 * pairs : 2], arr[..., 1 : 2 * pairs : 2])
        if n % 2:
            nxt = np.concatenate([nxt, arr[..., -1:]], axis=-1)
        arr = nxt
    return arr


def reduce_sum(partials, mode=_REAL):
    """Tree-sum a vector of partials (exact-arithmetic result = plain sum)."""
    arr = _as_native(partials, mode)
    if arr.ndim != 1:
        raise ShapeMismatchError(f"expected 1-D partials, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("reduce_sum of empty vector")
    return _tree_reduce(arr, mode)[0]


def _accumulate(products, p_in, mode):
    """Round-robin accumulation + tree over the last axis of ``products``.

    products[..., j] is the j-th elementwise product of a dot product; index
    j is dealt to accumulator j mod p_in, each accumulator folds its share in
    index order, and the p_in partials are tree-reduced.
    """
    n = products.shape[-1]
    chunks = -(-n // p_in)
    pad = chunks * p_in - n
    if pad:
        width = [(0, 0)] * (products.ndim - 1) + [(0, pad)]
        products = np.pad(products, width)  # zero lanes: additive identity
    grouped = products.reshape(products.shape[:-1] + (chunks, p_in))
    acc = mode.accumulate_chunks(grouped)
    return _tree_reduce(acc, mode)[..., 0]


def dot_product(x, w, p_in=1, mode=_REAL):
    """Dot product with ``p_in`` round-robin accumulators and a tree combine."""
    x = _as_native(x, mode)
    w = _as_native(w, mode)
    if x.ndim != 1 or w.ndim != 1 or x.shape != w.shape:
        raise ShapeMismatchError(f"dot_product shapes {x.shape} vs {w.shape}")
    if x.size == 0:
        raise ValueError("dot_product of empty vectors")
    if p_in < 1:
        raise ValueError(f"p_in must be >= 1, got {p_in}")
    return _accumulate(mode.mul(x, w), p_in, mode)


def matvec_cols(W, X, bias=None, p=DEFAULT_PARALLELISM, mode=_REAL, stats=None):
    """Apply the engine matvec to every column of ``X``.

    W is (M, N), X is (N, T); returns (M, T).  Column t of the result is
    bit-identical to ``matvec(W, X[:, t], ...)``.
    """
    W = _as_native(W, mode)
    X = _as_native(X, mode)
    if W.ndim != 2 or X.ndim != 2 or W.shape[1] != X.shape[0]:
        raise ShapeMismatchError(f"matvec shapes {W.shape} vs {X.shape}")
    M, N = W.shape
    T = X.shape[1]
    if bias is not None:
        bias = _as_native(bias, mode)
        if bias.shape != (M,):
            raise ShapeMismatchError(f"bias shape {bias.shape}, expected ({M},)")
    if stats is not None:
        stats.record(M, N, T)
    # products[r, t, j] = W[r, j] * X[j, t]; rows and columns are independent
    # lanes, so evaluating them together preserves each column's declared
    # MAC/tree order exactly.  For wide batches the mode may fold chunks as
    # it multiplies (bit-identical, but never materializes (M, T, N)).
    out = None
    if T >= 2:
        out = mode.fused_matvec_cols(W, X, p.num_parallel_in)
    if out is None:
        products = mode.mul(W[:, None, :], X.T[None, :, :])
        out = mode.exact_row_sum(products)
        if out is None:
            out = _accumulate(products, p.num_parallel_in, mode)
    if bias is not None:
        out = mode.add(out, bias[:, None])
    return out


def matvec(W, x, bias=None, p=DEFAULT_PARALLELISM, mode=_REAL, stats=None):
    """Engine matvec: W (M, N) times x (N,), plus optional bias."""
    x = _as_native(x, mode)
    if x.ndim != 1:
        raise ShapeMismatchError(f"expected 1-D input vector, got shape {x.shape}")
    return matvec_cols(W, x[:, None], bias, p, mode, stats)[:, 0]


def estimate_cycles(M: int, N: int, p: ParallelismParams) -> CostEstimate:
    """Cost model for an M×N matvec on the tiled datapath.

    cycles = ceil(M / p_out) × (ceil(N / p_in) + log2(p_in) + 1): per row
    chunk, one MAC round per accumulator depth, the reduction tree, and one
    output accumulate.  The weight buffer holds one row chunk: p_out × N.
    """
    if M < 1 or N < 1:
        raise ValueError(f"matrix dims must be >= 1, got {M}x{N}")
    p_out, p_in = p.num_parallel_out, p.num_parallel_in
    depth = p_in.bit_length() - 1
    cycles = math.ceil(M / p_out) * (math.ceil(N / p_in) + depth + 1)
    return CostEstimate(
        mac_count=M * N,
        estimated_cycles=cycles,
        weight_buffer_elems=p_out * N,
    )
