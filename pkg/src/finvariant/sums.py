"""Deterministic compensated summation for float-mode entropies.

All float pattern-space sums run over a canonical order (pattern index
order) in fixed-size blocks: each block is reduced on its own and the block
partials are combined with math.fsum, which is exactly rounded.  The global
error is therefore bounded by the in-block error alone -- a constant number
of ulps independent of the term count -- and the result is bit-identical
whether the blocks are computed serially or concurrently, since the
combining order is the block order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 1 << 16


def neg_plogp(block: np.ndarray) -> float:
    """Sum of -p*log(p) over one block, 0*log(0) := 0."""
    positive = block[block > 0.0]
    if positive.size == 0:
        return 0.0
    return -float(np.dot(positive, np.log(positive)))


def entropy_nats(probs: np.ndarray) -> float:
    """Entropy of a probability vector, blocked and exactly combined."""
    flat = np.ascontiguousarray(probs).reshape(-1)
    partials = [neg_plogp(flat[i : i + BLOCK]) for i in range(0, flat.size, BLOCK)]
    return math.fsum(partials)


def fsum_pairs(values) -> float:
    """Exactly rounded sum of a (small) iterable of floats."""
    return math.fsum(values)


def combine_blocks(partial_fn, n_blocks: int, threads: int = 1) -> float:
    """Evaluate ``partial_fn(i)`` for each block index and fsum in index order.

    With threads > 1 the blocks are computed concurrently but the reduction
    order never changes, so the result is bit-identical to the serial run.
    """
    if threads <= 1 or n_blocks <= 1:
        return math.fsum(partial_fn(i) for i in range(n_blocks))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        partials = list(pool.map(partial_fn, range(n_blocks)))
    return math.fsum(partials)
