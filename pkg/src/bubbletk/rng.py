"""Counter-based sampling streams and the block execution helper.

Every Monte Carlo routine in this package draws from numpy's Philox bit
generator, one independent stream per fixed-size block of samples: block b of
seed s uses Generator(Philox(key=s).advance(b * 2**40)). Because the stream
depends only on (seed, block index), results are a deterministic function of
(inputs, samples, seed) no matter how blocks are scheduled across threads.

BUBBLETK_THREADS caps the thread pool that maps work over blocks. Block
results are always reduced in block order, so changing the thread count can
only change wall time, never output bits.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 32768
"""Samples per block. Fixed: it is part of the reproducibility contract."""

_ADVANCE_PER_BLOCK = 1 << 40


def block_generator(seed: int, block_index: int) -> np.random.Generator:
    """The Philox stream for one block of one seed."""
    bg = np.random.Philox(key=seed)
    bg.advance(block_index * _ADVANCE_PER_BLOCK)
    return np.random.Generator(bg)


def block_sizes(total: int) -> list[int]:
    """Block sizes covering `total` samples: all BLOCK except a short tail."""
    if total <= 0:
        raise ValueError("sample count must be positive")
    nb = (total + BLOCK - 1) // BLOCK
    sizes = [BLOCK] * nb
    sizes[-1] = total - BLOCK * (nb - 1)
    return sizes


def thread_count() -> int:
    try:
        t = int(os.environ.get("BUBBLETK_THREADS", "1"))
    except ValueError:
        t = 1
    return max(1, t)


def map_blocks(total, fn):
    """Run fn(block_index, block_size) over every block; results in block order.

    fn must be thread-safe and must derive all randomness from the block index
    (through block_generator), never from shared state.
    """
    sizes = block_sizes(total)
    threads = thread_count()
    if threads == 1 or len(sizes) == 1:
        return [fn(b, m) for b, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, b, m) for b, m in enumerate(sizes)]
        return [f.result() for f in futures]


def normal_block(seed: int, block_index: int, m: int, dim: int) -> np.ndarray:
    """(m, dim) standard normals for one block."""
    return block_generator(seed, block_index).standard_normal((m, dim))


def sphere_block(seed: int, block_index: int, m: int, dim: int) -> np.ndarray:
    """(m, dim) points uniform on the unit sphere S^{dim-1} in R^dim.

    dim = 1 degenerates correctly to uniform signs on S^0 = {-1, +1}.
    """
    g = normal_block(seed, block_index, m, dim)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g


def ball_block(seed: int, block_index: int, m: int, dim: int, radius: float) -> np.ndarray:
    """(m, dim) points uniform in the ball of `radius`.

    Draw order (normals, then radii) is fixed; do not reorder.
    """
    gen = block_generator(seed, block_index)
    u = gen.standard_normal((m, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * gen.random(m) ** (1.0 / dim)
    return u * r[:, None]
