"""Shared numerical helpers: golden-section search and chunked RNG streams."""
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

#: Fixed Monte Carlo chunk length. Results depend on it, never on worker count.
CHUNK_SIZE = 8192


def golden_section_min(f, a, b, tol=1e-6):
    """Minimise a unimodal scalar function on ``[a, b]``.

    Returns ``(x_min, f(x_min))`` once the bracket is narrower than ``tol``.
    """
    a, b = float(min(a, b)), float(max(a, b))
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def max_workers():
    """Thread cap from ``GOCC_LAB_THREADS`` (default 1)."""
    raw = os.environ.get("GOCC_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunk_rng(seed, chunk, stream=0):
    """Generator for one chunk, keyed on ``(seed, stream, chunk)`` only."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(ss))


def chunk_bounds(n, size=CHUNK_SIZE):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def map_chunks(fn, n, seed, stream=0, size=CHUNK_SIZE):
    """Apply ``fn(rng, count)`` to every chunk and return results in chunk order."""
    jobs = [(chunk_rng(seed, k, stream), hi - lo)
            for k, (lo, hi) in enumerate(chunk_bounds(n, size))]
    workers = min(max_workers(), len(jobs))
    if workers <= 1:
        return [fn(rng, count) for rng, count in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
