"""Deterministic chunked Monte-Carlo execution.

Samples are cut into fixed-size chunks, each with its own generator spawned
from the master seed, so results depend only on (seed, samples, chunk) and
never on how many workers ran them.  Worker count comes from the
``BKKLAB_WORKERS`` environment variable (default 1).
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 15
ENV_WORKERS = "BKKLAB_WORKERS"


def worker_count():
    try:
        return max(1, int(os.environ.get(ENV_WORKERS, "1")))
    except ValueError:
        return 1


def chunk_sizes(total, chunk=CHUNK):
    full, rest = divmod(int(total), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, total, seed, chunk=CHUNK):
    """Run ``fn(rng, size)`` over the chunks of ``total`` samples, in order."""
    sizes = chunk_sizes(total, chunk)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(np.random.default_rng(s), n) for s, n in zip(seeds, sizes)]
    nw = worker_count()
    if nw == 1 or len(jobs) == 1:
        return [fn(r, n) for r, n in jobs]
    with ThreadPoolExecutor(nw) as ex:
        return list(ex.map(lambda job: fn(*job), jobs))


def map_blocks(fn, items, block):
    """Apply ``fn`` to consecutive slices of ``items``; results in order."""
    parts = [items[i:i + block] for i in range(0, len(items), block)]
    nw = worker_count()
    if nw == 1 or len(parts) == 1:
        return [fn(p) for p in parts]
    with ThreadPoolExecutor(nw) as ex:
        return list(ex.map(fn, parts))
