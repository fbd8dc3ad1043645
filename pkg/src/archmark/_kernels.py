"""Flood-fill kernels.

The capped shortest-path flood is the pipeline's hot loop: it runs once per
seed peak for each of the twelve candidate thresholds.  Two interchangeable
implementations live here:

* a numba ``@njit`` Dijkstra with an array-backed binary heap (default);
* a pure-numpy fixed-point sweep (set ``ARCHMARK_NO_NUMBA=1``, or automatic
  when numba is unavailable).

Both compute the same fixed point: ``T[seed faces] = 0`` and
``T[i] = min(T_max, min_k(T[adj[i, k]] + cost[i, k]))``, and both observe
the spill stop: a face whose horizontal centroid is farther than
``spill_radius`` from the seed is recorded but not expanded.  Final ``T``
values are minima over per-path left-to-right sums, so the two paths agree
bit for bit.

``benchmarks/flood_fill_bench.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("ARCHMARK_NO_NUMBA", "").lower() not in (
    "1", "true", "yes")
if USE_NUMBA:
    try:
        import numba as nb
    except ImportError:    # pragma: no cover - exercised via env flag instead
        USE_NUMBA = False

_NJIT_KW = {"cache": True, "fastmath": False}


def _flood_py(adjacency: np.ndarray, cost: np.ndarray, seeds: np.ndarray,
              t_max: float, face_xy: np.ndarray, seed_xy: np.ndarray,
              spill_sq: float):
    """Fixed-point sweep flood (pure numpy).

    Each sweep relaxes every face against its three neighbours; iteration
    stops when no distance improves.  Faces beyond the spill radius never
    act as sources.
    """
    n = adjacency.shape[0]
    dist = np.full(n, t_max)
    dist[seeds] = 0.0

    d = face_xy - seed_xy
    far = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] > spill_sq

    has_nb = adjacency >= 0
    safe_adj = np.where(has_nb, adjacency, 0)
    while True:
        src = np.where(far, np.inf, dist)
        cand = np.where(has_nb, src[safe_adj] + cost, np.inf).min(axis=1)
        improved = cand < dist
        if not improved.any():
            break
        dist[improved] = cand[improved]
    spilled = bool((far & (dist < t_max)).any())
    return dist, spilled


def _flood_jit_impl(adjacency, cost, seeds, t_max, face_xy, seed_xy,
                    spill_sq):
    n = adjacency.shape[0]
    dist = np.full(n, t_max)

    cap = 3 * n + seeds.shape[0] + 1
    heap_key = np.empty(cap)
    heap_val = np.empty(cap, dtype=np.int64)
    size = 0
    for s in range(seeds.shape[0]):
        f = seeds[s]
        if dist[f] > 0.0:
            dist[f] = 0.0
            # sift up
            i = size
            heap_key[i] = 0.0
            heap_val[i] = f
            size += 1
            while i > 0:
                parent = (i - 1) >> 1
                if heap_key[parent] <= heap_key[i]:
                    break
                heap_key[parent], heap_key[i] = heap_key[i], heap_key[parent]
                heap_val[parent], heap_val[i] = heap_val[i], heap_val[parent]
                i = parent

    spilled = False
    while size > 0:
        d = heap_key[0]
        f = heap_val[0]
        size -= 1
        heap_key[0] = heap_key[size]
        heap_val[0] = heap_val[size]
        # sift down
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            small = left
            right = left + 1
            if right < size and heap_key[right] < heap_key[left]:
                small = right
            if heap_key[i] <= heap_key[small]:
                break
            heap_key[i], heap_key[small] = heap_key[small], heap_key[i]
            heap_val[i], heap_val[small] = heap_val[small], heap_val[i]
            i = small

        if d > dist[f]:
            continue            # stale entry
        dx = face_xy[f, 0] - seed_xy[0]
        dy = face_xy[f, 1] - seed_xy[1]
        if dx * dx + dy * dy > spill_sq:
            spilled = True      # member, but the flood stops here
            continue
        for k in range(3):
            j = adjacency[f, k]
            if j < 0:
                continue
            cand = d + cost[f, k]
            if cand < dist[j]:
                dist[j] = cand
                # push (cand, j)
                i = size
                heap_key[i] = cand
                heap_val[i] = j
                size += 1
                while i > 0:
                    parent = (i - 1) >> 1
                    if heap_key[parent] <= heap_key[i]:
                        break
                    heap_key[parent], heap_key[i] = \
                        heap_key[i], heap_key[parent]
                    heap_val[parent], heap_val[i] = \
                        heap_val[i], heap_val[parent]
                    i = parent
    return dist, spilled


if USE_NUMBA:
    _flood_jit = nb.njit(**_NJIT_KW)(_flood_jit_impl)
else:
    _flood_jit = None


def flood_kernel(adjacency: np.ndarray, cost: np.ndarray, seeds: np.ndarray,
                 t_max: float, face_xy: np.ndarray, seed_xy: np.ndarray,
                 spill_radius: float):
    """Run the flood from ``seeds`` and return ``(T, spilled)``.

    ``T`` is (F,) float64 with ``T < t_max`` marking members; ``spilled``
    reports whether any member lies beyond ``spill_radius`` (horizontal
    distance from the seed peak).
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    spill_sq = spill_radius * spill_radius if np.isfinite(spill_radius) \
        else np.inf
    if USE_NUMBA:
        return _flood_jit(adjacency, cost, seeds, float(t_max), face_xy,
                          seed_xy, spill_sq)
    return _flood_py(adjacency, cost, seeds, float(t_max), face_xy, seed_xy,
                     spill_sq)
