"""Independent reference implementations the tests compare against.

These are deliberately written with different machinery than the package
(heapq instead of the array heap, brute-force enumeration instead of the
dynamic program, dense sampling instead of closed-form roots) so agreement
is meaningful.
"""

from __future__ import annotations

import heapq

import numpy as np


# ---------------------------------------------------------------------------
# capped shortest-path flood

def flood_reference(adjacency: np.ndarray, cost: np.ndarray,
                    seeds: np.ndarray, t_max: float, face_xy: np.ndarray,
                    seed_xy: np.ndarray, spill_radius: float
                    ) -> tuple[np.ndarray, bool]:
    """Dijkstra with ``heapq``, capped at ``t_max``.

    Mirrors the flood contract: distances start at ``t_max``; faces whose
    centroid lies beyond ``spill_radius`` of the seed may receive a value
    but never relax their neighbours; ``spilled`` reports any such face
    finishing below the cap.  Path sums accumulate left to right so values
    are bitwise comparable with the kernel.
    """
    n = adjacency.shape[0]
    dist = np.full(n, float(t_max))
    spill_sq = spill_radius * spill_radius if np.isfinite(spill_radius) \
        else np.inf
    heap: list[tuple[float, int]] = []
    for f in np.asarray(seeds, dtype=np.int64):
        if dist[f] > 0.0:
            dist[f] = 0.0
            heapq.heappush(heap, (0.0, int(f)))

    spilled = False
    while heap:
        d, f = heapq.heappop(heap)
        if d > dist[f]:
            continue
        off = face_xy[f] - seed_xy
        if off[0] * off[0] + off[1] * off[1] > spill_sq:
            spilled = True
            continue
        for k in range(3):
            g = int(adjacency[f, k])
            if g < 0:
                continue
            cand = d + cost[f, k]
            if cand < dist[g]:
                dist[g] = cand
                heapq.heappush(heap, (cand, g))
    return dist, spilled


def random_face_graph(rng: np.random.Generator, n_faces: int,
                      zero_fraction: float = 0.25):
    """Random mesh-like graph: mutual 3-slot adjacency, symmetric costs.

    Free slots are paired at random; unpaired slots stay -1 (boundary).
    A fraction of edge costs is exactly zero to exercise equal-key heap
    behaviour.
    """
    adjacency = np.full((n_faces, 3), -1, dtype=np.int64)
    cost = np.zeros((n_faces, 3))
    stubs = [(f, k) for f in range(n_faces) for k in range(3)]
    rng.shuffle(stubs)
    while len(stubs) >= 2:
        fa, ka = stubs.pop()
        fb, kb = stubs.pop()
        if fa == fb:
            continue
        c = 0.0 if rng.random() < zero_fraction \
            else float(rng.exponential(0.25))
        adjacency[fa, ka], adjacency[fb, kb] = fb, fa
        cost[fa, ka] = cost[fb, kb] = c
    face_xy = rng.uniform(0.0, 40.0, size=(n_faces, 2))
    return adjacency, cost, face_xy


# ---------------------------------------------------------------------------
# exhaustive assignment enumeration

def _conflicting(types, u: int, v: int) -> bool:
    a, b = types[u], types[v]
    if a.molar_id is None or a.molar_id != b.molar_id:
        return False
    return "whole" in (a.role, b.role) and a.role != b.role


def enumerate_assignment(C: np.ndarray, types, priors: np.ndarray,
                         fussiness: float):
    """Try every feasible solution; return the best.

    Feasible: each blob is matched to a type or skipped, matched type
    indices strictly increase with blob index, and consecutively matched
    types at adjacent table slots must not be a whole molar with one of
    its halves.  Objectives are evaluated in canonical order (assignment
    costs by blob index, then missing charges by type index).  Ties fall
    to the lexicographically smallest flattened assignment matrix.

    Returns ``(objective, pairs, D, NT, MI)``.
    """
    m, n = C.shape
    miss_cost = fussiness * np.asarray(priors, dtype=np.float64)
    best = None

    def evaluate(pairs):
        chosen = set(pairs)
        matched_types = {j for _, j in pairs}
        obj = 0.0
        for i, j in sorted(pairs):
            obj += C[i, j]
        for j in range(n):
            if j not in matched_types:
                obj += miss_cost[j]
        flat = tuple((i, j) in chosen for i in range(m) for j in range(n))
        return obj, flat

    stack_pairs: list[tuple[int, int]] = []

    def recurse(i: int, last_j: int):
        nonlocal best
        if i == m:
            obj, flat = evaluate(stack_pairs)
            if best is None or (obj, flat) < (best[0], best[1]):
                best = (obj, flat, list(stack_pairs))
            return
        recurse(i + 1, last_j)
        for t in range(last_j + 1, n):
            if t == last_j + 1 and last_j >= 0 \
                    and _conflicting(types, last_j, t):
                continue
            stack_pairs.append((i, t))
            recurse(i + 1, t)
            stack_pairs.pop()

    recurse(0, -1)
    obj, flat, pairs = best
    D = np.array(flat, dtype=bool).reshape(m, n)
    NT = ~D.any(axis=1)
    MI = ~D.any(axis=0)
    return obj, pairs, D, NT, MI


# ---------------------------------------------------------------------------
# nearest point on a parabola by dense sampling

def project_reference(curve, point: np.ndarray, lo: float = -60.0,
                      hi: float = 60.0) -> float:
    """Arg-min of distance to ``(s, curve.y(s))`` by shrinking grid search."""
    px, py = float(point[0]), float(point[1])
    centre, span = (lo + hi) / 2.0, (hi - lo) / 2.0
    for _ in range(40):
        s = np.linspace(centre - span, centre + span, 81)
        d2 = (s - px) ** 2 + (curve.y(s) - py) ** 2
        centre = float(s[np.argmin(d2)])
        span /= 10.0
        if span < 1e-13:
            break
    return centre
