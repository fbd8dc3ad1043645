"""The dental arch: a weighted quadratic in the frame's horizontal plane.

``y = a x^2 + b x + c`` with x along ``right`` and y along ``forwards``; a
well-formed arch has ``a < 0`` (opens backwards).  Positions *along* the
arch are parameterised by ``s``: the x coordinate of the nearest curve
point, which is monotone along the arch and cheap to compare.

Directions at a point (all unit 2-vectors in the horizontal plane, lifted
to 3-D with ``Frame.lift`` when needed):

* ``distal``  (towards the back teeth): ``-[1, m]`` normalised when the
  local slope ``m = dy/dx`` is >= 0, ``+[1, m]`` otherwise;
* ``mesial``: opposite of distal;
* ``buccal`` (outwards, towards lips/cheeks): the curve normal with
  positive y component, ``[-m, 1]`` normalised;
* ``lingual``: opposite of buccal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArchFitError


@dataclass
class ArchCurve:
    a: float
    b: float
    c: float

    def y(self, x):
        return (self.a * x + self.b) * x + self.c

    def slope(self, x):
        return 2.0 * self.a * x + self.b


def fit_quadratic(points: np.ndarray,
                  weights: np.ndarray | None = None) -> ArchCurve:
    """Weighted least-squares quadratic through horizontal ``points``.

    Parameters
    ----------
    points : (N, 2) array of (x, y) frame-horizontal coordinates, N >= 3.
    weights : optional (N,) non-negative weights on squared residuals.

    Raises
    ------
    ArchFitError
        For fewer than 3 points or a rank-deficient system (e.g. all x
        equal).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ArchFitError(
            f"arch fit needs at least 3 horizontal points, got {pts.shape}")
    x, y = pts[:, 0], pts[:, 1]
    design = np.stack([x * x, x, np.ones_like(x)], axis=1)
    if weights is not None:
        sw = np.sqrt(np.asarray(weights, dtype=np.float64))
        design = design * sw[:, None]
        y = y * sw
    coeff, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise ArchFitError("arch fit is rank deficient "
                           "(points nearly collinear in x)")
    return ArchCurve(a=float(coeff[0]), b=float(coeff[1]), c=float(coeff[2]))


def _real_cubic_roots(a3: float, a2: float, a1, a0):
    """Real roots of ``a3 x^3 + a2 x^2 + a1 x + a0`` (a3, a2 scalar;
    a1, a0 arrays), returned as (N, 3) with NaN padding.

    Closed-form (Cardano / trigonometric for the three-real-root case);
    inputs here always have a3 != 0.
    """
    a1 = np.asarray(a1, dtype=np.float64)
    a0 = np.asarray(a0, dtype=np.float64)
    n = a1.shape[0]
    b = a2 / a3
    p = a1 / a3 - b * b / 3.0
    q = a0 / a3 - a1 / a3 * b / 3.0 + 2.0 * b ** 3 / 27.0
    shift = -b / 3.0

    roots = np.full((n, 3), np.nan)
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    one = disc > 0          # single real root
    if one.any():
        sq = np.sqrt(disc[one])
        u = np.cbrt(-q[one] / 2.0 + sq)
        v = np.cbrt(-q[one] / 2.0 - sq)
        roots[one, 0] = u + v + shift

    three = ~one            # three real roots (possibly repeated)
    if three.any():
        pt = p[three]
        qt = q[three]
        # p == 0 with disc <= 0 implies q == 0: triple root at the shift.
        safe_p = np.where(pt < 0, pt, -np.finfo(float).tiny)
        m = 2.0 * np.sqrt(-safe_p / 3.0)
        arg = np.clip(3.0 * qt / (safe_p * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        for k in range(3):
            roots[three, k] = m * np.cos(theta - 2.0 * np.pi * k / 3.0) \
                + shift
    return roots


def project_onto(curve: ArchCurve, points: np.ndarray) -> np.ndarray:
    """``s`` (nearest-point x) for each horizontal point.

    The squared distance to the parabola is quartic in x; its stationary
    points solve a cubic that is evaluated in closed form, and the candidate
    with the smallest distance wins (smallest x on an exact tie).
    Accepts (2,) or (N, 2); returns a scalar array shape () or (N,).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    px, py = pts[:, 0], pts[:, 1]
    a, b, c = curve.a, curve.b, curve.c

    if a == 0.0:
        # Straight line: the quartic degenerates, projection is linear.
        s = (px + b * (py - c)) / (1.0 + b * b)
        return s.reshape(np.shape(points)[:-1])

    a3 = 2.0 * a * a
    a2 = 3.0 * a * b
    a1 = 2.0 * a * (c - py) + b * b + 1.0
    a0 = b * (c - py) - px
    roots = _real_cubic_roots(a3, a2, a1, a0)

    dy = (a * roots + b) * roots + c - py[:, None]
    dist = (roots - px[:, None]) ** 2 + dy * dy
    dist = np.where(np.isnan(roots), np.inf, dist)
    # Tie-break on the smaller root: order candidates ascending per row and
    # let argmin take the first minimum.
    order = np.argsort(roots, axis=1)
    rows = np.arange(pts.shape[0])[:, None]
    roots_sorted = roots[rows, order]
    dist_sorted = dist[rows, order]
    s = roots_sorted[np.arange(pts.shape[0]), np.argmin(dist_sorted, axis=1)]
    return s.reshape(np.shape(points)[:-1])


def order_by_arch(curve: ArchCurve, points: np.ndarray) -> np.ndarray:
    """Stable permutation sorting ``points`` by their ``s`` along the arch."""
    s = np.atleast_1d(project_onto(curve, points))
    return np.argsort(s, kind="stable")


_KINDS = ("distal", "mesial", "buccal", "lingual")


def direction_at(curve: ArchCurve, point: np.ndarray, kind: str) -> np.ndarray:
    """Unit horizontal direction of ``kind`` at ``point``'s arch projection."""
    if kind not in _KINDS:
        raise ValueError(f"direction kind must be one of {_KINDS}")
    s = float(project_onto(curve, np.asarray(point, dtype=np.float64)))
    m = curve.slope(s)
    norm = np.hypot(1.0, m)
    if kind in ("distal", "mesial"):
        d = np.array([1.0, m]) / norm
        if m >= 0:
            d = -d
        return d if kind == "distal" else -d
    d = np.array([-m, 1.0]) / norm
    return d if kind == "buccal" else -d
