"""Quality measures over bi-objective solution sets (minimization).

All functions take ``points`` as an array-like of (z1, z2) rows.  Only the
two-dimensional case is supported; that is all the comparison protocol
needs.  ``hypervolume`` follows the standard larger-is-better definition;
``hypervolume_complement`` reports the undominated remainder of the
reference box for consumers that rank the other way round.
"""

from __future__ import annotations

import numpy as np


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an array of (z1, z2) rows")
    return arr


def _staircase(points: np.ndarray) -> np.ndarray:
    """Non-dominated staircase sorted by z1 ascending (minimization)."""
    order = np.lexsort((points[:, 1], points[:, 0]))
    stairs: list[np.ndarray] = []
    for p in points[order]:
        if not stairs:
            stairs.append(p)
        elif p[1] < stairs[-1][1]:
            if p[0] == stairs[-1][0]:
                stairs[-1] = p
            else:
                stairs.append(p)
    return np.array(stairs)


def hypervolume(points, reference) -> float:
    """Area weakly dominated by ``points`` inside the reference box.

    Points not strictly better than the reference in both coordinates are
    ignored; an empty (remaining) set has hypervolume 0.
    """
    pts = _as_points(points)
    ref = np.asarray(reference, dtype=float)
    pts = pts[np.all(pts <= ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    stairs = _staircase(pts)
    z1 = np.append(stairs[:, 0], ref[0])
    return float(np.sum((z1[1:] - z1[:-1]) * (ref[1] - stairs[:, 1])))


def hypervolume_complement(points, reference) -> float:
    """Area of the box [0, reference] not dominated by the set.

    Lower is better under this convention; for non-negative objectives it
    is exactly box area minus ``hypervolume``.
    """
    ref = np.asarray(reference, dtype=float)
    return float(np.prod(ref)) - hypervolume(points, reference)


def area_trapezoid(points) -> float:
    """Trapezoidal-rule area under the point sequence sorted by z1."""
    pts = _as_points(points)
    if len(pts) < 2:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    widths = pts[1:, 0] - pts[:-1, 0]
    heights = 0.5 * (pts[1:, 1] + pts[:-1, 1])
    return float(np.sum(widths * heights))


def average_distance(points, utopia) -> float:
    """Mean Euclidean distance from each point to the utopia point."""
    pts = _as_points(points)
    if len(pts) == 0:
        raise ValueError("average_distance needs at least one point")
    utopia = np.asarray(utopia, dtype=float)
    return float(np.mean(np.linalg.norm(pts - utopia, axis=1)))


def generational_distance(points, true_front) -> float:
    """Mean distance from each point to its nearest true-front sample."""
    pts = _as_points(points)
    front = _as_points(true_front)
    if len(pts) == 0 or len(front) == 0:
        raise ValueError("generational_distance needs non-empty inputs")
    diffs = pts[:, None, :] - front[None, :, :]
    nearest = np.sqrt(np.sum(diffs**2, axis=2)).min(axis=1)
    return float(np.mean(nearest))
