"""Non-dominance filtering and exact hypervolume in canonical maximize space.

All functions assume *maximization* in every coordinate. Hypervolume is the
Lebesgue measure of the union of axis-aligned boxes spanned between the
reference point and each front point, computed exactly: a sorted staircase in
2-D and a dimension sweep (one slab per distinct third coordinate, 2-D
staircase per slab) in 3-D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InsufficientDataError, ValidationError


@dataclass(frozen=True)
class ParetoFront:
    """A non-dominated subset of observed canonical objective vectors.

    ``members`` are indices into whatever sequence the points came from
    (observation order for sessions), so callers can map front points back to
    the designs and ratings that produced them.
    """

    points: np.ndarray
    members: tuple[int, ...]
    reference_point: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        ref = np.asarray(self.reference_point, dtype=float)
        keep = pareto_filter(pts)
        if len(keep) != pts.shape[0]:
            raise ValidationError("front contains dominated points")
        if pts.shape[0] and not np.all(pts > ref[None, :]):
            raise ValidationError("every front point must strictly dominate the reference point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "reference_point", ref)
        object.__setattr__(self, "members", tuple(int(i) for i in self.members))

    def hypervolume(self) -> float:
        return hypervolume(self.points, self.reference_point)


def pareto_filter(points) -> np.ndarray:
    """Indices of non-dominated points (maximize; duplicates all retained).

    A point is dominated if some other point is >= in every coordinate and
    > in at least one. Exact duplicates never dominate each other, so every
    copy of a retained point is kept.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.all(np.isfinite(P)):
        raise ValidationError("points must have finite coordinates")
    n = P.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        ge = np.all(P >= P[i], axis=1)
        gt = np.any(P > P[i], axis=1)
        if np.any(ge & gt):
            keep[i] = False
    return np.flatnonzero(keep)


def _staircase_area(xy: np.ndarray, ref: np.ndarray) -> float:
    # Union area of boxes [ref, p] for 2-D points, all strictly above ref.
    order = np.argsort(-xy[:, 0], kind="stable")
    area = 0.0
    ymax = ref[1]
    pts = xy[order]
    for j in range(len(pts)):
        x = pts[j, 0]
        x_next = pts[j + 1, 0] if j + 1 < len(pts) else ref[0]
        ymax = max(ymax, pts[j, 1])
        if x > x_next:
            area += (x - x_next) * (ymax - ref[1])
    return area


def hypervolume(front, ref) -> float:
    """Exact hypervolume of a 2-D or 3-D front w.r.t. a reference point.

    Every point must strictly dominate ``ref``; dominated points in the
    input are filtered internally and do not change the result.
    """
    P = np.atleast_2d(np.asarray(front, dtype=float))
    ref = np.asarray(ref, dtype=float)
    if P.size == 0:
        return 0.0
    d = P.shape[1]
    if d not in (2, 3) or ref.shape != (d,):
        raise ValidationError(f"hypervolume supports 2 or 3 objectives, got shape {P.shape}")
    if not np.all(P > ref[None, :]):
        raise ContractViolationError("every front point must strictly dominate the reference point")
    P = P[pareto_filter(P)]
    if d == 2:
        return _staircase_area(P, ref)

    # Dimension sweep on the third coordinate: between consecutive distinct
    # z-values, the dominated cross-section is the staircase union of all
    # points reaching at least that high.
    z_sorted = np.unique(P[:, 2])[::-1]
    vol = 0.0
    for k, z_hi in enumerate(z_sorted):
        z_lo = z_sorted[k + 1] if k + 1 < len(z_sorted) else ref[2]
        active = P[P[:, 2] >= z_hi][:, :2]
        vol += _staircase_area(active, ref[:2]) * (z_hi - z_lo)
    return vol


def hv_contribution(front, ref, candidate) -> float:
    """Hypervolume gained by adding ``candidate`` to ``front``.

    Computed as the exclusive volume box(candidate) minus the part already
    covered by the front (the union of component-wise minima), which equals
    HV(front + candidate) - HV(front). A candidate that fails to dominate
    the reference point contributes nothing.
    """
    ref = np.asarray(ref, dtype=float)
    y = np.asarray(candidate, dtype=float)
    P = np.atleast_2d(np.asarray(front, dtype=float)) if np.size(front) else np.empty((0, len(ref)))
    if P.shape[0] and not np.all(P > ref[None, :]):
        raise ContractViolationError("every front point must strictly dominate the reference point")
    if not np.all(y > ref):
        return 0.0
    box = float(np.prod(y - ref))
    if P.shape[0] == 0:
        return box
    clipped = np.minimum(P, y[None, :])
    clipped = clipped[np.all(clipped > ref[None, :], axis=1)]
    if clipped.shape[0] == 0:
        return box
    return box - hypervolume(clipped, ref)


def reference_point(points, offset: float = 0.1) -> np.ndarray:
    """Worst-corner-with-offset reference for a set of canonical vectors.

    Per coordinate: max(0, min - offset * (max - min)), clamped into the
    canonical box. When that would collide with the observed minimum (zero
    range, or a minimum at 0), the reference is dropped slightly below the
    minimum instead so every observed point keeps a strictly positive
    dominated volume.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] == 0:
        raise InsufficientDataError("reference point needs at least one observation")
    lo = P.min(axis=0)
    hi = P.max(axis=0)
    ref = np.maximum(0.0, lo - offset * (hi - lo))
    collide = ref >= lo
    ref[collide] = lo[collide] - 0.01
    return ref
