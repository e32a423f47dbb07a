"""Numba kernels for the Monte Carlo acquisition hot loop.

These mirror the semantics of :mod:`ivatune.pareto` (maximize space, boxes
anchored at the reference point) in nopython form. The public Python
implementations stay the readable reference; tests cross-check the two.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _hv3d(pts, ref):
    # Union volume of boxes [ref, p]; points not strictly above ref in x/y
    # are skipped inside the staircase, points below in z shrink to nothing.
    n = pts.shape[0]
    if n == 0:
        return 0.0
    order = np.argsort(-pts[:, 2])
    zs = pts[order, 2]
    vol = 0.0
    for k in range(n):
        z_hi = zs[k]
        if k + 1 < n:
            z_lo = zs[k + 1]
        else:
            z_lo = ref[2]
        if z_lo < ref[2]:
            z_lo = ref[2]
        if z_hi <= z_lo:
            continue
        ax = np.empty(k + 1)
        ay = np.empty(k + 1)
        m = 0
        for j in range(k + 1):
            p = pts[order[j]]
            if p[0] > ref[0] and p[1] > ref[1]:
                ax[m] = p[0]
                ay[m] = p[1]
                m += 1
        if m == 0:
            continue
        idx = np.argsort(-ax[:m])
        ymax = ref[1]
        area = 0.0
        for j in range(m):
            x = ax[idx[j]]
            if j + 1 < m:
                x_next = ax[idx[j + 1]]
            else:
                x_next = ref[0]
            y = ay[idx[j]]
            if y > ymax:
                ymax = y
            if x > x_next:
                area += (x - x_next) * (ymax - ref[1])
        vol += area * (z_hi - z_lo)
    return vol


@njit(cache=True)
def _exclusive_volume(y, front, ref):
    # HV(front + y) - HV(front) = box(y) minus the covered part, which is the
    # union of component-wise minima min(y, p).
    if y[0] <= ref[0] or y[1] <= ref[1] or y[2] <= ref[2]:
        return 0.0
    box = (y[0] - ref[0]) * (y[1] - ref[1]) * (y[2] - ref[2])
    m = front.shape[0]
    if m == 0:
        return box
    clipped = np.empty((m, 3))
    c = 0
    for i in range(m):
        a = min(y[0], front[i, 0])
        b = min(y[1], front[i, 1])
        d = min(y[2], front[i, 2])
        if a > ref[0] and b > ref[1] and d > ref[2]:
            clipped[c, 0] = a
            clipped[c, 1] = b
            clipped[c, 2] = d
            c += 1
    if c == 0:
        return box
    return box - _hv3d(clipped[:c], ref)


@njit(cache=True)
def _sample_front(values, ref):
    # Non-dominated points among `values` that strictly dominate ref.
    n = values.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if values[i, 0] <= ref[0] or values[i, 1] <= ref[1] or values[i, 2] <= ref[2]:
            keep[i] = False
    for i in range(n):
        if not keep[i]:
            continue
        for j in range(n):
            if i == j or not keep[j]:
                continue
            ge = True
            gt = False
            for k in range(3):
                if values[j, k] < values[i, k]:
                    ge = False
                    break
                if values[j, k] > values[i, k]:
                    gt = True
            if ge and gt:
                keep[i] = False
                break
    cnt = 0
    for i in range(n):
        if keep[i]:
            cnt += 1
    front = np.empty((cnt, 3))
    c = 0
    for i in range(n):
        if keep[i]:
            front[c] = values[i]
            c += 1
    return front


@njit(cache=True, parallel=True)
def qnehvi_accumulate(F, Y, ref):
    """Per-candidate mean hypervolume improvement over posterior samples.

    F: (S, n, 3) joint draws at the observed inputs; Y: (S, C, 3) jointly
    drawn candidate values; returns (C,) means. Each (sample, candidate)
    cell is written exactly once, so the reduction order is deterministic
    regardless of thread count.
    """
    S = F.shape[0]
    C = Y.shape[1]
    acc = np.zeros((S, C))
    for s in prange(S):
        front = _sample_front(F[s], ref)
        for j in range(C):
            acc[s, j] = _exclusive_volume(Y[s, j], front, ref)
    out = np.zeros(C)
    for s in range(S):
        for j in range(C):
            out[j] += acc[s, j]
    return out / S
