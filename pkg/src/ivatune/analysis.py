"""Quantitative analysis over observation logs.

Reproduces the study pipeline on any dataset: per-session Pareto extraction,
pairwise Pearson correlations between the three objectives (on their native
scales), per-iteration value progression, and summary statistics of the
design parameters on the Pareto front.
"""

from __future__ import annotations

import enum

import numpy as np

from .design_space import ObjectiveVector, to_canonical
from .errors import InsufficientDataError, UndefinedCorrelationError, ValidationError
from .pareto import pareto_filter
from .persistence import SessionLog
from .session import Condition

OBJECTIVE_NAMES = ("mental_demand", "predictability", "usefulness")
PARAMETER_NAMES = ("p1", "p2", "p3", "p4")


class Scope(enum.Enum):
    """Which observations feed a correlation matrix."""

    ALL_PARETO = "all_pareto"
    ALL_OBSERVATIONS = "all_observations"
    TRAINED_PARETO = "trained_pareto"   # condition 1
    FIXED_PARETO = "fixed_pareto"       # condition 2


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson expects two equal-length 1-D sequences")
    if len(x) < 2:
        raise InsufficientDataError("pearson needs at least 2 pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.sum(dx * dx))
    syy = float(np.sum(dy * dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: a variable has zero variance")
    r = float(np.sum(dx * dy) / np.sqrt(sxx * syy))
    return max(-1.0, min(1.0, r))


def _session_canonical(log: SessionLog) -> np.ndarray:
    return np.array([
        to_canonical(ObjectiveVector(r.mental_demand, r.predictability, r.usefulness)).as_array()
        for r in log.records
    ])


def session_front_indices(log: SessionLog) -> np.ndarray:
    """Indices of this session's Pareto-optimal observations."""
    return pareto_filter(_session_canonical(log))


def _objective_rows(dataset: list[SessionLog], scope: Scope) -> np.ndarray:
    rows = []
    for log in dataset:
        if scope is Scope.TRAINED_PARETO and log.condition is not Condition.TRAINED_LOA:
            continue
        if scope is Scope.FIXED_PARETO and log.condition is not Condition.FIXED_LOA:
            continue
        if scope is Scope.ALL_OBSERVATIONS:
            picked = range(len(log.records))
        else:
            picked = session_front_indices(log)
        for i in picked:
            r = log.records[i]
            rows.append((r.mental_demand, r.predictability, r.usefulness))
    return np.array(rows)


def correlation_matrix(dataset: list[SessionLog], scope: Scope) -> np.ndarray:
    """3x3 Pearson matrix over (mental demand, predictability, usefulness).

    Pareto scopes pool each session's own front members; the observation
    scope pools every rated iteration.
    """
    rows = _objective_rows(dataset, scope)
    if rows.size == 0:
        raise InsufficientDataError(f"no observations in scope {scope.value}")
    mat = np.eye(3)
    for i in range(3):
        for j in range(i + 1, 3):
            mat[i, j] = mat[j, i] = pearson(rows[:, i], rows[:, j])
    return mat


def progression_means(dataset: list[SessionLog], condition: Condition) -> dict:
    """Per-iteration objective means for one condition.

    The cohort is restricted to sessions contributing at least one point to
    the condition-level Pareto front (pooled across the condition's
    observations).
    """
    logs = [log for log in dataset if log.condition is condition]
    if not logs:
        raise InsufficientDataError(f"no sessions for condition {condition.value}")

    pooled = []
    owners = []
    for log in logs:
        for row in _session_canonical(log):
            pooled.append(row)
            owners.append(log.session_id)
    front = pareto_filter(np.array(pooled))
    qualifying = {owners[i] for i in front}
    cohort = [log for log in logs if log.session_id in qualifying]

    n_iters = max(len(log.records) for log in cohort)
    means = np.full((n_iters, 3), np.nan)
    for it in range(1, n_iters + 1):
        vals = [(log.records[it - 1].mental_demand,
                 log.records[it - 1].predictability,
                 log.records[it - 1].usefulness)
                for log in cohort if len(log.records) >= it]
        means[it - 1] = np.mean(np.array(vals), axis=0)
    return {
        "condition": condition.value,
        "sessions": sorted(qualifying),
        "iterations": list(range(1, n_iters + 1)),
        "mental_demand": means[:, 0].tolist(),
        "predictability": means[:, 1].tolist(),
        "usefulness": means[:, 2].tolist(),
    }


def _summary(values: np.ndarray) -> dict:
    # Sample SD (matching common statistics software); a single point has
    # no spread, so report 0 rather than NaN.
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    q25, q75 = np.quantile(values, [0.25, 0.75])  # linear (type-7) quantiles
    return {
        "mean": float(np.mean(values)),
        "median": float(np.median(values)),
        "sd": sd,
        "iqr": float(q75 - q25),
        "min": float(np.min(values)),
        "max": float(np.max(values)),
    }


def parameter_summary(dataset: list[SessionLog], condition: Condition) -> dict:
    """Summary statistics of design parameters over Pareto-front designs.

    Pools each session's front members within the condition. The LoA
    parameter is omitted for the fixed condition, where it was never
    optimized.
    """
    logs = [log for log in dataset if log.condition is condition]
    designs = []
    for log in logs:
        for i in session_front_indices(log):
            r = log.records[i]
            designs.append((r.p1, r.p2, r.p3, r.p4))
    if not designs:
        raise InsufficientDataError(f"no Pareto-front designs for condition {condition.value}")
    arr = np.array(designs)
    params = PARAMETER_NAMES[:3] if condition is Condition.FIXED_LOA else PARAMETER_NAMES
    return {name: _summary(arr[:, k]) for k, name in enumerate(params)}
