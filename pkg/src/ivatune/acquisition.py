"""Monte Carlo noisy expected hypervolume improvement for one-at-a-time HITL.

Each optimization iteration scores a sweep of scrambled-Sobol candidate
designs under the current GP posterior. For every Monte Carlo sample the
objective values at all observed inputs *and* at the candidate are drawn
jointly; the candidate's score is the hypervolume its sampled value adds to
the sampled front, averaged over samples. Base normal draws are shared
across candidates (common random numbers), so the candidate ranking is a
deterministic function of the observations and the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import qmc

from . import _native
from .design_space import DesignPoint, snap_loa
from .errors import InsufficientDataError, ValidationError
from .gp import _chol_with_jitter
from .pareto import reference_point

N_OBJECTIVES = 3


@dataclass(frozen=True)
class AcquisitionConfig:
    """Monte Carlo and candidate-sweep sizes (defaults follow the study setup)."""

    n_mc_samples: int = 512
    n_candidates: int = 1024
    batch_size: int = 1
    seed: int = 3

    def __post_init__(self):
        if self.n_mc_samples < 1:
            raise ValidationError(f"n_mc_samples must be >= 1, got {self.n_mc_samples}")
        if self.n_candidates < 1:
            raise ValidationError(f"n_candidates must be >= 1, got {self.n_candidates}")
        if self.batch_size != 1:
            raise ValidationError("only batch_size=1 is supported (one design per iteration)")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class JointPosterior:
    """Per-objective joint posterior over observed inputs plus candidates.

    Stored in the factored form the sampler needs: ``mean_obs``/``chol_obs``
    describe the observed block, ``mean_cand``, ``cross`` (the whitened
    cross-covariance, shape (n_obs, C)) and ``cond_sd`` give each candidate's
    conditional law given the observed draw. Tests may hand-construct
    degenerate instances (zero covariance) to pin the posterior exactly.
    """

    mean_obs: np.ndarray   # (n_obj, n)
    chol_obs: np.ndarray   # (n_obj, n, n)
    mean_cand: np.ndarray  # (n_obj, C)
    cross: np.ndarray      # (n_obj, n, C)
    cond_sd: np.ndarray    # (n_obj, C)

    @property
    def n_obs(self) -> int:
        return self.mean_obs.shape[1]

    @property
    def n_candidates(self) -> int:
        return self.mean_cand.shape[1]


def joint_posterior(gps, observed_inputs, candidates) -> JointPosterior:
    """Factor the GP posterior over observed inputs and candidate points."""
    X = np.atleast_2d(np.asarray(observed_inputs, dtype=float))
    C = np.atleast_2d(np.asarray(candidates, dtype=float))
    n, c = X.shape[0], C.shape[0]
    if len(gps) != N_OBJECTIVES:
        raise ValidationError(f"expected {N_OBJECTIVES} objective GPs, got {len(gps)}")

    mean_obs = np.empty((N_OBJECTIVES, n))
    chol_obs = np.empty((N_OBJECTIVES, n, n))
    mean_cand = np.empty((N_OBJECTIVES, c))
    cross = np.empty((N_OBJECTIVES, n, c))
    cond_sd = np.empty((N_OBJECTIVES, c))
    for k, gp in enumerate(gps):
        mu_x, cov_xx, mu_c, cross_xc, var_c = gp.posterior_blocks(X, C)
        mean_obs[k] = mu_x
        mean_cand[k] = mu_c
        L, _ = _chol_with_jitter(cov_xx)
        chol_obs[k] = L
        W = solve_triangular(L, cross_xc, lower=True)
        cross[k] = W
        cond_var = var_c - np.sum(W * W, axis=0)
        cond_sd[k] = np.sqrt(np.maximum(cond_var, 0.0))
    return JointPosterior(mean_obs, chol_obs, mean_cand, cross, cond_sd)


def draw_base_samples(n_mc_samples: int, n_obs: int, rng: np.random.Generator) -> np.ndarray:
    """Standard-normal base draws, shape (S, n_obs + 1, n_objectives).

    The extra row is the candidate's own innovation; one set serves every
    candidate in a sweep (common random numbers).
    """
    return rng.standard_normal((n_mc_samples, n_obs + 1, N_OBJECTIVES))


def _realize_draws(post: JointPosterior, base: np.ndarray):
    S = base.shape[0]
    n, c = post.n_obs, post.n_candidates
    if base.shape[1] != n + 1 or base.shape[2] != N_OBJECTIVES:
        raise ValidationError(
            f"base samples must have shape (S, {n + 1}, {N_OBJECTIVES}), got {base.shape}"
        )
    F = np.empty((S, n, N_OBJECTIVES))
    Y = np.empty((S, c, N_OBJECTIVES))
    for k in range(N_OBJECTIVES):
        Z = base[:, :n, k]
        F[:, :, k] = post.mean_obs[k][None, :] + Z @ post.chol_obs[k].T
        Y[:, :, k] = (
            post.mean_cand[k][None, :]
            + Z @ post.cross[k]
            + base[:, n, k][:, None] * post.cond_sd[k][None, :]
        )
    return F, Y


def evaluate_batch(post: JointPosterior, ref, base_samples: np.ndarray) -> np.ndarray:
    """qNEHVI estimates for every candidate in the posterior, shape (C,)."""
    F, Y = _realize_draws(post, np.asarray(base_samples, dtype=float))
    return _native.qnehvi_accumulate(
        np.ascontiguousarray(F), np.ascontiguousarray(Y), np.asarray(ref, dtype=float)
    )


def qnehvi(gps, observed_inputs, candidate, ref, base_samples) -> float:
    """Noisy expected hypervolume improvement of a single candidate design.

    ``base_samples`` must come from :func:`draw_base_samples` for the same
    number of observed inputs; passing the same array for several candidates
    evaluates them under common random numbers.
    """
    x = candidate.as_array() if isinstance(candidate, DesignPoint) else np.asarray(candidate, float)
    post = joint_posterior(gps, observed_inputs, x[None, :])
    return float(evaluate_batch(post, ref, base_samples)[0])


def sobol_candidates(n: int, rng: np.random.Generator) -> np.ndarray:
    """Scrambled-Sobol sweep points in the unit 4-cube."""
    engine = qmc.Sobol(d=4, scramble=True, seed=rng)
    m = int(np.ceil(np.log2(max(n, 1))))
    return engine.random(2**m)[:n]


def propose_next(gps, observed_inputs, observed_canonical, config: AcquisitionConfig,
                 rng: np.random.Generator, fixed_loa_step: float | None = None) -> DesignPoint:
    """Pick the next design to show: argmax of qNEHVI over a Sobol sweep.

    The LoA coordinate of every candidate is snapped to its 5 steps, or
    overwritten with ``fixed_loa_step`` when the session fixes autonomy.
    Ties break toward the lowest candidate index.
    """
    X = np.atleast_2d(np.asarray(observed_inputs, dtype=float))
    if X.shape[0] < 2:
        raise InsufficientDataError(
            "acquisition needs at least 2 rated observations; run the sampling phase first"
        )
    cand = sobol_candidates(config.n_candidates, rng)
    if fixed_loa_step is not None:
        cand[:, 3] = fixed_loa_step
    else:
        cand[:, 3] = [snap_loa(v) for v in cand[:, 3]]

    ref = reference_point(np.asarray(observed_canonical, dtype=float))
    post = joint_posterior(gps, X, cand)
    base = draw_base_samples(config.n_mc_samples, X.shape[0], rng)
    values = evaluate_batch(post, ref, base)
    best = int(np.argmax(values))
    return DesignPoint.from_array(cand[best])
