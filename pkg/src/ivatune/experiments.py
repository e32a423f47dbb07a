"""Synthetic end-to-end experiments: scripted sessions rated by profile oracles.

Runs complete sessions where a :class:`DriverProfile` stands in for the
participant, each iteration passing through the scenario simulator before the
rating, exactly as a live session would. Also provides the optimizer-vs-Sobol
convergence benchmark used to validate that the acquisition loop earns its
keep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import persistence
from .design_space import snap_loa, DesignPoint
from .driver import DriverProfile, rate
from .pareto import hypervolume, pareto_filter
from .scenario import (
    LEVEL_AWAITED,
    AwaitedAction,
    UserAction,
    UserActionPolicy,
    default_route,
    run_scenario,
)
from .session import Condition, Session

# Fixed reference for cross-arm hypervolume comparisons: just below the
# canonical worst corner so observations at an exact 0 still count.
METRIC_REFERENCE = np.array([-1e-6, -1e-6, -1e-6])

_COOPERATIVE_ACTION = {
    AwaitedAction.NONE: UserAction.SILENT,
    AwaitedAction.SEARCH_COMMAND: UserAction.SEARCH,
    AwaitedAction.APPROVAL: UserAction.APPROVE,
    AwaitedAction.VETO: UserAction.SILENT,  # let the redirect proceed
}


def cooperative_policy(design: DesignPoint) -> UserActionPolicy:
    """A driver who goes along with the intervention (responds within grace)."""
    from .design_space import loa_level
    awaited = LEVEL_AWAITED[loa_level(design.loa)]
    return UserActionPolicy(action=_COOPERATIVE_ACTION[awaited], response_delay_s=2.0)


def run_session_with_driver(profile: DriverProfile, condition: Condition, seed: int, *,
                            sampling_budget: int | None = None,
                            optimization_budget: int | None = None) -> Session:
    """Run one full session rated by the synthetic driver."""
    session = Session(
        condition, seed=seed,
        disposition_score=profile.disposition_score,
        sampling_budget=sampling_budget,
        optimization_budget=optimization_budget,
    )
    route = default_route()
    while session.phase.value != "complete":
        design = session.next_design()
        result = run_scenario(route, design, cooperative_policy(design))
        rng = np.random.default_rng(
            np.random.SeedSequence([profile.seed, seed, session.next_iteration]))
        response = rate(profile, design, result.event, rng)
        session.submit_rating(response)
    return session


def final_hypervolume(session: Session, ref=METRIC_REFERENCE) -> float:
    """Hypervolume of the session's observed front against a fixed reference."""
    Y = np.array([o.canonical.as_array() for o in session.observations])
    front = Y[pareto_filter(Y)]
    return hypervolume(front, np.asarray(ref, dtype=float))


def make_benchmark_profiles(n: int, *, noise_sd: float = 1.0, seed: int = 1234) -> list[DriverProfile]:
    """Deterministic set of synthetic raters spanning the design space."""
    rng = np.random.default_rng(seed)
    profiles = []
    for i in range(n):
        raw = rng.uniform(0.0, 1.0, size=4)
        ideal = DesignPoint(raw[0], raw[1], raw[2], snap_loa(raw[3]))
        profiles.append(DriverProfile(
            ideal=ideal,
            disposition_score=int(rng.integers(17, 120)),
            weights=tuple(rng.uniform(0.75, 1.25, size=3)),
            noise_sd=noise_sd,
            seed=int(rng.integers(0, 2**31 - 1)),
            name=f"bench-{i}",
        ))
    return profiles


@dataclass
class ConvergenceResult:
    optimized_hv: list[float]
    baseline_hv: list[float]

    @property
    def win_rate(self) -> float:
        wins = sum(o >= b for o, b in zip(self.optimized_hv, self.baseline_hv))
        return wins / len(self.optimized_hv)

    @property
    def mean_gain(self) -> float:
        return float(np.mean(self.optimized_hv) - np.mean(self.baseline_hv))


def convergence_experiment(n_profiles: int = 20, *, noise_sd: float = 1.0,
                           seed: int = 1234) -> ConvergenceResult:
    """Optimized (9+6) sessions versus pure 15-point Sobol baselines.

    Both arms share the session seed, so the baseline extends the exact same
    sampling stream the optimized arm started from; the comparison isolates
    the six acquisition-driven iterations.
    """
    profiles = make_benchmark_profiles(n_profiles, noise_sd=noise_sd, seed=seed)
    optimized, baseline = [], []
    for k, profile in enumerate(profiles):
        session_seed = 100 + k
        opt = run_session_with_driver(profile, Condition.TRAINED_LOA, session_seed)
        base = run_session_with_driver(profile, Condition.TRAINED_LOA, session_seed,
                                       sampling_budget=15, optimization_budget=0)
        optimized.append(final_hypervolume(opt))
        baseline.append(final_hypervolume(base))
    return ConvergenceResult(optimized, baseline)


def run_synthetic(condition: Condition, profiles: list[DriverProfile], n_seeds: int,
                  out_dir, *, sampling_budget: int | None = None,
                  optimization_budget: int | None = None) -> dict:
    """Run one session per (profile, seed) and persist JSONL logs + manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"condition": condition.value, "sessions": []}
    for p_idx, profile in enumerate(profiles):
        for s_idx in range(n_seeds):
            seed = 1000 * p_idx + s_idx
            session = run_session_with_driver(
                profile, condition, seed,
                sampling_budget=sampling_budget, optimization_budget=optimization_budget)
            log_path = out_dir / f"{session.id}.jsonl"
            log_path.write_text(persistence.session_jsonl(session), encoding="utf-8")
            persistence.write_session_meta(out_dir, session)
            manifest["sessions"].append({
                "session_id": session.id,
                "profile": profile.name,
                "seed": seed,
                "records": len(session.observations),
                "final_hypervolume": final_hypervolume(session),
                "log": log_path.name,
            })
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest
