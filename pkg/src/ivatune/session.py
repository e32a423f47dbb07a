"""Session state machine for one human-in-the-loop optimization block.

A session walks one participant through a model-free *sampling* phase
(scrambled-Sobol designs) and an acquisition-driven *optimizing* phase,
logging one observation per rated design. It is the single writer of its own
state: callers alternate ``next_design`` and ``submit_rating`` until the
budget is exhausted.

Randomness is fully seed-derived so sessions replay bit-for-bit: the sampling
stream uses ``SeedSequence([seed, 0])`` and the proposal for iteration k uses
``SeedSequence([seed, k])``.
"""

from __future__ import annotations

import enum
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np
from scipy.stats import qmc

from . import acquisition as acq
from . import gp
from .design_space import (
    CanonicalObjectives,
    DesignPoint,
    ObjectiveVector,
    QuestionnaireResponse,
    round_half_up,
    score_questionnaire,
    snap_loa,
    to_canonical,
)
from .errors import (
    InsufficientDataError,
    ProtocolError,
    SessionCompleteError,
    ValidationError,
)
from .pareto import ParetoFront, pareto_filter, reference_point

DISPOSITION_RANGE = (17, 119)

TRAINED_SAMPLING_BUDGET = 9
FIXED_SAMPLING_BUDGET = 7
OPTIMIZATION_BUDGET = 6


class Condition(enum.Enum):
    TRAINED_LOA = "trained"
    FIXED_LOA = "fixed"


class Phase(enum.Enum):
    SAMPLING = "sampling"
    OPTIMIZING = "optimizing"
    COMPLETE = "complete"


def disposition_to_loa(score: int) -> float:
    """Map a proactive-disposition score onto an autonomy step.

    The 17-item, 7-point scale spans [17, 119]; the score is normalized to
    [0, 1], multiplied by four and rounded to the nearest level.
    """
    if not isinstance(score, (int, np.integer)) or isinstance(score, bool):
        raise ValidationError(f"disposition score must be an integer, got {score!r}")
    lo, hi = DISPOSITION_RANGE
    if not (lo <= score <= hi):
        raise ValidationError(f"disposition score must lie in [{lo}, {hi}], got {score}")
    level = round_half_up(4.0 * (score - lo) / (hi - lo))
    return level / 4.0


@dataclass(frozen=True)
class Observation:
    """One completed iteration: the design shown and how it was rated."""

    iteration: int
    phase: Phase
    design: DesignPoint
    response: QuestionnaireResponse
    objectives: ObjectiveVector
    canonical: CanonicalObjectives
    timestamp: str


class Session:
    """Single-writer HITL session state machine."""

    def __init__(self, condition: Condition, seed: int = 3, *,
                 disposition_score: int | None = None,
                 sampling_budget: int | None = None,
                 optimization_budget: int | None = None,
                 config: acq.AcquisitionConfig | None = None,
                 session_id: str | None = None):
        if isinstance(condition, str):
            condition = Condition(condition)
        self.condition = condition
        if seed < 0:
            raise ValidationError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.id = session_id or uuid.uuid4().hex

        if sampling_budget is None:
            sampling_budget = (TRAINED_SAMPLING_BUDGET if condition is Condition.TRAINED_LOA
                               else FIXED_SAMPLING_BUDGET)
        if optimization_budget is None:
            optimization_budget = OPTIMIZATION_BUDGET
        if sampling_budget < 0 or optimization_budget < 0 or sampling_budget + optimization_budget < 1:
            raise ValidationError("budgets must be non-negative with at least one iteration")
        self.sampling_budget = int(sampling_budget)
        self.optimization_budget = int(optimization_budget)

        self.disposition_score = disposition_score
        if condition is Condition.FIXED_LOA:
            if disposition_score is None:
                raise ValidationError("FixedLoA sessions require a disposition_score")
            self.fixed_loa_step: float | None = disposition_to_loa(disposition_score)
        else:
            if disposition_score is not None:
                disposition_to_loa(disposition_score)  # validate even if unused
            self.fixed_loa_step = None

        self.config = config or acq.AcquisitionConfig(seed=self.seed)
        self.observations: list[Observation] = []
        self._pending: DesignPoint | None = None
        self._surrogates: tuple | None = None  # (n_obs_when_fitted, gps)

        # The whole sampling plan is drawn up-front from its own seed stream;
        # Sobol balance prefers power-of-two draws, so round up and slice.
        sob = qmc.Sobol(d=4, scramble=True,
                        seed=np.random.default_rng(np.random.SeedSequence([self.seed, 0])))
        n = max(self.sampling_budget, 1)
        m = int(np.ceil(np.log2(n)))
        self._sampling_points = sob.random(2**m)[:self.sampling_budget]

    @property
    def phase(self) -> Phase:
        done = len(self.observations)
        if done >= self.sampling_budget + self.optimization_budget:
            return Phase.COMPLETE
        if done >= self.sampling_budget:
            return Phase.OPTIMIZING
        return Phase.SAMPLING

    @property
    def next_iteration(self) -> int:
        return len(self.observations) + 1

    def _apply_loa(self, raw: np.ndarray) -> DesignPoint:
        x = np.array(raw, dtype=float)
        x[3] = self.fixed_loa_step if self.fixed_loa_step is not None else snap_loa(x[3])
        return DesignPoint.from_array(x)

    def _surrogate_models(self):
        n = len(self.observations)
        if self._surrogates is not None and self._surrogates[0] == n:
            return self._surrogates[1]
        X = np.array([o.design.as_array() for o in self.observations])
        Y = np.array([o.canonical.as_array() for o in self.observations])
        gps = tuple(gp.fit(X, Y[:, k]) for k in range(3))
        self._surrogates = (n, gps)
        return gps

    def next_design(self) -> DesignPoint:
        """The design to show for the current iteration.

        Idempotent until the matching rating arrives: repeated calls return
        the identical pending design.
        """
        if self.phase is Phase.COMPLETE:
            raise SessionCompleteError(f"session {self.id} has used its full budget")
        if self._pending is not None:
            return self._pending

        if self.phase is Phase.SAMPLING:
            design = self._apply_loa(self._sampling_points[len(self.observations)])
        else:
            if len(self.observations) < 2:
                raise InsufficientDataError(
                    "optimization requires at least 2 rated observations; extend the sampling phase"
                )
            gps = self._surrogate_models()
            X = np.array([o.design.as_array() for o in self.observations])
            Y = np.array([o.canonical.as_array() for o in self.observations])
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, self.next_iteration]))
            design = acq.propose_next(gps, X, Y, self.config, rng,
                                      fixed_loa_step=self.fixed_loa_step)
        self._pending = design
        return design

    def submit_rating(self, response: QuestionnaireResponse) -> Observation:
        """Record the rating for the pending design and advance the session."""
        if self._pending is None:
            raise ProtocolError("no design is pending; call next_design first")
        if not isinstance(response, QuestionnaireResponse):
            response = QuestionnaireResponse(*response)
        objectives = score_questionnaire(response)
        obs = Observation(
            iteration=self.next_iteration,
            phase=self.phase,
            design=self._pending,
            response=response,
            objectives=objectives,
            canonical=to_canonical(objectives),
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        self.observations.append(obs)
        self._pending = None
        return obs

    def pareto(self) -> ParetoFront:
        """Non-dominated observations of this session, in canonical space."""
        if not self.observations:
            raise InsufficientDataError("session has no observations yet")
        Y = np.array([o.canonical.as_array() for o in self.observations])
        members = pareto_filter(Y)
        return ParetoFront(
            points=Y[members],
            members=tuple(int(i) for i in members),
            reference_point=reference_point(Y),
        )


def session_pareto(session: Session) -> ParetoFront:
    return session.pareto()
