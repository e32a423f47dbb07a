"""Four-parameter design space, questionnaire scoring, and objective transforms.

A design variant is a point in the unit hypercube: interior lighting glow,
auditory alert volume, infotainment symbol transparency, and a level of
autonomy (LoA) that is restricted to five discrete steps. Each rated variant
yields three objectives: mental demand (0-20, minimized), predictability and
usefulness (1-5 each, maximized). All numerical machinery downstream works in
a canonical space where every objective lives in [0, 1] and is maximized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

LOA_STEPS = (0.0, 0.25, 0.5, 0.75, 1.0)
LOA_STEP_TOL = 1e-12

MENTAL_DEMAND_RANGE = (0, 20)
ITEM_RANGE = (1, 5)


def round_half_up(x: float) -> int:
    """Round to the nearest integer, with exact halves rounding up.

    Python's built-in ``round`` uses banker's rounding; the instrument
    mappings here need a deterministic, documented upward tie-break.
    """
    return int(math.floor(x + 0.5))


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or not math.isfinite(value):
        raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class DesignPoint:
    """One candidate configuration of the four design parameters.

    ``glow``, ``volume`` and ``transparency`` are continuous in [0, 1];
    ``loa`` must equal one of the five autonomy steps in ``LOA_STEPS``.
    """

    glow: float
    volume: float
    transparency: float
    loa: float

    def __post_init__(self):
        _check_unit("glow", self.glow)
        _check_unit("volume", self.volume)
        _check_unit("transparency", self.transparency)
        _check_unit("loa", self.loa)
        if min(abs(self.loa - s) for s in LOA_STEPS) > LOA_STEP_TOL:
            raise ValidationError(
                f"loa must be one of {LOA_STEPS}, got {self.loa!r}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.glow, self.volume, self.transparency, self.loa])

    @classmethod
    def from_array(cls, x, snap: bool = False) -> "DesignPoint":
        x = np.asarray(x, dtype=float)
        if x.shape != (4,):
            raise ValidationError(f"design vector must have 4 entries, got shape {x.shape}")
        loa = snap_loa(float(x[3])) if snap else float(x[3])
        return cls(float(x[0]), float(x[1]), float(x[2]), loa)


def _check_int_range(name: str, value, lo: int, hi: int) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if not (lo <= value <= hi):
        raise ValidationError(f"{name} must lie in [{lo}, {hi}], got {value}")
    return int(value)


@dataclass(frozen=True)
class QuestionnaireResponse:
    """Raw questionnaire answers for one iteration.

    ``mental_demand_raw`` is the 0-20 workload item. The two predictability
    items are phrased as *unpredictability* (higher = less predictable) and
    are reverse-coded during scoring; the two usefulness items are scored
    as-is. All four 5-point items are integers in [1, 5].
    """

    mental_demand_raw: int
    pred_item1_raw: int
    pred_item2_raw: int
    use_item1_raw: int
    use_item2_raw: int

    def __post_init__(self):
        _check_int_range("mental_demand_raw", self.mental_demand_raw, *MENTAL_DEMAND_RANGE)
        _check_int_range("pred_item1_raw", self.pred_item1_raw, *ITEM_RANGE)
        _check_int_range("pred_item2_raw", self.pred_item2_raw, *ITEM_RANGE)
        _check_int_range("use_item1_raw", self.use_item1_raw, *ITEM_RANGE)
        _check_int_range("use_item2_raw", self.use_item2_raw, *ITEM_RANGE)


def _check_float_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not (lo <= value <= hi):
        raise ValidationError(f"{name} must lie in [{lo}, {hi}], got {value}")
    return value


@dataclass(frozen=True)
class ObjectiveVector:
    """Scored objectives on their native scales.

    mental_demand in [0, 20] (minimize); predictability and usefulness in
    [1, 5] (maximize), each the mean of its two items after reverse coding.
    """

    mental_demand: float
    predictability: float
    usefulness: float

    def __post_init__(self):
        _check_float_range("mental_demand", self.mental_demand, 0.0, 20.0)
        _check_float_range("predictability", self.predictability, 1.0, 5.0)
        _check_float_range("usefulness", self.usefulness, 1.0, 5.0)


@dataclass(frozen=True)
class CanonicalObjectives:
    """All three objectives mapped to [0, 1], all maximized.

    y1 = 1 - mental_demand / 20
    y2 = (predictability - 1) / 4
    y3 = (usefulness - 1) / 4
    """

    y1: float
    y2: float
    y3: float

    def __post_init__(self):
        _check_float_range("y1", self.y1, 0.0, 1.0)
        _check_float_range("y2", self.y2, 0.0, 1.0)
        _check_float_range("y3", self.y3, 0.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y2, self.y3])


def score_questionnaire(resp: QuestionnaireResponse) -> ObjectiveVector:
    """Score raw answers into the three objectives.

    The two unpredictability items are reverse-coded (``6 - raw``) before
    averaging, so higher predictability always means a more predictable
    system; usefulness is the plain mean of its two items.
    """
    predictability = ((6 - resp.pred_item1_raw) + (6 - resp.pred_item2_raw)) / 2.0
    usefulness = (resp.use_item1_raw + resp.use_item2_raw) / 2.0
    return ObjectiveVector(
        mental_demand=float(resp.mental_demand_raw),
        predictability=predictability,
        usefulness=usefulness,
    )


def to_canonical(obj: ObjectiveVector) -> CanonicalObjectives:
    """Map native-scale objectives into the [0, 1]-maximize space."""
    return CanonicalObjectives(
        y1=1.0 - obj.mental_demand / 20.0,
        y2=(obj.predictability - 1.0) / 4.0,
        y3=(obj.usefulness - 1.0) / 4.0,
    )


def from_canonical(can: CanonicalObjectives) -> ObjectiveVector:
    """Inverse of :func:`to_canonical`."""
    return ObjectiveVector(
        mental_demand=20.0 * (1.0 - can.y1),
        predictability=1.0 + 4.0 * can.y2,
        usefulness=1.0 + 4.0 * can.y3,
    )


def snap_loa(x: float) -> float:
    """Snap a continuous value in [0, 1] to the nearest autonomy step.

    Values exactly midway between two steps round toward the higher step.
    """
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValidationError(f"loa value must lie in [0, 1], got {x!r}")
    return LOA_STEPS[round_half_up(x * 4.0)]


def loa_level(loa_step: float) -> int:
    """Return the integer autonomy level (0-4) for a step value."""
    if min(abs(loa_step - s) for s in LOA_STEPS) > LOA_STEP_TOL:
        raise ValidationError(f"loa_step must be one of {LOA_STEPS}, got {loa_step!r}")
    return round_half_up(float(loa_step) * 4.0)
