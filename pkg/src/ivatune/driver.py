"""Synthetic rater standing in for a human participant.

A profile hides a latent ideal design. Ratings derive from the weighted
mismatch between the shown design and that ideal: mental demand grows with
mismatch from a non-zero driving baseline, while predictability and
usefulness shrink with it. Autonomy mismatch is penalized twice as hard when
the shown level deviates from the level implied by the rater's proactive
disposition, reflecting that autonomy fit dominates perception. Gaussian
noise is added per item before clipping and rounding to the instrument
scales, so responses always stay valid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .design_space import (
    DesignPoint,
    QuestionnaireResponse,
    round_half_up,
    snap_loa,
)
from .errors import ValidationError
from .session import disposition_to_loa

# Max Euclidean mismatch: three unit axes plus a doubled unit LoA axis.
_MAX_DISTANCE = np.sqrt(3.0 + 4.0)

MENTAL_DEMAND_BASELINE = 0.2
LOA_MISMATCH_FACTOR = 2.0


@dataclass(frozen=True)
class DriverProfile:
    """Latent preferences of one simulated participant."""

    ideal: DesignPoint
    disposition_score: int
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    noise_sd: float = 0.0
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        disposition_to_loa(self.disposition_score)  # validates the range
        w = tuple(float(v) for v in self.weights)
        if len(w) != 3 or any(not np.isfinite(v) or v < 0 for v in w):
            raise ValidationError(f"weights must be 3 non-negative finite reals, got {self.weights!r}")
        if self.noise_sd < 0:
            raise ValidationError(f"noise_sd must be >= 0, got {self.noise_sd}")
        object.__setattr__(self, "weights", w)


def mismatch(profile: DriverProfile, design: DesignPoint) -> float:
    """Normalized latent mismatch in [0, 1] between a design and the ideal."""
    delta = design.as_array() - profile.ideal.as_array()
    if abs(design.loa - disposition_to_loa(profile.disposition_score)) > 1e-12:
        delta[3] *= LOA_MISMATCH_FACTOR
    return float(np.linalg.norm(delta) / _MAX_DISTANCE)


def _clamp_round(x: float, lo: int, hi: int) -> int:
    return max(lo, min(hi, round_half_up(x)))


def rate(profile: DriverProfile, design: DesignPoint, event=None,
         rng: np.random.Generator | None = None) -> QuestionnaireResponse:
    """Produce a questionnaire response for the shown design.

    ``event`` is the intervention the rater just experienced; it is carried
    for context/logging but the latent model depends only on the design.
    Noise draws come from ``rng`` in a fixed order (mental demand, then the
    four items), so a seeded generator gives identical responses.
    """
    if rng is None:
        rng = np.random.default_rng(profile.seed)
    m = mismatch(profile, design)
    w_md, w_pred, w_use = profile.weights
    m_md = min(1.0, w_md * m)
    m_pred = min(1.0, w_pred * m)
    m_use = min(1.0, w_use * m)

    eps = rng.normal(0.0, profile.noise_sd, size=5) if profile.noise_sd > 0 else np.zeros(5)

    md_raw = _clamp_round(20.0 * (MENTAL_DEMAND_BASELINE + 0.8 * m_md) + eps[0], 0, 20)
    # Predictability items are phrased as unpredictability: invert the latent
    # 1..5 predictability value onto the instrument's polarity.
    pred1 = 6 - _clamp_round(5.0 - 4.0 * m_pred + eps[1], 1, 5)
    pred2 = 6 - _clamp_round(5.0 - 4.0 * m_pred + eps[2], 1, 5)
    use1 = _clamp_round(5.0 - 4.0 * m_use + eps[3], 1, 5)
    use2 = _clamp_round(5.0 - 4.0 * m_use + eps[4], 1, 5)
    return QuestionnaireResponse(md_raw, pred1, pred2, use1, use2)


def load_profiles(path) -> list[DriverProfile]:
    """Load rater profiles from a JSON file.

    The file holds a list of objects with keys ``ideal`` (glow, volume,
    transparency, loa), ``disposition_score``, and optional ``weights``,
    ``noise_sd``, ``seed``, ``name``. The ideal's loa is snapped to a step.
    """
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValidationError("profiles file must contain a JSON list")
    profiles = []
    for i, entry in enumerate(data):
        try:
            ideal_raw = entry["ideal"]
            ideal = DesignPoint(
                glow=float(ideal_raw["glow"]),
                volume=float(ideal_raw["volume"]),
                transparency=float(ideal_raw["transparency"]),
                loa=snap_loa(float(ideal_raw["loa"])),
            )
            profiles.append(DriverProfile(
                ideal=ideal,
                disposition_score=int(entry["disposition_score"]),
                weights=tuple(entry.get("weights", (1.0, 1.0, 1.0))),
                noise_sd=float(entry.get("noise_sd", 0.0)),
                seed=int(entry.get("seed", i)),
                name=str(entry.get("name", f"profile-{i}")),
            ))
        except KeyError as exc:
            raise ValidationError(f"profile {i} is missing field {exc}") from exc
    return profiles
