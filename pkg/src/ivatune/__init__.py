"""Human-in-the-loop multi-objective design optimization for proactive
in-vehicle assistants: GP surrogates, hypervolume-improvement acquisition,
a scenario simulator with a synthetic rater, a session service, and the
analysis pipeline."""

from .design_space import (
    CanonicalObjectives,
    DesignPoint,
    ObjectiveVector,
    QuestionnaireResponse,
    loa_level,
    score_questionnaire,
    snap_loa,
    to_canonical,
)
from .session import Condition, Phase, Session, disposition_to_loa

__version__ = "0.1.0"

__all__ = [
    "CanonicalObjectives",
    "Condition",
    "DesignPoint",
    "ObjectiveVector",
    "Phase",
    "QuestionnaireResponse",
    "Session",
    "disposition_to_loa",
    "loa_level",
    "score_questionnaire",
    "snap_loa",
    "to_canonical",
    "__version__",
]
