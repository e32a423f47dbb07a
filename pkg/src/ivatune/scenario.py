"""Headless navigation re-routing scenario with the 5-level intervention protocol.

The vehicle traverses a waypoint route at constant speed. Once the remaining
distance to the original destination drops below the trigger threshold, the
assistant intervenes exactly once according to the design's autonomy level:
it announces (level 0), offers to be asked (1), asks for approval (2),
redirects unless vetoed (3), or redirects outright (4). A user action only
registers if it falls within the grace period.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .design_space import DesignPoint, loa_level
from .errors import ValidationError

TRIGGER_DISTANCE_M = 300.0
GRACE_PERIOD_S = 10.0
VEHICLE_SPEED_MPS = 13.4
TIME_STEP_S = 0.5

# Assistant voice lines per autonomy level. The exact wording is contractual:
# presentation and logs must carry these strings byte-for-byte.
LEVEL_ANNOUNCEMENTS = {
    0: "You are about to arrive at your destination. Your destination will be on the left.",
    1: "You are about to arrive at your destination, but there doesn't seem to be any parking. "
       "You may need to search for a nearby parking lot.",
    2: "You are about to arrive at your destination. There seems to be no on-street parking "
       "available. Should I already look for a parking spot nearby?",
    3: "You are about to arrive at your destination. There seems to be no on-street parking "
       "available. I will redirect your navigation to a parking lot 0.2 miles from the "
       "destination, with a price of £2 an hour. Please interrupt if you would like to change "
       "or cancel.",
    4: "Your destination has limited parking. I have already redirected your navigation to the "
       "closest parking lot 0.2 miles from the destination, with a price of £2 an hour.",
}

LEVEL_CONFIRMATIONS = {
    1: "Okay, I've found a nearby parking lot 0.2 miles from the destination. "
       "I'm redirecting you there now.",
    2: "Okay, I've redirected your navigation to the closest parking lot, 0.2 miles away "
       "with a price of £2 an hour.",
}


class UserAction(enum.Enum):
    SILENT = "silent"
    SEARCH = "search"
    APPROVE = "approve"
    REJECT = "reject"
    VETO = "veto"


class AwaitedAction(enum.Enum):
    NONE = "none"
    SEARCH_COMMAND = "search_command"
    APPROVAL = "approval"
    VETO = "veto"


class Outcome(enum.Enum):
    NO_REROUTE = "no_reroute"
    REROUTED = "rerouted"
    CANCELLED = "cancelled"


LEVEL_AWAITED = {
    0: AwaitedAction.NONE,
    1: AwaitedAction.SEARCH_COMMAND,
    2: AwaitedAction.APPROVAL,
    3: AwaitedAction.VETO,
    4: AwaitedAction.NONE,
}


@dataclass(frozen=True)
class Route:
    """Waypoint polyline with the original and fallback parking destinations."""

    waypoints: tuple
    original_destination: tuple
    parking_destination: tuple
    parking_offset_miles: float = 0.2

    def __post_init__(self):
        wps = tuple((float(x), float(y)) for x, y in self.waypoints)
        if len(wps) < 2:
            raise ValidationError("route needs at least 2 waypoints")
        orig = (float(self.original_destination[0]), float(self.original_destination[1]))
        park = (float(self.parking_destination[0]), float(self.parking_destination[1]))
        if orig == park:
            raise ValidationError("original and parking destinations must be distinct")
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "original_destination", orig)
        object.__setattr__(self, "parking_destination", park)


@dataclass(frozen=True)
class UserActionPolicy:
    """What the simulated driver says after the intervention, and how late."""

    action: UserAction = UserAction.SILENT
    response_delay_s: float = 0.0

    def __post_init__(self):
        if self.response_delay_s < 0:
            raise ValidationError(f"response_delay_s must be >= 0, got {self.response_delay_s}")


@dataclass(frozen=True)
class InterventionEvent:
    """One fired intervention: level, what was said, what happened."""

    level: int
    utterances: tuple[str, ...]
    awaited_user_action: AwaitedAction
    grace_period_s: float
    outcome: Outcome
    trigger_time_s: float
    glow: float
    volume: float
    transparency: float


@dataclass(frozen=True)
class LogEntry:
    time_s: float
    kind: str
    detail: str
    position: tuple[float, float] | None = None


@dataclass
class ScenarioResult:
    event: InterventionEvent
    log: list[LogEntry] = field(default_factory=list)


def presentation_descriptor(design: DesignPoint) -> dict:
    """Renderable description of a design variant.

    The symbol parameter is stored as *transparency*; renderers display it as
    opacity = 1 - transparency. All visual cues use a fixed cyan hue.
    """
    level = loa_level(design.loa)
    scripts = [LEVEL_ANNOUNCEMENTS[level]]
    if level in LEVEL_CONFIRMATIONS:
        scripts.append(LEVEL_CONFIRMATIONS[level])
    return {
        "glow_intensity": design.glow,
        "alert_gain": design.volume,
        "symbol_opacity": 1.0 - design.transparency,
        "symbol_transparency": design.transparency,
        "hue": "cyan",
        "loa_level": level,
        "awaited_user_action": LEVEL_AWAITED[level].value,
        "grace_period_s": GRACE_PERIOD_S,
        "scripts": scripts,
    }


def _segment_lengths(route: Route) -> list[float]:
    pts = list(route.waypoints) + [route.original_destination]
    return [math.dist(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


def _position_at(route: Route, travelled: float) -> tuple[float, float]:
    pts = list(route.waypoints) + [route.original_destination]
    remaining = travelled
    for i in range(len(pts) - 1):
        seg = math.dist(pts[i], pts[i + 1])
        if remaining <= seg or i == len(pts) - 2:
            t = 0.0 if seg == 0 else min(remaining / seg, 1.0)
            return (
                pts[i][0] + t * (pts[i + 1][0] - pts[i][0]),
                pts[i][1] + t * (pts[i + 1][1] - pts[i][1]),
            )
        remaining -= seg
    return pts[-1]


def resolve_outcome(level: int, policy: UserActionPolicy,
                    grace_period_s: float = GRACE_PERIOD_S) -> Outcome:
    """Outcome of the intervention protocol, as a pure function.

    Level 0 never reroutes and level 4 always does. Levels 1 and 2 reroute
    only on their awaited action (search / approval) within the grace
    period; level 3 reroutes unless vetoed in time. Everything else,
    including late or mismatched actions, leaves the route unchanged.
    """
    in_grace = policy.response_delay_s <= grace_period_s
    if level == 0:
        return Outcome.NO_REROUTE
    if level == 4:
        return Outcome.REROUTED
    if level == 1:
        return Outcome.REROUTED if policy.action is UserAction.SEARCH and in_grace else Outcome.NO_REROUTE
    if level == 2:
        return Outcome.REROUTED if policy.action is UserAction.APPROVE and in_grace else Outcome.NO_REROUTE
    if level == 3:
        return Outcome.CANCELLED if policy.action is UserAction.VETO and in_grace else Outcome.REROUTED
    raise ValidationError(f"level must be in [0, 4], got {level}")


def run_scenario(route: Route, design: DesignPoint, policy: UserActionPolicy, *,
                 trigger_distance_m: float = TRIGGER_DISTANCE_M,
                 grace_period_s: float = GRACE_PERIOD_S,
                 speed_mps: float = VEHICLE_SPEED_MPS) -> ScenarioResult:
    """Drive the route and fire the proactive intervention exactly once."""
    level = loa_level(design.loa)
    total = sum(_segment_lengths(route))
    log: list[LogEntry] = [LogEntry(0.0, "start", f"route length {total:.1f} m",
                                    route.waypoints[0])]

    # Constant-speed traversal; find the first tick where the remaining
    # distance to the original destination falls under the trigger.
    t = 0.0
    travelled = 0.0
    trigger_time = None
    while travelled < total:
        if total - travelled < trigger_distance_m:
            trigger_time = t
            break
        t += TIME_STEP_S
        travelled = min(total, speed_mps * t)
    if trigger_time is None:
        trigger_time = t
    pos = _position_at(route, travelled)

    utterances = [LEVEL_ANNOUNCEMENTS[level]]
    log.append(LogEntry(trigger_time, "intervention",
                        f"level {level}: {LEVEL_ANNOUNCEMENTS[level]}", pos))
    log.append(LogEntry(trigger_time, "presentation",
                        f"glow={design.glow:.3f} volume={design.volume:.3f} "
                        f"transparency={design.transparency:.3f} hue=cyan", pos))

    outcome = resolve_outcome(level, policy, grace_period_s)
    acted = policy.action is not UserAction.SILENT
    if acted:
        action_time = trigger_time + policy.response_delay_s
        registered = policy.response_delay_s <= grace_period_s
        log.append(LogEntry(action_time, "user_action",
                            f"{policy.action.value} ({'registered' if registered else 'after grace period'})"))

    if outcome is Outcome.REROUTED and level in LEVEL_CONFIRMATIONS:
        utterances.append(LEVEL_CONFIRMATIONS[level])
        log.append(LogEntry(trigger_time + min(policy.response_delay_s, grace_period_s),
                            "assistant", LEVEL_CONFIRMATIONS[level]))
    if outcome is Outcome.REROUTED:
        log.append(LogEntry(trigger_time + grace_period_s, "reroute",
                            f"navigation set to parking lot at {route.parking_destination}"))
    elif outcome is Outcome.CANCELLED:
        log.append(LogEntry(trigger_time + policy.response_delay_s, "cancelled",
                            "pending redirect cancelled by veto"))
    dest = route.parking_destination if outcome is Outcome.REROUTED else route.original_destination
    log.append(LogEntry(trigger_time + grace_period_s + TIME_STEP_S, "arrival",
                        f"arrived at {dest}"))

    event = InterventionEvent(
        level=level,
        utterances=tuple(utterances),
        awaited_user_action=LEVEL_AWAITED[level],
        grace_period_s=grace_period_s,
        outcome=outcome,
        trigger_time_s=trigger_time,
        glow=design.glow,
        volume=design.volume,
        transparency=design.transparency,
    )
    return ScenarioResult(event=event, log=log)


def default_route() -> Route:
    """A simple urban loop: ~1.6 km with the parking lot 0.2 miles off the end."""
    return Route(
        waypoints=((0.0, 0.0), (400.0, 0.0), (400.0, 400.0), (800.0, 400.0), (800.0, 800.0)),
        original_destination=(1200.0, 800.0),
        parking_destination=(1200.0, 800.0 + 0.2 * 1609.34),
    )
