"""Durable observation logs: JSONL as source of truth, CSV as derived export.

One JSON object per line, one file per session, records in iteration order.
Appends are flushed and fsynced before the caller acknowledges anything, so a
crash after ``append_record`` returns can never lose a rating.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path

from .design_space import (
    DesignPoint,
    ObjectiveVector,
    QuestionnaireResponse,
    score_questionnaire,
)
from .errors import ValidationError
from .session import (
    FIXED_SAMPLING_BUDGET,
    TRAINED_SAMPLING_BUDGET,
    Condition,
    Observation,
    Phase,
    Session,
)

CSV_COLUMNS = [
    "session_id", "condition", "iteration", "phase",
    "p1", "p2", "p3", "p4",
    "md_raw", "pred1_raw", "pred2_raw", "use1_raw", "use2_raw",
    "mental_demand", "predictability", "usefulness",
    "timestamp",
]


@dataclass(frozen=True)
class ObservationRecord:
    """Wire/disk form of one rated iteration."""

    session_id: str
    condition: str
    iteration: int
    phase: str
    p1: float
    p2: float
    p3: float
    p4: float
    md_raw: int | None
    pred1_raw: int | None
    pred2_raw: int | None
    use1_raw: int | None
    use2_raw: int | None
    mental_demand: float
    predictability: float
    usefulness: float
    timestamp: str | None

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)

    @property
    def objectives(self) -> ObjectiveVector:
        return ObjectiveVector(self.mental_demand, self.predictability, self.usefulness)

    @property
    def design(self) -> DesignPoint:
        return DesignPoint(self.p1, self.p2, self.p3, self.p4)


def record_from_observation(session_id: str, condition: Condition,
                            obs: Observation) -> ObservationRecord:
    d, r, o = obs.design, obs.response, obs.objectives
    return ObservationRecord(
        session_id=session_id,
        condition=condition.value,
        iteration=obs.iteration,
        phase=obs.phase.value,
        p1=d.glow, p2=d.volume, p3=d.transparency, p4=d.loa,
        md_raw=r.mental_demand_raw,
        pred1_raw=r.pred_item1_raw, pred2_raw=r.pred_item2_raw,
        use1_raw=r.use_item1_raw, use2_raw=r.use_item2_raw,
        mental_demand=o.mental_demand,
        predictability=o.predictability,
        usefulness=o.usefulness,
        timestamp=obs.timestamp,
    )


def record_from_json_line(line: str) -> ObservationRecord:
    obj = json.loads(line)
    try:
        return ObservationRecord(**{k: obj[k] for k in CSV_COLUMNS})
    except KeyError as exc:
        raise ValidationError(f"observation record is missing field {exc}") from exc


@dataclass
class SessionLog:
    """A loaded session: metadata plus its ordered observation records."""

    session_id: str
    condition: Condition
    records: list[ObservationRecord]
    meta: dict | None = None

    def __post_init__(self):
        iters = [r.iteration for r in self.records]
        if iters != list(range(1, len(iters) + 1)):
            raise ValidationError(
                f"session {self.session_id}: iterations must be contiguous from 1, got {iters}"
            )


def append_record(path, record: ObservationRecord) -> None:
    """Append one record durably (flush + fsync before returning)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(record.to_json_line() + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def session_meta(session: Session) -> dict:
    return {
        "session_id": session.id,
        "condition": session.condition.value,
        "seed": session.seed,
        "sampling_budget": session.sampling_budget,
        "optimization_budget": session.optimization_budget,
        "disposition_score": session.disposition_score,
        "fixed_loa_step": session.fixed_loa_step,
    }


def write_session_meta(directory, session: Session) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{session.id}.meta.json"
    path.write_text(json.dumps(session_meta(session), indent=2))
    return path


def session_records(session: Session) -> list[ObservationRecord]:
    return [record_from_observation(session.id, session.condition, o)
            for o in session.observations]


def session_jsonl(session: Session) -> str:
    return "".join(r.to_json_line() + "\n" for r in session_records(session))


def records_to_csv(records: list[ObservationRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for r in records:
        writer.writerow(asdict(r))
    return buf.getvalue()


def read_session_file(path) -> SessionLog:
    path = Path(path)
    records = [record_from_json_line(line)
               for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not records:
        raise ValidationError(f"{path}: no observation records")
    sid = records[0].session_id
    condition = Condition(records[0].condition)
    meta_path = path.with_suffix("").with_suffix(".meta.json") \
        if path.name.endswith(".jsonl") else None
    meta = None
    candidate = path.parent / f"{sid}.meta.json"
    if candidate.exists():
        meta = json.loads(candidate.read_text())
    elif meta_path and meta_path.exists():
        meta = json.loads(meta_path.read_text())
    return SessionLog(session_id=sid, condition=condition, records=records, meta=meta)


def load_dataset(path) -> list[SessionLog]:
    """Load every session log under a directory (or a single JSONL file).

    A JSONL file may hold several sessions' records; they are split by
    session_id, preserving record order within each.
    """
    path = Path(path)
    files = sorted(path.glob("*.jsonl")) if path.is_dir() else [path]
    logs: list[SessionLog] = []
    for f in files:
        by_session: dict[str, list[ObservationRecord]] = {}
        for line in f.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = record_from_json_line(line)
            by_session.setdefault(rec.session_id, []).append(rec)
        for sid, records in by_session.items():
            meta = None
            meta_file = f.parent / f"{sid}.meta.json"
            if meta_file.exists():
                meta = json.loads(meta_file.read_text())
            logs.append(SessionLog(sid, Condition(records[0].condition), records, meta))
    return logs


def scenario_log_lines(session_id: str, result) -> str:
    """Serialize a scenario event log to JSONL rows."""
    lines = []
    for entry in result.log:
        lines.append(json.dumps({
            "session_id": session_id,
            "time_s": entry.time_s,
            "kind": entry.kind,
            "detail": entry.detail,
            "position": list(entry.position) if entry.position else None,
        }, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


# --- external dataset ingest -------------------------------------------------

_INT_FIELDS = {"iteration", "md_raw", "pred1_raw", "pred2_raw", "use1_raw", "use2_raw"}
_FLOAT_FIELDS = {"p1", "p2", "p3", "p4", "mental_demand", "predictability", "usefulness"}


def _convert(field: str, value):
    if value is None or value == "":
        return None
    if field in _INT_FIELDS:
        return int(round(float(value)))
    if field in _FLOAT_FIELDS:
        return float(value)
    return str(value)


def ingest_csv(csv_path, colmap, out_path) -> dict:
    """Convert an external CSV into the JSONL schema via a column map.

    ``colmap`` (path or dict) has:

    - ``columns``: record field -> CSV header
    - ``constants``: record field -> literal value (e.g. a fixed condition)
    - ``fixed_loa_step``: value used to fill ``p4`` for fixed-LoA rows when
      no p4 column is mapped (flagged in the returned manifest)

    Derived objectives are computed from the raw items when unmapped, and
    vice versa left null when the source has no item-level data. Rows are
    grouped by session, sorted by iteration, and renumbered contiguously if
    the source numbering has gaps (flagged in the manifest).
    """
    if not isinstance(colmap, dict):
        colmap = json.loads(Path(colmap).read_text())
    columns = colmap.get("columns", {})
    constants = colmap.get("constants", {})
    fixed_step = colmap.get("fixed_loa_step")

    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValidationError(f"{csv_path}: no data rows")

    manifest: dict = {"source": str(csv_path), "sessions": {}, "rows": len(rows)}
    by_session: dict[str, list[dict]] = {}
    for idx, row in enumerate(rows):
        rec: dict = {}
        for field in CSV_COLUMNS:
            if field in columns:
                header = columns[field]
                if header not in row:
                    raise ValidationError(f"mapped column {header!r} not present in CSV header")
                rec[field] = _convert(field, row[header])
            elif field in constants:
                rec[field] = constants[field]
            else:
                rec[field] = None
        if rec["session_id"] is None:
            rec["session_id"] = "session-0"
        if rec["condition"] is None:
            raise ValidationError("condition must be mapped or given as a constant")
        rec["condition"] = Condition(str(rec["condition"]).lower()).value
        if rec["iteration"] is None:
            rec["iteration"] = idx + 1
        by_session.setdefault(rec["session_id"], []).append(rec)

    out_records: list[ObservationRecord] = []
    for sid, recs in by_session.items():
        flags: list[str] = []
        recs.sort(key=lambda r: r["iteration"])
        if [r["iteration"] for r in recs] != list(range(1, len(recs) + 1)):
            for i, r in enumerate(recs):
                r["iteration"] = i + 1
            flags.append("iterations_renumbered")
        for r in recs:
            if r["p4"] is None:
                if r["condition"] == Condition.FIXED_LOA.value and fixed_step is not None:
                    r["p4"] = float(fixed_step)
                    if "p4_filled_with_fixed_step" not in flags:
                        flags.append("p4_filled_with_fixed_step")
                else:
                    raise ValidationError(
                        f"session {sid}: p4 is unmapped and no fixed_loa_step fill rule applies"
                    )
            items = [r["md_raw"], r["pred1_raw"], r["pred2_raw"], r["use1_raw"], r["use2_raw"]]
            if all(v is not None for v in items):
                scored = score_questionnaire(QuestionnaireResponse(*items))
                for field, val in (("mental_demand", scored.mental_demand),
                                   ("predictability", scored.predictability),
                                   ("usefulness", scored.usefulness)):
                    if r[field] is None:
                        r[field] = val
            elif "item_level_responses_unavailable" not in flags:
                flags.append("item_level_responses_unavailable")
            for field in ("mental_demand", "predictability", "usefulness"):
                if r[field] is None:
                    raise ValidationError(
                        f"session {sid}: cannot derive {field}; map it or the raw items"
                    )
            if r["phase"] is None:
                budget = (TRAINED_SAMPLING_BUDGET
                          if r["condition"] == Condition.TRAINED_LOA.value
                          else FIXED_SAMPLING_BUDGET)
                r["phase"] = (Phase.SAMPLING.value if r["iteration"] <= budget
                              else Phase.OPTIMIZING.value)
                if "phase_inferred_from_budgets" not in flags:
                    flags.append("phase_inferred_from_budgets")
            out_records.append(ObservationRecord(**r))
        manifest["sessions"][sid] = {"records": len(recs), "flags": flags}

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for rec in out_records:
            fh.write(rec.to_json_line() + "\n")
    manifest["output"] = str(out_path)
    return manifest
