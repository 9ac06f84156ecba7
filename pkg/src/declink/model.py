"""Shared domain types, the session-log wire format, and documentation export.

The session log is UTF-8 JSON lines, one record per line, discriminated by
a "type" field ("sentence" | "action" | "control"). Documentation export is
a single JSON document {"session_id": ..., "steps": [...]}.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

Scalar = Union[int, float, str]


class ModelError(Exception):
    """Base class for session-log and step-model errors."""


class MalformedRecord(ModelError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class InvariantViolation(ModelError):
    def __init__(self, line_no: int, rule: str):
        super().__init__(f"line {line_no}: {rule}")
        self.line_no = line_no
        self.rule = rule


class IncompleteStep(ModelError):
    def __init__(self, step_id: str, detail: str = "summary missing for a resolved step"):
        super().__init__(f"{step_id}: {detail}")
        self.step_id = step_id


class ActionType(str, Enum):
    CREATE = "CREATE"
    DELETE = "DELETE"
    MOVE = "MOVE"
    RESIZE = "RESIZE"
    ROTATE = "ROTATE"
    REPARENT = "REPARENT"
    PROPERTY_CHANGE = "PROPERTY_CHANGE"
    TEXT_EDIT = "TEXT_EDIT"

    @property
    def is_layout(self) -> bool:
        """Layout-related actions change shape or position; the rest are style-related."""
        return self in _LAYOUT_TYPES


_LAYOUT_TYPES = frozenset(
    {ActionType.MOVE, ActionType.RESIZE, ActionType.ROTATE, ActionType.REPARENT}
)


@dataclass(frozen=True)
class Sentence:
    idx: int
    t_start: float
    t_end: float
    text: str


@dataclass(frozen=True)
class Action:
    ts: float
    element_id: str
    element_name: str
    action_type: ActionType
    property: Optional[str] = None
    old_value: Optional[Scalar] = None
    new_value: Optional[Scalar] = None
    bbox: Optional[tuple[float, float, float, float]] = None
    snapshot_ref: Optional[str] = None


RECORD_START = "record_start"
RECORD_STOP = "record_stop"


@dataclass(frozen=True)
class Control:
    ts: float
    kind: str  # record_start | record_stop


SessionEvent = Union[Sentence, Action, Control]


@dataclass(frozen=True)
class SentenceGroup:
    group_id: str
    sentence_idxs: tuple[int, ...]
    combined_text: str

    def is_consecutive(self) -> bool:
        return all(b == a + 1 for a, b in zip(self.sentence_idxs, self.sentence_idxs[1:]))


SINGLE_ELEMENT_RUN = "single_element_run"
MULTI_ELEMENT_SAME_ACTION = "multi_element_same_action"


@dataclass(frozen=True)
class ActionGroup:
    group_id: str
    action_refs: tuple[int, ...]
    grouping_basis: str  # single_element_run | multi_element_same_action


CATEGORY_CODES = ("S-SR", "S-PK", "S-CA", "W-SR", "W-PK", "W-CA", "E")

STRONG = "Strong"
WEAK = "Weak"
EMPTY = "Empty"


@dataclass(frozen=True)
class ExplanationAssessment:
    categories: frozenset[str]
    overall: str  # Strong | Weak | Empty
    reason: str


@dataclass(frozen=True)
class Anchor:
    element_id: str
    bbox: tuple[float, float, float, float]


@dataclass(frozen=True)
class InferredRationale:
    text: str
    reasoning: str


MODE_ANSWERED = "answered"
MODE_ACCEPTED = "accepted"
MODE_SUPPLEMENTED = "supplemented"
MODE_REJECTED = "rejected"
RESPONSE_MODES = (MODE_ANSWERED, MODE_ACCEPTED, MODE_SUPPLEMENTED, MODE_REJECTED)


@dataclass(frozen=True)
class ExchangeResponse:
    mode: str
    answer_text: Optional[str] = None
    at: Optional[float] = None


@dataclass(frozen=True)
class ClarificationExchange:
    question_id: str
    question_text: str
    anchor: Optional[Anchor] = None
    inferred_rationale: Optional[InferredRationale] = None
    response: Optional[ExchangeResponse] = None

    @property
    def is_open(self) -> bool:
        # A rejected inference leaves the question open awaiting an answer.
        return self.response is None or self.response.mode == MODE_REJECTED


@dataclass(frozen=True)
class DecisionStepSummary:
    decision_and_actions: str
    rationale: str
    progression: str
    snapshot_refs: tuple[str, ...] = ()


STATUS_SEGMENTED = "segmented"
STATUS_ASSESSED = "assessed"
STATUS_QUESTION_PENDING = "question_pending"
STATUS_RESOLVED_STRONG = "resolved_strong"
STATUS_RESOLVED_WEAK = "resolved_weak"
STATUS_UNASSESSED = "unassessed"
STEP_STATUSES = (
    STATUS_SEGMENTED,
    STATUS_ASSESSED,
    STATUS_QUESTION_PENDING,
    STATUS_RESOLVED_STRONG,
    STATUS_RESOLVED_WEAK,
    STATUS_UNASSESSED,
)


@dataclass(frozen=True)
class CognitiveDecisionStep:
    step_id: str
    sentence_group: Optional[SentenceGroup] = None
    action_groups: tuple[ActionGroup, ...] = ()
    snapshot_refs: tuple[str, ...] = ()
    assessment: Optional[ExplanationAssessment] = None
    exchange: Optional[ClarificationExchange] = None
    summary: Optional[DecisionStepSummary] = None
    status: str = STATUS_SEGMENTED
    audit: tuple[str, ...] = ()

    def __post_init__(self):
        if self.sentence_group is None and not self.action_groups:
            raise ValueError(f"{self.step_id}: step needs a sentence group or action groups")

    @property
    def step_text(self) -> str:
        return self.sentence_group.combined_text if self.sentence_group else ""

    def with_audit(self, note: str) -> "CognitiveDecisionStep":
        return replace(self, audit=self.audit + (note,))


# --- session log parsing -------------------------------------------------

_SENTENCE_KEYS = {"type", "idx", "t_start", "t_end", "text"}
_ACTION_KEYS = {
    "type", "ts", "element_id", "element_name", "action_type",
    "property", "old_value", "new_value", "bbox", "snapshot_ref",
}
_CONTROL_KEYS = {"type", "ts", "kind"}


def _parse_bbox(raw, line_no: int) -> Optional[tuple[float, float, float, float]]:
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise MalformedRecord(line_no, "bbox must be [x, y, w, h]")
    try:
        return tuple(float(v) for v in raw)  # type: ignore[return-value]
    except (TypeError, ValueError):
        raise MalformedRecord(line_no, "bbox values must be numbers")


def _parse_record(rec: dict, line_no: int) -> SessionEvent:
    kind = rec.get("type")
    try:
        if kind == "sentence":
            unknown = set(rec) - _SENTENCE_KEYS
            if unknown:
                raise MalformedRecord(line_no, f"unknown sentence fields: {sorted(unknown)}")
            return Sentence(
                idx=int(rec["idx"]),
                t_start=float(rec["t_start"]),
                t_end=float(rec["t_end"]),
                text=str(rec["text"]),
            )
        if kind == "action":
            unknown = set(rec) - _ACTION_KEYS
            if unknown:
                raise MalformedRecord(line_no, f"unknown action fields: {sorted(unknown)}")
            prop = rec.get("property")
            old_value = rec.get("old_value")
            new_value = rec.get("new_value")
            for name, val in (("old_value", old_value), ("new_value", new_value)):
                if val is not None and not isinstance(val, (int, float, str)):
                    raise MalformedRecord(line_no, f"{name} must be a scalar or string")
            return Action(
                ts=float(rec["ts"]),
                element_id=str(rec["element_id"]),
                element_name=str(rec["element_name"]),
                action_type=ActionType(rec["action_type"]),
                property=None if prop is None else str(prop),
                old_value=old_value,
                new_value=new_value,
                bbox=_parse_bbox(rec.get("bbox"), line_no),
                snapshot_ref=rec.get("snapshot_ref"),
            )
        if kind == "control":
            unknown = set(rec) - _CONTROL_KEYS
            if unknown:
                raise MalformedRecord(line_no, f"unknown control fields: {sorted(unknown)}")
            value = rec["kind"]
            if value not in (RECORD_START, RECORD_STOP):
                raise MalformedRecord(line_no, f"unknown control kind: {value!r}")
            return Control(ts=float(rec["ts"]), kind=value)
    except KeyError as exc:
        raise MalformedRecord(line_no, f"missing field {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(line_no, str(exc))
    raise MalformedRecord(line_no, f"unknown record type: {kind!r}")


def validate_events(events: Iterable[SessionEvent], line_nos: Optional[list[int]] = None) -> None:
    """Re-check SessionEvent stream invariants independently of parsing."""
    next_idx = 0
    last_action_ts = None
    for pos, ev in enumerate(events):
        line_no = line_nos[pos] if line_nos else pos + 1
        if isinstance(ev, Sentence):
            if ev.idx != next_idx:
                raise InvariantViolation(
                    line_no, f"sentence idx must be dense and increasing (expected {next_idx}, got {ev.idx})"
                )
            next_idx += 1
            if ev.t_start > ev.t_end:
                raise InvariantViolation(line_no, "sentence t_start must be <= t_end")
        elif isinstance(ev, Action):
            if last_action_ts is not None and ev.ts < last_action_ts:
                raise InvariantViolation(line_no, "action ts must be non-decreasing in file order")
            last_action_ts = ev.ts
            if ev.action_type is ActionType.PROPERTY_CHANGE and not ev.property:
                raise InvariantViolation(line_no, "PROPERTY_CHANGE requires a property key")


def parse_session_log(stream: Iterable[str]) -> list[SessionEvent]:
    """Parse line-delimited session records, validating stream invariants.

    Raises MalformedRecord for unparseable lines and InvariantViolation when
    the event stream breaks ordering/density rules.
    """
    events: list[SessionEvent] = []
    line_nos: list[int] = []
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}")
        if not isinstance(rec, dict):
            raise MalformedRecord(line_no, "record must be a JSON object")
        events.append(_parse_record(rec, line_no))
        line_nos.append(line_no)
    validate_events(events, line_nos)
    return events


def event_to_record(ev: SessionEvent) -> dict:
    if isinstance(ev, Sentence):
        return {"type": "sentence", "idx": ev.idx, "t_start": ev.t_start, "t_end": ev.t_end, "text": ev.text}
    if isinstance(ev, Action):
        rec: dict = {
            "type": "action",
            "ts": ev.ts,
            "element_id": ev.element_id,
            "element_name": ev.element_name,
            "action_type": ev.action_type.value,
        }
        if ev.property is not None:
            rec["property"] = ev.property
        if ev.old_value is not None:
            rec["old_value"] = ev.old_value
        if ev.new_value is not None:
            rec["new_value"] = ev.new_value
        if ev.bbox is not None:
            rec["bbox"] = list(ev.bbox)
        if ev.snapshot_ref is not None:
            rec["snapshot_ref"] = ev.snapshot_ref
        return rec
    return {"type": "control", "ts": ev.ts, "kind": ev.kind}


def serialize_events(events: Iterable[SessionEvent]) -> Iterator[str]:
    for ev in events:
        yield json.dumps(event_to_record(ev), ensure_ascii=False)


# --- snapshot store ------------------------------------------------------


class SnapshotStore:
    """Content-addressed snapshot files: one file per ref, named by sha256 hex."""

    def __init__(self, root: Optional[Path]):
        self.root = Path(root) if root is not None else None

    def has(self, ref: str) -> bool:
        return self.root is not None and (self.root / ref).is_file()

    def load(self, ref: str) -> bytes:
        if self.root is None:
            raise KeyError(ref)
        path = self.root / ref
        if not path.is_file():
            raise KeyError(ref)
        return path.read_bytes()

    def put(self, data: bytes) -> str:
        if self.root is None:
            raise ValueError("snapshot store has no root directory")
        ref = hashlib.sha256(data).hexdigest()
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / ref).write_bytes(data)
        return ref

    def load_many(self, refs: Iterable[str]) -> list[bytes]:
        return [self.load(r) for r in refs if self.has(r)]


def check_snapshot_refs(events: Iterable[SessionEvent], store: SnapshotStore) -> None:
    for pos, ev in enumerate(events, start=1):
        if isinstance(ev, Action) and ev.snapshot_ref and not store.has(ev.snapshot_ref):
            raise InvariantViolation(pos, f"snapshot_ref {ev.snapshot_ref} does not resolve in the store")


# --- serialization of steps and documentation export ---------------------


def assessment_to_record(a: ExplanationAssessment) -> dict:
    return {"categories": sorted(a.categories), "overall": a.overall, "reason": a.reason}


def exchange_to_record(x: ClarificationExchange) -> dict:
    rec: dict = {"question_id": x.question_id, "question_text": x.question_text}
    rec["anchor"] = (
        {"element_id": x.anchor.element_id, "bbox": list(x.anchor.bbox)} if x.anchor else None
    )
    rec["inferred_rationale"] = (
        {"text": x.inferred_rationale.text, "reasoning": x.inferred_rationale.reasoning}
        if x.inferred_rationale
        else None
    )
    if x.response is not None:
        rec["response"] = {
            "mode": x.response.mode,
            "answer_text": x.response.answer_text,
            "at": x.response.at,
        }
    return rec


def summary_to_record(s: DecisionStepSummary) -> dict:
    return {
        "decision_and_actions": s.decision_and_actions,
        "rationale": s.rationale,
        "progression": s.progression,
        "snapshot_refs": list(s.snapshot_refs),
    }


def step_to_record(step: CognitiveDecisionStep) -> dict:
    return {
        "step_id": step.step_id,
        "status": step.status,
        "sentence_group": (
            {
                "group_id": step.sentence_group.group_id,
                "sentence_idxs": list(step.sentence_group.sentence_idxs),
                "combined_text": step.sentence_group.combined_text,
            }
            if step.sentence_group
            else None
        ),
        "action_groups": [
            {
                "group_id": g.group_id,
                "action_refs": list(g.action_refs),
                "grouping_basis": g.grouping_basis,
            }
            for g in step.action_groups
        ],
        "snapshot_refs": list(step.snapshot_refs),
        "assessment": assessment_to_record(step.assessment) if step.assessment else None,
        "exchange": exchange_to_record(step.exchange) if step.exchange else None,
        "summary": summary_to_record(step.summary) if step.summary else None,
        "audit": list(step.audit),
    }


def export_documentation(steps: list[CognitiveDecisionStep], session_id: str) -> dict:
    """Build the documentation record: one entry per step, in step order.

    Raises IncompleteStep for unprocessed (segmented) steps and for resolved
    steps that are missing a summary.
    """
    entries = []
    for step in steps:
        if step.status == STATUS_SEGMENTED:
            raise IncompleteStep(step.step_id, "step has not been processed")
        if step.status in (STATUS_RESOLVED_STRONG, STATUS_RESOLVED_WEAK) and step.summary is None:
            raise IncompleteStep(step.step_id)
        entry = {
            "step_id": step.step_id,
            "status": step.status,
            "decision_and_actions": step.summary.decision_and_actions if step.summary else None,
            "rationale": step.summary.rationale if step.summary else None,
            "progression": step.summary.progression if step.summary else None,
            "snapshot_refs": list(step.snapshot_refs),
            "assessment": assessment_to_record(step.assessment) if step.assessment else None,
            "qa": exchange_to_record(step.exchange) if step.exchange else None,
        }
        entries.append(entry)
    return {"session_id": session_id, "steps": entries}
