"""Session lifecycle: event ingestion, trigger-driven pipeline runs,
question/inference queueing, response processing, and persistence.

Persistence is two append-only logs per session (events, responses) plus a
state snapshot written after each mutation burst. Replaying the logs through
the same code path reproduces identical steps, summaries, and exchange
order, because the pipeline is deterministic under a scripted provider:
triggers are evaluated per appended event (batch boundaries don't matter)
and responses are replayed at the event index where they were submitted.

A session starts in recording mode; control events toggle it. The pause
trigger uses event time, not wall clock, so replay cannot drift.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .. import gateway as gw
from .. import rationale, segmentation as seg
from ..gateway.errors import SchemaViolation
from ..model import (
    RECORD_START,
    RECORD_STOP,
    STATUS_ASSESSED,
    STATUS_QUESTION_PENDING,
    STATUS_RESOLVED_STRONG,
    STATUS_UNASSESSED,
    STRONG,
    Action,
    ClarificationExchange,
    CognitiveDecisionStep,
    Control,
    Sentence,
    SessionEvent,
    SnapshotStore,
    event_to_record,
    exchange_to_record,
    export_documentation,
    parse_session_log,
    step_to_record,
    summary_to_record,
)


class ServiceError(Exception):
    pass


class UnknownSession(ServiceError):
    pass


class UnknownQuestion(ServiceError):
    pass


class AlreadyResolved(ServiceError):
    pass


class OrderViolation(ServiceError):
    pass


class StorageFailure(ServiceError):
    pass


@dataclass
class EngineConfig:
    variant: seg.GroupingVariant = seg.GroupingVariant.V3
    simultaneity_window: float = seg.DEFAULT_SIMULTANEITY_WINDOW
    few_shots: str = ""


def event_time(ev: SessionEvent) -> float:
    return ev.t_start if isinstance(ev, Sentence) else ev.ts


@dataclass
class SessionRuntime:
    session_id: str
    events: list[SessionEvent] = field(default_factory=list)
    cursor: int = 0
    steps: list[CognitiveDecisionStep] = field(default_factory=list)
    summaries: list[tuple[str, object]] = field(default_factory=list)  # (step_id, summary), step order
    revision: int = 0
    recording: bool = True
    last_action_ts: Optional[float] = None
    step_counter: int = 0
    exchange_revisions: dict[str, int] = field(default_factory=dict)
    question_order: list[str] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)
    cond: threading.Condition = field(init=False)

    def __post_init__(self):
        self.cond = threading.Condition(self.lock)

    def pending(self) -> tuple[int, int]:
        sentences = actions = 0
        for ev in self.events[self.cursor :]:
            if isinstance(ev, Sentence):
                sentences += 1
            elif isinstance(ev, Action):
                actions += 1
        return sentences, actions

    def transcript(self) -> str:
        return " ".join(ev.text for ev in self.events if isinstance(ev, Sentence))


class SessionEngine:
    def __init__(
        self,
        data_dir: Path,
        gateway: gw.Gateway,
        config: Optional[EngineConfig] = None,
        snapshots_root: Optional[Path] = None,
    ):
        self.data_dir = Path(data_dir)
        self.gateway = gateway
        self.config = config or EngineConfig()
        self.snapshots = SnapshotStore(snapshots_root or self.data_dir / "snapshots")
        self._sessions: dict[str, SessionRuntime] = {}
        self._questions: dict[str, tuple[str, int]] = {}  # qid -> (session_id, step index)
        self._lock = threading.Lock()
        self._recover_existing()

    # -- persistence helpers -------------------------------------------------

    def _session_dir(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / session_id

    def _recover_existing(self) -> None:
        root = self.data_dir / "sessions"
        if not root.is_dir():
            return
        for session_dir in sorted(root.iterdir()):
            if (session_dir / "events.log").is_file():
                self._replay(session_dir.name)

    def _append_log(self, session_id: str, name: str, record: dict) -> None:
        path = self._session_dir(session_id) / name
        try:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise StorageFailure(str(exc))

    def _write_state_snapshot(self, rt: SessionRuntime) -> None:
        state = {
            "session_id": rt.session_id,
            "revision": rt.revision,
            "cursor": rt.cursor,
            "event_count": len(rt.events),
            "recording": rt.recording,
            "steps": [step_to_record(s) for s in rt.steps],
            "summaries": [
                {"step_id": sid, **summary_to_record(s)} for sid, s in rt.summaries
            ],
        }
        path = self._session_dir(rt.session_id) / "state.json"
        try:
            path.write_text(json.dumps(state, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(str(exc))

    def _replay(self, session_id: str) -> SessionRuntime:
        session_dir = self._session_dir(session_id)
        events = parse_session_log(
            (session_dir / "events.log").read_text(encoding="utf-8").splitlines()
        )
        responses: list[dict] = []
        responses_path = session_dir / "responses.log"
        if responses_path.is_file():
            responses = [
                json.loads(line)
                for line in responses_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        rt = SessionRuntime(session_id=session_id)
        with self._lock:
            self._sessions[session_id] = rt
        queue = list(responses)

        def apply_due(count: int) -> None:
            while queue and queue[0]["after_event_index"] <= count:
                rec = queue.pop(0)
                self._apply_response(
                    rt, rec["question_id"], rec["mode"], rec.get("answer_text"), rec.get("at"),
                    persist=False,
                )

        with rt.lock:
            apply_due(0)
            for ev in events:
                self._ingest_event(rt, ev, persist=False)
                apply_due(len(rt.events))
            apply_due(len(rt.events))
        return rt

    # -- session API ------------------------------------------------------------

    def create_session(self, session_id: Optional[str] = None) -> str:
        session_id = session_id or uuid.uuid4().hex[:12]
        with self._lock:
            if session_id in self._sessions:
                raise StorageFailure(f"session {session_id} already exists")
            rt = SessionRuntime(session_id=session_id)
            self._sessions[session_id] = rt
        try:
            self._session_dir(session_id).mkdir(parents=True, exist_ok=False)
            (self._session_dir(session_id) / "events.log").touch()
        except OSError as exc:
            with self._lock:
                self._sessions.pop(session_id, None)
            raise StorageFailure(str(exc))
        self._write_state_snapshot(rt)
        return session_id

    def _runtime(self, session_id: str) -> SessionRuntime:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSession(session_id)

    def session_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)

    def append_events(self, session_id: str, batch: Sequence[SessionEvent]) -> int:
        """Append a batch atomically; triggers are evaluated per event so the
        resulting steps do not depend on how events were batched."""
        rt = self._runtime(session_id)
        with rt.lock:
            self._validate_batch(rt, batch)
            for ev in batch:
                self._ingest_event(rt, ev, persist=True)
            if batch:
                self._write_state_snapshot(rt)
            rt.cond.notify_all()
        return len(batch)

    def _validate_batch(self, rt: SessionRuntime, batch: Sequence[SessionEvent]) -> None:
        last_action = rt.last_action_ts
        next_idx = sum(1 for ev in rt.events if isinstance(ev, Sentence))
        for ev in batch:
            if isinstance(ev, Action):
                if last_action is not None and ev.ts < last_action:
                    raise OrderViolation(f"action ts {ev.ts} older than log tail {last_action}")
                last_action = ev.ts
            elif isinstance(ev, Sentence):
                if ev.idx != next_idx:
                    raise OrderViolation(f"sentence idx {ev.idx} does not continue the log (expected {next_idx})")
                next_idx += 1

    def _ingest_event(self, rt: SessionRuntime, ev: SessionEvent, persist: bool) -> None:
        self._maybe_pause_flush(rt, event_time(ev), persist)

        if persist:
            self._append_log(rt.session_id, "events.log", event_to_record(ev))
        rt.events.append(ev)
        rt.revision += 1

        if isinstance(ev, Control):
            if ev.kind == RECORD_START:
                rt.recording = True
            elif ev.kind == RECORD_STOP:
                rt.recording = False
                sentences, actions = rt.pending()
                state = seg.BufferState(
                    pending_sentences=sentences,
                    pending_actions=actions,
                    seconds_since_last_action=0.0,
                    recording=False,
                )
                if seg.should_trigger(state):
                    self._flush(rt, upto=len(rt.events), persist=persist)
                else:
                    rt.cursor = len(rt.events)
            return

        if isinstance(ev, Action):
            rt.last_action_ts = ev.ts
        sentences, actions = rt.pending()
        state = seg.BufferState(
            pending_sentences=sentences,
            pending_actions=actions,
            seconds_since_last_action=0.0,
            recording=True,  # count thresholds apply regardless of recording state
        )
        if seg.should_trigger(state):
            self._flush(rt, upto=len(rt.events), persist=persist)

    def _maybe_pause_flush(self, rt: SessionRuntime, now: float, persist: bool) -> None:
        """Flush the content that preceded a >3 s silence after the last action.

        Pending events newer than the silence horizon belong to the next
        window, so the flush covers only the prefix up to it; that keeps a
        long verbal run after a pause from being flushed one sentence at a
        time against a stale action timestamp.
        """
        if not rt.recording or rt.last_action_ts is None or rt.cursor >= len(rt.events):
            return
        horizon = rt.last_action_ts + seg.PAUSE_THRESHOLD
        if now <= horizon:
            return
        upto = rt.cursor
        while upto < len(rt.events) and event_time(rt.events[upto]) <= horizon:
            upto += 1
        if upto == rt.cursor:
            return
        sentences = sum(1 for e in rt.events[rt.cursor : upto] if isinstance(e, Sentence))
        actions = sum(1 for e in rt.events[rt.cursor : upto] if isinstance(e, Action))
        state = seg.BufferState(
            pending_sentences=sentences,
            pending_actions=actions,
            seconds_since_last_action=now - rt.last_action_ts,
            recording=rt.recording,
        )
        if seg.should_trigger(state):
            self._flush(rt, upto=upto, persist=persist)

    # -- pipeline -----------------------------------------------------------------

    def _flush(self, rt: SessionRuntime, upto: int, persist: bool) -> None:
        window = list(enumerate(rt.events))[rt.cursor : upto]
        rt.cursor = upto
        sentences = [ev for _, ev in window if isinstance(ev, Sentence)]
        action_pairs = [(ref, ev) for ref, ev in window if isinstance(ev, Action)]
        if not sentences and not action_pairs:
            return
        steps = self._segment_window(rt, sentences, action_pairs)
        for step in steps:
            self._finalize_step(rt, step)
        if persist:
            self._write_state_snapshot(rt)
        rt.cond.notify_all()

    def _segment_window(
        self,
        rt: SessionRuntime,
        sentences: list[Sentence],
        action_pairs: list[tuple[int, Action]],
    ) -> list[CognitiveDecisionStep]:
        refs = [ref for ref, _ in action_pairs]
        actions = [act for _, act in action_pairs]
        groups = (
            seg.link_sentences(sentences, self.gateway, few_shots=self.config.few_shots)
            if sentences
            else []
        )
        action_groups = seg.link_actions(
            actions, self.config.variant, self.config.simultaneity_window, refs=refs
        )
        if groups and action_groups:
            images = self.snapshots.load_many(
                [a.snapshot_ref for a in actions if a.snapshot_ref]
            )
            link_set = seg.link_sentence_action(groups, actions, self.gateway, images=images)
        else:
            link_set = seg.LinkSet()
        transcript = rt.transcript()

        def assigner(orphan, left_text, right_text):
            return seg.assign_orphan(transcript, orphan, left_text, right_text, self.gateway)

        return seg.assemble_steps(
            groups, action_groups, link_set, sentences, actions, refs=refs, assigner=assigner
        )

    def _actions_by_ref(self, rt: SessionRuntime) -> dict[int, Action]:
        return {i: ev for i, ev in enumerate(rt.events) if isinstance(ev, Action)}

    def _finalize_step(self, rt: SessionRuntime, step: CognitiveDecisionStep) -> None:
        step_id = f"s-{rt.step_counter:03d}"
        rt.step_counter += 1
        step = replace(step, step_id=step_id)
        transcript = rt.transcript()

        if not step.step_text.strip():
            # Silent work: actions with no linked explanation are never questioned.
            step = replace(step, status=STATUS_UNASSESSED)
        else:
            try:
                assessment = rationale.evaluate_rationale(
                    step.step_text, self.gateway, few_shots=self.config.few_shots
                )
            except SchemaViolation:
                assessment = None
            if assessment is None:
                step = replace(step, status=STATUS_UNASSESSED)
            elif assessment.overall == STRONG:
                step = self._summarize_into(rt, replace(step, assessment=assessment))
            else:
                step = self._open_exchange(rt, replace(step, assessment=assessment))

        rt.steps.append(step)
        rt.revision += 1
        if step.exchange is not None:
            qid = step.exchange.question_id
            with self._lock:
                self._questions[qid] = (rt.session_id, len(rt.steps) - 1)
            rt.exchange_revisions[qid] = rt.revision
            rt.question_order.append(qid)

    def _summarize_into(self, rt: SessionRuntime, step: CognitiveDecisionStep) -> CognitiveDecisionStep:
        try:
            summary = rationale.summarize_step(
                rt.transcript(),
                step.step_text,
                step.snapshot_refs,
                self.gateway,
                images=self.snapshots.load_many(step.snapshot_refs),
            )
        except SchemaViolation:
            summary = None
        step = replace(step, summary=summary, status=STATUS_RESOLVED_STRONG)
        if summary is not None:
            self._record_summary(rt, step.step_id, summary)
        return step

    def _record_summary(self, rt: SessionRuntime, step_id: str, summary) -> None:
        # Keep the list in step order (ids are zero-padded and sortable).
        entry = (step_id, summary)
        for i, (existing_id, _) in enumerate(rt.summaries):
            if existing_id == step_id:
                rt.summaries[i] = entry
                return
            if existing_id > step_id:
                rt.summaries.insert(i, entry)
                rt.revision += 1
                return
        rt.summaries.append(entry)
        rt.revision += 1

    def _open_exchange(self, rt: SessionRuntime, step: CognitiveDecisionStep) -> CognitiveDecisionStep:
        assessment = step.assessment
        transcript = rt.transcript()
        try:
            question = rationale.generate_question(
                transcript, step.step_text, assessment.overall, assessment.reason, self.gateway
            )
        except SchemaViolation:
            return replace(step, status=STATUS_ASSESSED)
        anchor = rationale.anchor_question(step, self._actions_by_ref(rt))
        inference = rationale.infer_rationale(
            transcript, step.step_text, assessment.reason, list(rt.summaries), self.gateway
        )
        exchange = ClarificationExchange(
            question_id=f"q-{rt.session_id}-{step.step_id}",
            question_text=question,
            anchor=anchor,
            inferred_rationale=inference.inferred,
        )
        return replace(step, exchange=exchange, status=STATUS_QUESTION_PENDING)

    # -- questions and responses -----------------------------------------------------

    def poll_questions(self, session_id: str, since_revision: int) -> dict:
        rt = self._runtime(session_id)
        with rt.lock:
            return self._question_view(rt, since_revision)

    def wait_questions(self, session_id: str, since_revision: int, timeout: float) -> dict:
        """Long-poll: hold until an exchange newer than since_revision exists
        or the timeout elapses."""
        rt = self._runtime(session_id)
        deadline = time.monotonic() + timeout
        with rt.cond:
            while True:
                view = self._question_view(rt, since_revision)
                remaining = deadline - time.monotonic()
                if view["exchanges"] or remaining <= 0:
                    return view
                rt.cond.wait(min(remaining, 1.0))

    def _question_view(self, rt: SessionRuntime, since_revision: int) -> dict:
        exchanges = []
        for qid in rt.question_order:
            opened = rt.exchange_revisions[qid]
            if opened <= since_revision:
                continue
            _, idx = self._questions[qid]
            step = rt.steps[idx]
            record = exchange_to_record(step.exchange)
            record["step_id"] = step.step_id
            record["opened_revision"] = opened
            record["status"] = "open" if step.exchange.is_open else "resolved"
            exchanges.append(record)
        return {"revision": rt.revision, "exchanges": exchanges}

    def submit_response(
        self,
        question_id: str,
        mode: str,
        answer_text: Optional[str] = None,
        at: Optional[float] = None,
    ) -> dict:
        with self._lock:
            if question_id not in self._questions:
                raise UnknownQuestion(question_id)
            session_id, _ = self._questions[question_id]
        rt = self._runtime(session_id)
        if at is None:
            at = time.time()
        with rt.lock:
            result = self._apply_response(rt, question_id, mode, answer_text, at, persist=True)
            rt.cond.notify_all()
            return result

    def _apply_response(
        self,
        rt: SessionRuntime,
        question_id: str,
        mode: str,
        answer_text: Optional[str],
        at: Optional[float],
        persist: bool,
    ) -> dict:
        with self._lock:
            if question_id not in self._questions:
                raise UnknownQuestion(question_id)
            _, idx = self._questions[question_id]
        step = rt.steps[idx]
        if step.exchange is None:
            raise UnknownQuestion(question_id)
        if not step.exchange.is_open:
            raise AlreadyResolved(question_id)
        updated = rationale.process_response(
            step,
            mode,
            answer_text,
            at,
            self.gateway,
            rt.transcript(),
            images=self.snapshots.load_many(step.snapshot_refs),
            few_shots=self.config.few_shots,
        )
        rt.steps[idx] = updated
        rt.revision += 1
        if updated.summary is not None and step.summary is None:
            self._record_summary(rt, updated.step_id, updated.summary)
        if persist:
            self._append_log(
                rt.session_id,
                "responses.log",
                {
                    "after_event_index": len(rt.events),
                    "question_id": question_id,
                    "mode": mode,
                    "answer_text": answer_text,
                    "at": at,
                },
            )
            self._write_state_snapshot(rt)
        return {"step_id": updated.step_id, "status": updated.status}

    # -- read views ---------------------------------------------------------------------

    def get_documentation(self, session_id: str) -> dict:
        rt = self._runtime(session_id)
        with rt.lock:
            return export_documentation(list(rt.steps), session_id)

    def get_steps(self, session_id: str) -> dict:
        rt = self._runtime(session_id)
        with rt.lock:
            return {
                "session_id": session_id,
                "revision": rt.revision,
                "steps": [step_to_record(s) for s in rt.steps],
            }

    def flush_pending(self, session_id: str) -> None:
        """Force-process any buffered events (offline runs call this at EOF)."""
        rt = self._runtime(session_id)
        with rt.lock:
            if rt.cursor < len(rt.events):
                self._flush(rt, upto=len(rt.events), persist=True)
                rt.cond.notify_all()
