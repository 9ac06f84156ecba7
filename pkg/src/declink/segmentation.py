"""Workflow segmentation: sentence grouping, action grouping, cross-linking,
orphan assignment, step assembly, and the real-time trigger rule.

Sentence grouping and sentence-action linking go through the provider
gateway; action grouping and the trigger rule are deterministic local code.
Every provider failure has a total fallback so a capture session never
stalls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

from . import gateway as gw
from .gateway.errors import SchemaViolation
from .model import (
    MULTI_ELEMENT_SAME_ACTION,
    SINGLE_ELEMENT_RUN,
    STATUS_SEGMENTED,
    Action,
    ActionGroup,
    CognitiveDecisionStep,
    Sentence,
    SentenceGroup,
)

DEFAULT_SIMULTANEITY_WINDOW = 0.5  # seconds; batched multi-select edits land inside


class GroupingVariant(str, Enum):
    V1 = "v1"  # consecutive actions on one element, regardless of type
    V2 = "v2"  # consecutive actions on one element within one layout/style class
    V3 = "v3"  # consecutive identical actions on one element (production default)


def canon_ts(ts: float) -> str:
    return f"{ts:.3f}"


# --- variable rendering ---------------------------------------------------
# Structured inputs are rendered as JSON so fixtures hash stably and the
# heuristic responder can parse them back.


def render_transcript_sentences(sentences: Sequence[Sentence]) -> str:
    return json.dumps([s.text for s in sentences], ensure_ascii=False)


def render_segments(groups: Sequence[SentenceGroup]) -> str:
    return json.dumps(
        [{"index": i, "sentences": g.combined_text} for i, g in enumerate(groups)],
        ensure_ascii=False,
    )


def render_action_log(actions: Sequence[Action]) -> str:
    entries = []
    for act in actions:
        entry: dict = {
            "timestamp": canon_ts(act.ts),
            "element": act.element_name,
            "element_id": act.element_id,
            "action": act.action_type.value,
        }
        if act.property is not None:
            entry["property"] = act.property
        if act.old_value is not None or act.new_value is not None:
            entry["change"] = {"from": act.old_value, "to": act.new_value}
        entries.append(entry)
    return json.dumps(entries, ensure_ascii=False)


# --- sentence linking -----------------------------------------------------


def _norm(text: str) -> str:
    return " ".join(text.split())


def _match_groups_to_idxs(group_map: dict[str, str], sentences: Sequence[Sentence]) -> list[list[int]]:
    """Recover sentence indices from each group's combined text.

    Greedy in-order matching: scan the window's sentences once per group and
    consume occurrences of each sentence's text left to right.
    """
    member_lists: list[list[int]] = []
    for key in sorted(group_map, key=int):
        text = _norm(group_map[key])
        pos = 0
        members: list[int] = []
        for s in sentences:
            needle = _norm(s.text)
            if not needle:
                continue
            found = text.find(needle, pos)
            if found != -1:
                members.append(s.idx)
                pos = found + len(needle)
        member_lists.append(members)
    return member_lists


def repair_sentence_groups(member_lists: Sequence[Sequence[int]], window_idxs: Sequence[int]) -> list[list[int]]:
    """Make any proposed grouping satisfy the SentenceGroup invariants.

    Non-consecutive members split at gaps, overlaps resolved in favor of the
    earlier group, uncovered sentences become singletons, groups ordered by
    first index. Total: never fails, covers every window index exactly once.
    """
    window_set = set(window_idxs)
    claimed: set[int] = set()
    runs: list[list[int]] = []
    for members in member_lists:
        kept = []
        for i in members:
            if i in window_set and i not in claimed:
                kept.append(i)
                claimed.add(i)
        run: list[int] = []
        for i in kept:
            if run and i != run[-1] + 1:
                runs.append(run)
                run = []
            run.append(i)
        if run:
            runs.append(run)
    runs.extend([i] for i in sorted(window_set - claimed))
    runs.sort(key=lambda r: r[0])
    return runs


def _groups_from_runs(runs: Sequence[Sequence[int]], by_idx: dict[int, Sentence]) -> list[SentenceGroup]:
    return [
        SentenceGroup(
            group_id=f"g{run[0]}",
            sentence_idxs=tuple(run),
            combined_text=" ".join(by_idx[i].text for i in run),
        )
        for run in runs
    ]


def singleton_groups(sentences: Sequence[Sentence]) -> list[SentenceGroup]:
    return [
        SentenceGroup(group_id=f"g{s.idx}", sentence_idxs=(s.idx,), combined_text=s.text)
        for s in sentences
    ]


def link_sentences(
    sentences: Sequence[Sentence],
    gateway: gw.Gateway,
    few_shots: str = "",
) -> list[SentenceGroup]:
    """Group consecutive sentences that describe the same element/purpose.

    Falls back to one group per sentence when the provider output cannot be
    parsed. A single-sentence window is a forced singleton and skips the call.
    """
    if not sentences:
        raise ValueError("link_sentences needs a non-empty window")
    by_idx = {s.idx: s for s in sentences}
    if len(sentences) == 1:
        return singleton_groups(sentences)
    variables = {"few_shots": few_shots, "transcript": render_transcript_sentences(sentences)}
    try:
        group_map, _ = gateway.complete_structured(gw.SENTENCE_LINK, variables)
    except SchemaViolation:
        return singleton_groups(sentences)
    member_lists = _match_groups_to_idxs(group_map, sentences)
    runs = repair_sentence_groups(member_lists, [s.idx for s in sentences])
    return _groups_from_runs(runs, by_idx)


# --- action linking ---------------------------------------------------------


def _same_action_key(a: Action, b: Action) -> bool:
    return a.action_type is b.action_type and a.property == b.property


def _continues_run(prev: Action, cur: Action, variant: GroupingVariant) -> bool:
    if cur.element_id != prev.element_id:
        return False
    if variant is GroupingVariant.V1:
        return True
    if variant is GroupingVariant.V2:
        return cur.action_type.is_layout == prev.action_type.is_layout
    return _same_action_key(prev, cur)


def link_actions(
    actions: Sequence[Action],
    variant: GroupingVariant = GroupingVariant.V3,
    simultaneity_window: float = DEFAULT_SIMULTANEITY_WINDOW,
    refs: Optional[Sequence[int]] = None,
) -> list[ActionGroup]:
    """Deterministic two-pass grouping. Every action lands in exactly one group.

    Pass 1 takes maximal same-(type, property) runs whose adjacent gaps fit in
    the simultaneity window and that span at least two elements. Pass 2 groups
    the remaining events into per-element runs according to the variant.
    """
    refs = list(refs) if refs is not None else list(range(len(actions)))
    if len(refs) != len(actions):
        raise ValueError("refs must parallel actions")
    n = len(actions)
    groups: list[tuple[int, ActionGroup]] = []
    in_multi = [False] * n

    i = 0
    while i < n:
        j = i
        while (
            j + 1 < n
            and _same_action_key(actions[j + 1], actions[i])
            and actions[j + 1].ts - actions[j].ts <= simultaneity_window
        ):
            j += 1
        if len({actions[p].element_id for p in range(i, j + 1)}) >= 2:
            groups.append(
                (
                    i,
                    ActionGroup(
                        group_id=f"a{refs[i]}",
                        action_refs=tuple(refs[p] for p in range(i, j + 1)),
                        grouping_basis=MULTI_ELEMENT_SAME_ACTION,
                    ),
                )
            )
            for p in range(i, j + 1):
                in_multi[p] = True
        i = j + 1

    run: list[int] = []
    for p in range(n):
        if in_multi[p]:
            continue
        if run and not _continues_run(actions[run[-1]], actions[p], variant):
            groups.append(
                (run[0], ActionGroup(f"a{refs[run[0]]}", tuple(refs[q] for q in run), SINGLE_ELEMENT_RUN))
            )
            run = []
        run.append(p)
    if run:
        groups.append(
            (run[0], ActionGroup(f"a{refs[run[0]]}", tuple(refs[q] for q in run), SINGLE_ELEMENT_RUN))
        )

    groups.sort(key=lambda item: item[0])
    return [g for _, g in groups]


# --- sentence-action linking ------------------------------------------------


@dataclass(frozen=True)
class LinkSet:
    """Bidirectional links between action timestamps and sentence-group indices.

    links and reversed_links are exact transposes by construction.
    """

    links: dict[str, tuple[str, ...]] = field(default_factory=dict)
    reversed_links: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges: set[tuple[str, str]]) -> "LinkSet":
        links: dict[str, list[str]] = {}
        rev: dict[str, list[str]] = {}
        for ts, gid in sorted(edges, key=lambda e: (float(e[0]), int(e[1]))):
            links.setdefault(ts, []).append(gid)
            rev.setdefault(gid, []).append(ts)
        return cls(
            links={k: tuple(v) for k, v in links.items()},
            reversed_links={k: tuple(v) for k, v in rev.items()},
        )

    @property
    def empty(self) -> bool:
        return not self.links


def link_sentence_action(
    sentence_groups: Sequence[SentenceGroup],
    actions: Sequence[Action],
    gateway: gw.Gateway,
    images: Sequence[bytes] = (),
) -> LinkSet:
    """Link sentence groups to action timestamps via the vision prompt.

    The response is symmetrized (union of both directions), and timestamps or
    group indices that do not exist in this window are dropped. A schema
    failure yields an empty LinkSet so assembly can fall back to positional
    pairing.
    """
    if not sentence_groups or not actions:
        raise ValueError("link_sentence_action needs non-empty groups and actions")
    variables = {
        "segmented_transcripts": render_segments(sentence_groups),
        "sets_of_design_action_and_screenshot": render_action_log(actions),
    }
    try:
        parsed, _ = gateway.complete_structured(gw.SA_LINK, variables, images=images)
    except SchemaViolation:
        return LinkSet()

    known_ts = {canon_ts(a.ts) for a in actions}
    known_gids = {str(i) for i in range(len(sentence_groups))}

    def _canon_key(key: str) -> Optional[str]:
        try:
            return canon_ts(float(key))
        except ValueError:
            return None

    edges: set[tuple[str, str]] = set()
    for ts_key, gids in parsed["links"]:
        ts = _canon_key(ts_key)
        if ts is None or ts not in known_ts:
            continue
        edges.update((ts, g) for g in gids if g in known_gids)
    for gid, ts_keys in parsed["reversed_links"]:
        if gid not in known_gids:
            continue
        for ts_key in ts_keys:
            ts = _canon_key(ts_key)
            if ts is not None and ts in known_ts:
                edges.add((ts, gid))
    return LinkSet.from_edges(edges)


# --- orphan assignment --------------------------------------------------------

ASSIGN_LEFT = "left"
ASSIGN_RIGHT = "right"
ASSIGN_UNRELATED = "unrelated"


def assign_orphan(
    full_transcript: str,
    orphan: SentenceGroup,
    left_text: str,
    right_text: str,
    gateway: gw.Gateway,
) -> str:
    """Decide where an unlinked sentence group belongs: left, right, or unrelated.

    Both neighbors empty short-circuits to 'unrelated' without a model call;
    schema failures also resolve to 'unrelated'.
    """
    if not left_text.strip() and not right_text.strip():
        return ASSIGN_UNRELATED
    variables = {
        "transcript": full_transcript,
        "unassigned_grouped_sentence": orphan.combined_text,
        "left_grouped_sentence": left_text,
        "right_grouped_sentence": right_text,
    }
    try:
        decision, _ = gateway.complete_structured(gw.SENTENCE_ASSIGN, variables)
    except SchemaViolation:
        return ASSIGN_UNRELATED
    return decision


# --- step assembly --------------------------------------------------------------


def _span_of_group(g: SentenceGroup, by_idx: dict[int, Sentence]) -> tuple[float, float]:
    return by_idx[g.sentence_idxs[0]].t_start, by_idx[g.sentence_idxs[-1]].t_end


def _span_of_action_group(ag: ActionGroup, by_ref: dict[int, Action]) -> tuple[float, float]:
    return by_ref[ag.action_refs[0]].ts, by_ref[ag.action_refs[-1]].ts


def positional_edges(
    sentence_groups: Sequence[SentenceGroup],
    action_groups: Sequence[ActionGroup],
    by_idx: dict[int, Sentence],
    by_ref: dict[int, Action],
) -> set[tuple[int, int]]:
    """Fallback pairing when no links exist: attach each action group to the
    sentence group with the largest time overlap. Touching intervals (a point
    action inside or at the edge of a sentence span) count; ties go to the
    earlier group."""
    edges: set[tuple[int, int]] = set()
    spans = [_span_of_group(g, by_idx) for g in sentence_groups]
    for ai, ag in enumerate(action_groups):
        a_start, a_end = _span_of_action_group(ag, by_ref)
        best_gi: Optional[int] = None
        best_overlap = float("-inf")
        for gi, (s_start, s_end) in enumerate(spans):
            overlap = min(a_end, s_end) - max(a_start, s_start)
            if overlap >= 0 and overlap > best_overlap:
                best_gi, best_overlap = gi, overlap
        if best_gi is not None:
            edges.add((best_gi, ai))
    return edges


def _merge_sentence_groups(groups: list[SentenceGroup]) -> SentenceGroup:
    ordered = sorted(groups, key=lambda g: g.sentence_idxs[0])
    idxs = tuple(sorted({i for g in groups for i in g.sentence_idxs}))
    return SentenceGroup(
        group_id=ordered[0].group_id,
        sentence_idxs=idxs,
        combined_text=" ".join(g.combined_text for g in ordered),
    )


Assigner = Callable[[SentenceGroup, str, str], str]


def assemble_steps(
    sentence_groups: Sequence[SentenceGroup],
    action_groups: Sequence[ActionGroup],
    link_set: LinkSet,
    sentences: Sequence[Sentence],
    actions: Sequence[Action],
    refs: Optional[Sequence[int]] = None,
    assigner: Optional[Assigner] = None,
) -> list[CognitiveDecisionStep]:
    """Build decision steps as connected components of the link graph.

    Sentence-only components are routed through the assigner (left / right /
    unrelated); without an assigner they stay as their own steps. Components
    joined through a shared log are kept whole, with an audit note when that
    merges multiple sentence groups. Steps come out ordered by earliest
    sentence start / action timestamp. Step ids are provisional ("p0"...);
    the session layer renumbers.
    """
    by_idx = {s.idx: s for s in sentences}
    by_ref: dict[int, Action] = {}
    refs = list(refs) if refs is not None else list(range(len(actions)))
    for ref, act in zip(refs, actions):
        by_ref[ref] = act

    ts_to_ai: dict[str, list[int]] = {}
    for ai, ag in enumerate(action_groups):
        for ref in ag.action_refs:
            ts_to_ai.setdefault(canon_ts(by_ref[ref].ts), []).append(ai)

    edges: set[tuple[int, int]] = set()
    if not link_set.empty:
        for gid, ts_list in link_set.reversed_links.items():
            gi = int(gid)
            for ts in ts_list:
                for ai in ts_to_ai.get(ts, ()):
                    edges.add((gi, ai))
    elif sentence_groups and action_groups:
        edges = positional_edges(sentence_groups, action_groups, by_idx, by_ref)

    # Connected components over the bipartite graph.
    parent: dict[tuple[str, int], tuple[str, int]] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for gi in range(len(sentence_groups)):
        parent[("g", gi)] = ("g", gi)
    for ai in range(len(action_groups)):
        parent[("a", ai)] = ("a", ai)
    for gi, ai in edges:
        union(("g", gi), ("a", ai))

    components: dict[tuple[str, int], dict[str, list[int]]] = {}
    for gi in range(len(sentence_groups)):
        components.setdefault(find(("g", gi)), {"g": [], "a": []})["g"].append(gi)
    for ai in range(len(action_groups)):
        components.setdefault(find(("a", ai)), {"g": [], "a": []})["a"].append(ai)

    def component_time(comp) -> float:
        times = []
        for gi in comp["g"]:
            times.append(by_idx[sentence_groups[gi].sentence_idxs[0]].t_start)
        for ai in comp["a"]:
            times.append(by_ref[action_groups[ai].action_refs[0]].ts)
        return min(times)

    steps: list[CognitiveDecisionStep] = []
    for comp in sorted(components.values(), key=component_time):
        comp_groups = [sentence_groups[gi] for gi in sorted(comp["g"])]
        comp_ags = tuple(
            action_groups[ai]
            for ai in sorted(comp["a"], key=lambda ai: action_groups[ai].action_refs[0])
        )
        audit: tuple[str, ...] = ()
        sentence_group: Optional[SentenceGroup] = None
        if len(comp_groups) == 1:
            sentence_group = comp_groups[0]
        elif comp_groups:
            sentence_group = _merge_sentence_groups(comp_groups)
            audit = ("merged_sentence_groups:" + "+".join(g.group_id for g in comp_groups),)

        snapshot_refs: list[str] = []
        for ag in comp_ags:
            for ref in ag.action_refs:
                snap = by_ref[ref].snapshot_ref
                if snap and snap not in snapshot_refs:
                    snapshot_refs.append(snap)

        steps.append(
            CognitiveDecisionStep(
                step_id=f"p{len(steps)}",
                sentence_group=sentence_group,
                action_groups=comp_ags,
                snapshot_refs=tuple(snapshot_refs),
                status=STATUS_SEGMENTED,
                audit=audit,
            )
        )

    if assigner is not None:
        steps = _route_orphans(steps, assigner)
    return steps


def _route_orphans(steps: list[CognitiveDecisionStep], assigner: Assigner) -> list[CognitiveDecisionStep]:
    """Attach sentence-only steps to a neighbor, one orphan at a time, left to right."""
    out: list[CognitiveDecisionStep] = []
    pending = list(steps)
    pos = 0
    while pos < len(pending):
        step = pending[pos]
        if step.action_groups or step.sentence_group is None:
            out.append(step)
            pos += 1
            continue
        left = out[-1] if out else None
        right = pending[pos + 1] if pos + 1 < len(pending) else None
        decision = assigner(
            step.sentence_group,
            left.step_text if left else "",
            right.step_text if right else "",
        )
        if decision == ASSIGN_LEFT and left is not None:
            out[-1] = _absorb_orphan(left, step)
        elif decision == ASSIGN_RIGHT and right is not None:
            pending[pos + 1] = _absorb_orphan(right, step)
        else:
            out.append(step.with_audit("orphan_unrelated"))
        pos += 1
    return out


def _absorb_orphan(host: CognitiveDecisionStep, orphan: CognitiveDecisionStep) -> CognitiveDecisionStep:
    assert orphan.sentence_group is not None
    if host.sentence_group is None:
        merged = orphan.sentence_group
    else:
        merged = _merge_sentence_groups([host.sentence_group, orphan.sentence_group])
    return replace(
        host,
        sentence_group=merged,
        audit=host.audit + (f"orphan_assigned:{orphan.sentence_group.group_id}",),
    )


# --- trigger rule -----------------------------------------------------------------


@dataclass(frozen=True)
class BufferState:
    pending_sentences: int
    pending_actions: int
    seconds_since_last_action: float
    recording: bool

    def __post_init__(self):
        if self.pending_sentences < 0 or self.pending_actions < 0:
            raise ValueError("pending counts must be non-negative")


SENTENCE_THRESHOLD = 20
ACTION_THRESHOLD = 20
PAUSE_THRESHOLD = 3.0


def should_trigger(state: BufferState) -> bool:
    """Real-time processing trigger: strictly more than 20 pending actions or
    sentences, a pause longer than 3 s since the last action while recording,
    or a recording stop with anything pending."""
    has_pending = state.pending_sentences > 0 or state.pending_actions > 0
    if state.pending_actions > ACTION_THRESHOLD or state.pending_sentences > SENTENCE_THRESHOLD:
        return True
    if not has_pending:
        return False
    if state.recording:
        return state.seconds_since_last_action > PAUSE_THRESHOLD
    return True  # record_stop flushes all pending content
