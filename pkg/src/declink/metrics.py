"""Segmentation evaluation: boundary precision/recall/F1, WindowDiff, the
ablation runner over pipeline conditions, and rationale-accuracy scoring.

Boundary positions p in 1..n_units-1 mean "a segment break before unit p".
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import gateway as gw
from .gateway.errors import ProviderUnavailable
from .model import Action, Sentence, SessionEvent, parse_session_log
from .segmentation import (
    DEFAULT_SIMULTANEITY_WINDOW,
    GroupingVariant,
    LinkSet,
    assemble_steps,
    assign_orphan,
    link_actions,
    link_sentence_action,
    link_sentences,
    render_transcript_sentences,
    singleton_groups,
)


class MetricsError(Exception):
    pass


class UnitCountMismatch(MetricsError):
    pass


class DegenerateLength(MetricsError):
    pass


class IdMismatch(MetricsError):
    pass


@dataclass(frozen=True)
class Segmentation:
    n_units: int
    boundaries: frozenset[int]

    def __post_init__(self):
        if self.n_units < 0:
            raise ValueError("n_units must be non-negative")
        bad = [b for b in self.boundaries if not 1 <= b <= self.n_units - 1]
        if bad:
            raise ValueError(f"boundaries out of range [1, {self.n_units - 1}]: {sorted(bad)}")

    @classmethod
    def of(cls, n_units: int, boundaries: Sequence[int]) -> "Segmentation":
        return cls(n_units=n_units, boundaries=frozenset(boundaries))


def precision_recall_f1(ref: Segmentation, hyp: Segmentation) -> dict[str, float]:
    """Exact boundary matching. Empty-vs-empty counts as perfect; an empty
    hypothesis against a non-empty reference scores zero."""
    if ref.n_units != hyp.n_units:
        raise UnitCountMismatch(f"{ref.n_units} != {hyp.n_units}")
    matches = len(ref.boundaries & hyp.boundaries)
    if hyp.boundaries:
        precision = matches / len(hyp.boundaries)
    else:
        precision = 1.0 if not ref.boundaries else 0.0
    if ref.boundaries:
        recall = matches / len(ref.boundaries)
    else:
        recall = 1.0 if not hyp.boundaries else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {"precision": precision, "recall": recall, "f1": f1}


def default_window_size(ref: Segmentation) -> int:
    return max(2, round(ref.n_units / (2 * (len(ref.boundaries) + 1))))


def window_diff(ref: Segmentation, hyp: Segmentation, k: Optional[int] = None) -> float:
    """Fraction of length-k windows whose interior boundary counts disagree.

    Windows are (i, i+k] for i in 0..N-k-1; k defaults to half the mean
    reference segment length with a floor of 2.
    """
    if ref.n_units != hyp.n_units:
        raise UnitCountMismatch(f"{ref.n_units} != {hyp.n_units}")
    n = ref.n_units
    if n < 2:
        raise DegenerateLength(f"need at least 2 units, got {n}")
    if k is None:
        k = default_window_size(ref)
    if k < 1 or n <= k:
        raise DegenerateLength(f"window k={k} does not fit N={n}")

    # prefix[p] = number of boundaries at positions <= p
    def prefix(seg: Segmentation) -> list[int]:
        counts = [0] * (n + 1)
        for b in seg.boundaries:
            counts[b] += 1
        for p in range(1, n + 1):
            counts[p] += counts[p - 1]
        return counts

    pre_ref, pre_hyp = prefix(ref), prefix(hyp)
    disagreements = 0
    for i in range(n - k):
        b_ref = pre_ref[i + k] - pre_ref[i]
        b_hyp = pre_hyp[i + k] - pre_hyp[i]
        if b_ref != b_hyp:
            disagreements += 1
    return disagreements / (n - k)


# --- ablation conditions -----------------------------------------------------

GROUPING_NONE = "none"


@dataclass(frozen=True)
class AblationCondition:
    grouping: str  # v1 | v2 | v3 | none
    sentence_linking: bool
    sentence_assigning: bool

    def __post_init__(self):
        if self.grouping not in ("v1", "v2", "v3", GROUPING_NONE):
            raise ValueError(f"unknown grouping: {self.grouping}")

    @property
    def label(self) -> str:
        if self.grouping == GROUPING_NONE:
            return "BASELINE"
        gs = "GS" if self.sentence_linking else "IS"
        sa = "SA" if self.sentence_assigning else "SI"
        return f"GA{self.grouping}_{gs}_{sa}"

    @classmethod
    def from_label(cls, label: str) -> "AblationCondition":
        if label == "BASELINE":
            return cls(grouping=GROUPING_NONE, sentence_linking=False, sentence_assigning=False)
        parts = label.split("_")
        if len(parts) != 3 or not parts[0].startswith("GA") or parts[0][2:] not in ("v1", "v2", "v3"):
            raise ValueError(f"unknown condition label: {label}")
        if parts[1] not in ("GS", "IS") or parts[2] not in ("SA", "SI"):
            raise ValueError(f"unknown condition label: {label}")
        return cls(
            grouping=parts[0][2:],
            sentence_linking=parts[1] == "GS",
            sentence_assigning=parts[2] == "SA",
        )


DEFAULT_CONDITIONS = (
    "GAv1_GS_SA",
    "GAv2_GS_SA",
    "GAv3_GS_SA",
    "GAv3_IS_SA",
    "GAv3_GS_SI",
    "BASELINE",
)


def segmentation_from_steps(steps, n_units: int) -> Segmentation:
    """Hypothesis boundaries: one break before each step's first sentence."""
    boundaries = set()
    for step in steps:
        if step.sentence_group is not None:
            first = min(step.sentence_group.sentence_idxs)
            if first > 0:
                boundaries.add(first)
    return Segmentation.of(n_units, boundaries)


def segment_session(
    events: Sequence[SessionEvent],
    condition: AblationCondition,
    gateway: gw.Gateway,
    simultaneity_window: float = DEFAULT_SIMULTANEITY_WINDOW,
    few_shots: str = "",
) -> Segmentation:
    """Run the segmentation pipeline on a whole recording under one condition
    and derive the predicted transcript segmentation."""
    sentences = [e for e in events if isinstance(e, Sentence)]
    actions = [e for e in events if isinstance(e, Action)]
    n_units = len(sentences)
    if condition.grouping == GROUPING_NONE:
        parsed, _ = gateway.complete_structured(
            gw.BASELINE_SEGMENT, {"transcript": render_transcript_sentences(sentences)}
        )
        boundaries = [b for b in parsed["boundaries"] if 1 <= b <= n_units - 1]
        return Segmentation.of(n_units, boundaries)

    if condition.sentence_linking:
        groups = link_sentences(sentences, gateway, few_shots=few_shots)
    else:
        groups = singleton_groups(sentences)
    action_groups = link_actions(
        actions, GroupingVariant(condition.grouping), simultaneity_window
    )
    if groups and action_groups:
        link_set = link_sentence_action(groups, actions, gateway)
    else:
        link_set = LinkSet()
    transcript = " ".join(s.text for s in sentences)
    assigner = None
    if condition.sentence_assigning:
        assigner = lambda orphan, left, right: assign_orphan(transcript, orphan, left, right, gateway)
    steps = assemble_steps(groups, action_groups, link_set, sentences, actions, assigner=assigner)
    return segmentation_from_steps(steps, n_units)


def load_gold(path: Path) -> Segmentation:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return Segmentation.of(int(data["n_units"]), [int(b) for b in data["boundaries"]])


def load_dataset(dataset_dir: Path) -> list[tuple[str, list[SessionEvent], Segmentation]]:
    """Dataset layout: <name>.jsonl session log next to <name>.gold.json."""
    dataset_dir = Path(dataset_dir)
    sessions = []
    for log_path in sorted(dataset_dir.glob("*.jsonl")):
        gold_path = log_path.with_suffix("").with_suffix(".gold.json")
        if not gold_path.is_file():
            gold_path = log_path.parent / (log_path.stem + ".gold.json")
        if not gold_path.is_file():
            raise FileNotFoundError(f"missing gold file for {log_path.name}")
        events = parse_session_log(log_path.read_text(encoding="utf-8").splitlines())
        sessions.append((log_path.stem, events, load_gold(gold_path)))
    if not sessions:
        raise FileNotFoundError(f"no *.jsonl sessions in {dataset_dir}")
    return sessions


def run_ablation(
    dataset: Sequence[tuple[str, Sequence[SessionEvent], Segmentation]],
    conditions: Sequence[AblationCondition],
    gateway: gw.Gateway,
    simultaneity_window: float = DEFAULT_SIMULTANEITY_WINDOW,
) -> tuple[list[dict], dict]:
    """Per-condition means of WindowDiff / precision / recall / F1.

    Sessions a provider cannot serve are skipped and counted. Returns the
    rows plus a metadata record (window-size convention, per-session and
    pooled numbers).
    """
    rows: list[dict] = []
    meta: dict = {
        "window_size_rule": "max(2, round(n_units / (2 * (n_ref_boundaries + 1))))",
        "aggregation": "mean over sessions (pooled counts reported here)",
        "sessions": [sid for sid, _, _ in dataset],
        "per_condition": {},
    }
    for condition in conditions:
        per_session = []
        pooled = {"matches": 0, "hyp": 0, "ref": 0}
        skipped = 0
        for session_id, events, ref in dataset:
            try:
                hyp = segment_session(events, condition, gateway, simultaneity_window)
            except ProviderUnavailable:
                skipped += 1
                continue
            prf = precision_recall_f1(ref, hyp)
            wd = window_diff(ref, hyp)
            per_session.append(
                {"session": session_id, "window_diff": wd, **prf,
                 "n_hyp_boundaries": len(hyp.boundaries)}
            )
            pooled["matches"] += len(ref.boundaries & hyp.boundaries)
            pooled["hyp"] += len(hyp.boundaries)
            pooled["ref"] += len(ref.boundaries)
        if per_session:
            def mean(key: str) -> float:
                return sum(r[key] for r in per_session) / len(per_session)

            row = {
                "condition": condition.label,
                "window_diff": mean("window_diff"),
                "precision": mean("precision"),
                "recall": mean("recall"),
                "f1": mean("f1"),
                "skipped": skipped,
            }
        else:
            row = {
                "condition": condition.label,
                "window_diff": None,
                "precision": None,
                "recall": None,
                "f1": None,
                "skipped": skipped,
            }
        rows.append(row)
        meta["per_condition"][condition.label] = {
            "per_session": per_session,
            "pooled": {
                "precision": pooled["matches"] / pooled["hyp"] if pooled["hyp"] else None,
                "recall": pooled["matches"] / pooled["ref"] if pooled["ref"] else None,
            },
        }
    return rows, meta


CSV_COLUMNS = ("condition", "window_diff", "precision", "recall", "f1", "skipped")


def write_ablation_csv(rows: Sequence[dict], out_path: Path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row["condition"],
                    *(
                        "" if row[c] is None else f"{row[c]:.6f}"
                        for c in ("window_diff", "precision", "recall", "f1")
                    ),
                    row["skipped"],
                ]
            )


# --- rationale accuracy --------------------------------------------------------


def score_rationale_accuracy(
    gold: Sequence[tuple[str, str]], predicted: Sequence[tuple[str, str]]
) -> dict:
    """Overall and per-class accuracy of Strong/Weak/Empty predictions."""
    gold_map = dict(gold)
    pred_map = dict(predicted)
    if set(gold_map) != set(pred_map):
        raise IdMismatch(
            f"gold-only: {sorted(set(gold_map) - set(pred_map))[:5]}, "
            f"pred-only: {sorted(set(pred_map) - set(gold_map))[:5]}"
        )
    if not gold_map:
        raise IdMismatch("empty gold set")
    matches = sum(1 for sid, label in gold_map.items() if pred_map[sid] == label)
    per_class: dict[str, float] = {}
    for label in sorted({label for label in gold_map.values()}):
        members = [sid for sid, l in gold_map.items() if l == label]
        per_class[label] = sum(1 for sid in members if pred_map[sid] == label) / len(members)
    return {"overall": matches / len(gold_map), "per_class": per_class, "total": len(gold_map)}
