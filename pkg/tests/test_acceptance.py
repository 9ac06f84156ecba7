"""Acceptance suite: one test per release criterion, at the stated tolerance.

Each test prints a PASS line on success (visible with -s / -rA) so the suite
doubles as a checklist.
"""

from __future__ import annotations

import csv
import itertools
import json
import random
import time

import pytest
from click.testing import CliRunner

from declink import gateway as gw
from declink.cli import main as cli_main
from declink.metrics import (
    Segmentation,
    precision_recall_f1,
    segmentation_from_steps,
    window_diff,
)
from declink.model import CATEGORY_CODES, Action, ActionType, parse_session_log
from declink.rationale import aggregate_assessment
from declink.segmentation import BufferState, GroupingVariant, link_actions, should_trigger
from declink.service import EngineConfig, SessionEngine
from conftest import ABLATION_DIR, GOLDEN_DIR
from oracles import aggregate_by_rules, window_diff_bruteforce


def report(criterion: str) -> None:
    print(f"ACCEPTANCE PASS: {criterion}")


def random_segmentation(rng: random.Random, n: int) -> Segmentation:
    return Segmentation.of(n, rng.sample(range(1, n), rng.randint(0, n - 1)))


class TestMetricCriteria:
    def test_window_diff_matches_bruteforce_500_pairs(self):
        rng = random.Random(20240517)
        start = time.monotonic()
        for _ in range(500):
            n = rng.randint(3, 12)
            ref = set(rng.sample(range(1, n), rng.randint(0, n - 1)))
            hyp = set(rng.sample(range(1, n), rng.randint(0, n - 1)))
            k = rng.randint(1, n - 1)
            fast = window_diff(Segmentation.of(n, ref), Segmentation.of(n, hyp), k=k)
            slow = window_diff_bruteforce(n, ref, hyp, k)
            assert abs(fast - slow) <= 1e-12, (n, sorted(ref), sorted(hyp), k)
        elapsed = time.monotonic() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s"
        report("window_diff equals brute-force enumerator on 500 pairs (1e-12)")

    def test_metric_identities_on_100_random_segmentations(self):
        rng = random.Random(99)
        n = 30
        segs = [random_segmentation(rng, n) for _ in range(100)]
        for s in segs:
            assert window_diff(s, s, k=5) == 0.0
            scores = precision_recall_f1(s, s)
            assert scores == {"precision": 1.0, "recall": 1.0, "f1": 1.0}
        for a, b in itertools.product(segs, segs):
            assert precision_recall_f1(a, b)["precision"] == precision_recall_f1(b, a)["recall"]
        report("window_diff(x,x)=0, P=R=F1=1 on self, precision/recall swap symmetry")


class TestAggregationCriterion:
    def test_all_127_subsets_and_named_cases(self):
        checked = 0
        for r in range(1, len(CATEGORY_CODES) + 1):
            for subset in itertools.combinations(CATEGORY_CODES, r):
                categories = set(subset)
                assert aggregate_assessment(categories) == aggregate_by_rules(categories)
                checked += 1
        assert checked == 127
        # the three cases stated with the aggregation rule, asserted by name
        assert aggregate_assessment({"S-SR", "W-CA"}) == "Strong"   # strong + weak
        assert aggregate_assessment({"W-PK"}) == "Weak"             # weak only
        assert aggregate_assessment({"E"}) == "Empty"               # empty alone
        report("aggregation truth table exhaustive over 127 subsets + named cases")


def fuzz_stream(rng: random.Random) -> list[Action]:
    """Action stream with no multi-element pass matches: either one element
    with tight gaps, or many elements with gaps larger than the window."""
    single = rng.random() < 0.5
    n = rng.randint(0, 12)
    actions = []
    ts = 0.0
    for _ in range(n):
        ts += rng.choice((0.1, 0.2, 0.4)) if single else rng.choice((0.8, 1.5, 3.0))
        element = "A" if single else rng.choice("ABCD")
        action_type = rng.choice(list(ActionType))
        prop = rng.choice(("fill", "stroke")) if action_type is ActionType.PROPERTY_CHANGE else None
        actions.append(Action(ts=ts, element_id=element, element_name=element,
                              action_type=action_type, property=prop))
    return actions


class TestActionGroupingCriterion:
    def test_coarsening_chain_total_deterministic_1000_streams(self):
        rng = random.Random(7331)
        start = time.monotonic()
        for _ in range(1000):
            actions = fuzz_stream(rng)
            partitions = {}
            for variant in GroupingVariant:
                groups = link_actions(actions, variant, simultaneity_window=0.5)
                assert not any(g.grouping_basis == "multi_element_same_action" for g in groups)
                refs = sorted(r for g in groups for r in g.action_refs)
                assert refs == list(range(len(actions)))  # total partition
                again = link_actions(actions, variant, simultaneity_window=0.5)
                assert groups == again  # deterministic
                partitions[variant] = [set(g.action_refs) for g in groups]
            for fine, coarse in ((GroupingVariant.V3, GroupingVariant.V2),
                                 (GroupingVariant.V2, GroupingVariant.V1)):
                for g in partitions[fine]:
                    assert any(g <= h for h in partitions[coarse]), (fine, coarse, actions)
        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"
        report("V3 <= V2 <= V1 coarsening chain over 1000 fuzzed streams")


class TestTriggerCriterion:
    def test_strict_threshold_boundaries(self):
        assert not should_trigger(BufferState(5, 20, 1.0, recording=True))
        assert not should_trigger(BufferState(20, 5, 1.0, recording=True))
        assert not should_trigger(BufferState(3, 2, 3.0, recording=True))
        assert should_trigger(BufferState(5, 21, 1.0, recording=True))
        assert should_trigger(BufferState(21, 5, 1.0, recording=True))
        assert should_trigger(BufferState(3, 2, 3.0 + 1e-9, recording=True))
        report("trigger thresholds strict at 20/20/3.0s")


def golden_gateway():
    return gw.Gateway(
        gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=GOLDEN_DIR / "fixtures",
                          temperature=0.0)
    )


def golden_events():
    return parse_session_log((GOLDEN_DIR / "golden.jsonl").read_text().splitlines())


class TestEndToEndGolden:
    def test_cmd_run_reproduces_gold_exactly(self, tmp_path):
        start = time.monotonic()
        result = CliRunner().invoke(
            cli_main,
            [
                "run", str(GOLDEN_DIR / "golden.jsonl"),
                "--out", str(tmp_path / "out"),
                "--provider-mode", "scripted",
                "--fixtures", str(GOLDEN_DIR / "fixtures"),
                "--snapshots", str(GOLDEN_DIR / "snapshots"),
            ],
        )
        elapsed = time.monotonic() - start
        assert result.exit_code == 0, result.output
        assert elapsed < 30.0, f"took {elapsed:.2f}s"

        produced = (tmp_path / "out" / "documentation.json").read_bytes()
        assert produced == (GOLDEN_DIR / "expected_documentation.json").read_bytes()

        gold = json.loads((GOLDEN_DIR / "golden.gold.json").read_text())
        ref = Segmentation.of(gold["n_units"], gold["boundaries"])
        steps = json.loads((tmp_path / "out" / "steps.json").read_text())["steps"]
        boundaries = {
            min(s["sentence_group"]["sentence_idxs"])
            for s in steps
            if s["sentence_group"] and min(s["sentence_group"]["sentence_idxs"]) > 0
        }
        hyp = Segmentation.of(gold["n_units"], boundaries)
        scores = precision_recall_f1(ref, hyp)
        assert scores == {"precision": 1.0, "recall": 1.0, "f1": 1.0}
        assert window_diff(ref, hyp) == 0.0
        report("golden session: exit 0, P=R=F1=1.0, WD=0.0, byte-exact documentation")


class TestAblationCriterion:
    def test_condition_set_and_baseline_inequalities(self, tmp_path):
        out = tmp_path / "ablation.csv"
        result = CliRunner().invoke(
            cli_main,
            [
                "eval-ablation", str(ABLATION_DIR),
                "--out", str(out),
                "--provider-mode", "scripted",
                "--fixtures", str(ABLATION_DIR / "fixtures"),
            ],
        )
        assert result.exit_code == 0, result.output
        rows = {r["condition"]: r for r in csv.DictReader(out.open())}
        expected_conditions = {"GAv1_GS_SA", "GAv2_GS_SA", "GAv3_GS_SA",
                               "GAv3_IS_SA", "GAv3_GS_SI", "BASELINE"}
        assert set(rows) == expected_conditions
        baseline = rows["BASELINE"]
        ga_rows = [rows[c] for c in expected_conditions - {"BASELINE"}]
        assert all(float(baseline["recall"]) >= float(r["recall"]) for r in ga_rows)
        assert all(float(baseline["precision"]) <= float(r["precision"]) for r in ga_rows)
        assert all(int(r["skipped"]) == 0 for r in rows.values())
        report("ablation emits all six conditions; baseline over-segments as expected")


class TestReplayCriterion:
    def test_mid_session_kill_replay_identical(self, tmp_path):
        events = golden_events()
        answer = ("Our users scan from the left, and the logo anchors the brand at "
                  "the start of that scan path.")

        engine1 = SessionEngine(tmp_path / "live", golden_gateway(), EngineConfig(),
                                snapshots_root=GOLDEN_DIR / "snapshots")
        sid = engine1.create_session("golden")
        engine1.append_events(sid, events[:40])
        killed_at = engine1.get_steps(sid)

        engine2 = SessionEngine(tmp_path / "live", golden_gateway(), EngineConfig(),
                                snapshots_root=GOLDEN_DIR / "snapshots")
        assert engine2.get_steps(sid) == killed_at

        engine2.append_events(sid, events[40:])
        engine2.submit_response(f"q-{sid}-s-004", "accepted", at=500.0)
        engine2.submit_response(f"q-{sid}-s-001", "answered", answer, at=501.0)
        final_steps = engine2.get_steps(sid)
        final_docs = engine2.get_documentation(sid)
        rt2 = engine2._runtime(sid)

        engine3 = SessionEngine(tmp_path / "live", golden_gateway(), EngineConfig(),
                                snapshots_root=GOLDEN_DIR / "snapshots")
        rt3 = engine3._runtime(sid)
        assert engine3.get_steps(sid) == final_steps
        assert engine3.get_documentation(sid) == final_docs
        assert rt3.summaries == rt2.summaries
        assert rt3.question_order == rt2.question_order
        assert rt3.exchange_revisions == rt2.exchange_revisions  # revision-for-revision
        assert rt3.revision == rt2.revision
        report("mid-session kill + replay reproduces steps, summaries, exchange order")


WORDS = ["button", "header", "logo", "banner", "spacing", "card", "footer"]
CUES = [
    "because it looked too big",            # weak cue
    "so that the grid stays consistent",    # strong cue
    "",                                     # empty
    "i like it",                            # weak cue
    "following the usual convention",       # strong cue
]


def fuzz_session_lines(rng: random.Random) -> list[str]:
    lines = []
    t = 0.0
    idx = 0
    lines.append(json.dumps({"type": "control", "ts": t, "kind": "record_start"}))
    for _ in range(rng.randint(2, 6)):
        word = rng.choice(WORDS)
        for _ in range(rng.randint(1, 3)):
            text = f"Changing the {word} {rng.choice(CUES)}.".replace("  ", " ")
            lines.append(json.dumps({
                "type": "sentence", "idx": idx, "t_start": t, "t_end": t + 1.5,
                "text": text,
            }))
            idx += 1
            t += 2.0
        for _ in range(rng.randint(0, 3)):
            lines.append(json.dumps({
                "type": "action", "ts": t, "element_id": word, "element_name": word,
                "action_type": rng.choice(["MOVE", "RESIZE", "CREATE", "TEXT_EDIT"]),
                "bbox": [0, 0, 10, 10],
            }))
            t += 2.0
        t += rng.choice((0.5, 4.0))  # sometimes force a pause flush
    lines.append(json.dumps({"type": "control", "ts": t, "kind": "record_stop"}))
    return lines


class TestOneShotQuestioningCriterion:
    def test_fuzzed_sessions_single_question_accepted_resolves_strong(self, tmp_path):
        rng = random.Random(4242)
        gateway = gw.Gateway(gw.ProviderConfig(mode=gw.MODE_HEURISTIC))
        engine = SessionEngine(tmp_path, gateway, EngineConfig())
        questions_seen = 0
        accepted_seen = 0
        for i in range(25):
            events = parse_session_log(fuzz_session_lines(rng))
            sid = engine.create_session(f"fuzz-{i:02d}")
            engine.append_events(sid, events)
            view = engine.poll_questions(sid, 0)
            per_step: dict[str, int] = {}
            for exchange in view["exchanges"]:
                per_step[exchange["step_id"]] = per_step.get(exchange["step_id"], 0) + 1
            assert all(count == 1 for count in per_step.values())
            questions_seen += len(view["exchanges"])
            for exchange in view["exchanges"]:
                if exchange["inferred_rationale"] is not None:
                    result = engine.submit_response(exchange["question_id"], "accepted")
                    assert result["status"] == "resolved_strong"
                    accepted_seen += 1
                else:
                    result = engine.submit_response(
                        exchange["question_id"], "answered", "It matches the layout."
                    )
                    assert result["status"] in ("resolved_strong", "resolved_weak")
            # one-shot: resolving never opens a second question for any step
            after = engine.poll_questions(sid, 0)
            for exchange in after["exchanges"]:
                per_step_after = sum(
                    1 for x in after["exchanges"] if x["step_id"] == exchange["step_id"]
                )
                assert per_step_after == 1
        assert questions_seen > 0, "fuzz corpus never produced a question"
        assert accepted_seen > 0, "fuzz corpus never produced an accepted inference"
        report("one-shot questioning holds over fuzzed sessions; accepted => resolved_strong")
