from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from declink.metrics import (
    AblationCondition,
    DegenerateLength,
    IdMismatch,
    Segmentation,
    UnitCountMismatch,
    default_window_size,
    precision_recall_f1,
    score_rationale_accuracy,
    segmentation_from_steps,
    window_diff,
)
from declink.model import CognitiveDecisionStep, SentenceGroup
from oracles import window_diff_bruteforce


def seg(n, *bounds):
    return Segmentation.of(n, bounds)


class TestPrecisionRecallF1:
    def test_identity(self):
        assert precision_recall_f1(seg(10, 3, 7), seg(10, 3, 7)) == {
            "precision": 1.0, "recall": 1.0, "f1": 1.0,
        }

    def test_extra_boundary(self):
        scores = precision_recall_f1(seg(10, 3, 7), seg(10, 3, 5, 7))
        assert scores["precision"] == pytest.approx(2 / 3)
        assert scores["recall"] == 1.0
        assert scores["f1"] == pytest.approx(0.8)

    def test_empty_hypothesis_convention(self):
        assert precision_recall_f1(seg(10, 3, 7), seg(10)) == {
            "precision": 0.0, "recall": 0.0, "f1": 0.0,
        }

    def test_both_empty_is_perfect(self):
        assert precision_recall_f1(seg(10), seg(10)) == {
            "precision": 1.0, "recall": 1.0, "f1": 1.0,
        }

    def test_unit_count_mismatch(self):
        with pytest.raises(UnitCountMismatch):
            precision_recall_f1(seg(10, 3), seg(11, 3))

    def test_swap_symmetry(self):
        rng = random.Random(1)
        for _ in range(100):
            n = rng.randint(2, 20)
            ref = seg(n, *rng.sample(range(1, n), rng.randint(0, n - 1)))
            hyp = seg(n, *rng.sample(range(1, n), rng.randint(0, n - 1)))
            assert precision_recall_f1(ref, hyp)["precision"] == precision_recall_f1(hyp, ref)["recall"]


class TestWindowDiff:
    def test_self_is_zero(self):
        s = seg(12, 4, 8)
        assert window_diff(s, s) == 0.0

    def test_frozen_case_n6(self):
        # value computed by the brute-force window enumerator
        assert window_diff(seg(6, 3), seg(6), k=2) == pytest.approx(0.5)

    def test_all_vs_none_is_one(self):
        assert window_diff(seg(8, *range(1, 8)), seg(8), k=2) == 1.0

    def test_unit_count_mismatch(self):
        with pytest.raises(UnitCountMismatch):
            window_diff(seg(8, 3), seg(9, 3))

    def test_degenerate_window(self):
        with pytest.raises(DegenerateLength):
            window_diff(seg(2, 1), seg(2), k=2)
        with pytest.raises(DegenerateLength):
            window_diff(seg(1), seg(1))

    def test_default_window_size_formula(self):
        assert default_window_size(seg(12, 4, 8)) == max(2, round(12 / (2 * 3)))
        assert default_window_size(seg(4, 2)) == 2  # floor of 2

    def test_matches_bruteforce_on_random_pairs(self):
        rng = random.Random(42)
        for _ in range(300):
            n = rng.randint(3, 12)
            ref = set(rng.sample(range(1, n), rng.randint(0, n - 1)))
            hyp = set(rng.sample(range(1, n), rng.randint(0, n - 1)))
            k = rng.randint(1, n - 1)
            assert window_diff(seg(n, *ref), seg(n, *hyp), k=k) == pytest.approx(
                window_diff_bruteforce(n, ref, hyp, k), abs=1e-12
            )

    @given(st.integers(3, 20), st.data())
    @settings(max_examples=150, deadline=None)
    def test_bounded_in_unit_interval(self, n, data):
        ref = data.draw(st.sets(st.integers(1, n - 1)))
        hyp = data.draw(st.sets(st.integers(1, n - 1)))
        k = data.draw(st.integers(1, n - 1))
        value = window_diff(seg(n, *ref), seg(n, *hyp), k=k)
        assert 0.0 <= value <= 1.0

    def test_boundary_positions_validated(self):
        with pytest.raises(ValueError):
            Segmentation.of(5, [0])
        with pytest.raises(ValueError):
            Segmentation.of(5, [5])


class TestAblationCondition:
    def test_labels_round_trip(self):
        for label in ("GAv1_GS_SA", "GAv2_GS_SA", "GAv3_GS_SA", "GAv3_IS_SA", "GAv3_GS_SI", "BASELINE"):
            assert AblationCondition.from_label(label).label == label

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            AblationCondition.from_label("GAv9_GS_SA")
        with pytest.raises(ValueError):
            AblationCondition.from_label("whatever")


class TestSegmentationFromSteps:
    def _step(self, step_id, idxs):
        return CognitiveDecisionStep(
            step_id=step_id,
            sentence_group=SentenceGroup(f"g{idxs[0]}", tuple(idxs), "text"),
        )

    def test_boundary_before_each_step(self):
        steps = [self._step("s-000", (0, 1)), self._step("s-001", (2,)), self._step("s-002", (3, 4))]
        assert segmentation_from_steps(steps, 5).boundaries == frozenset({2, 3})

    def test_action_only_steps_contribute_nothing(self):
        from declink.model import ActionGroup

        action_only = CognitiveDecisionStep(
            step_id="s-001", action_groups=(ActionGroup("a0", (0,), "single_element_run"),)
        )
        steps = [self._step("s-000", (0, 1)), action_only]
        assert segmentation_from_steps(steps, 2).boundaries == frozenset()


class TestScoreRationaleAccuracy:
    def test_identical(self):
        gold = [("a", "Strong"), ("b", "Weak")]
        scores = score_rationale_accuracy(gold, list(gold))
        assert scores["overall"] == 1.0
        assert scores["per_class"] == {"Strong": 1.0, "Weak": 1.0}

    def test_one_flip(self):
        gold = [("a", "Strong"), ("b", "Strong"), ("c", "Weak")]
        predicted = [("a", "Strong"), ("b", "Strong"), ("c", "Empty")]
        scores = score_rationale_accuracy(gold, predicted)
        assert scores["overall"] == pytest.approx(2 / 3)
        assert scores["per_class"]["Strong"] == 1.0
        assert scores["per_class"]["Weak"] == 0.0

    def test_disjoint_ids(self):
        with pytest.raises(IdMismatch):
            score_rationale_accuracy([("a", "Strong")], [("b", "Strong")])
