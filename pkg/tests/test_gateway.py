from __future__ import annotations

import json

import pytest

from declink import gateway as gw
from declink.gateway.errors import ProviderUnavailable, SchemaViolation, UnboundPlaceholder
from declink.gateway.provider import write_fixture
from declink.gateway.schemas import parse_structured


class TestRenderPrompt:
    def test_substitution_is_verbatim(self):
        text = gw.render_prompt(gw.RATIONALE_EVAL, {"few_shots": "", "decision_step": "XYZZY"})
        assert "XYZZY" in text
        assert "{decision_step}" not in text

    def test_missing_variable(self):
        with pytest.raises(UnboundPlaceholder):
            gw.render_prompt(gw.RATIONALE_EVAL, {"few_shots": ""})

    def test_deterministic(self):
        variables = {"few_shots": "none", "decision_step": "step"}
        assert gw.render_prompt(gw.RATIONALE_EVAL, variables) == gw.render_prompt(
            gw.RATIONALE_EVAL, variables
        )

    def test_json_format_block_survives(self):
        text = gw.render_prompt(gw.RATIONALE_EVAL, {"few_shots": "", "decision_step": "x"})
        assert '"categories": ["category1", "category2", ...]' in text


class TestSchemas:
    def test_group_map(self):
        parsed = parse_structured("group_map", '{"0": "a b", "1": "c"}')
        assert parsed == {"0": "a b", "1": "c"}

    def test_group_map_rejects_non_numeric_keys(self):
        with pytest.raises(SchemaViolation):
            parse_structured("group_map", '{"first": "a"}')

    def test_link_map_list_of_objects(self):
        raw = json.dumps(
            {
                "links": [{"1.500": ["0", "1"]}],
                "reversed_links": [{"0": ["1.500"]}, {"1": ["1.500"]}],
            }
        )
        parsed = parse_structured("link_map", raw)
        assert parsed["links"] == [("1.500", ["0", "1"])]

    def test_link_map_missing_key(self):
        with pytest.raises(SchemaViolation):
            parse_structured("link_map", '{"links": []}')

    def test_assign_tokens(self):
        assert parse_structured("assign_decision", "left") == "left"
        assert parse_structured("assign_decision", " 'Right'. ") == "right"
        with pytest.raises(SchemaViolation):
            parse_structured("assign_decision", "sideways")

    def test_rationale_eval_categories_validated(self):
        with pytest.raises(SchemaViolation):
            parse_structured("rationale_eval", '{"reason": "r", "categories": ["S-XX"]}')
        parsed = parse_structured("rationale_eval", '{"reason": "r", "categories": ["S-SR", "E"]}')
        assert parsed["categories"] == ["S-SR", "E"]

    def test_inference_none_mapping(self):
        parsed = parse_structured(
            "inference", '{"inferred_rationale": "None", "reasoning": "None"}'
        )
        assert parsed["inferred_rationale"] is None

    def test_summary_triple_requires_all_fields(self):
        with pytest.raises(SchemaViolation):
            parse_structured("summary_triple", '{"decision_and_actions": "a", "rationale": "b"}')

    def test_code_fences_stripped(self):
        parsed = parse_structured("question", '```json\n{"question": "Why?"}\n```')
        assert parsed == {"question": "Why?"}


class TestScriptedMode:
    def test_fixture_lookup(self, tmp_path):
        config = gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=tmp_path)
        gateway = gw.Gateway(config)
        variables = {"few_shots": "", "decision_step": "step text"}
        write_fixture(tmp_path, gw.RATIONALE_EVAL, variables,
                      '{"reason": "ok", "categories": ["W-SR"]}')
        parsed, raw = gateway.complete_structured(gw.RATIONALE_EVAL, variables)
        assert parsed["categories"] == ["W-SR"]
        assert "W-SR" in raw

    def test_missing_fixture(self, tmp_path):
        gateway = gw.Gateway(gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=tmp_path))
        with pytest.raises(ProviderUnavailable):
            gateway.complete_structured(gw.RATIONALE_EVAL, {"few_shots": "", "decision_step": "x"})

    def test_pure_function_of_inputs(self, tmp_path):
        gateway = gw.Gateway(gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=tmp_path))
        variables = {"few_shots": "", "decision_step": "again"}
        write_fixture(tmp_path, gw.RATIONALE_EVAL, variables,
                      '{"reason": "ok", "categories": ["E"]}')
        first = gateway.complete_structured(gw.RATIONALE_EVAL, variables)
        second = gateway.complete_structured(gw.RATIONALE_EVAL, variables)
        assert first == second

    def test_scripted_requires_fixture_dir(self):
        with pytest.raises(ValueError):
            gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=None)

    def test_audit_records_every_call(self, tmp_path):
        gateway = gw.Gateway(gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=tmp_path))
        variables = {"few_shots": "", "decision_step": "x"}
        with pytest.raises(ProviderUnavailable):
            gateway.complete_structured(gw.RATIONALE_EVAL, variables)
        write_fixture(tmp_path, gw.RATIONALE_EVAL, variables, '{"reason": "r", "categories": ["E"]}')
        gateway.complete_structured(gw.RATIONALE_EVAL, variables)
        outcomes = [e.outcome for e in gateway.audit_log]
        assert outcomes == ["provider_unavailable", "ok"]


class FakeResponse:
    def __init__(self, content: str):
        self._content = content

    def raise_for_status(self):
        pass

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


class TestLiveMode:
    def _gateway(self, responses, max_retries=1):
        calls = []

        def post(url, json=None, timeout=None):
            calls.append(json)
            return FakeResponse(responses[min(len(calls) - 1, len(responses) - 1)])

        config = gw.ProviderConfig(
            mode=gw.MODE_LIVE, endpoint="http://provider.test/v1/chat/completions",
            model="test-model", temperature=0.0, max_retries=max_retries,
        )
        return gw.Gateway(config, http_post=post), calls

    def test_bad_response_twice_exhausts_retries(self):
        gateway, calls = self._gateway(['{"reason": "no categories"}'] * 2, max_retries=1)
        with pytest.raises(SchemaViolation) as err:
            gateway.complete_structured(
                gw.RATIONALE_EVAL, {"few_shots": "", "decision_step": "x"}
            )
        assert err.value.retries == 1
        assert len(calls) == 2

    def test_repair_instruction_appended_on_retry(self):
        gateway, calls = self._gateway(
            ["not json", '{"reason": "r", "categories": ["E"]}'], max_retries=2
        )
        parsed, _ = gateway.complete_structured(
            gw.RATIONALE_EVAL, {"few_shots": "", "decision_step": "x"}
        )
        assert parsed["categories"] == ["E"]
        retry_text = calls[1]["messages"][0]["content"][0]["text"]
        assert "output only the JSON" in retry_text

    def test_images_rejected_for_text_templates(self):
        gateway, _ = self._gateway(['{"reason": "r", "categories": ["E"]}'])
        with pytest.raises(ValueError):
            gateway.complete_structured(
                gw.RATIONALE_EVAL, {"few_shots": "", "decision_step": "x"}, images=[b"png"]
            )

    def test_image_cap(self):
        gateway, calls = self._gateway(
            ['{"decision_and_actions": "a", "rationale": "b", "progression": "c"}']
        )
        gateway.complete_structured(
            gw.SUMMARY,
            {"transcript": "t", "decision_step": "d", "related_screenshots": "[]"},
            images=[b"1", b"2", b"3", b"4", b"5", b"6"],
        )
        content = calls[0]["messages"][0]["content"]
        assert sum(1 for part in content if part["type"] == "image_url") == gw.IMAGE_CAP


class TestHeuristicMode:
    def test_covers_every_template(self, heuristic_gateway):
        example_vars = {
            gw.SENTENCE_LINK: {"few_shots": "", "transcript": '["The button is red.", "The button stays red."]'},
            gw.SA_LINK: {
                "segmented_transcripts": '[{"index": 0, "sentences": "Move the header."}]',
                "sets_of_design_action_and_screenshot": '[{"timestamp": "1.000", "element": "Header", "action": "MOVE"}]',
            },
            gw.SENTENCE_ASSIGN: {
                "transcript": "t", "unassigned_grouped_sentence": "Looks done.",
                "left_grouped_sentence": "Made the header.", "right_grouped_sentence": "",
            },
            gw.RATIONALE_EVAL: {"few_shots": "", "decision_step": "I did it because it was too big."},
            gw.QUESTION_GEN: {
                "explanation": "t", "decision_step": "Moved the logo.",
                "reason_for_insufficient_rationale": "Empty: no reason",
            },
            gw.RATIONALE_INFER: {
                "explanation": "t", "decision_step": "Set spacing again.",
                "reason_for_insufficient_rationale": "Empty",
                "previous_decision_step_summaries": "[]",
            },
            gw.SUMMARY: {"transcript": "t", "decision_step": "Moved the logo left.", "related_screenshots": "[]"},
            gw.SUMMARY_WITH_ANSWER: {
                "transcript": "t", "decision_step": "Moved the logo left.", "related_screenshots": "[]",
                "clarification_question": "Why?", "answer": "Convention.",
            },
            gw.BASELINE_SEGMENT: {"transcript": '["About the header.", "Totally unrelated topic."]'},
        }
        for template_id, variables in example_vars.items():
            parsed, raw = heuristic_gateway.complete_structured(template_id, variables)
            assert raw
            again, _ = heuristic_gateway.complete_structured(template_id, variables)
            assert parsed == again  # deterministic
