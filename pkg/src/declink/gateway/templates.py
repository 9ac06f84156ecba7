"""Prompt template registry and rendering.

Template bodies live as text assets; substitution only touches the declared
{placeholder} tokens so the JSON formatting-instruction braces in the bodies
stay intact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import UnboundPlaceholder

_ASSET_DIR = Path(__file__).parent / "assets"

SENTENCE_LINK = "SENTENCE_LINK"
SA_LINK = "SA_LINK"
SENTENCE_ASSIGN = "SENTENCE_ASSIGN"
RATIONALE_EVAL = "RATIONALE_EVAL"
QUESTION_GEN = "QUESTION_GEN"
RATIONALE_INFER = "RATIONALE_INFER"
SUMMARY = "SUMMARY"
SUMMARY_WITH_ANSWER = "SUMMARY_WITH_ANSWER"
# Transcript-only segmentation used by the evaluation baseline condition.
BASELINE_SEGMENT = "BASELINE_SEGMENT"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    placeholders: tuple[str, ...]
    expects_images: bool
    output_schema_id: str


def _load(template_id: str, asset: str, placeholders: tuple[str, ...],
          expects_images: bool, output_schema_id: str) -> PromptTemplate:
    body = (_ASSET_DIR / asset).read_text(encoding="utf-8")
    for name in placeholders:
        if "{" + name + "}" not in body:
            raise ValueError(f"{template_id}: placeholder {{{name}}} missing from asset {asset}")
    return PromptTemplate(template_id, body, placeholders, expects_images, output_schema_id)


TEMPLATES: dict[str, PromptTemplate] = {
    t.template_id: t
    for t in (
        _load(SENTENCE_LINK, "sentence_link.txt",
              ("few_shots", "transcript"), False, "group_map"),
        _load(SA_LINK, "sa_link.txt",
              ("segmented_transcripts", "sets_of_design_action_and_screenshot"), True, "link_map"),
        _load(SENTENCE_ASSIGN, "sentence_assign.txt",
              ("transcript", "unassigned_grouped_sentence",
               "left_grouped_sentence", "right_grouped_sentence"), False, "assign_decision"),
        _load(RATIONALE_EVAL, "rationale_eval.txt",
              ("few_shots", "decision_step"), False, "rationale_eval"),
        _load(QUESTION_GEN, "question_gen.txt",
              ("explanation", "decision_step", "reason_for_insufficient_rationale"), False, "question"),
        _load(RATIONALE_INFER, "rationale_infer.txt",
              ("explanation", "decision_step", "reason_for_insufficient_rationale",
               "previous_decision_step_summaries"), False, "inference"),
        _load(SUMMARY, "summary.txt",
              ("transcript", "decision_step", "related_screenshots"), True, "summary_triple"),
        _load(SUMMARY_WITH_ANSWER, "summary_with_answer.txt",
              ("transcript", "decision_step", "related_screenshots",
               "clarification_question", "answer"), True, "summary_triple"),
        _load(BASELINE_SEGMENT, "baseline_segment.txt",
              ("transcript",), False, "boundary_list"),
    )
}


def render_prompt(template_id: str, variables: dict[str, str]) -> str:
    """Substitute the template's declared placeholders; deterministic, no residuals."""
    template = TEMPLATES[template_id]
    text = template.body
    for name in template.placeholders:
        if name not in variables:
            raise UnboundPlaceholder(name)
        text = text.replace("{" + name + "}", str(variables[name]))
    return text
