"""Rationale quality assessment, clarification questions, inference from
prior summaries, response processing, and decision-step summaries.

Questioning is one-shot: a step gets at most one question, and a weak answer
never triggers a second one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from . import gateway as gw
from .gateway.errors import SchemaViolation
from .model import (
    CATEGORY_CODES,
    EMPTY,
    MODE_ACCEPTED,
    MODE_ANSWERED,
    MODE_REJECTED,
    MODE_SUPPLEMENTED,
    STATUS_RESOLVED_STRONG,
    STATUS_RESOLVED_WEAK,
    STRONG,
    WEAK,
    Action,
    Anchor,
    ClarificationExchange,
    CognitiveDecisionStep,
    DecisionStepSummary,
    ExchangeResponse,
    ExplanationAssessment,
    InferredRationale,
)

INFERENCE_BASIS_CAP = 50  # most recent summaries offered to the inference prompt


class RationaleError(Exception):
    pass


class EmptyCategorySet(RationaleError):
    pass


class NoPendingExchange(RationaleError):
    pass


# --- assessment -----------------------------------------------------------


def aggregate_assessment(categories: frozenset[str] | set[str]) -> str:
    """Collapse fine-grained category codes to Strong/Weak/Empty.

    Precedence Strong > Weak > Empty: any S-* code wins, otherwise any W-*
    code, otherwise the set is {E}.
    """
    if not categories:
        raise EmptyCategorySet("need at least one category code")
    unknown = set(categories) - set(CATEGORY_CODES)
    if unknown:
        raise ValueError(f"unknown category codes: {sorted(unknown)}")
    if any(c.startswith("S-") for c in categories):
        return STRONG
    if any(c.startswith("W-") for c in categories):
        return WEAK
    return EMPTY


def evaluate_rationale(step_text: str, gateway: gw.Gateway, few_shots: str = "") -> ExplanationAssessment:
    """Classify a step's explanation; raises SchemaViolation when the provider
    cannot produce a valid judgment (caller leaves the step unassessed)."""
    if not step_text.strip():
        raise ValueError("evaluate_rationale needs a non-empty explanation")
    parsed, _ = gateway.complete_structured(
        gw.RATIONALE_EVAL, {"few_shots": few_shots, "decision_step": step_text}
    )
    categories = frozenset(parsed["categories"])
    return ExplanationAssessment(
        categories=categories,
        overall=aggregate_assessment(categories),
        reason=parsed["reason"],
    )


# --- questioning ------------------------------------------------------------


def generate_question(
    full_explanation: str,
    step_text: str,
    overall: str,
    reason: str,
    gateway: gw.Gateway,
) -> str:
    if overall not in (WEAK, EMPTY):
        raise ValueError(f"questions are only generated for weak/empty steps, not {overall}")
    parsed, _ = gateway.complete_structured(
        gw.QUESTION_GEN,
        {
            "explanation": full_explanation,
            "decision_step": step_text,
            "reason_for_insufficient_rationale": f"{overall}: {reason}",
        },
    )
    return parsed["question"]


def anchor_question(step: CognitiveDecisionStep, actions_by_ref: Mapping[int, Action]) -> Optional[Anchor]:
    """Anchor at the latest of the step's actions that carries a bbox."""
    for group in reversed(step.action_groups):
        for ref in reversed(group.action_refs):
            act = actions_by_ref[ref]
            if act.bbox is not None:
                return Anchor(element_id=act.element_id, bbox=act.bbox)
    return None


# --- inference ----------------------------------------------------------------


@dataclass(frozen=True)
class InferenceDecision:
    inferred: Optional[InferredRationale]
    basis_summary_ids: tuple[str, ...]


def render_summaries(summaries: Sequence[tuple[str, DecisionStepSummary]]) -> str:
    return json.dumps(
        [
            {
                "id": sid,
                "decision_and_actions": s.decision_and_actions,
                "rationale": s.rationale,
                "progression": s.progression,
            }
            for sid, s in summaries
        ],
        ensure_ascii=False,
    )


def infer_rationale(
    full_transcript: str,
    step_text: str,
    evaluation_reason: str,
    prior_summaries: Sequence[tuple[str, DecisionStepSummary]],
    gateway: gw.Gateway,
) -> InferenceDecision:
    """Infer a missing rationale from concretely similar prior decisions.

    With no prior summaries there is nothing to infer from, so no model call
    is made. The basis records which summary ids were offered to the prompt.
    """
    if not prior_summaries:
        return InferenceDecision(inferred=None, basis_summary_ids=())
    basis = list(prior_summaries)[-INFERENCE_BASIS_CAP:]
    try:
        parsed, _ = gateway.complete_structured(
            gw.RATIONALE_INFER,
            {
                "explanation": full_transcript,
                "decision_step": step_text,
                "reason_for_insufficient_rationale": evaluation_reason,
                "previous_decision_step_summaries": render_summaries(basis),
            },
        )
    except SchemaViolation:
        return InferenceDecision(inferred=None, basis_summary_ids=())
    text = parsed["inferred_rationale"]
    if text is None:
        return InferenceDecision(inferred=None, basis_summary_ids=())
    return InferenceDecision(
        inferred=InferredRationale(text=text, reasoning=parsed["reasoning"] or ""),
        basis_summary_ids=tuple(sid for sid, _ in basis),
    )


# --- summaries -------------------------------------------------------------------


def _single_line(text: str) -> str:
    return "; ".join(part.strip() for part in text.splitlines() if part.strip())


def render_screenshot_refs(snapshot_refs: Sequence[str]) -> str:
    return json.dumps(list(snapshot_refs))


def summarize_step(
    full_transcript: str,
    step_text: str,
    snapshot_refs: Sequence[str],
    gateway: gw.Gateway,
    images: Sequence[bytes] = (),
    exchange: Optional[ClarificationExchange] = None,
) -> DecisionStepSummary:
    """Produce the (decision_and_actions, rationale, progression) triple.

    Uses the answer-aware template when the step carries an answered exchange
    (an accepted inference counts as the answer). Output lines are normalized
    to single lines.
    """
    answer_text = _exchange_answer(exchange)
    if answer_text is not None:
        template = gw.SUMMARY_WITH_ANSWER
        variables = {
            "transcript": full_transcript,
            "decision_step": step_text,
            "related_screenshots": render_screenshot_refs(snapshot_refs),
            "clarification_question": exchange.question_text,
            "answer": answer_text,
        }
    else:
        template = gw.SUMMARY
        variables = {
            "transcript": full_transcript,
            "decision_step": step_text,
            "related_screenshots": render_screenshot_refs(snapshot_refs),
        }
    parsed, _ = gateway.complete_structured(template, variables, images=images)
    return DecisionStepSummary(
        decision_and_actions=_single_line(parsed["decision_and_actions"]),
        rationale=_single_line(parsed["rationale"]),
        progression=_single_line(parsed["progression"]),
        snapshot_refs=tuple(snapshot_refs),
    )


def _exchange_answer(exchange: Optional[ClarificationExchange]) -> Optional[str]:
    if exchange is None or exchange.response is None:
        return None
    resp = exchange.response
    if resp.mode in (MODE_ANSWERED, MODE_SUPPLEMENTED):
        return resp.answer_text
    if resp.mode == MODE_ACCEPTED and exchange.inferred_rationale is not None:
        return exchange.inferred_rationale.text
    return None


# --- response processing -------------------------------------------------------------


def combined_step_text(step_text: str, answer_text: str) -> str:
    return f"{step_text} {answer_text}".strip()


def process_response(
    step: CognitiveDecisionStep,
    mode: str,
    answer_text: Optional[str],
    at: Optional[float],
    gateway: gw.Gateway,
    full_transcript: str,
    images: Sequence[bytes] = (),
    few_shots: str = "",
) -> CognitiveDecisionStep:
    """Apply a user response to a step's open exchange.

    accepted: the inferred rationale becomes the step's rationale, the step
    resolves Strong, and the summary is regenerated with the answer.
    answered/supplemented: the answer joins the step text and is re-evaluated
    once; Strong resolves strong, anything else resolves weak with no second
    question. rejected: the exchange stays open awaiting an answer.
    Idempotent for repeated identical accepted responses.
    """
    exchange = step.exchange
    if exchange is None:
        raise NoPendingExchange(step.step_id)
    if not exchange.is_open:
        previous = exchange.response
        if (
            previous is not None
            and previous.mode == MODE_ACCEPTED
            and mode == MODE_ACCEPTED
        ):
            return step  # idempotent repeat
        raise NoPendingExchange(f"{step.step_id}: exchange already resolved")

    if mode == MODE_REJECTED:
        return step.with_audit("inference_rejected")

    if mode == MODE_ACCEPTED:
        if exchange.inferred_rationale is None:
            raise ValueError("accepted requires an inferred rationale")
        if step.assessment is None:
            raise NoPendingExchange(f"{step.step_id}: step was never assessed")
        closed = replace(
            exchange, response=ExchangeResponse(mode=mode, answer_text=None, at=at)
        )
        assessment = replace(step.assessment, overall=STRONG)
        summary = summarize_step(
            full_transcript,
            step.step_text,
            step.snapshot_refs,
            gateway,
            images=images,
            exchange=closed,
        )
        return replace(
            step,
            exchange=closed,
            assessment=assessment,
            summary=summary,
            status=STATUS_RESOLVED_STRONG,
        )

    if mode in (MODE_ANSWERED, MODE_SUPPLEMENTED):
        if not (answer_text and answer_text.strip()):
            raise ValueError(f"{mode} requires a non-empty answer_text")
        closed = replace(
            exchange, response=ExchangeResponse(mode=mode, answer_text=answer_text, at=at)
        )
        combined = combined_step_text(step.step_text, answer_text)
        try:
            assessment = evaluate_rationale(combined, gateway, few_shots=few_shots)
        except SchemaViolation:
            assessment = step.assessment
        status = (
            STATUS_RESOLVED_STRONG
            if assessment is not None and assessment.overall == STRONG
            else STATUS_RESOLVED_WEAK
        )
        summary: Optional[DecisionStepSummary]
        try:
            summary = summarize_step(
                full_transcript,
                step.step_text,
                step.snapshot_refs,
                gateway,
                images=images,
                exchange=closed,
            )
        except SchemaViolation:
            summary = None
        return replace(step, exchange=closed, assessment=assessment, summary=summary, status=status)

    raise ValueError(f"unknown response mode: {mode}")
