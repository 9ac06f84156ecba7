from .errors import GatewayError, ProviderUnavailable, SchemaViolation, UnboundPlaceholder
from .provider import (
    IMAGE_CAP,
    MODE_HEURISTIC,
    MODE_LIVE,
    MODE_SCRIPTED,
    Gateway,
    ProviderConfig,
    fixture_path,
    variables_hash,
    write_fixture,
)
from .templates import (
    BASELINE_SEGMENT,
    QUESTION_GEN,
    RATIONALE_EVAL,
    RATIONALE_INFER,
    SA_LINK,
    SENTENCE_ASSIGN,
    SENTENCE_LINK,
    SUMMARY,
    SUMMARY_WITH_ANSWER,
    TEMPLATES,
    PromptTemplate,
    render_prompt,
)

__all__ = [
    "GatewayError",
    "ProviderUnavailable",
    "SchemaViolation",
    "UnboundPlaceholder",
    "Gateway",
    "ProviderConfig",
    "IMAGE_CAP",
    "MODE_LIVE",
    "MODE_SCRIPTED",
    "MODE_HEURISTIC",
    "fixture_path",
    "variables_hash",
    "write_fixture",
    "TEMPLATES",
    "PromptTemplate",
    "render_prompt",
    "SENTENCE_LINK",
    "SA_LINK",
    "SENTENCE_ASSIGN",
    "RATIONALE_EVAL",
    "QUESTION_GEN",
    "RATIONALE_INFER",
    "SUMMARY",
    "SUMMARY_WITH_ANSWER",
    "BASELINE_SEGMENT",
]
