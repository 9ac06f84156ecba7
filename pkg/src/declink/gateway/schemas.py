"""Parsing and validation of model output against per-template schemas.

Key names match the templates' formatting-instruction blocks exactly, so
fixture files can be copied from real model traces.
"""

from __future__ import annotations

import json
import re

from ..model import CATEGORY_CODES
from .errors import SchemaViolation

_FENCE_RE = re.compile(r"^```[a-zA-Z]*\s*|\s*```$")


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = _FENCE_RE.sub("", text).strip()
    return text


def _load_json(raw: str) -> object:
    text = _strip_fences(raw)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        # Fall back to the outermost braced region (models often add prose).
        start, end = text.find("{"), text.rfind("}")
        if start == -1 or end <= start:
            raise SchemaViolation("response is not JSON")
        try:
            return json.loads(text[start : end + 1])
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"response is not valid JSON: {exc.msg}")


def _require_str(value: object, where: str, allow_empty: bool = False) -> str:
    if not isinstance(value, str) or (not allow_empty and not value.strip()):
        raise SchemaViolation(f"{where} must be a non-empty string")
    return value


def _parse_group_map(raw: str) -> dict[str, str]:
    data = _load_json(raw)
    if not isinstance(data, dict) or not data:
        raise SchemaViolation("group map must be a non-empty JSON object")
    out: dict[str, str] = {}
    for key, value in data.items():
        if not isinstance(key, str) or not key.strip().isdigit():
            raise SchemaViolation(f"group key {key!r} is not an integer string")
        out[key.strip()] = _require_str(value, f"group {key!r}")
    return out


def _pairs(value: object, side: str) -> list[tuple[str, list[str]]]:
    """Accept the list-of-single-key-objects form or a flat object."""
    pairs: list[tuple[str, list[str]]] = []
    if isinstance(value, dict):
        items = list(value.items())
    elif isinstance(value, list):
        items = []
        for entry in value:
            if not isinstance(entry, dict) or len(entry) != 1:
                raise SchemaViolation(f"{side} entries must be single-key objects")
            items.append(next(iter(entry.items())))
    else:
        raise SchemaViolation(f"{side} must be a list or object")
    for key, targets in items:
        if not isinstance(targets, list) or not all(isinstance(t, (str, int, float)) for t in targets):
            raise SchemaViolation(f"{side}[{key!r}] must be a list of keys")
        pairs.append((str(key), [str(t) for t in targets]))
    return pairs


def _parse_link_map(raw: str) -> dict[str, list[tuple[str, list[str]]]]:
    data = _load_json(raw)
    if not isinstance(data, dict):
        raise SchemaViolation("link map must be a JSON object")
    if "links" not in data or "reversed_links" not in data:
        raise SchemaViolation("link map needs 'links' and 'reversed_links'")
    return {
        "links": _pairs(data["links"], "links"),
        "reversed_links": _pairs(data["reversed_links"], "reversed_links"),
    }


_ASSIGN_TOKENS = ("left", "right", "unrelated")


def _parse_assign_decision(raw: str) -> str:
    text = _strip_fences(raw).strip()
    if text.startswith("{"):
        data = _load_json(text)
        if isinstance(data, dict) and len(data) == 1:
            text = str(next(iter(data.values())))
    token = text.strip().strip("'\".,").lower()
    if token not in _ASSIGN_TOKENS:
        raise SchemaViolation(f"assignment must be one of {_ASSIGN_TOKENS}, got {raw!r}")
    return token


def _parse_rationale_eval(raw: str) -> dict:
    data = _load_json(raw)
    if not isinstance(data, dict):
        raise SchemaViolation("rationale evaluation must be a JSON object")
    reason = _require_str(data.get("reason"), "'reason'")
    categories = data.get("categories")
    if not isinstance(categories, list) or not categories:
        raise SchemaViolation("'categories' must be a non-empty list")
    cleaned = []
    for cat in categories:
        if not isinstance(cat, str) or cat.strip() not in CATEGORY_CODES:
            raise SchemaViolation(f"unknown category code: {cat!r}")
        cleaned.append(cat.strip())
    return {"reason": reason, "categories": cleaned}


def _parse_question(raw: str) -> dict:
    data = _load_json(raw)
    if not isinstance(data, dict):
        raise SchemaViolation("question output must be a JSON object")
    return {"question": _require_str(data.get("question"), "'question'")}


def _none_or_str(value: object, where: str) -> str | None:
    if value is None:
        return None
    if isinstance(value, str):
        return None if value.strip().lower() in ("none", "") else value
    raise SchemaViolation(f"{where} must be a string or null")


def _parse_inference(raw: str) -> dict:
    data = _load_json(raw)
    if not isinstance(data, dict):
        raise SchemaViolation("inference output must be a JSON object")
    if "inferred_rationale" not in data:
        raise SchemaViolation("inference output needs 'inferred_rationale'")
    return {
        "inferred_rationale": _none_or_str(data.get("inferred_rationale"), "'inferred_rationale'"),
        "reasoning": _none_or_str(data.get("reasoning"), "'reasoning'"),
    }


def _parse_summary_triple(raw: str) -> dict:
    data = _load_json(raw)
    if not isinstance(data, dict):
        raise SchemaViolation("summary must be a JSON object")
    out = {}
    for key in ("decision_and_actions", "rationale", "progression"):
        out[key] = _require_str(data.get(key), f"'{key}'")
    return out


def _parse_boundary_list(raw: str) -> dict:
    data = _load_json(raw)
    if not isinstance(data, dict) or "boundaries" not in data:
        raise SchemaViolation("output needs a 'boundaries' list")
    bounds = data["boundaries"]
    if not isinstance(bounds, list) or not all(isinstance(b, int) and b > 0 for b in bounds):
        raise SchemaViolation("'boundaries' must be a list of positive integers")
    return {"boundaries": sorted(set(bounds))}


_PARSERS = {
    "group_map": _parse_group_map,
    "link_map": _parse_link_map,
    "assign_decision": _parse_assign_decision,
    "rationale_eval": _parse_rationale_eval,
    "question": _parse_question,
    "inference": _parse_inference,
    "summary_triple": _parse_summary_triple,
    "boundary_list": _parse_boundary_list,
}


def parse_structured(schema_id: str, raw: str):
    try:
        parser = _PARSERS[schema_id]
    except KeyError:
        raise ValueError(f"unknown output schema: {schema_id}")
    return parser(raw)
