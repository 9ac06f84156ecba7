"""Single mediation point for all model calls.

Modes:
  scripted  — replay fixture files keyed by (template_id, sha256 of variables)
  live      — HTTP chat-completion endpoint with bounded JSON-repair retries
  heuristic — deterministic lexical responder (fuzz tests only)

Fixture layout: <fixtures_dir>/<template_id>/<hash>.json holding
{"content": "<raw model text>"} so files can be copied from live traces.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import requests

from . import heuristic, schemas
from .errors import ProviderUnavailable, SchemaViolation
from .templates import TEMPLATES, render_prompt

MODE_LIVE = "live"
MODE_SCRIPTED = "scripted"
MODE_HEURISTIC = "heuristic"

IMAGE_CAP = 4  # most-recent snapshots per call; guards against token overflow

_REPAIR_INSTRUCTION = (
    "Your previous output was not valid JSON matching the schema; output only the JSON."
)


@dataclass
class ProviderConfig:
    mode: str = MODE_SCRIPTED
    endpoint: Optional[str] = None
    model: Optional[str] = None
    temperature: float = 0.3
    max_retries: int = 2
    fixtures_dir: Optional[Path] = None
    audit_path: Optional[Path] = None

    def __post_init__(self):
        if self.mode not in (MODE_LIVE, MODE_SCRIPTED, MODE_HEURISTIC):
            raise ValueError(f"unknown provider mode: {self.mode}")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be within [0, 1]")
        if self.mode == MODE_SCRIPTED:
            if self.fixtures_dir is None:
                raise ValueError("scripted mode requires a fixtures directory")
            self.fixtures_dir = Path(self.fixtures_dir)
        if self.mode == MODE_LIVE and not self.endpoint:
            raise ValueError("live mode requires an endpoint")

    @classmethod
    def from_env(cls, **overrides) -> "ProviderConfig":
        env = {
            "endpoint": os.environ.get("PROVIDER_ENDPOINT"),
            "model": os.environ.get("PROVIDER_MODEL"),
        }
        if "PROVIDER_TEMPERATURE" in os.environ:
            env["temperature"] = float(os.environ["PROVIDER_TEMPERATURE"])
        env.update(overrides)
        return cls(**env)


def variables_hash(variables: dict[str, str]) -> str:
    canonical = json.dumps(variables, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def fixture_path(fixtures_dir: Path, template_id: str, variables: dict[str, str]) -> Path:
    return Path(fixtures_dir) / template_id / f"{variables_hash(variables)}.json"


@dataclass
class AuditEntry:
    template_id: str
    input_hash: str
    retries: int
    outcome: str  # ok | provider_unavailable | schema_violation


class Gateway:
    """Renders prompts, calls the provider, and parses structured output.

    Scripted mode is a pure function of (template_id, variables); the audit
    log is the only internal state and is an append-only serialized sink.
    """

    def __init__(self, config: ProviderConfig, http_post=None):
        self.config = config
        self._post = http_post or requests.post
        self._audit_lock = threading.Lock()
        self.audit_log: list[AuditEntry] = []

    # -- public API --------------------------------------------------------

    def complete_structured(
        self,
        template_id: str,
        variables: dict[str, str],
        images: Sequence[bytes] = (),
    ) -> tuple[object, str]:
        """Returns (parsed record, raw response text) for auditability."""
        template = TEMPLATES[template_id]
        if images and not template.expects_images:
            raise ValueError(f"{template_id} does not take images")
        images = list(images)[-IMAGE_CAP:]
        variables = {k: str(v) for k, v in variables.items()}
        input_hash = variables_hash(variables)

        if self.config.mode == MODE_SCRIPTED:
            return self._scripted(template, variables, input_hash)
        if self.config.mode == MODE_HEURISTIC:
            return self._heuristic(template, variables, input_hash)
        return self._live(template, variables, images, input_hash)

    # -- mode backends ------------------------------------------------------

    def _scripted(self, template, variables, input_hash):
        path = fixture_path(self.config.fixtures_dir, template.template_id, variables)
        if not path.is_file():
            self._audit(template.template_id, input_hash, 0, "provider_unavailable")
            raise ProviderUnavailable(f"no fixture for {template.template_id}/{input_hash}")
        raw = json.loads(path.read_text(encoding="utf-8"))["content"]
        try:
            parsed = schemas.parse_structured(template.output_schema_id, raw)
        except SchemaViolation:
            self._audit(template.template_id, input_hash, 0, "schema_violation")
            raise
        self._audit(template.template_id, input_hash, 0, "ok")
        return parsed, raw

    def _heuristic(self, template, variables, input_hash):
        raw = heuristic.respond(template.template_id, variables)
        parsed = schemas.parse_structured(template.output_schema_id, raw)
        self._audit(template.template_id, input_hash, 0, "ok")
        return parsed, raw

    def _live(self, template, variables, images, input_hash):
        prompt = render_prompt(template.template_id, variables)
        last_error: Optional[SchemaViolation] = None
        for attempt in range(self.config.max_retries + 1):
            text = prompt if attempt == 0 else f"{prompt}\n\n{_REPAIR_INSTRUCTION}"
            try:
                raw = self._chat_completion(text, images)
            except requests.RequestException as exc:
                self._audit(template.template_id, input_hash, attempt, "provider_unavailable")
                raise ProviderUnavailable(str(exc))
            try:
                parsed = schemas.parse_structured(template.output_schema_id, raw)
            except SchemaViolation as exc:
                last_error = exc
                continue
            self._audit(template.template_id, input_hash, attempt, "ok")
            return parsed, raw
        self._audit(template.template_id, input_hash, self.config.max_retries, "schema_violation")
        raise SchemaViolation(last_error.detail, retries=self.config.max_retries)

    def _chat_completion(self, prompt: str, images: Sequence[bytes]) -> str:
        content: list[dict] = [{"type": "text", "text": prompt}]
        for blob in images:
            encoded = base64.b64encode(blob).decode("ascii")
            content.append(
                {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{encoded}"}}
            )
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": content}],
        }
        resp = self._post(self.config.endpoint, json=payload, timeout=120)
        resp.raise_for_status()
        body = resp.json()
        return body["choices"][0]["message"]["content"]

    # -- audit ---------------------------------------------------------------

    def _audit(self, template_id: str, input_hash: str, retries: int, outcome: str) -> None:
        entry = AuditEntry(template_id, input_hash, retries, outcome)
        with self._audit_lock:
            self.audit_log.append(entry)
            if self.config.audit_path is not None:
                with open(self.config.audit_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry.__dict__) + "\n")


def write_fixture(fixtures_dir: Path, template_id: str, variables: dict[str, str], raw: str) -> Path:
    """Record one scripted response; used by fixture-authoring tooling."""
    path = fixture_path(fixtures_dir, template_id, {k: str(v) for k, v in variables.items()})
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"content": raw}, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path
