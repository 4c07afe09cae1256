"""Vision-language critique of case media, and description chunking.

Each image (and optionally each text file) of a case is sent to a VLM with a
critic-style prompt that asks for sentences grouped under seven fixed
aspects, returned as structured JSON. Replies are repaired through a bounded
ladder (strip code fences, then trim to the outermost braces) before parsing;
anything still unparseable is a per-asset failure, not a pipeline failure.

The replay client reads canned replies from a fixtures directory keyed by the
sha256 of the asset bytes; every offline test and the demo corpus use it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import requests

from .errors import AugmentationError, ConfigurationError, InputError, TransportError
from .model import CRITIQUE_ASPECTS, AnalysisEntry, Aspect, CaseId

logger = logging.getLogger(__name__)

#: Aspect names exactly as the prompt spells them, mapped to domain values.
PROMPT_KEY_TO_ASPECT: dict[str, Aspect] = {
    "form": Aspect.FORM,
    "style": Aspect.STYLE,
    "material usage": Aspect.MATERIAL_USAGE,
    "sense of feeling": Aspect.SENSE_OF_FEELING,
    "relations to the surrounding context": Aspect.CONTEXT_RELATIONS,
    "passive design techniques": Aspect.PASSIVE_DESIGN,
    "general design highlights": Aspect.GENERAL_HIGHLIGHTS,
}

PROMPT_ASPECT_KEYS: tuple[str, ...] = tuple(PROMPT_KEY_TO_ASPECT)

DEFAULT_PROMPT_TEMPLATE = """You are a wonderful architecture critic. please describe the architectural design of this image in details.

# Guide
- Cover the following aspects:
    - form
    - style
    - material usage
    - sense of feeling
    - relations to the surrounding context
    - passive design techniques
    - general design highlights
- For each aspect, cover as many components as you can.
- Write like an architecture critic.
- Your response should be in a structured json:
```json
{
  "analysis":{
    "form": [
        "<each sentence is a list item>",
    ],
    "<other aspects>": <return an empty list if not applicable>
  }
}
```
"""


@dataclass(frozen=True)
class CritiquePrompt:
    template: str = DEFAULT_PROMPT_TEMPLATE
    aspect_keys: tuple[str, ...] = PROMPT_ASPECT_KEYS

    def __post_init__(self) -> None:
        missing = [k for k in self.aspect_keys if k not in self.template]
        if missing:
            raise ConfigurationError(f"prompt template missing aspect keys: {missing}")
        if "```json" not in self.template:
            raise ConfigurationError("prompt template missing the JSON schema block")


@dataclass(frozen=True)
class CritiqueResponse:
    """Parsed critique: per-aspect sentence lists (possibly empty).

    `warnings` records dropped unknown keys and coerced values so ingestion
    can surface them without failing the asset.
    """

    sentences: Mapping[Aspect, tuple[str, ...]]
    warnings: tuple[str, ...] = ()

    def is_empty(self) -> bool:
        return not any(self.sentences.values())

    def total_sentences(self) -> int:
        return sum(len(v) for v in self.sentences.values())


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def _repair_candidates(raw: str) -> list[str]:
    candidates = [raw]
    fenced = _FENCE.search(raw)
    if fenced:
        candidates.append(fenced.group(1))
    start, end = raw.find("{"), raw.rfind("}")
    if start != -1 and end > start:
        candidates.append(raw[start : end + 1])
    return candidates


def parse_critique_reply(raw: str) -> CritiqueResponse:
    """Parse a model reply into per-aspect sentences.

    Accepts the schema'd {"analysis": {...}} wrapper or a bare aspect map.
    Unknown aspect keys are dropped with a warning; blank sentences are
    discarded; duplicate sentences within one aspect collapse to the first.
    """
    payload = None
    for candidate in _repair_candidates(raw):
        try:
            payload = json.loads(candidate)
            break
        except json.JSONDecodeError:
            continue
    if not isinstance(payload, dict):
        raise AugmentationError("critique reply is not parseable JSON")

    body = payload.get("analysis", payload)
    if not isinstance(body, dict):
        raise AugmentationError("critique reply has no aspect map")

    warnings: list[str] = []
    sentences: dict[Aspect, tuple[str, ...]] = {a: () for a in CRITIQUE_ASPECTS}
    for key, value in body.items():
        aspect = PROMPT_KEY_TO_ASPECT.get(str(key).strip().lower())
        if aspect is None:
            warnings.append(f"dropped unknown aspect key {key!r}")
            continue
        if isinstance(value, str):
            value = [value]
            warnings.append(f"aspect {key!r}: coerced bare string to a one-item list")
        if not isinstance(value, list):
            warnings.append(f"aspect {key!r}: ignored non-list value")
            continue
        seen: set[str] = set()
        kept: list[str] = []
        for item in value:
            if not isinstance(item, str):
                warnings.append(f"aspect {key!r}: ignored non-string sentence")
                continue
            text = item.strip()
            if not text or text in seen:
                continue
            seen.add(text)
            kept.append(text)
        sentences[aspect] = tuple(kept)

    return CritiqueResponse(sentences=sentences, warnings=tuple(warnings))


class ReplayVlmClient:
    """Serves canned replies from `<fixtures_dir>/<sha256(asset_bytes)>.txt`."""

    def __init__(self, fixtures_dir: str | Path) -> None:
        self.fixtures_dir = Path(fixtures_dir)
        if not self.fixtures_dir.is_dir():
            raise ConfigurationError(f"replay fixtures dir not found: {fixtures_dir}")

    @staticmethod
    def fixture_name(asset_bytes: bytes) -> str:
        return hashlib.sha256(asset_bytes).hexdigest() + ".txt"

    def critique(self, prompt_text: str, asset_bytes: bytes, media_type: str) -> str:
        path = self.fixtures_dir / self.fixture_name(asset_bytes)
        if not path.is_file():
            raise AugmentationError(f"no replay fixture for asset hash {path.stem}")
        return path.read_text(encoding="utf-8")


@dataclass(frozen=True)
class VlmConfig:
    endpoint_url: str
    model_name: str
    api_key_env_var: str = ""
    timeout: float = 120.0
    max_retries: int = 2


class RemoteVlmClient:
    """Chat-completions-style endpoint: prompt plus base64 asset, JSON back."""

    def __init__(self, config: VlmConfig, session: requests.Session | None = None) -> None:
        self.config = config
        self._session = session or requests.Session()

    def critique(self, prompt_text: str, asset_bytes: bytes, media_type: str) -> str:
        import base64
        import os

        if media_type in ("png", "jpeg"):
            content = [
                {"type": "text", "text": prompt_text},
                {
                    "type": "image_url",
                    "image_url": {
                        "url": "data:image/%s;base64,%s"
                        % (media_type, base64.b64encode(asset_bytes).decode("ascii"))
                    },
                },
            ]
        else:
            content = [
                {"type": "text", "text": prompt_text},
                {"type": "text", "text": asset_bytes.decode("utf-8", errors="replace")},
            ]
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": content}],
        }
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env_var:
            key = os.environ.get(self.config.api_key_env_var)
            if key:
                headers["Authorization"] = f"Bearer {key}"

        last_exc: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            try:
                resp = self._session.post(
                    self.config.endpoint_url, json=body, headers=headers,
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                last_exc = TransportError(f"VLM unreachable: {exc}")
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"VLM returned {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise InputError(f"VLM rejected request: {resp.status_code}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError) as exc:
                raise ConfigurationError(f"unexpected VLM reply shape: {exc}") from exc
        assert last_exc is not None
        raise last_exc


def critique_media(
    vlm, asset_bytes: bytes, media_type: str, prompt: CritiquePrompt | None = None
) -> CritiqueResponse:
    """Run one asset through the critic prompt and parse the reply."""
    prompt = prompt or CritiquePrompt()
    raw = vlm.critique(prompt.template, asset_bytes, media_type)
    response = parse_critique_reply(raw)
    for warning in response.warnings:
        logger.warning("critique parse: %s", warning)
    return response


def response_to_entries(
    response: CritiqueResponse, case_id: CaseId, origin: str
) -> list[AnalysisEntry]:
    """One entry per distinct sentence, tagged with its aspect.

    Entry ids are deterministic (`<case>:<origin>:<aspect>:<n>`) so repeated
    ingestion of the same inputs produces identical databases.
    """
    entries: list[AnalysisEntry] = []
    for aspect in CRITIQUE_ASPECTS:
        for i, text in enumerate(response.sentences.get(aspect, ())):
            entries.append(
                AnalysisEntry(
                    entry_id=f"{case_id}:{origin}:{aspect.value}:{i}",
                    case_id=case_id,
                    aspect=aspect,
                    text=text,
                    origin=origin,
                )
            )
    return entries


_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+|\n+")


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_BOUNDARY.split(text) if s.strip()]


def chunk_description(text: str, max_chars: int = 500) -> list[str]:
    """Greedily pack sentences into chunks of at most `max_chars` characters.

    Splits only on sentence boundaries; a single sentence longer than the
    budget becomes its own chunk rather than being cut mid-word. Joining the
    chunks with single spaces reproduces the input up to boundary whitespace.
    """
    sentences = split_sentences(text)
    chunks: list[str] = []
    current: list[str] = []
    current_len = 0
    for sentence in sentences:
        added = len(sentence) if not current else len(sentence) + 1
        if current and current_len + added > max_chars:
            chunks.append(" ".join(current))
            current, current_len = [], 0
            added = len(sentence)
        current.append(sentence)
        current_len += added
    if current:
        chunks.append(" ".join(current))
    return chunks
