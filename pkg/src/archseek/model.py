"""Domain types for design cases and their on-disk JSON representation.

A design case is one architectural project: its collected description, its
media assets, and the critique entries derived from them. All types here are
immutable value objects; `validate_case` reports invariant violations as data
instead of raising.
"""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Mapping

import numpy as np

CaseId = int

FORMAT_VERSION = "1"


class Space(str, Enum):
    """Embedding space an entry or image vector lives in."""

    TEXT = "text"
    CROSSMODAL = "crossmodal"


class MediaKind(str, Enum):
    IMAGE = "image"
    TEXT = "text"


class Aspect(str, Enum):
    """Critique dimensions, plus a catch-all for chunks of source text."""

    FORM = "form"
    STYLE = "style"
    MATERIAL_USAGE = "material_usage"
    SENSE_OF_FEELING = "sense_of_feeling"
    CONTEXT_RELATIONS = "context_relations"
    PASSIVE_DESIGN = "passive_design"
    GENERAL_HIGHLIGHTS = "general_highlights"
    ORIGINAL_TEXT = "original_text"


#: The seven aspects a critique covers, in prompt order. ORIGINAL_TEXT is
#: reserved for description chunks and never appears in critique output.
CRITIQUE_ASPECTS: tuple[Aspect, ...] = (
    Aspect.FORM,
    Aspect.STYLE,
    Aspect.MATERIAL_USAGE,
    Aspect.SENSE_OF_FEELING,
    Aspect.CONTEXT_RELATIONS,
    Aspect.PASSIVE_DESIGN,
    Aspect.GENERAL_HIGHLIGHTS,
)


def encode_f32_b64(values: Iterable[float]) -> str:
    """Pack floats as little-endian float32 and base64-encode them."""
    arr = np.asarray(list(values), dtype="<f4")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def decode_f32_b64(data: str) -> tuple[float, ...]:
    raw = base64.b64decode(data.encode("ascii"))
    arr = np.frombuffer(raw, dtype="<f4")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension float32 vector in a named space.

    Values are coerced through float32 on construction so that equality and
    the base64 round trip are bit-exact.
    """

    space: Space
    values: tuple[float, ...]
    dim: int

    def __post_init__(self) -> None:
        coerced = tuple(float(np.float32(v)) for v in self.values)
        object.__setattr__(self, "values", coerced)
        if len(self.values) != self.dim:
            raise ValueError(
                f"embedding has {len(self.values)} values but dim={self.dim}"
            )

    @classmethod
    def of(cls, space: Space, values: Iterable[float]) -> "EmbeddingVector":
        vals = tuple(values)
        return cls(space=space, values=vals, dim=len(vals))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float32)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array().astype(np.float64)))

    def to_record(self) -> dict[str, Any]:
        return {"space": self.space.value, "dim": self.dim, "b64": encode_f32_b64(self.values)}

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "EmbeddingVector":
        return cls(space=Space(rec["space"]), values=decode_f32_b64(rec["b64"]), dim=int(rec["dim"]))


@dataclass(frozen=True)
class MediaAsset:
    asset_id: str
    kind: MediaKind
    source_path: str
    category_hint: str | None = None


@dataclass(frozen=True)
class AnalysisEntry:
    """One aspect-tagged critique sentence, or one chunk of the description.

    `origin` is the asset_id the sentence was derived from, or "description"
    for chunks of the case's own text. Embeddings are filled in by ingestion
    and stay None until then.
    """

    entry_id: str
    case_id: CaseId
    aspect: Aspect
    text: str
    origin: str
    text_embedding: EmbeddingVector | None = None
    crossmodal_embedding: EmbeddingVector | None = None

    def with_embeddings(
        self,
        text_embedding: EmbeddingVector | None,
        crossmodal_embedding: EmbeddingVector | None,
    ) -> "AnalysisEntry":
        return replace(
            self, text_embedding=text_embedding, crossmodal_embedding=crossmodal_embedding
        )


@dataclass(frozen=True)
class DesignCase:
    case_id: CaseId
    title: str
    description: str
    assets: tuple[MediaAsset, ...] = ()
    entries: tuple[AnalysisEntry, ...] = ()
    image_embeddings: dict[str, EmbeddingVector] = field(default_factory=dict)

    def asset(self, asset_id: str) -> MediaAsset | None:
        for a in self.assets:
            if a.asset_id == asset_id:
                return a
        return None


def _path_escapes_folder(path: str) -> bool:
    if not path or path.startswith(("/", "\\")):
        return True
    parts = path.replace("\\", "/").split("/")
    return ".." in parts or ":" in parts[0]


def _check_embedding(
    vec: EmbeddingVector, expected_space: Space, label: str, out: list[str]
) -> None:
    if vec.space is not expected_space:
        out.append(f"{label}: wrong space {vec.space.value}")
    if len(vec.values) != vec.dim:
        out.append(f"{label}: dim mismatch")
        return
    if not vec.is_finite():
        out.append(f"{label}: non-finite values")
    elif vec.norm() == 0.0:
        out.append(f"{label}: zero norm")


def validate_case(case: DesignCase) -> list[str]:
    """Check every type invariant; return one message per violation.

    Violations are data, not errors: a malformed case yields descriptions of
    what is broken, never an exception. Idempotent and side-effect free.
    """
    violations: list[str] = []

    if case.case_id < 0:
        violations.append(f"case {case.case_id}: id negative")

    seen_assets: set[str] = set()
    image_asset_ids: set[str] = set()
    for asset in case.assets:
        if asset.asset_id in seen_assets:
            violations.append(f"asset {asset.asset_id}: duplicate id")
        seen_assets.add(asset.asset_id)
        if asset.kind is MediaKind.IMAGE:
            image_asset_ids.add(asset.asset_id)
        if _path_escapes_folder(asset.source_path):
            violations.append(f"asset {asset.asset_id}: source_path escapes case folder")

    seen_entries: set[str] = set()
    for entry in case.entries:
        label = f"entry {entry.entry_id}"
        if entry.entry_id in seen_entries:
            violations.append(f"{label}: duplicate id")
        seen_entries.add(entry.entry_id)
        if entry.case_id != case.case_id:
            violations.append(f"{label}: case_id mismatch")
        if not entry.text.strip():
            violations.append(f"{label}: text empty")
        if entry.origin != "description" and entry.origin not in seen_assets:
            violations.append(f"{label}: unknown origin {entry.origin!r}")
        if entry.text_embedding is not None:
            _check_embedding(entry.text_embedding, Space.TEXT, label, violations)
        if entry.crossmodal_embedding is not None:
            _check_embedding(entry.crossmodal_embedding, Space.CROSSMODAL, label, violations)

    for asset_id, vec in case.image_embeddings.items():
        label = f"image embedding {asset_id}"
        if asset_id not in image_asset_ids:
            violations.append(f"{label}: no matching image asset")
        _check_embedding(vec, Space.CROSSMODAL, label, violations)

    return violations


def _entry_to_record(entry: AnalysisEntry) -> dict[str, Any]:
    return {
        "entry_id": entry.entry_id,
        "case_id": entry.case_id,
        "aspect": entry.aspect.value,
        "text": entry.text,
        "origin": entry.origin,
        "text_embedding": entry.text_embedding.to_record() if entry.text_embedding else None,
        "crossmodal_embedding": (
            entry.crossmodal_embedding.to_record() if entry.crossmodal_embedding else None
        ),
    }


def _entry_from_record(rec: Mapping[str, Any]) -> AnalysisEntry:
    return AnalysisEntry(
        entry_id=rec["entry_id"],
        case_id=int(rec["case_id"]),
        aspect=Aspect(rec["aspect"]),
        text=rec["text"],
        origin=rec["origin"],
        text_embedding=(
            EmbeddingVector.from_record(rec["text_embedding"]) if rec["text_embedding"] else None
        ),
        crossmodal_embedding=(
            EmbeddingVector.from_record(rec["crossmodal_embedding"])
            if rec["crossmodal_embedding"]
            else None
        ),
    )


def case_to_record(case: DesignCase) -> dict[str, Any]:
    """JSON-serializable record for one case; embeddings as base64 float32."""
    return {
        "case_id": case.case_id,
        "title": case.title,
        "description": case.description,
        "assets": [
            {
                "asset_id": a.asset_id,
                "kind": a.kind.value,
                "source_path": a.source_path,
                "category_hint": a.category_hint,
            }
            for a in case.assets
        ],
        "entries": [_entry_to_record(e) for e in case.entries],
        "image_embeddings": {
            asset_id: vec.to_record() for asset_id, vec in sorted(case.image_embeddings.items())
        },
    }


def case_from_record(rec: Mapping[str, Any]) -> DesignCase:
    return DesignCase(
        case_id=int(rec["case_id"]),
        title=rec["title"],
        description=rec["description"],
        assets=tuple(
            MediaAsset(
                asset_id=a["asset_id"],
                kind=MediaKind(a["kind"]),
                source_path=a["source_path"],
                category_hint=a.get("category_hint"),
            )
            for a in rec["assets"]
        ),
        entries=tuple(_entry_from_record(e) for e in rec["entries"]),
        image_embeddings={
            asset_id: EmbeddingVector.from_record(v)
            for asset_id, v in rec["image_embeddings"].items()
        },
    )
