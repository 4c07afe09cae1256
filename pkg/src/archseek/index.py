"""Searchable case database: persistence plus exact brute-force scans.

The database directory holds `manifest.json` (space dims, provider names,
chunking parameters, format version, content checksum) and `cases.jsonl`
(one record per case, ascending case id). At 54-case scale an exact scan
over dense matrices beats any approximate structure, and it keeps every
ranking deterministic: scores are stored float32, accumulated float64, and
ties always break by ascending case id.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, NamedTuple

import numpy as np

from .errors import ConfigurationError, InputError
from .model import (
    FORMAT_VERSION,
    Aspect,
    CaseId,
    DesignCase,
    EmbeddingVector,
    Space,
    case_from_record,
    case_to_record,
    validate_case,
)

MANIFEST_FILE = "manifest.json"
CASES_FILE = "cases.jsonl"


@dataclass(frozen=True)
class SpaceSpec:
    provider: str
    model: str
    dim: int


@dataclass(frozen=True)
class Manifest:
    text_space: SpaceSpec
    crossmodal_space: SpaceSpec
    chunk_chars: int
    critique_text_assets: bool
    format_version: str = FORMAT_VERSION
    cases_sha256: str = ""

    def spec_for(self, space: Space) -> SpaceSpec:
        return self.text_space if space is Space.TEXT else self.crossmodal_space

    def to_record(self) -> dict[str, Any]:
        return {
            "format_version": self.format_version,
            "text_space": vars(self.text_space),
            "crossmodal_space": vars(self.crossmodal_space),
            "chunk_chars": self.chunk_chars,
            "critique_text_assets": self.critique_text_assets,
            "cases_sha256": self.cases_sha256,
        }

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "Manifest":
        return cls(
            text_space=SpaceSpec(**rec["text_space"]),
            crossmodal_space=SpaceSpec(**rec["crossmodal_space"]),
            chunk_chars=int(rec["chunk_chars"]),
            critique_text_assets=bool(rec["critique_text_assets"]),
            format_version=rec["format_version"],
            cases_sha256=rec.get("cases_sha256", ""),
        )

    def compatible_with(self, other: "Manifest") -> bool:
        return (
            self.format_version == other.format_version
            and self.text_space == other.text_space
            and self.crossmodal_space == other.crossmodal_space
            and self.chunk_chars == other.chunk_chars
            and self.critique_text_assets == other.critique_text_assets
        )


class ScanRow(NamedTuple):
    case_id: CaseId
    best_id: str  # entry_id (text space) or asset_id (image space)
    cosine: float


class _ScanPlan:
    """Dense float64 view over one filtered set of vectors, grouped by case."""

    def __init__(
        self,
        matrix: np.ndarray,
        row_ids: list[str],
        case_slices: list[tuple[CaseId, int, int]],
    ) -> None:
        self.matrix = matrix
        self.norms = np.linalg.norm(matrix, axis=1) if len(matrix) else np.zeros(0)
        self.row_ids = row_ids
        self.case_slices = case_slices

    def scan(self, query: EmbeddingVector) -> list[ScanRow]:
        if not self.case_slices:
            return []
        q = query.as_array().astype(np.float64)
        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            raise InputError("query vector has zero norm")
        sims = (self.matrix @ q) / (self.norms * qnorm)
        rows = []
        for case_id, start, end in self.case_slices:
            sub = sims[start:end]
            best = int(np.argmax(sub))  # first max: earliest stored entry wins
            rows.append(ScanRow(case_id, self.row_ids[start + best], float(sub[best])))
        rows.sort(key=lambda r: (-r.cosine, r.case_id))
        return rows


class CaseDatabase:
    """Immutable after construction; scans are read-only and thread-safe."""

    def __init__(self, manifest: Manifest, cases: Iterable[DesignCase]) -> None:
        ordered = sorted(cases, key=lambda c: c.case_id)
        ids = [c.case_id for c in ordered]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate case ids in database")
        self.manifest = manifest
        self.cases: tuple[DesignCase, ...] = tuple(ordered)
        self._by_id = {c.case_id: c for c in ordered}
        self._text_plans: dict[tuple[bool, bool], _ScanPlan] = {}
        self._image_plan: _ScanPlan | None = None
        self.ingest_report = None  # set by ingestion, never persisted

    def __len__(self) -> int:
        return len(self.cases)

    @property
    def case_ids(self) -> tuple[CaseId, ...]:
        return tuple(c.case_id for c in self.cases)

    def case(self, case_id: CaseId) -> DesignCase:
        try:
            return self._by_id[case_id]
        except KeyError:
            raise InputError(f"unknown case id {case_id}") from None

    def has_case(self, case_id: CaseId) -> bool:
        return case_id in self._by_id

    def _get_text_plan(self, include_augmented: bool, include_chunks: bool) -> _ScanPlan:
        key = (include_augmented, include_chunks)
        plan = self._text_plans.get(key)
        if plan is None:
            vectors: list[np.ndarray] = []
            row_ids: list[str] = []
            slices: list[tuple[CaseId, int, int]] = []
            for case in self.cases:
                start = len(vectors)
                for entry in case.entries:
                    is_chunk = entry.aspect is Aspect.ORIGINAL_TEXT
                    if is_chunk and not include_chunks:
                        continue
                    if not is_chunk and not include_augmented:
                        continue
                    if entry.text_embedding is None:
                        continue
                    vectors.append(entry.text_embedding.as_array().astype(np.float64))
                    row_ids.append(entry.entry_id)
                if len(vectors) > start:
                    slices.append((case.case_id, start, len(vectors)))
            matrix = np.vstack(vectors) if vectors else np.zeros((0, 1))
            plan = _ScanPlan(matrix, row_ids, slices)
            self._text_plans[key] = plan
        return plan

    def _get_image_plan(self) -> _ScanPlan:
        if self._image_plan is None:
            vectors: list[np.ndarray] = []
            row_ids: list[str] = []
            slices: list[tuple[CaseId, int, int]] = []
            for case in self.cases:
                start = len(vectors)
                for asset_id, vec in sorted(case.image_embeddings.items()):
                    vectors.append(vec.as_array().astype(np.float64))
                    row_ids.append(asset_id)
                if len(vectors) > start:
                    slices.append((case.case_id, start, len(vectors)))
            matrix = np.vstack(vectors) if vectors else np.zeros((0, 1))
            self._image_plan = _ScanPlan(matrix, row_ids, slices)
        return self._image_plan

    def scan_text_space(
        self,
        query: EmbeddingVector,
        include_augmented: bool = True,
        include_chunks: bool = True,
    ) -> list[ScanRow]:
        """One row per case: the max cosine over its entries, sorted desc.

        The filters carve out ablation views (augmented critique entries vs
        original-description chunks); cases left with no qualifying entries
        are omitted, which on a fully ingested database never happens.
        """
        if query.space is not Space.TEXT:
            raise InputError("scan_text_space needs a text-space query vector")
        return self._get_text_plan(include_augmented, include_chunks).scan(query)

    def scan_image_space(self, query: EmbeddingVector) -> list[ScanRow]:
        """One row per case with images: max cosine over its image vectors."""
        if query.space is not Space.CROSSMODAL:
            raise InputError("scan_image_space needs a crossmodal query vector")
        return self._get_image_plan().scan(query)

    # -- persistence --------------------------------------------------------

    def _cases_bytes(self) -> bytes:
        lines = [
            json.dumps(case_to_record(c), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
            for c in self.cases
        ]
        return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""

    def save(self, path: str | Path) -> None:
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        cases_bytes = self._cases_bytes()
        manifest = Manifest(
            text_space=self.manifest.text_space,
            crossmodal_space=self.manifest.crossmodal_space,
            chunk_chars=self.manifest.chunk_chars,
            critique_text_assets=self.manifest.critique_text_assets,
            format_version=self.manifest.format_version,
            cases_sha256=hashlib.sha256(cases_bytes).hexdigest(),
        )
        (root / CASES_FILE).write_bytes(cases_bytes)
        manifest_text = json.dumps(manifest.to_record(), sort_keys=True, indent=2) + "\n"
        (root / MANIFEST_FILE).write_text(manifest_text, encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CaseDatabase":
        root = Path(path)
        manifest_path = root / MANIFEST_FILE
        cases_path = root / CASES_FILE
        if not manifest_path.is_file() or not cases_path.is_file():
            raise InputError(f"not a case database: {path}")
        manifest = Manifest.from_record(json.loads(manifest_path.read_text(encoding="utf-8")))
        if manifest.format_version != FORMAT_VERSION:
            raise ConfigurationError(
                f"database format version {manifest.format_version!r} is not supported "
                f"(expected {FORMAT_VERSION!r})"
            )
        cases_bytes = cases_path.read_bytes()
        if manifest.cases_sha256 and hashlib.sha256(cases_bytes).hexdigest() != manifest.cases_sha256:
            raise ConfigurationError("cases.jsonl does not match the manifest checksum")
        cases = [
            case_from_record(json.loads(line))
            for line in cases_bytes.decode("utf-8").splitlines()
            if line.strip()
        ]
        return cls(manifest, cases)

    def check(self) -> list[str]:
        """Revalidate every invariant; empty list means the database is sound."""
        problems: list[str] = []
        for case in self.cases:
            for violation in validate_case(case):
                problems.append(f"case {case.case_id}: {violation}")
            if not case.entries:
                problems.append(f"case {case.case_id}: no entries after ingestion")
            for entry in case.entries:
                if entry.text_embedding and entry.text_embedding.dim != self.manifest.text_space.dim:
                    problems.append(
                        f"case {case.case_id}: entry {entry.entry_id} text dim "
                        f"{entry.text_embedding.dim} != manifest {self.manifest.text_space.dim}"
                    )
                if (
                    entry.crossmodal_embedding
                    and entry.crossmodal_embedding.dim != self.manifest.crossmodal_space.dim
                ):
                    problems.append(
                        f"case {case.case_id}: entry {entry.entry_id} crossmodal dim mismatch"
                    )
            for asset_id, vec in case.image_embeddings.items():
                if vec.dim != self.manifest.crossmodal_space.dim:
                    problems.append(
                        f"case {case.case_id}: image {asset_id} dim {vec.dim} != manifest "
                        f"{self.manifest.crossmodal_space.dim}"
                    )
        return problems
