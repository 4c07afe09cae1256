"""Query-time ranking: relevance scans, reciprocal rank fusion, aspect weights.

A text query runs two searches and fuses them by rank: the text-analysis
search (max cosine between the query's text-space vector and each case's
entries) and the image-understanding search (max cosine between the query's
crossmodal vector and each case's image vectors). Each source contributes
1/(rank + c) to a case's fused score, c defaulting to 10; a case absent from
a source list simply omits that term.

An image query first critiques the input image, then treats each aspect's
sentences as independent text queries. A case's per-aspect score is the max
fused score over that aspect's sentence queries, and the final score is the
weight-normalized sum across aspects, so slider changes are a pure rerank
with no provider calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .critic import CritiquePrompt, critique_media
from .embeddings import EmbeddingGateway
from .errors import InputError, StateError
from .index import CaseDatabase, ScanRow
from .model import CRITIQUE_ASPECTS, Aspect, CaseId, EmbeddingVector, Space

DEFAULT_RRF_C = 10


@dataclass(frozen=True)
class FusionParams:
    c: int = DEFAULT_RRF_C
    missing_rank_policy: str = "omit_term"

    def __post_init__(self) -> None:
        if self.c < 1:
            raise InputError("fusion parameter c must be >= 1")
        if self.missing_rank_policy != "omit_term":
            raise InputError(f"unknown missing_rank_policy {self.missing_rank_policy!r}")


@dataclass(frozen=True)
class SearchOptions:
    fusion: FusionParams = FusionParams()
    include_augmented: bool = True
    include_chunks: bool = True
    fuse_image_ranking: bool = True
    # Whether aspect sentence sub-queries of an image query reuse the full
    # text+image fusion (on) or the text-analysis ranking alone (off).
    aspect_subqueries_fuse_images: bool = True


@dataclass(frozen=True)
class AspectWeights:
    """Per-aspect slider values in [0, 1]; unspecified aspects weigh 1.0."""

    weights: Mapping[Aspect, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for aspect, value in self.weights.items():
            if aspect not in CRITIQUE_ASPECTS:
                raise InputError(f"weight for non-critique aspect {aspect!r}")
            if not (0.0 <= value <= 1.0) or math.isnan(value):
                raise InputError(f"weight for {aspect.value} must be in [0, 1]")
        if all(self[a] == 0.0 for a in CRITIQUE_ASPECTS):
            raise InputError("at least one aspect weight must be positive")

    def __getitem__(self, aspect: Aspect) -> float:
        return float(self.weights.get(aspect, 1.0))

    @classmethod
    def uniform(cls) -> "AspectWeights":
        return cls()

    @classmethod
    def from_mapping(cls, raw: Mapping[str, float]) -> "AspectWeights":
        weights: dict[Aspect, float] = {}
        for key, value in raw.items():
            try:
                aspect = Aspect(key)
            except ValueError:
                raise InputError(f"unknown aspect {key!r}") from None
            weights[aspect] = float(value)
        return cls(weights)

    def to_mapping(self) -> dict[str, float]:
        return {a.value: self[a] for a in CRITIQUE_ASPECTS}


@dataclass(frozen=True)
class ResultRow:
    case_id: CaseId
    fused_score: float
    text_rank: int | None = None
    image_rank: int | None = None
    text_cosine: float | None = None
    image_cosine: float | None = None
    best_entry_id: str | None = None
    best_asset_id: str | None = None


@dataclass(frozen=True)
class RankedResult:
    rows: tuple[ResultRow, ...]

    def ordering(self) -> tuple[CaseId, ...]:
        return tuple(r.case_id for r in self.rows)

    def score_by_case(self) -> dict[CaseId, float]:
        return {r.case_id: r.fused_score for r in self.rows}

    def row_for(self, case_id: CaseId) -> ResultRow | None:
        for row in self.rows:
            if row.case_id == case_id:
                return row
        return None

    def without_cases(self, excluded: Iterable[CaseId]) -> "RankedResult":
        gone = set(excluded)
        return RankedResult(tuple(r for r in self.rows if r.case_id not in gone))

    def to_payload(self) -> list[dict[str, Any]]:
        """Stable JSON-ready rows; identical inputs give identical payloads."""
        return [
            {
                "case_id": r.case_id,
                "fused_score": r.fused_score,
                "text_rank": r.text_rank,
                "image_rank": r.image_rank,
                "text_cosine": r.text_cosine,
                "image_cosine": r.image_cosine,
                "best_entry_id": r.best_entry_id,
                "best_asset_id": r.best_asset_id,
            }
            for r in self.rows
        ]


def _sort_rows(rows: Iterable[ResultRow]) -> tuple[ResultRow, ...]:
    return tuple(sorted(rows, key=lambda r: (-r.fused_score, r.case_id)))


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity of two same-space vectors, accumulated in float64."""
    if a.space is not b.space:
        raise InputError("cosine requires vectors from the same space")
    if a.dim != b.dim:
        raise InputError(f"dim mismatch: {a.dim} vs {b.dim}")
    av = a.as_array().astype(float)
    bv = b.as_array().astype(float)
    na = float(math.sqrt(float(av @ av)))
    nb = float(math.sqrt(float(bv @ bv)))
    if na == 0.0 or nb == 0.0:
        raise InputError("cosine undefined for zero vectors")
    return max(-1.0, min(1.0, float(av @ bv) / (na * nb)))


def rrf_score(
    text_rank: int | None, image_rank: int | None, params: FusionParams = FusionParams()
) -> float:
    """Sum of 1/(rank + c) over the ranks that are present (1-based)."""
    if text_rank is None and image_rank is None:
        raise InputError("rrf_score needs at least one rank")
    total = 0.0
    for rank in (text_rank, image_rank):
        if rank is None:
            continue
        if rank < 1:
            raise InputError("ranks are 1-based")
        total += 1.0 / (rank + params.c)
    return total


def _ranked(rows: list[ScanRow]) -> dict[CaseId, tuple[int, ScanRow]]:
    return {row.case_id: (i + 1, row) for i, row in enumerate(rows)}


def text_query(
    db: CaseDatabase,
    query: str,
    gateway: EmbeddingGateway,
    options: SearchOptions = SearchOptions(),
) -> RankedResult:
    """Rank every case for a natural-language query.

    Embeds the query in both spaces, runs both scans, fuses by reciprocal
    rank, and attaches the best-matching entry/asset of each case for
    provenance display. Ties break by ascending case id throughout.
    """
    query = (query or "").strip()
    if not query:
        raise InputError("query must be non-empty")

    text_vec = gateway.embed_text(Space.TEXT, query)
    text_rows = db.scan_text_space(
        text_vec,
        include_augmented=options.include_augmented,
        include_chunks=options.include_chunks,
    )
    text_by_case = _ranked(text_rows)

    image_by_case: dict[CaseId, tuple[int, ScanRow]] = {}
    if options.fuse_image_ranking:
        cross_vec = gateway.embed_text(Space.CROSSMODAL, query)
        image_by_case = _ranked(db.scan_image_space(cross_vec))

    rows: list[ResultRow] = []
    for case_id in sorted(set(text_by_case) | set(image_by_case)):
        t = text_by_case.get(case_id)
        i = image_by_case.get(case_id)
        rows.append(
            ResultRow(
                case_id=case_id,
                fused_score=rrf_score(t[0] if t else None, i[0] if i else None, options.fusion),
                text_rank=t[0] if t else None,
                image_rank=i[0] if i else None,
                text_cosine=t[1].cosine if t else None,
                image_cosine=i[1].cosine if i else None,
                best_entry_id=t[1].best_id if t else None,
                best_asset_id=i[1].best_id if i else None,
            )
        )
    return RankedResult(_sort_rows(rows))


@dataclass(frozen=True)
class AspectSearch:
    """One aspect's sentence queries and the per-case max fused score."""

    aspect: Aspect
    sentences: tuple[str, ...]
    score_by_case: Mapping[CaseId, float]
    best_row_by_case: Mapping[CaseId, ResultRow]


@dataclass(frozen=True)
class ImageQueryCache:
    """Everything reranking needs; rebuilt only when a new image arrives."""

    aspects: tuple[AspectSearch, ...]

    def analyses(self) -> dict[Aspect, tuple[str, ...]]:
        return {a.aspect: a.sentences for a in self.aspects}


def search_aspect_sentences(
    db: CaseDatabase,
    analyses: Mapping[Aspect, tuple[str, ...]],
    gateway: EmbeddingGateway,
    options: SearchOptions = SearchOptions(),
) -> ImageQueryCache:
    """Run each aspect's sentences as independent queries and cache maxima."""
    sub_options = (
        options
        if options.aspect_subqueries_fuse_images
        else replace(options, fuse_image_ranking=False)
    )
    searches: list[AspectSearch] = []
    for aspect in CRITIQUE_ASPECTS:
        sentences = tuple(analyses.get(aspect, ()))
        if not sentences:
            continue
        score_by_case: dict[CaseId, float] = {}
        best_row: dict[CaseId, ResultRow] = {}
        for sentence in sentences:
            result = text_query(db, sentence, gateway, sub_options)
            for row in result.rows:
                if (
                    row.case_id not in score_by_case
                    or row.fused_score > score_by_case[row.case_id]
                ):
                    score_by_case[row.case_id] = row.fused_score
                    best_row[row.case_id] = row
        searches.append(
            AspectSearch(
                aspect=aspect,
                sentences=sentences,
                score_by_case=score_by_case,
                best_row_by_case=best_row,
            )
        )
    return ImageQueryCache(aspects=tuple(searches))


def rerank_with_weights(cache: ImageQueryCache, weights: AspectWeights) -> RankedResult:
    """Recompute only the weighted combination; no embedding or VLM calls.

    Final score per case is sum(weight * aspect score) normalized by the sum
    of weights over aspects that actually produced sentences, so slider
    positions rescale but never reshuffle a single-aspect query.
    """
    if not cache.aspects:
        raise StateError("no cached aspect results to rerank")
    active = [a for a in cache.aspects if weights[a.aspect] > 0.0]
    weight_sum = sum(weights[a.aspect] for a in active)
    if not active or weight_sum <= 0.0:
        raise InputError("all weights are zero for the aspects this image produced")

    combined: dict[CaseId, float] = {}
    for search in active:
        w = weights[search.aspect]
        for case_id, score in search.score_by_case.items():
            combined[case_id] = combined.get(case_id, 0.0) + w * score

    rows: list[ResultRow] = []
    for case_id in sorted(combined):
        # provenance comes from the aspect contributing the most weight*score
        best_search = max(
            active,
            key=lambda s: (
                weights[s.aspect] * s.score_by_case.get(case_id, 0.0),
                -CRITIQUE_ASPECTS.index(s.aspect),
            ),
        )
        source = best_search.best_row_by_case.get(case_id)
        rows.append(
            ResultRow(
                case_id=case_id,
                fused_score=combined[case_id] / weight_sum,
                text_cosine=source.text_cosine if source else None,
                image_cosine=source.image_cosine if source else None,
                best_entry_id=source.best_entry_id if source else None,
                best_asset_id=source.best_asset_id if source else None,
            )
        )
    return RankedResult(_sort_rows(rows))


@dataclass(frozen=True)
class ImageQueryOutcome:
    result: RankedResult
    cache: ImageQueryCache
    weights: AspectWeights


def image_query(
    db: CaseDatabase,
    image_bytes: bytes,
    media_type: str,
    gateway: EmbeddingGateway,
    vlm,
    weights: AspectWeights | None = None,
    options: SearchOptions = SearchOptions(),
    prompt: CritiquePrompt | None = None,
) -> ImageQueryOutcome:
    """Critique the input image, search per aspect, combine with weights."""
    weights = weights or AspectWeights.uniform()
    response = critique_media(vlm, image_bytes, media_type, prompt)
    if response.is_empty():
        raise InputError("the critique produced no analysis for any aspect")
    cache = search_aspect_sentences(db, response.sentences, gateway, options)
    return ImageQueryOutcome(
        result=rerank_with_weights(cache, weights), cache=cache, weights=weights
    )
