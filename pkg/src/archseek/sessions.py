"""In-session recommendation driven by likes.

Liking a case augments the query pool: the pool holds the original input (if
any) plus the description of every liked case, each executed as its own text
query, and a case's combined score is the sum of its fused scores across the
pool. Summation makes the outcome independent of the order likes happened
in, so like→unlike restores exactly the prior ranking. Sessions can also
start from nothing, in which case the current list is a seeded-random
permutation of all cases (Fisher-Yates via random.Random, whose streams are
stable across Python versions for a fixed seed).
"""

from __future__ import annotations

import logging
import random
import uuid
from dataclasses import dataclass, replace
from typing import Any, Mapping

from .embeddings import EmbeddingGateway
from .errors import InputError
from .index import CaseDatabase
from .model import Aspect, CaseId
from .retrieval import (
    AspectWeights,
    ImageQueryCache,
    RankedResult,
    ResultRow,
    SearchOptions,
    rerank_with_weights,
    search_aspect_sentences,
    text_query,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TextOrigin:
    query: str


@dataclass(frozen=True)
class ImageOrigin:
    """An image query flattened to what recomputation needs: the per-aspect
    analysis sentences and the slider weights in force."""

    analyses: Mapping[Aspect, tuple[str, ...]]
    weights: AspectWeights


Origin = TextOrigin | ImageOrigin


@dataclass(frozen=True)
class Session:
    session_id: str
    seed: int
    origin: Origin | None
    liked: tuple[CaseId, ...]  # in like order; scoring ignores the order
    current: RankedResult
    options: SearchOptions = SearchOptions()


def random_permutation_result(db: CaseDatabase, seed: int) -> RankedResult:
    order = list(db.case_ids)
    random.Random(seed).shuffle(order)
    return RankedResult(tuple(ResultRow(case_id=cid, fused_score=0.0) for cid in order))


def _origin_result(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    origin: Origin,
    options: SearchOptions,
    cache: ImageQueryCache | None = None,
) -> RankedResult:
    if isinstance(origin, TextOrigin):
        return text_query(db, origin.query, gateway, options)
    if cache is None:
        cache = search_aspect_sentences(db, origin.analyses, gateway, options)
    return rerank_with_weights(cache, origin.weights)


def recompute(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    origin: Origin | None,
    liked: tuple[CaseId, ...],
    seed: int,
    options: SearchOptions = SearchOptions(),
    origin_cache: ImageQueryCache | None = None,
) -> RankedResult:
    """Ranking for a given {origin, liked set}; order of likes is irrelevant.

    Pool scores are summed per case; liked cases are pinned out of the list
    (the service shows them in their own rail). With an empty pool the
    seeded-random cold-start permutation is returned.
    """
    pools: list[RankedResult] = []
    if origin is not None:
        pools.append(_origin_result(db, gateway, origin, options, origin_cache))
    for case_id in sorted(set(liked)):
        description = db.case(case_id).description
        if description.strip():
            pools.append(text_query(db, description, gateway, options))
        else:
            logger.warning("liked case %s has an empty description; it adds no signal", case_id)

    if not pools:
        return random_permutation_result(db, seed)
    if len(pools) == 1:
        # a one-member pool is exactly that query, provenance and all
        return pools[0].without_cases(liked)

    combined: dict[CaseId, float] = {}
    contributor: dict[CaseId, ResultRow] = {}
    for result in pools:
        for row in result.rows:
            combined[row.case_id] = combined.get(row.case_id, 0.0) + row.fused_score
            best = contributor.get(row.case_id)
            if best is None or row.fused_score > best.fused_score:
                contributor[row.case_id] = row

    rows = []
    for case_id in sorted(combined):
        source = contributor[case_id]
        rows.append(
            ResultRow(
                case_id=case_id,
                fused_score=combined[case_id],
                text_cosine=source.text_cosine,
                image_cosine=source.image_cosine,
                best_entry_id=source.best_entry_id,
                best_asset_id=source.best_asset_id,
            )
        )
    ranked = RankedResult(tuple(sorted(rows, key=lambda r: (-r.fused_score, r.case_id))))
    return ranked.without_cases(liked)


def start_session(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    origin: Origin | None = None,
    seed: int = 0,
    options: SearchOptions = SearchOptions(),
    session_id: str | None = None,
    origin_cache: ImageQueryCache | None = None,
) -> Session:
    current = (
        _origin_result(db, gateway, origin, options, origin_cache)
        if origin is not None
        else random_permutation_result(db, seed)
    )
    return Session(
        session_id=session_id or uuid.uuid4().hex,
        seed=seed,
        origin=origin,
        liked=(),
        current=current,
        options=options,
    )


def like(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    session: Session,
    case_id: CaseId,
    origin_cache: ImageQueryCache | None = None,
) -> Session:
    if not db.has_case(case_id):
        raise InputError(f"unknown case id {case_id}")
    if case_id in session.liked:
        logger.warning("case %s already liked; ignoring duplicate like", case_id)
        return session
    liked = session.liked + (case_id,)
    current = recompute(
        db, gateway, session.origin, liked, session.seed, session.options, origin_cache
    )
    return replace(session, liked=liked, current=current)


def unlike(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    session: Session,
    case_id: CaseId,
    origin_cache: ImageQueryCache | None = None,
) -> Session:
    if case_id not in session.liked:
        raise InputError(f"case {case_id} is not liked")
    liked = tuple(c for c in session.liked if c != case_id)
    current = recompute(
        db, gateway, session.origin, liked, session.seed, session.options, origin_cache
    )
    return replace(session, liked=liked, current=current)


def session_to_record(session: Session) -> dict[str, Any]:
    """JSON state for restarts; `current` is recomputed on load, not stored."""
    if session.origin is None:
        origin: dict[str, Any] | None = None
    elif isinstance(session.origin, TextOrigin):
        origin = {"kind": "text", "query": session.origin.query}
    else:
        origin = {
            "kind": "image",
            "analyses": {a.value: list(s) for a, s in session.origin.analyses.items()},
            "weights": session.origin.weights.to_mapping(),
        }
    return {
        "session_id": session.session_id,
        "seed": session.seed,
        "liked": list(session.liked),
        "origin": origin,
    }


def session_from_record(
    record: Mapping[str, Any],
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    options: SearchOptions = SearchOptions(),
) -> Session:
    raw_origin = record.get("origin")
    origin: Origin | None
    if raw_origin is None:
        origin = None
    elif raw_origin["kind"] == "text":
        origin = TextOrigin(query=raw_origin["query"])
    else:
        origin = ImageOrigin(
            analyses={
                Aspect(k): tuple(v) for k, v in raw_origin["analyses"].items()
            },
            weights=AspectWeights.from_mapping(raw_origin["weights"]),
        )
    liked = tuple(int(c) for c in record.get("liked", []))
    seed = int(record.get("seed", 0))
    current = recompute(db, gateway, origin, liked, seed, options)
    return Session(
        session_id=record["session_id"],
        seed=seed,
        origin=origin,
        liked=liked,
        current=current,
        options=options,
    )
