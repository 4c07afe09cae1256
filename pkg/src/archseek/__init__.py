"""ArchSeek: multimodal search and recommendation over architectural design cases."""

__version__ = "0.1.0"

from .model import (
    AnalysisEntry,
    Aspect,
    CaseId,
    DesignCase,
    EmbeddingVector,
    MediaAsset,
    MediaKind,
    Space,
    validate_case,
)
from .embeddings import EmbeddingGateway, EmbeddingProviderConfig, mock_gateway
from .index import CaseDatabase, Manifest, SpaceSpec
from .retrieval import (
    AspectWeights,
    FusionParams,
    RankedResult,
    ResultRow,
    SearchOptions,
    cosine,
    image_query,
    rerank_with_weights,
    rrf_score,
    text_query,
)
from .evaluation import (
    EvalDataset,
    EvalQuery,
    SystemVariant,
    precision_at_k,
    recall_at_k,
    run_eval,
)

__all__ = [
    "__version__",
    "AnalysisEntry",
    "Aspect",
    "AspectWeights",
    "CaseDatabase",
    "CaseId",
    "DesignCase",
    "EmbeddingGateway",
    "EmbeddingProviderConfig",
    "EmbeddingVector",
    "EvalDataset",
    "EvalQuery",
    "FusionParams",
    "Manifest",
    "MediaAsset",
    "MediaKind",
    "RankedResult",
    "ResultRow",
    "SearchOptions",
    "Space",
    "SpaceSpec",
    "SystemVariant",
    "cosine",
    "image_query",
    "mock_gateway",
    "precision_at_k",
    "recall_at_k",
    "rerank_with_weights",
    "rrf_score",
    "run_eval",
    "text_query",
    "validate_case",
]
