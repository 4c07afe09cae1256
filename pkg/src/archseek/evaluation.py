"""Quantitative retrieval evaluation: P@k / R@k over query-item pairs.

The dataset pairs a query string with the unordered set of case ids a human
judged relevant. Five system variants are compared: the full pipeline, two
ablations (drop augmented critique entries; drop the image-embedding fusion),
a text-only baseline over description chunks, and a query-blind random
baseline. Means and standard errors are taken across queries at each k.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from .embeddings import EmbeddingGateway
from .errors import InputError
from .index import CaseDatabase
from .model import CaseId
from .retrieval import FusionParams, SearchOptions, text_query

#: The "no image embedding" ablation keeps augmented text and skips only the
#: rank fusion with the image scan; the variant is named after what it
#: removes, and this reading is recorded in every report header.
NO_IMAGE_EMBEDDING_NOTE = (
    "no_image_embedding = text-analysis ranking (augmented entries + chunks) "
    "without image-rank fusion"
)


class SystemVariant(str, Enum):
    FULL = "full"
    NO_TEXT_AUGMENTATION = "no_text_augmentation"
    NO_IMAGE_EMBEDDING = "no_image_embedding"
    TEXT_ONLY = "text_only"
    RANDOM = "random"


VARIANT_OPTIONS: dict[SystemVariant, dict[str, bool]] = {
    SystemVariant.FULL: dict(include_augmented=True, include_chunks=True, fuse_image_ranking=True),
    SystemVariant.NO_TEXT_AUGMENTATION: dict(
        include_augmented=False, include_chunks=True, fuse_image_ranking=True
    ),
    SystemVariant.NO_IMAGE_EMBEDDING: dict(
        include_augmented=True, include_chunks=True, fuse_image_ranking=False
    ),
    SystemVariant.TEXT_ONLY: dict(
        include_augmented=False, include_chunks=True, fuse_image_ranking=False
    ),
}


@dataclass(frozen=True)
class EvalQuery:
    query: str
    relevant: frozenset[CaseId]


@dataclass(frozen=True)
class EvalDataset:
    queries: tuple[EvalQuery, ...]

    def __post_init__(self) -> None:
        texts = [q.query for q in self.queries]
        if len(set(texts)) != len(texts):
            raise InputError("dataset queries must be unique")
        for q in self.queries:
            if not q.relevant:
                raise InputError(f"query {q.query!r} has an empty relevant set")

    @classmethod
    def load_jsonl(cls, path: str | Path) -> "EvalDataset":
        queries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            queries.append(
                EvalQuery(query=rec["query"], relevant=frozenset(int(c) for c in rec["relevant"]))
            )
        return cls(tuple(queries))

    def save_jsonl(self, path: str | Path) -> None:
        lines = [
            json.dumps({"query": q.query, "relevant": sorted(q.relevant)}, ensure_ascii=False)
            for q in self.queries
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _hits(retrieved: Sequence[CaseId], relevant: frozenset[CaseId] | set[CaseId], k: int) -> int:
    return sum(1 for c in retrieved[:k] if c in relevant)


def precision_at_k(retrieved: Sequence[CaseId], relevant: Iterable[CaseId], k: int) -> float:
    """Fraction of the top-k retrievals that are relevant.

    When fewer than k items were retrieved the metric is evaluated at the
    list length instead; an empty list scores 0.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    relevant_set = set(relevant)
    effective_k = min(k, len(retrieved))
    if effective_k == 0:
        return 0.0
    return _hits(retrieved, relevant_set, effective_k) / effective_k


def recall_at_k(retrieved: Sequence[CaseId], relevant: Iterable[CaseId], k: int) -> float:
    """Fraction of the relevant items that appear in the top k."""
    if k < 1:
        raise InputError("k must be >= 1")
    relevant_set = set(relevant)
    if not relevant_set:
        raise InputError("relevant set must be non-empty")
    return _hits(retrieved, relevant_set, k) / len(relevant_set)


def _sem(samples: Sequence[float]) -> float:
    n = len(samples)
    if n <= 1:
        return 0.0
    mean = sum(samples) / n
    var = sum((x - mean) ** 2 for x in samples) / (n - 1)
    return math.sqrt(var / n)


def retrieve_for_variant(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    query: str,
    variant: SystemVariant,
    query_index: int = 0,
    seed: int = 0,
    fusion: FusionParams = FusionParams(),
) -> list[CaseId]:
    if variant is SystemVariant.RANDOM:
        order = list(db.case_ids)
        random.Random(f"{seed}:{query_index}").shuffle(order)
        return order
    flags = VARIANT_OPTIONS[variant]
    options = SearchOptions(fusion=fusion, **flags)
    return list(text_query(db, query, gateway, options).ordering())


@dataclass(frozen=True)
class MetricCurve:
    metric: str  # "precision" | "recall"
    means: tuple[float, ...]  # index 0 is k=1
    sems: tuple[float, ...]


@dataclass(frozen=True)
class EvalReport:
    variant: SystemVariant
    k_max: int
    n_queries: int
    precision: MetricCurve
    recall: MetricCurve
    note: str = NO_IMAGE_EMBEDDING_NOTE

    def to_record(self) -> dict[str, Any]:
        return {
            "variant": self.variant.value,
            "k_max": self.k_max,
            "n_queries": self.n_queries,
            "note": self.note,
            "curves": [
                {
                    "metric": c.metric,
                    "points": [
                        {"k": k + 1, "mean": c.means[k], "sem": c.sems[k]}
                        for k in range(self.k_max)
                    ],
                }
                for c in (self.precision, self.recall)
            ],
        }

    def csv_rows(self) -> list[tuple[str, int, str, float, float]]:
        rows = []
        for curve in (self.precision, self.recall):
            for k in range(self.k_max):
                rows.append(
                    (self.variant.value, k + 1, curve.metric, curve.means[k], curve.sems[k])
                )
        return rows


def run_eval(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    dataset: EvalDataset,
    variant: SystemVariant,
    k_max: int = 10,
    seed: int = 0,
    fusion: FusionParams = FusionParams(),
) -> EvalReport:
    """Mean P@k and R@k with SEM across queries, k = 1..k_max."""
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    if not dataset.queries:
        raise InputError("dataset has no queries")

    per_query_precision: list[list[float]] = []
    per_query_recall: list[list[float]] = []
    for qi, q in enumerate(dataset.queries):
        retrieved = retrieve_for_variant(
            db, gateway, q.query, variant, query_index=qi, seed=seed, fusion=fusion
        )
        per_query_precision.append(
            [precision_at_k(retrieved, q.relevant, k) for k in range(1, k_max + 1)]
        )
        per_query_recall.append(
            [recall_at_k(retrieved, q.relevant, k) for k in range(1, k_max + 1)]
        )

    def curve(metric: str, table: list[list[float]]) -> MetricCurve:
        means, sems = [], []
        for k in range(k_max):
            samples = [row[k] for row in table]
            means.append(sum(samples) / len(samples))
            sems.append(_sem(samples))
        return MetricCurve(metric=metric, means=tuple(means), sems=tuple(sems))

    return EvalReport(
        variant=variant,
        k_max=k_max,
        n_queries=len(dataset.queries),
        precision=curve("precision", per_query_precision),
        recall=curve("recall", per_query_recall),
    )


def write_reports(reports: Sequence[EvalReport], out_dir: str | Path) -> tuple[Path, Path]:
    """Emit `report.json` and plot-ready `metrics.csv` into `out_dir`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "metrics.csv"
    json_path.write_text(
        json.dumps(
            {"note": NO_IMAGE_EMBEDDING_NOTE, "reports": [r.to_record() for r in reports]},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "k", "metric", "mean", "sem"])
        for report in reports:
            for row in report.csv_rows():
                writer.writerow(row)
    return json_path, csv_path
