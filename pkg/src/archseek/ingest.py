"""Case-folder ingestion: critique media, chunk descriptions, embed, store.

Case folder layout (one directory per case under a common root):

    <root>/<case_dir>/
        case.json            {"id": 7, "title": ..., "description": ...,
                              "assets": [{"path": "front.png", "kind": "image",
                                          "category_hint": "ground-level"}]}
        front.png            the media files, relative to the folder
        front.png.caption.txt   optional sidecar caption (mock embedding text)

Every asset that fails (unreadable, bad critique, embedding failure) is
recorded in the ingest report and skipped; only a root with zero valid case
folders is fatal. With mock embedders and a replay VLM the whole pipeline is
deterministic: re-running it writes byte-identical database files.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .critic import CritiquePrompt, chunk_description, critique_media, response_to_entries
from .embeddings import EmbeddingGateway
from .errors import ArchSeekError, ConfigurationError, InputError, TransportError
from .index import CaseDatabase, Manifest, SpaceSpec
from .model import (
    AnalysisEntry,
    Aspect,
    CaseId,
    DesignCase,
    MediaAsset,
    MediaKind,
    Space,
    validate_case,
)

logger = logging.getLogger(__name__)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
JPEG_MAGIC = b"\xff\xd8\xff"
CAPTION_SUFFIX = ".caption.txt"


def sniff_media_type(data: bytes) -> str | None:
    """Return "png" or "jpeg" from magic bytes, else None."""
    if data.startswith(PNG_MAGIC):
        return "png"
    if data.startswith(JPEG_MAGIC):
        return "jpeg"
    return None


@dataclass
class IngestOptions:
    chunk_chars: int = 500
    # Text assets go through the critic prompt in addition to being chunked.
    critique_text_assets: bool = True
    jobs: int = 1


@dataclass
class IngestReport:
    cases_ingested: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)  # (where, why)

    def record(self, where: str, why: str) -> None:
        self.failures.append((where, why))
        logger.warning("ingest: %s: %s", where, why)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class _AssetSource:
    asset: MediaAsset
    data: bytes
    media_type: str  # "png"/"jpeg" for images, "text" for text files
    caption: str | None


def _load_case_skeleton(case_dir: Path) -> tuple[CaseId, str, str, list[dict]]:
    spec_path = case_dir / "case.json"
    raw = json.loads(spec_path.read_text(encoding="utf-8"))
    case_id = raw.get("id")
    if not isinstance(case_id, int) or case_id < 0:
        raise InputError("case.json needs a non-negative integer 'id'")
    title = raw.get("title", "")
    description = raw.get("description", "")
    if not isinstance(title, str) or not isinstance(description, str):
        raise InputError("case.json 'title' and 'description' must be strings")
    assets = raw.get("assets", [])
    if not isinstance(assets, list):
        raise InputError("case.json 'assets' must be a list")
    return case_id, title, description, assets


def _load_asset(case_dir: Path, spec: dict, report: IngestReport, where: str) -> _AssetSource | None:
    rel_path = spec.get("path")
    if not isinstance(rel_path, str) or not rel_path:
        report.record(where, "asset without a 'path'")
        return None
    asset_id = spec.get("asset_id", rel_path)
    kind_name = spec.get("kind", "image")
    try:
        kind = MediaKind(kind_name)
    except ValueError:
        report.record(f"{where}/{rel_path}", f"unknown asset kind {kind_name!r}")
        return None
    full = case_dir / rel_path
    try:
        resolved = full.resolve()
        resolved.relative_to(case_dir.resolve())
    except ValueError:
        report.record(f"{where}/{rel_path}", "asset path escapes the case folder")
        return None
    if not full.is_file():
        report.record(f"{where}/{rel_path}", "asset file missing")
        return None
    data = full.read_bytes()

    if kind is MediaKind.IMAGE:
        media_type = sniff_media_type(data)
        if media_type is None:
            report.record(f"{where}/{rel_path}", "file content is not png or jpeg")
            return None
    else:
        try:
            data.decode("utf-8")
        except UnicodeDecodeError:
            report.record(f"{where}/{rel_path}", "text asset is not valid UTF-8")
            return None
        media_type = "text"

    caption_path = case_dir / (rel_path + CAPTION_SUFFIX)
    caption = caption_path.read_text(encoding="utf-8").strip() if caption_path.is_file() else None

    asset = MediaAsset(
        asset_id=asset_id,
        kind=kind,
        source_path=rel_path,
        category_hint=spec.get("category_hint"),
    )
    return _AssetSource(asset=asset, data=data, media_type=media_type, caption=caption)


def _critique_asset(vlm, prompt: CritiquePrompt, source: _AssetSource, case_id: CaseId):
    media_type = source.media_type if source.media_type != "text" else "text"
    response = critique_media(vlm, source.data, media_type, prompt)
    return response_to_entries(response, case_id, source.asset.asset_id)


def _embed_entries(
    entries: list[AnalysisEntry], gateway: EmbeddingGateway, report: IngestReport, where: str
) -> list[AnalysisEntry]:
    embedded = []
    for entry in entries:
        try:
            text_vec = gateway.embed_text(Space.TEXT, entry.text)
            cross_vec = gateway.embed_text(Space.CROSSMODAL, entry.text)
        except TransportError as exc:
            report.record(f"{where}/{entry.entry_id}", f"embedding failed: {exc}")
            embedded.append(entry)
            continue
        embedded.append(entry.with_embeddings(text_vec, cross_vec))
    return embedded


def ingest_case_folder(
    case_dir: Path,
    gateway: EmbeddingGateway,
    vlm,
    options: IngestOptions,
    report: IngestReport,
    prompt: CritiquePrompt | None = None,
) -> DesignCase:
    prompt = prompt or CritiquePrompt()
    where = case_dir.name
    case_id, title, description, asset_specs = _load_case_skeleton(case_dir)

    sources: list[_AssetSource] = []
    for spec in asset_specs:
        source = _load_asset(case_dir, spec, report, where)
        if source is not None:
            sources.append(source)

    entries: list[AnalysisEntry] = []
    for i, chunk in enumerate(chunk_description(description, options.chunk_chars)):
        entries.append(
            AnalysisEntry(
                entry_id=f"{case_id}:description:{Aspect.ORIGINAL_TEXT.value}:{i}",
                case_id=case_id,
                aspect=Aspect.ORIGINAL_TEXT,
                text=chunk,
                origin="description",
            )
        )

    to_critique = [
        s
        for s in sources
        if s.asset.kind is MediaKind.IMAGE or options.critique_text_assets
    ]

    def run_critique(source: _AssetSource):
        try:
            return _critique_asset(vlm, prompt, source, case_id)
        except ArchSeekError as exc:
            return exc

    if options.jobs > 1 and len(to_critique) > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            outcomes = list(pool.map(run_critique, to_critique))
    else:
        outcomes = [run_critique(s) for s in to_critique]

    # merge deterministically in asset order regardless of completion order
    for source, outcome in zip(to_critique, outcomes):
        if isinstance(outcome, ArchSeekError):
            report.record(f"{where}/{source.asset.asset_id}", f"critique failed: {outcome}")
        else:
            entries.extend(outcome)

    for source in sources:
        if source.asset.kind is MediaKind.TEXT:
            text = source.data.decode("utf-8")
            for i, chunk in enumerate(chunk_description(text, options.chunk_chars)):
                entries.append(
                    AnalysisEntry(
                        entry_id=(
                            f"{case_id}:{source.asset.asset_id}:"
                            f"{Aspect.ORIGINAL_TEXT.value}:{i}"
                        ),
                        case_id=case_id,
                        aspect=Aspect.ORIGINAL_TEXT,
                        text=chunk,
                        origin=source.asset.asset_id,
                    )
                )

    entries = _embed_entries(entries, gateway, report, where)

    image_embeddings = {}
    for source in sources:
        if source.asset.kind is not MediaKind.IMAGE:
            continue
        caption = source.caption if source.caption else source.asset.asset_id
        try:
            image_embeddings[source.asset.asset_id] = gateway.embed_image(
                source.data, source.media_type, caption=caption
            )
        except TransportError as exc:
            report.record(f"{where}/{source.asset.asset_id}", f"image embedding failed: {exc}")

    case = DesignCase(
        case_id=case_id,
        title=title,
        description=description,
        assets=tuple(s.asset for s in sources),
        entries=tuple(entries),
        image_embeddings=image_embeddings,
    )
    violations = validate_case(case)
    if violations:
        raise InputError(f"ingested case is invalid: {violations}")
    return case


def discover_case_folders(root: Path) -> list[Path]:
    return sorted(p for p in root.iterdir() if p.is_dir() and (p / "case.json").is_file())


def ingest(
    case_root: str | Path,
    gateway: EmbeddingGateway,
    vlm,
    options: IngestOptions | None = None,
    prompt: CritiquePrompt | None = None,
) -> CaseDatabase:
    """Build a searchable database from every case folder under `case_root`.

    Per-asset failures are collected on the returned database's
    `ingest_report`; only a root without a single valid case folder raises.
    """
    options = options or IngestOptions()
    if vlm is None:
        raise ConfigurationError(
            "no VLM provider configured; pass --replay <fixtures> or a providers config"
        )
    root = Path(case_root)
    if not root.is_dir():
        raise InputError(f"case root is not a directory: {case_root}")
    folders = discover_case_folders(root)
    if not folders:
        raise InputError(f"no case folders (directories with case.json) under {case_root}")

    report = IngestReport()
    cases: list[DesignCase] = []
    seen_ids: set[CaseId] = set()
    for folder in folders:
        try:
            case = ingest_case_folder(folder, gateway, vlm, options, report, prompt)
        except (InputError, json.JSONDecodeError) as exc:
            report.record(folder.name, f"case skipped: {exc}")
            continue
        if case.case_id in seen_ids:
            raise InputError(f"duplicate case id {case.case_id} in {folder.name}")
        seen_ids.add(case.case_id)
        cases.append(case)

    if not cases:
        raise InputError(f"no valid case folders under {case_root}")

    text_cfg = gateway.config(Space.TEXT)
    cross_cfg = gateway.config(Space.CROSSMODAL)
    manifest = Manifest(
        text_space=SpaceSpec(text_cfg.provider_kind, text_cfg.model_name, text_cfg.dim),
        crossmodal_space=SpaceSpec(cross_cfg.provider_kind, cross_cfg.model_name, cross_cfg.dim),
        chunk_chars=options.chunk_chars,
        critique_text_assets=options.critique_text_assets,
    )
    report.cases_ingested = len(cases)
    db = CaseDatabase(manifest, cases)
    db.ingest_report = report
    return db


def ingest_to_path(
    case_root: str | Path,
    out_path: str | Path,
    gateway: EmbeddingGateway,
    vlm,
    options: IngestOptions | None = None,
) -> CaseDatabase:
    """Ingest and persist; refuses to overwrite a database built differently."""
    db = ingest(case_root, gateway, vlm, options)
    out = Path(out_path)
    if (out / "manifest.json").is_file():
        existing = CaseDatabase.load(out)
        if not existing.manifest.compatible_with(db.manifest):
            raise ConfigurationError(
                f"existing database at {out_path} was built with different parameters; "
                "remove it or change the output path"
            )
    db.save(out)
    return db
