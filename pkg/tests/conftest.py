import json
import hashlib
import struct
import zlib
from pathlib import Path

import pytest

from archseek.embeddings import mock_gateway
from archseek.index import CaseDatabase, Manifest, SpaceSpec
from archseek.model import (
    AnalysisEntry,
    Aspect,
    DesignCase,
    MediaAsset,
    MediaKind,
    Space,
)


def make_png(pixel=(200, 30, 30)) -> bytes:
    """Minimal valid 1x1 PNG; different pixels give different bytes."""

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (
            struct.pack(">I", len(data))
            + tag
            + data
            + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 2, 0, 0, 0)
    raw = b"\x00" + bytes(pixel)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw))
        + chunk(b"IEND", b"")
    )


def mock_manifest(gateway) -> Manifest:
    tcfg = gateway.config(Space.TEXT)
    xcfg = gateway.config(Space.CROSSMODAL)
    return Manifest(
        text_space=SpaceSpec(tcfg.provider_kind, tcfg.model_name, tcfg.dim),
        crossmodal_space=SpaceSpec(xcfg.provider_kind, xcfg.model_name, xcfg.dim),
        chunk_chars=500,
        critique_text_assets=True,
    )


def build_case(
    gateway,
    case_id,
    title="",
    description="",
    critique=None,  # {Aspect: [sentences]} from a pretend VLM pass
    image_captions=None,  # {asset_id: caption used for the mock image vector}
    embed=True,
):
    """Assemble a fully ingested-looking case without running the pipeline."""
    from archseek.critic import chunk_description

    critique = critique or {}
    image_captions = image_captions or {}

    entries = []
    for i, chunk_text in enumerate(chunk_description(description)):
        entries.append(
            AnalysisEntry(
                entry_id=f"{case_id}:description:original_text:{i}",
                case_id=case_id,
                aspect=Aspect.ORIGINAL_TEXT,
                text=chunk_text,
                origin="description",
            )
        )
    assets = []
    for aspect, sentences in critique.items():
        for i, text in enumerate(sentences):
            entries.append(
                AnalysisEntry(
                    entry_id=f"{case_id}:vlm:{aspect.value}:{i}",
                    case_id=case_id,
                    aspect=aspect,
                    text=text,
                    origin="description",
                )
            )
    if embed:
        entries = [
            e.with_embeddings(
                gateway.embed_text(Space.TEXT, e.text),
                gateway.embed_text(Space.CROSSMODAL, e.text),
            )
            for e in entries
        ]

    image_embeddings = {}
    for n, (asset_id, caption) in enumerate(sorted(image_captions.items())):
        assets.append(
            MediaAsset(asset_id=asset_id, kind=MediaKind.IMAGE, source_path=f"{asset_id}.png")
        )
        image_embeddings[asset_id] = gateway.embed_image(
            make_png((n % 256, (n * 37) % 256, case_id % 256)), "png", caption=caption
        )

    return DesignCase(
        case_id=case_id,
        title=title or f"Case {case_id}",
        description=description,
        assets=tuple(assets),
        entries=tuple(entries),
        image_embeddings=image_embeddings,
    )


def build_db(gateway, cases) -> CaseDatabase:
    return CaseDatabase(mock_manifest(gateway), cases)


def write_replay_fixture(fixtures_dir: Path, asset_bytes: bytes, analyses, fenced=False):
    """Drop a canned VLM reply keyed by the asset hash; returns the path."""
    body = json.dumps({"analysis": analyses}, indent=2)
    if fenced:
        body = "```json\n" + body + "\n```"
    fixtures_dir.mkdir(parents=True, exist_ok=True)
    path = fixtures_dir / (hashlib.sha256(asset_bytes).hexdigest() + ".txt")
    path.write_text(body, encoding="utf-8")
    return path


def write_case_folder(
    root: Path,
    name: str,
    case_id: int,
    title="",
    description="",
    images=None,  # {filename: (png_bytes, caption_or_None)}
    texts=None,  # {filename: contents}
):
    folder = root / name
    folder.mkdir(parents=True)
    assets = []
    for filename, (data, caption) in (images or {}).items():
        (folder / filename).write_bytes(data)
        if caption is not None:
            (folder / (filename + ".caption.txt")).write_text(caption, encoding="utf-8")
        assets.append({"path": filename, "kind": "image"})
    for filename, contents in (texts or {}).items():
        (folder / filename).write_text(contents, encoding="utf-8")
        assets.append({"path": filename, "kind": "text"})
    (folder / "case.json").write_text(
        json.dumps(
            {
                "id": case_id,
                "title": title or f"Case {case_id}",
                "description": description,
                "assets": assets,
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    return folder


@pytest.fixture
def gateway():
    return mock_gateway()


@pytest.fixture
def small_gateway():
    # smaller dims keep the randomized-corpus tests fast
    return mock_gateway(text_dim=32, crossmodal_dim=24)
