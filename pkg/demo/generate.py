#!/usr/bin/env python3
"""Regenerate the demo corpus: case folders, replay fixtures, eval dataset.

The corpus is synthetic (tiny solid-color PNGs plus invented descriptions)
so the whole pipeline runs offline with the deterministic mock embedders:

    archseek ingest demo/cases --out /tmp/demo-db --replay demo/fixtures
    archseek query /tmp/demo-db "glass facade with panoramic views"
    archseek eval /tmp/demo-db demo/eval.jsonl --out /tmp/demo-report
"""

import hashlib
import json
import shutil
import struct
import zlib
from pathlib import Path

ROOT = Path(__file__).parent


def make_png(pixel):
    def chunk(tag, data):
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


CASES = [
    {
        "id": 1,
        "title": "Bayline Gallery",
        "description": (
            "A long gallery wrapped in a continuous glass facade with panoramic views "
            "over the bay. The plan is a single loaded corridor that opens to the water."
        ),
        "pixel": (40, 120, 200),
        "caption": "glass facade panoramic views over water",
        "analysis": {
            "form": [
                "A thin horizontal bar hovers over the shoreline.",
                "Full-height glass facade panels dissolve the volume into the sky.",
            ],
            "style": ["Late-modern lightness with nautical detailing."],
            "material usage": ["Structural glazing with slender steel mullions."],
            "sense of feeling": ["Weightless and open, like standing on the water."],
            "relations to the surrounding context": [
                "The building defers to the bay, framing panoramic views instead of competing with them."
            ],
            "passive design techniques": ["Deep eaves shade the west-facing glass facade."],
            "general design highlights": ["The glass facade turns the gallery into a lantern at dusk."],
        },
    },
    {
        "id": 2,
        "title": "Quarry Museum",
        "description": (
            "A museum of local stone set into the hillside. Massive masonry walls "
            "hold the galleries; daylight enters through a single roof slot."
        ),
        "pixel": (120, 110, 100),
        "caption": "stone masonry museum carved hillside",
        "analysis": {
            "form": ["Stacked rectangular volumes read as cut blocks of stone."],
            "style": ["Tectonic brutalism softened by hand-dressed masonry."],
            "material usage": [
                "Load-bearing stone masonry walls quarried on site.",
                "Bronze door frames set flush into the stone.",
            ],
            "sense of feeling": ["Cool, heavy, and quiet, like the quarry itself."],
            "relations to the surrounding context": ["The massing continues the hillside terraces."],
            "passive design techniques": ["High thermal mass keeps galleries stable year round."],
            "general design highlights": ["A single roof slot washes the stone walls with daylight."],
        },
    },
    {
        "id": 3,
        "title": "Larch Pavilion",
        "description": (
            "A timber pavilion in a moss garden. Slender larch columns carry a "
            "floating roof; the enclosure is a single layer of sliding screens."
        ),
        "pixel": (90, 160, 70),
        "caption": "timber pavilion moss garden floating roof",
        "analysis": {
            "form": ["A floating timber roof plane over an open plinth."],
            "style": ["Quiet wooden minimalism with garden-house scale."],
            "material usage": ["Untreated larch columns and cedar shingles."],
            "sense of feeling": ["Soft light filtered through screens calms the room."],
            "relations to the surrounding context": [
                "The pavilion dissolves into the moss garden around it."
            ],
            "passive design techniques": [
                "Cross ventilation through sliding screens cools the hall.",
                "The floating roof shades the full perimeter walkway.",
            ],
            "general design highlights": ["Structure, enclosure, and garden read as one gesture."],
        },
    },
    {
        "id": 4,
        "title": "Kiln Yard School",
        "description": (
            "An art school organized around a brick courtyard. Studios face the "
            "court through deep reveals; a water channel crosses the paving."
        ),
        "pixel": (180, 70, 40),
        "caption": "brick courtyard school water channel",
        "analysis": {
            "form": ["Four studio wings close a square brick courtyard."],
            "style": ["Craft-forward regionalism in fired clay."],
            "material usage": ["Hand-laid brick in stack bond with lime mortar."],
            "sense of feeling": ["Warm and communal, centered on the court."],
            "relations to the surrounding context": ["Street walls continue the kiln yard's datum."],
            "passive design techniques": [
                "The water channel and courtyard shading temper summer heat."
            ],
            "general design highlights": ["A water channel draws a cooling line across the court."],
        },
    },
    {
        "id": 5,
        "title": "Span Hall",
        "description": (
            "A market hall under one long-span steel roof. The floor is open and "
            "reconfigurable; services ride in the trusses above."
        ),
        "pixel": (130, 140, 150),
        "caption": "steel long span market hall trusses",
        "analysis": {
            "form": ["One long-span steel roof covers a column-free floor."],
            "style": ["High-tech pragmatism with exposed services."],
            "material usage": ["Painted steel trusses and a polished concrete floor."],
            "sense of feeling": ["A generous, noisy, adaptable civic room."],
            "relations to the surrounding context": ["The hall bridges two market streets."],
            "passive design techniques": ["Ridge vents exhaust warm air through the roof."],
            "general design highlights": ["The structure is the architecture: nothing is clad."],
        },
    },
]

EVAL_QUERIES = [
    {"query": "glass facade with panoramic views", "relevant": [1]},
    {"query": "stone masonry galleries", "relevant": [2]},
    {"query": "timber pavilion in a garden", "relevant": [3]},
    {"query": "brick courtyard with water", "relevant": [4]},
    {"query": "long span steel roof", "relevant": [5]},
    {"query": "daylight in the galleries", "relevant": [1, 2]},
]


def main():
    cases_dir = ROOT / "cases"
    fixtures_dir = ROOT / "fixtures"
    for path in (cases_dir, fixtures_dir):
        if path.exists():
            shutil.rmtree(path)
        path.mkdir(parents=True)

    for case in CASES:
        folder = cases_dir / f"{case['id']:02d}-{case['title'].lower().replace(' ', '-')}"
        folder.mkdir()
        png = make_png(case["pixel"])
        (folder / "view.png").write_bytes(png)
        (folder / "view.png.caption.txt").write_text(case["caption"] + "\n", encoding="utf-8")
        (folder / "case.json").write_text(
            json.dumps(
                {
                    "id": case["id"],
                    "title": case["title"],
                    "description": case["description"],
                    "assets": [{"path": "view.png", "kind": "image", "category_hint": "ground-level"}],
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        reply = json.dumps({"analysis": case["analysis"]}, indent=2)
        name = hashlib.sha256(png).hexdigest() + ".txt"
        (fixtures_dir / name).write_text("```json\n" + reply + "\n```\n", encoding="utf-8")

    lines = [json.dumps(q) for q in EVAL_QUERIES]
    (ROOT / "eval.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(CASES)} cases, {len(CASES)} fixtures, {len(EVAL_QUERIES)} eval queries")


if __name__ == "__main__":
    main()
