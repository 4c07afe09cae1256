#!/usr/bin/env python3
"""Capture request/response golden fixtures for the /api/v1 surface.

Runs the service in-process over the demo corpus and records one example per
endpoint into fixtures/api/. Session ids are normalized to "SESSION" so the
files stay stable across runs; tests/test_api_goldens.py replays them.

Requires the dev extras (httpx) for the in-process test client.
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from archseek.config import build_gateway
from archseek.critic import ReplayVlmClient
from archseek.ingest import ingest_to_path
from archseek.service import create_app

ROOT = Path(__file__).parent.parent
DEMO = ROOT / "demo"
OUT = ROOT / "fixtures" / "api"


def normalize(payload, session_id):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if session_id:
        text = text.replace(session_id, "SESSION")
    return json.loads(text)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        gateway = build_gateway()
        vlm = ReplayVlmClient(DEMO / "fixtures")
        db = ingest_to_path(DEMO / "cases", Path(tmp) / "db", gateway, vlm)
        app = create_app(db, gateway, vlm=vlm, seed=42)
        client = TestClient(app)
        OUT.mkdir(parents=True, exist_ok=True)
        captured = []

        def record(name, method, path, response, request_body=None):
            sid = response.json().get("session_id") if response.headers.get(
                "content-type", ""
            ).startswith("application/json") and isinstance(response.json(), dict) else None
            entry = {
                "request": {"method": method, "path": path, "body": request_body},
                "status": response.status_code,
                "response": normalize(response.json(), sid),
            }
            (OUT / f"{name}.json").write_text(
                json.dumps(entry, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            captured.append(name)
            return response

        record("health", "GET", "/api/v1/health", client.get("/api/v1/health"))

        body = {"query": "glass facade with panoramic views"}
        text_resp = record(
            "query_text", "POST", "/api/v1/query/text",
            client.post("/api/v1/query/text", json=body), body,
        )
        sid = text_resp.json()["session_id"]

        like_body = {"case_id": 2}
        record(
            "session_like", "POST", "/api/v1/session/{session_id}/like",
            client.post(f"/api/v1/session/{sid}/like", json=like_body), like_body,
        )
        record(
            "session_unlike", "DELETE", "/api/v1/session/{session_id}/like/2",
            client.delete(f"/api/v1/session/{sid}/like/2"),
        )

        image_bytes = (DEMO / "cases" / "01-bayline-gallery" / "view.png").read_bytes()
        files = {"image": ("view.png", image_bytes, "image/png")}
        image_resp = record(
            "query_image", "POST", "/api/v1/query/image",
            client.post("/api/v1/query/image", files=files),
            {"multipart": {"image": "demo/cases/01-bayline-gallery/view.png"}},
        )
        image_sid = image_resp.json()["session_id"]

        weights = {a: 1.0 for a in image_resp.json()["weights"]}
        weights["material_usage"] = 0.2
        record(
            "session_weights", "POST", "/api/v1/session/{session_id}/weights",
            client.post(f"/api/v1/session/{image_sid}/weights", json={"weights": weights}),
            {"weights": weights},
        )

        record("browse", "POST", "/api/v1/session/browse",
               client.post("/api/v1/session/browse", json={"seed": 42}), {"seed": 42})
        record("case_detail", "GET", "/api/v1/cases/1", client.get("/api/v1/cases/1"))

        print(f"captured {len(captured)} goldens into {OUT}: {', '.join(captured)}")


if __name__ == "__main__":
    sys.exit(main())
