"""Application configuration: providers, database path, bind address, seed.

Config files are JSON (TOML also works when running on Python 3.11+). API
keys are never read from the file itself, only from the environment variable
each provider names. `ARCHSEEK_CONFIG` points at the default config path.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .critic import ReplayVlmClient, RemoteVlmClient, VlmConfig
from .embeddings import (
    DEFAULT_CROSSMODAL_DIM,
    DEFAULT_TEXT_DIM,
    EmbeddingGateway,
    EmbeddingProviderConfig,
    mock_gateway,
)
from .errors import ConfigurationError
from .model import Space

CONFIG_ENV_VAR = "ARCHSEEK_CONFIG"


@dataclass
class AppConfig:
    providers: dict[str, Any] = field(default_factory=dict)
    database_path: str | None = None
    bind_address: str = "127.0.0.1:8000"
    seed: int = 0
    session_ttl_seconds: float = 3600.0
    ui_dir: str | None = None


def _parse_config_bytes(path: Path) -> dict[str, Any]:
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".toml":
        try:
            import tomllib  # py3.11+
        except ModuleNotFoundError as exc:
            raise ConfigurationError(
                "TOML config requires Python 3.11+; use a JSON config instead"
            ) from exc
        return tomllib.loads(text)
    return json.loads(text)


def load_app_config(path: str | Path | None = None) -> AppConfig:
    if path is None:
        env_path = os.environ.get(CONFIG_ENV_VAR)
        if not env_path:
            return AppConfig()
        path = env_path
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    raw = _parse_config_bytes(p)
    cfg = AppConfig()
    cfg.providers = raw.get("providers", {})
    cfg.database_path = raw.get("database_path")
    cfg.bind_address = raw.get("bind_address", cfg.bind_address)
    cfg.seed = int(raw.get("seed", cfg.seed))
    cfg.session_ttl_seconds = float(raw.get("session_ttl_seconds", cfg.session_ttl_seconds))
    cfg.ui_dir = raw.get("ui_dir")
    return cfg


def _embedding_config(space: Space, raw: dict[str, Any] | None, default_dim: int):
    if not raw:
        return EmbeddingProviderConfig(
            space=space,
            provider_kind="deterministic_mock",
            model_name=f"mock-{space.value}",
            dim=default_dim,
        )
    return EmbeddingProviderConfig(
        space=space,
        provider_kind=raw.get("provider_kind", "deterministic_mock"),
        model_name=raw.get("model_name", f"mock-{space.value}"),
        dim=int(raw.get("dim", default_dim)),
        endpoint_url=raw.get("endpoint_url"),
        api_key_env_var=raw.get("api_key_env_var", ""),
        timeout=float(raw.get("timeout", 30.0)),
        max_retries=int(raw.get("max_retries", 2)),
        requests_per_second=raw.get("requests_per_second"),
        response_path=raw.get("response_path", "data.0.embedding"),
    )


def build_gateway(providers: dict[str, Any] | None = None) -> EmbeddingGateway:
    """Gateway from a providers mapping; defaults to deterministic mocks."""
    providers = providers or {}
    if not providers.get("text") and not providers.get("crossmodal"):
        return mock_gateway()
    return EmbeddingGateway(
        _embedding_config(Space.TEXT, providers.get("text"), DEFAULT_TEXT_DIM),
        _embedding_config(Space.CROSSMODAL, providers.get("crossmodal"), DEFAULT_CROSSMODAL_DIM),
    )


def build_vlm(providers: dict[str, Any] | None = None, replay_dir: str | None = None):
    """VLM client: explicit --replay dir wins, then the providers config."""
    if replay_dir:
        return ReplayVlmClient(replay_dir)
    raw = (providers or {}).get("vlm")
    if not raw:
        return None
    kind = raw.get("provider_kind", "replay")
    if kind == "replay":
        return ReplayVlmClient(raw["fixtures_dir"])
    if kind == "remote_http":
        return RemoteVlmClient(
            VlmConfig(
                endpoint_url=raw["endpoint_url"],
                model_name=raw.get("model_name", "gpt-4-vision-preview"),
                api_key_env_var=raw.get("api_key_env_var", ""),
                timeout=float(raw.get("timeout", 120.0)),
                max_retries=int(raw.get("max_retries", 2)),
            )
        )
    raise ConfigurationError(f"unknown vlm provider_kind {kind!r}")
