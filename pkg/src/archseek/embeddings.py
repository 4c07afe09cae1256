"""Uniform access to the two embedding spaces.

Two provider kinds sit behind one gateway: `remote_http` posts to an external
embedding endpoint, `deterministic_mock` computes stable offline vectors so
tests and desk-scale evaluation run without any network. All vectors leaving
the gateway are L2-normalized float32, which makes cosine a plain dot product
downstream.

Mock algorithm (frozen; golden fixtures depend on every step):
  1. lowercase the text and split on runs of non-alphanumeric characters
  2. hash each token with blake2b (digest_size=8, key = space-specific key)
     and read the digest as a little-endian uint64 seed
  3. seed numpy's PCG64 with it and draw one standard-normal vector of the
     configured dim per token occurrence
  4. sum the token vectors and L2-normalize the sum

Texts sharing tokens therefore land measurably closer than disjoint-token
texts, which keeps retrieval tests meaningful offline. Image vectors in the
mock reuse the token algorithm on a caption when one is supplied (ingestion
passes the sidecar caption or the asset id); without a caption the image
bytes are hashed into a single pseudo-token.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import requests

from .errors import ConfigurationError, InputError, TransportError
from .model import EmbeddingVector, Space

SUPPORTED_IMAGE_TYPES = ("png", "jpeg")

_SPACE_HASH_KEY = {
    Space.TEXT: b"archseek/text/v1",
    Space.CROSSMODAL: b"archseek/crossmodal/v1",
}

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    space: Space
    provider_kind: str  # "remote_http" | "deterministic_mock"
    model_name: str
    dim: int
    endpoint_url: str | None = None
    api_key_env_var: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    requests_per_second: float | None = None
    # Dotted path into the provider's JSON reply, e.g. "data.0.embedding".
    response_path: str = "data.0.embedding"

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ConfigurationError("embedding dim must be positive")
        if self.provider_kind == "remote_http" and not self.endpoint_url:
            raise ConfigurationError("remote_http provider requires endpoint_url")
        if self.provider_kind not in ("remote_http", "deterministic_mock"):
            raise ConfigurationError(f"unknown provider_kind {self.provider_kind!r}")


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def _token_seed(space: Space, token: str) -> int:
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=_SPACE_HASH_KEY[space]
    ).digest()
    return int.from_bytes(digest, "little")


def mock_text_vector(space: Space, text: str, dim: int) -> np.ndarray:
    """The documented mock algorithm; separated out so tests can freeze it."""
    tokens = tokenize(text)
    if not tokens:
        raise InputError("text has no embeddable tokens")
    acc = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        rng = np.random.Generator(np.random.PCG64(_token_seed(space, token)))
        acc += rng.standard_normal(dim)
    norm = np.linalg.norm(acc)
    if norm == 0.0:
        raise InputError("degenerate token mixture")
    return (acc / norm).astype(np.float32)


class TokenBucket:
    """Per-provider rate limiter; `acquire` blocks until a token is free."""

    def __init__(
        self,
        rate_per_sec: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if rate_per_sec <= 0:
            raise ConfigurationError("rate_per_sec must be positive")
        self._interval = 1.0 / rate_per_sec
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_free = clock()

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next_free - now
            self._next_free = max(self._next_free, now) + self._interval
        if wait > 0:
            self._sleep(wait)


class DeterministicMockEmbedder:
    def __init__(self, config: EmbeddingProviderConfig) -> None:
        self.config = config

    def embed_text(self, text: str) -> np.ndarray:
        return mock_text_vector(self.config.space, text, self.config.dim)

    def embed_image(self, image_bytes: bytes, caption: str | None) -> np.ndarray:
        if caption is not None and caption.strip():
            return mock_text_vector(self.config.space, caption, self.config.dim)
        pseudo_token = hashlib.sha256(image_bytes).hexdigest()
        return mock_text_vector(self.config.space, pseudo_token, self.config.dim)


def _walk_response_path(payload: Any, path: str) -> Any:
    node = payload
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node[part]
        else:
            raise KeyError(part)
    return node


class RemoteHttpEmbedder:
    """Adapter for a JSON-over-HTTP embedding endpoint.

    Request: POST {"model": ..., "input": <text>} (or {"input": {"image_base64",
    "media_type"}} for images). The embedding array is pulled from the reply
    via the configured dotted response_path. API keys come from the named
    environment variable only, never from config files.
    """

    def __init__(
        self, config: EmbeddingProviderConfig, session: requests.Session | None = None
    ) -> None:
        self.config = config
        self._session = session or requests.Session()
        self._bucket = (
            TokenBucket(config.requests_per_second) if config.requests_per_second else None
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env_var:
            key = os.environ.get(self.config.api_key_env_var)
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, body: dict[str, Any]) -> np.ndarray:
        last_exc: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            if self._bucket is not None:
                self._bucket.acquire()
            try:
                resp = self._session.post(
                    self.config.endpoint_url,
                    json=body,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                last_exc = TransportError(f"provider unreachable: {exc}")
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"provider returned {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise InputError(f"provider rejected request: {resp.status_code}")
            try:
                values = _walk_response_path(resp.json(), self.config.response_path)
            except (ValueError, KeyError, IndexError) as exc:
                raise ConfigurationError(f"cannot locate embedding in reply: {exc}") from exc
            arr = np.asarray(values, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != self.config.dim:
                raise ConfigurationError(
                    f"provider returned dim {arr.shape} but config says {self.config.dim}"
                )
            return arr
        assert last_exc is not None
        raise last_exc

    def embed_text(self, text: str) -> np.ndarray:
        return self._post({"model": self.config.model_name, "input": text})

    def embed_image(self, image_bytes: bytes, caption: str | None) -> np.ndarray:
        import base64

        return self._post(
            {
                "model": self.config.model_name,
                "input": {"image_base64": base64.b64encode(image_bytes).decode("ascii")},
            }
        )


def _build_provider(config: EmbeddingProviderConfig):
    if config.provider_kind == "deterministic_mock":
        return DeterministicMockEmbedder(config)
    return RemoteHttpEmbedder(config)


@dataclass
class GatewayStats:
    """Call counters, used by tests to assert that reranks stay offline."""

    text_calls: int = 0
    image_calls: int = 0
    by_space: dict[str, int] = field(default_factory=dict)

    def record(self, space: Space, is_image: bool) -> None:
        if is_image:
            self.image_calls += 1
        else:
            self.text_calls += 1
        self.by_space[space.value] = self.by_space.get(space.value, 0) + 1

    @property
    def total(self) -> int:
        return self.text_calls + self.image_calls


class EmbeddingGateway:
    """One embed surface over both spaces; shareable across threads."""

    def __init__(
        self,
        text_config: EmbeddingProviderConfig,
        crossmodal_config: EmbeddingProviderConfig,
    ) -> None:
        if text_config.space is not Space.TEXT:
            raise ConfigurationError("text provider must be configured for the text space")
        if crossmodal_config.space is not Space.CROSSMODAL:
            raise ConfigurationError(
                "crossmodal provider must be configured for the crossmodal space"
            )
        self._configs = {Space.TEXT: text_config, Space.CROSSMODAL: crossmodal_config}
        self._providers = {
            Space.TEXT: _build_provider(text_config),
            Space.CROSSMODAL: _build_provider(crossmodal_config),
        }
        self.stats = GatewayStats()

    def config(self, space: Space) -> EmbeddingProviderConfig:
        return self._configs[space]

    def dim(self, space: Space) -> int:
        return self._configs[space].dim

    def _finish(self, space: Space, raw: np.ndarray) -> EmbeddingVector:
        arr = np.asarray(raw, dtype=np.float64)
        if arr.shape != (self._configs[space].dim,):
            raise ConfigurationError(
                f"provider produced shape {arr.shape}, expected ({self._configs[space].dim},)"
            )
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("provider produced non-finite values")
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ConfigurationError("provider produced a zero vector")
        unit = (arr / norm).astype(np.float32)
        return EmbeddingVector.of(space, unit.tolist())

    def embed_text(self, space: Space, text: str) -> EmbeddingVector:
        if not text or not text.strip():
            raise InputError("cannot embed empty text")
        self.stats.record(space, is_image=False)
        return self._finish(space, self._providers[space].embed_text(text))

    def embed_image(
        self, image_bytes: bytes, media_type: str, caption: str | None = None
    ) -> EmbeddingVector:
        if not image_bytes:
            raise InputError("cannot embed empty image bytes")
        if media_type not in SUPPORTED_IMAGE_TYPES:
            raise InputError(f"unsupported media type {media_type!r}")
        self.stats.record(Space.CROSSMODAL, is_image=True)
        provider = self._providers[Space.CROSSMODAL]
        return self._finish(Space.CROSSMODAL, provider.embed_image(image_bytes, caption))


DEFAULT_TEXT_DIM = 128
DEFAULT_CROSSMODAL_DIM = 64


def mock_gateway(
    text_dim: int = DEFAULT_TEXT_DIM, crossmodal_dim: int = DEFAULT_CROSSMODAL_DIM
) -> EmbeddingGateway:
    """Offline gateway with deterministic vectors in both spaces."""
    return EmbeddingGateway(
        EmbeddingProviderConfig(
            space=Space.TEXT,
            provider_kind="deterministic_mock",
            model_name="mock-text",
            dim=text_dim,
        ),
        EmbeddingProviderConfig(
            space=Space.CROSSMODAL,
            provider_kind="deterministic_mock",
            model_name="mock-crossmodal",
            dim=crossmodal_dim,
        ),
    )
