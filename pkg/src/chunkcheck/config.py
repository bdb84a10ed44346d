"""Run configuration: one dataclass, resolved from defaults, a JSON config
file, environment variables, and command-line flags (highest wins).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .backends import LexicalOverlapBackend, RemoteBackend, UnitRelevanceBackend
from .corpus import Corpus, TokenCounter, make_counter
from .engine import AGGREGATIONS
from .errors import ValidationError
from .scoring import ScoreCache, ScorerBackend

ENDPOINT_ENV = "CHUNKCHECK_ENDPOINT"
AUTH_ENV = "CHUNKCHECK_AUTH_HEADER"

BACKENDS = ("overlap", "remote", "unit-relevance")


@dataclass
class RunConfig:
    backend: str = "overlap"
    endpoint: str | None = None
    auth_header: str | None = None
    relevance_file: str | None = None
    counter: str = "whitespace"
    budget: int = 512
    k: int = 2
    aggregation: str = "min"
    ece_bins: int = 10
    decision_threshold: float = 0.5
    concurrency: int = 1
    cache_size: int = 4096
    premise_cap: int | None = None
    timeout: float = 10.0
    retries: int = 3
    backoff: float = 0.25
    seed: int = 0

    def validate(self) -> None:
        if self.backend not in BACKENDS:
            raise ValidationError(f"unknown backend {self.backend!r}; choose from {BACKENDS}")
        if self.budget < 1:
            raise ValidationError(f"budget must be >= 1, got {self.budget}")
        if self.k < 2:
            raise ValidationError(f"branching factor must be >= 2, got {self.k}")
        if self.aggregation not in AGGREGATIONS:
            raise ValidationError(
                f"unknown aggregation {self.aggregation!r}; choose from {AGGREGATIONS}"
            )
        if self.ece_bins < 1:
            raise ValidationError(f"ece_bins must be >= 1, got {self.ece_bins}")
        if not (0.0 <= self.decision_threshold <= 1.0):
            raise ValidationError(f"decision_threshold {self.decision_threshold} outside [0, 1]")
        if self.concurrency < 1:
            raise ValidationError(f"concurrency must be >= 1, got {self.concurrency}")
        if self.cache_size < 0:
            raise ValidationError(f"cache_size must be >= 0, got {self.cache_size}")
        if self.premise_cap is not None and self.premise_cap < 1:
            raise ValidationError(f"premise_cap must be >= 1, got {self.premise_cap}")
        if self.timeout <= 0:
            raise ValidationError(f"timeout must be > 0, got {self.timeout}")
        if self.retries < 0:
            raise ValidationError(f"retries must be >= 0, got {self.retries}")
        if self.backoff < 0:
            raise ValidationError(f"backoff must be >= 0, got {self.backoff}")

    def to_dict(self) -> dict:
        return asdict(self)


def resolve_config(config_path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """defaults < config file < environment (endpoint/auth only) < flags."""
    values: dict = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ValidationError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    if os.environ.get(ENDPOINT_ENV):
        values["endpoint"] = os.environ[ENDPOINT_ENV]
    if os.environ.get(AUTH_ENV):
        values["auth_header"] = os.environ[AUTH_ENV]
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def build_counter(config: RunConfig) -> TokenCounter:
    return make_counter(config.counter)


def build_backend(config: RunConfig, corpus: Corpus | None = None) -> ScorerBackend:
    if config.backend == "overlap":
        backend = LexicalOverlapBackend()
        backend.max_premise_tokens = config.premise_cap
        return backend
    if config.backend == "unit-relevance":
        if not config.relevance_file:
            raise ValidationError("unit-relevance backend needs --relevance-file")
        if corpus is None:
            raise ValidationError("unit-relevance backend needs a loaded corpus")
        backend = UnitRelevanceBackend.from_file(config.relevance_file, corpus)
        backend.max_premise_tokens = config.premise_cap
        return backend
    if config.backend == "remote":
        if not config.endpoint:
            raise ValidationError(
                f"remote backend needs an endpoint (flag, config file, or ${ENDPOINT_ENV})"
            )
        return RemoteBackend(
            endpoint=config.endpoint,
            auth_header=config.auth_header,
            timeout=config.timeout,
            max_retries=config.retries,
            backoff_base=config.backoff,
            max_premise_tokens=config.premise_cap,
        )
    raise ValidationError(f"unknown backend {config.backend!r}")


def build_cache(config: RunConfig) -> ScoreCache | None:
    return ScoreCache(config.cache_size) if config.cache_size > 0 else None
