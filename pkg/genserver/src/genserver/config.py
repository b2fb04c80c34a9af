"""Server configuration: file values, env overrides, validated defaults."""

import dataclasses
import json
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class DefaultParams:
    """Fallbacks applied when a /generate request omits optional fields.

    Mirrors the request schema, not the client library: the server owns its
    own copy of these knobs so the two packages share only the wire format.
    """

    num_return: int = 10
    top_p: float = 0.95
    max_length: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.num_return < 1:
            raise ValueError(f"num_return must be >= 1, got {self.num_return}")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_length < 1:
            raise ValueError(f"max_length must be >= 1, got {self.max_length}")


@dataclass(frozen=True)
class ServerConfig:
    checkpoint: str = "stub"  # filesystem path to a seq2seq model, or "stub"
    device: str = "cpu"
    max_concurrent: int = 4
    defaults: DefaultParams = dataclasses.field(default_factory=DefaultParams)
    host: str = "127.0.0.1"
    port: int = 8008

    def __post_init__(self):
        if not self.checkpoint:
            raise ValueError("checkpoint must be a path or 'stub'")
        if not self.device:
            raise ValueError("device tag must be non-empty")
        if self.max_concurrent < 1:
            raise ValueError(f"max_concurrent must be >= 1, got {self.max_concurrent}")
        if not 0 < self.port < 65536:
            raise ValueError(f"port out of range: {self.port}")

    @property
    def stub_mode(self) -> bool:
        return self.checkpoint == "stub"

    @classmethod
    def from_dict(cls, d: dict) -> "ServerConfig":
        d = dict(d)
        if "defaults" in d:
            d["defaults"] = DefaultParams(**d["defaults"])
        return cls(**d)

    @classmethod
    def from_file(cls, path: str) -> "ServerConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# env var -> (field, parser); flat fields only, defaults stay file/flag-driven
_ENV_FIELDS = {
    "GENSERVER_CHECKPOINT": ("checkpoint", str),
    "GENSERVER_DEVICE": ("device", str),
    "GENSERVER_MAX_CONCURRENT": ("max_concurrent", int),
    "GENSERVER_HOST": ("host", str),
    "GENSERVER_PORT": ("port", int),
}


def apply_env(config: ServerConfig, env=None) -> ServerConfig:
    """Overlay GENSERVER_* environment variables onto a config."""
    env = os.environ if env is None else env
    updates = {}
    for var, (field, parse) in _ENV_FIELDS.items():
        if var in env:
            updates[field] = parse(env[var])
    return dataclasses.replace(config, **updates) if updates else config
