"""Model registry: which encoders exist, their role, dimension, and geometry.

Config is a JSON file:

    {"models": [
        {"model_id": "clip-text", "role": "clip-text", "dim": 512,
         "space": "euclidean",
         "provider": {"type": "clip-text", "checkpoint": "openai/clip-vit-base-patch32"}},
        ...
    ]}

Provider types: "deterministic" (seeded pseudo-encoder, no downloads),
"sentence-transformer", "clip-text", "clip-image".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

ROLES = ("clip-text", "clip-image", "sentence-encoder")
SPACES = ("euclidean", "hyperbolic")


class RegistryError(Exception):
    pass


@dataclass(frozen=True)
class ModelRegistryEntry:
    model_id: str
    role: str
    dim: int
    space: str = "euclidean"
    provider: dict = field(default_factory=lambda: {"type": "deterministic"})

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise RegistryError(f"unknown role {self.role!r}")
        if self.space not in SPACES:
            raise RegistryError(f"unknown space {self.space!r}")
        if self.dim <= 0:
            raise RegistryError("dim must be positive")
        if self.space == "hyperbolic" and self.role != "sentence-encoder":
            raise RegistryError("hyperbolic space is only valid for sentence-encoder models")


class Registry:
    def __init__(self, entries: list[ModelRegistryEntry]):
        self._entries = {e.model_id: e for e in entries}
        if len(self._entries) != len(entries):
            raise RegistryError("duplicate model ids in registry")

    @classmethod
    def from_file(cls, path: str | Path) -> "Registry":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        models = data.get("models")
        if not isinstance(models, list) or not models:
            raise RegistryError(f"{path} must contain a non-empty 'models' list")
        return cls([ModelRegistryEntry(**m) for m in models])

    def get(self, model_id: str) -> ModelRegistryEntry | None:
        return self._entries.get(model_id)

    def __contains__(self, model_id: str) -> bool:
        return model_id in self._entries

    def ids(self) -> list[str]:
        return sorted(self._entries)
