"""Digests and provenance blocks for on-disk artifacts.

Every artifact the CLI or service writes carries a provenance block naming
the exact config and input files (by sha256), so re-running a command with
identical inputs reproduces byte-identical outputs. Nothing time-dependent
goes in here.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_json(obj: Any) -> str:
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def input_digests(paths: dict[str, str | Path]) -> dict[str, dict[str, str]]:
    return {
        name: {"path": str(p), "sha256": sha256_file(p)} for name, p in sorted(paths.items())
    }


def write_provenance(path: str | Path, block: dict[str, Any]) -> None:
    Path(path).write_text(
        json.dumps(block, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def provenance_path(artifact_path: str | Path) -> Path:
    p = Path(artifact_path)
    return p.with_name(p.stem + ".provenance.json")
