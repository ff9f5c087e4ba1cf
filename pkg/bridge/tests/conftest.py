from pathlib import Path

import pytest

from embed_bridge.registry import Registry

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="session")
def offline_registry() -> Registry:
    return Registry.from_file(CONFIG_DIR / "registry-offline.json")
