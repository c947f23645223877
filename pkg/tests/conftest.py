import shutil
from pathlib import Path

import pytest

from bband_sim import load_bundle

REPO_ROOT = Path(__file__).resolve().parent.parent
MINILAND_DIR = REPO_ROOT / "data" / "miniland"
MINILAND_CONFIG = MINILAND_DIR / "config.yaml"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden" / "miniland"


@pytest.fixture(scope="session")
def miniland_dir() -> Path:
    return MINILAND_DIR


@pytest.fixture(scope="session")
def miniland_config() -> Path:
    return MINILAND_CONFIG


@pytest.fixture(scope="session")
def bundle():
    return load_bundle(MINILAND_DIR, MINILAND_CONFIG)


@pytest.fixture(scope="session")
def table_cache(tmp_path_factory) -> Path:
    """Shared capacity-table cache so the suite builds each table once."""
    return tmp_path_factory.mktemp("capacity_cache")


@pytest.fixture()
def miniland_copy(tmp_path) -> Path:
    """A writable copy of the miniland data dir, for corruption tests."""
    dest = tmp_path / "miniland"
    shutil.copytree(MINILAND_DIR, dest)
    return dest
