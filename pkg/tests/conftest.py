import pytest

from fractal_trees.db import _sessionmaker_for
from fractal_trees.schema_loader import builtin_schemas


@pytest.fixture(scope="session")
def schemas():
    return builtin_schemas()


@pytest.fixture(scope="session")
def sierpinski(schemas):
    return schemas["sierpinski"]


@pytest.fixture(scope="session")
def npcf(schemas):
    return schemas["npcf_gasket"]


@pytest.fixture(scope="session")
def diamond(schemas):
    return schemas["diamond"]


@pytest.fixture(scope="session")
def hexagasket(schemas):
    return schemas["hexagasket"]


@pytest.fixture
def ledger(tmp_path, monkeypatch):
    """Point the run ledger at a throwaway SQLite file."""
    path = tmp_path / "runs.sqlite"
    monkeypatch.setenv("FRACTAL_TREES_DB", str(path))
    yield str(path)
    _sessionmaker_for.cache_clear()
