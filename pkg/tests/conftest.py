import pytest

from railsafe.seed import load_seed_ontology
from railsafe.sheet import default_schema
from railsafe.store import Archive


@pytest.fixture(scope="session")
def seed_ontology():
    return load_seed_ontology()


@pytest.fixture(scope="session")
def seed_schema(seed_ontology):
    return default_schema(seed_ontology)


@pytest.fixture
def archive(tmp_path, seed_ontology):
    return Archive.create(tmp_path / "archive", seed_ontology)
