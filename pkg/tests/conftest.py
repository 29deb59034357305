from pathlib import Path

import pytest

from act.models.text import NormalizationConfig
from act.services.index_service import IndexService
from tests.helpers import write_corpus

FIXTURES = Path(__file__).parent / "fixtures"

BERESHIT = "בראשת"


@pytest.fixture
def hebrew_corpus_path() -> Path:
    return FIXTURES / "hebrew_verses.jsonl"


@pytest.fixture
def hebrew_index(hebrew_corpus_path):
    service = IndexService(NormalizationConfig())
    return service.build_index(service.ingest_corpus(hebrew_corpus_path))


@pytest.fixture
def synthetic_corpus_path(tmp_path) -> Path:
    return write_corpus(tmp_path / "corpus.jsonl")


@pytest.fixture
def synthetic_index(synthetic_corpus_path):
    service = IndexService(NormalizationConfig())
    return service.build_index(service.ingest_corpus(synthetic_corpus_path))
