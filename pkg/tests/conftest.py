import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reportqa.ingest import IngestConfig, Passage, PassageStore, ingest_corpus
from reportqa.reader import ScriptedReaderBackend
from reportqa.service import Engine, ServiceConfig
from reportqa.sparse import build_sparse_index
from reportqa.synth import make_planted_corpus


def make_passages(texts, doc_id="doc"):
    """Quick Passage list for index-level tests; offsets are synthetic."""
    return [
        Passage(
            passage_id=f"{doc_id}:{i:04d}",
            doc_id=doc_id,
            ordinal=i,
            text=text,
            char_start=0,
            char_end=max(1, len(text)),
        )
        for i, text in enumerate(texts)
    ]


@pytest.fixture(scope="session")
def planted():
    return make_planted_corpus()


@pytest.fixture(scope="session")
def planted_store(planted):
    store = PassageStore()
    ingest_corpus(planted.docs, IngestConfig(), store)
    return store


@pytest.fixture(scope="session")
def planted_sparse(planted_store):
    return build_sparse_index(planted_store.passages())


@pytest.fixture(scope="session")
def planted_reader(planted, planted_store):
    outputs = {}
    for question, per_passage in planted.fixture.items():
        for pid, output in per_passage.items():
            outputs[(question, planted_store.get_passage(pid).text)] = output
    return ScriptedReaderBackend(outputs)


@pytest.fixture()
def planted_engine(planted, planted_store, planted_sparse, planted_reader):
    config = ServiceConfig(
        store_dir="<in-memory>",
        predefined_questions=tuple(g.question for g in planted.gold),
    )
    return Engine(
        config,
        planted_store,
        sparse_index=planted_sparse,
        reader_backend=planted_reader,
    )
