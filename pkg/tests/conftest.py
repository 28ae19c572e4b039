import shutil
from pathlib import Path

import numpy as np
import pytest

from mapcompare.config import RunConfig
from mapcompare.corpus import BowCorpus, Vocabulary
from mapcompare.pipeline import Pipeline

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def make_bow(doc_tokens, vocab_size, prefix="t"):
    """BowCorpus straight from index lists (skips text preprocessing)."""
    vocab = Vocabulary(
        terms=[f"{prefix}{i}" for i in range(vocab_size)],
        doc_frequency={},
        total_frequency={},
    )
    docs = [np.array(toks, dtype=np.int32) for toks in doc_tokens]
    return BowCorpus(
        doc_ids=[f"d{i}" for i in range(len(docs))], docs=docs, vocab=vocab
    )


def two_block_bow(n_docs=200, doc_len=20, seed=1):
    """Half the docs draw from terms 0-4, half from terms 5-9."""
    rng = np.random.default_rng(seed)
    docs = []
    for d in range(n_docs):
        block = 0 if d < n_docs // 2 else 1
        docs.append(rng.integers(0, 5, size=doc_len) + block * 5)
    return make_bow(docs, 10)


@pytest.fixture(scope="session")
def fixture_config(tmp_path_factory) -> RunConfig:
    cfg = RunConfig.from_file(FIXTURES / "config.yaml")
    cfg.output_dir = str(tmp_path_factory.mktemp("fixture-run"))
    return cfg


@pytest.fixture(scope="session")
def fixture_run(fixture_config) -> Pipeline:
    """The bundled 400-doc corpus, run through every stage once per session."""
    pipe = Pipeline(fixture_config)
    pipe.run_all()
    return pipe


@pytest.fixture()
def fresh_run_dir(fixture_run, tmp_path):
    """Copy of the completed fixture run, safe to mutate."""
    dest = tmp_path / "run"
    shutil.copytree(fixture_run.out, dest)
    return dest
