import os

import numpy as np
import pytest

from coderet import config as app_config
from coderet.corpus.names import normalize_name
from coderet.corpus.parser import parse_corpus
from coderet.corpus.records import FunctionRecord
from coderet.dynamic_config import load_pipeline_config
from coderet.encoder.params import EncoderParams, build_vocab
from coderet.pairmine.code_code import mine_code_code
from coderet.pairmine.pairs import build_code_comment_pairs, build_code_doc_pairs
from coderet.train.pretrain import pretrain
from coderet.utils import child_rng

REPO_CONFIG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config.yaml")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the end-to-end training tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: trains models on the toy corpus")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def toy_corpus():
    """The bundled Python/Java corpus, parsed once per session."""
    return parse_corpus(app_config.CORPUS_ROOT, ["python", "java"])


@pytest.fixture(scope="session")
def repo_config_path():
    return REPO_CONFIG


@pytest.fixture(scope="session")
def toy_config():
    """The shipped toy-run configuration."""
    return load_pipeline_config(REPO_CONFIG)


def mine_toy_pairs(corpus, config):
    return {
        "code_doc": build_code_doc_pairs(corpus),
        "code_comment": build_code_comment_pairs(corpus),
        "code_code": mine_code_code(corpus, config.mining()).pairs,
    }


@pytest.fixture(scope="session")
def toy_run(toy_corpus, toy_config):
    """Mined pairs and the pre-trained encoder of the shipped config, one run per seed, cached."""
    runs = {}

    def run(seed):
        if seed not in runs:
            config = toy_config.replace(seed=seed)
            pairs = mine_toy_pairs(toy_corpus, config)
            runs[seed] = (config, pairs, pretrain(toy_corpus, pairs, config.training()).params)
        return runs[seed]
    return run


@pytest.fixture(scope="session")
def toy_by_id(toy_corpus):
    return {r.id: r for r in toy_corpus}


def make_record(fid, name, doc=None, comments=None, code=None, language="python"):
    """A hand-built FunctionRecord for tests that do not need the lexers."""
    return FunctionRecord(
        id=fid,
        language=language,
        name=name,
        name_normalized=normalize_name(name),
        doc=doc,
        comments=list(comments or []),
        code_tokens=list(code or ["def", name, "(", ")", ":", "return", "None"]),
        source_path=fid.split("::")[0],
        line_span=(1, 2),
    )


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def small_params():
    """A d=8 encoder over a handful of tokens."""
    vocab = build_vocab([["sort", "list", "items", "reverse", "string", "text", "count", "words",
                          "open", "file", "read", "lines", "max", "min", "value"]])
    return EncoderParams.initialize(vocab, 8, child_rng(7, "test-params"))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
