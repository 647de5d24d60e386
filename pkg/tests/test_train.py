import math
import statistics

import numpy as np
import pytest

from coderet import config as app_config
from coderet.encoder.params import EncoderParams
from coderet.errors import ConfigError, TrainingError
from coderet.pairmine.cross_model import CrossModelParams
from coderet.pairmine.pairs import TrainingPair, build_code_comment_pairs, build_code_doc_pairs
from coderet.retrieval.evaluate import evaluate
from coderet.retrieval.index import build_index
from coderet.retrieval.queries import labeled_pairs_from_docs, load_groups, load_queries, planted_pairs
from coderet.train import (
    AR2Config,
    Example,
    FinetuneConfig,
    PairSampler,
    TrainConfig,
    ar2_finetune,
    build_encoder_vocab,
    finetune,
    mine_hard_negatives,
    pretrain,
)
from coderet.train.finetune import training_mrr
from coderet.train.pretrain import METRIC_COLUMNS
from coderet.utils import child_rng


def _groups(n=10):
    groups = {}
    for i in range(n):
        language = "python" if i % 2 == 0 else "java"
        key = f"f{i:02d}"
        groups[key] = [Example(key, f"{key}#doc", key, ("text", str(i)), ("code", str(i)), language)]
    return groups


@pytest.fixture(scope="module")
def toy_pairs(toy_corpus, toy_by_id):
    groups, _ = load_groups(app_config.GROUPS_PATH)
    code_code = [
        TrainingPair(a, b, "code_code", "name_match", match_score=1.0,
                     left_language=toy_by_id[a].language, right_language=toy_by_id[b].language)
        for a, b in planted_pairs(groups)
    ]
    return {
        "code_doc": build_code_doc_pairs(toy_corpus),
        "code_comment": build_code_comment_pairs(toy_corpus),
        "code_code": code_code,
    }


@pytest.fixture(scope="module")
def toy_queries():
    return load_queries(app_config.QUERIES_PATH)


@pytest.fixture
def toy_params(toy_corpus):
    return EncoderParams.initialize(build_encoder_vocab(toy_corpus), 16, child_rng(31, "train-test"))


def _small_config(**overrides):
    values = dict(batch_size=8, steps=5, log_every=2, embed_dim=16, vocab_size=2000, seed=3)
    values.update(overrides)
    return TrainConfig(**values)


def test_sampler_batches_have_distinct_functions():
    sampler = PairSampler(_groups(), "code_doc", batch_size=4, seed=1)
    for step in range(1, 20):
        examples = sampler.next_examples(step)
        assert len(examples) == 4
        assert len({ex.key for ex in examples}) == len(examples)
        assert len({ex.anchor_id for ex in examples}) == len(examples)
        assert len({ex.positive_id for ex in examples}) == len(examples)


def test_sampler_mixes_languages():
    sampler = PairSampler(_groups(), "code_doc", batch_size=4, seed=1, hybrid=True)
    for step in range(1, 10):
        assert {ex.language for ex in sampler.next_examples(step)} == {"python", "java"}


def test_sampler_is_deterministic():
    first = PairSampler(_groups(), "code_doc", batch_size=3, seed=9)
    second = PairSampler(_groups(), "code_doc", batch_size=3, seed=9)
    for step in range(1, 15):
        assert first.next_examples(step) == second.next_examples(step)


def test_sampler_needs_two_groups():
    with pytest.raises(ValueError):
        PairSampler(_groups(1), "code_doc", batch_size=4, seed=1)


def test_sampler_batch():
    batch = PairSampler(_groups(), "code_doc", batch_size=4, seed=2).next_batch(1)
    assert len(batch) == 4
    assert batch.modality == "code_doc"
    assert all(a[0] == "text" and p[0] == "code" for a, p in zip(batch.anchors, batch.positives))


@pytest.mark.parametrize("overrides", [
    {"modality_mix": (0.5, 0.5, 0.5)},
    {"modality_mix": (1.0, 0.0)},
    {"modality_mix": (1.5, -0.5, 0.0)},
    {"batch_size": 1},
    {"steps": 0},
    {"temperature": 0.0},
])
def test_train_config_validation(overrides):
    with pytest.raises(ConfigError):
        TrainConfig(**overrides)


def test_finetune_and_ar2_config_validation():
    with pytest.raises(ConfigError):
        FinetuneConfig(strategy="random")
    with pytest.raises(ConfigError):
        FinetuneConfig(batch_size=1)
    with pytest.raises(ConfigError):
        AR2Config(negative_size=4, pool_size=2)
    with pytest.raises(ConfigError):
        AR2Config(rounds=0)
    with pytest.raises(ConfigError):
        AR2Config(warmup_proportion=1.0)


def test_short_pretraining_run(toy_corpus, toy_pairs):
    result = pretrain(toy_corpus, toy_pairs, _small_config())
    metrics = result.metrics

    assert list(metrics.columns) == METRIC_COLUMNS
    assert list(metrics["step"]) == [1, 2, 4, 5]
    assert np.isfinite(metrics["loss_total"]).all()
    assert np.isfinite(metrics[["loss_uni", "loss_bi_doc", "loss_bi_comment"]].to_numpy()).all()
    assert result.optimizer.step == 5
    assert result.params.d == 16


def test_absent_modality_is_nan(toy_corpus, toy_pairs):
    result = pretrain(toy_corpus, toy_pairs, _small_config(modality_mix=(0.5, 0.5, 0.0)))
    assert result.metrics["loss_bi_comment"].isna().all()
    assert not result.metrics["loss_uni"].isna().any()
    assert {m for _, m, _ in result.batch_log} == {"code_code", "code_doc"}


def test_unimodal_only_mix(toy_corpus, toy_pairs):
    result = pretrain(toy_corpus, toy_pairs, _small_config(modality_mix=(1.0, 0.0, 0.0)))
    assert {m for _, m, _ in result.batch_log} == {"code_code"}
    row = result.metrics.iloc[0]
    assert row["loss_total"] == pytest.approx(row["loss_uni"])


def test_hybrid_batches_mix_languages(toy_corpus, toy_pairs):
    result = pretrain(toy_corpus, toy_pairs, _small_config(modality_mix=(0.0, 1.0, 0.0)))
    for _, modality, languages in result.batch_log:
        assert modality == "code_doc"
        assert set(languages) == {"python", "java"}


def test_pretraining_is_deterministic(toy_corpus, toy_pairs):
    first = pretrain(toy_corpus, toy_pairs, _small_config(steps=3))
    second = pretrain(toy_corpus, toy_pairs, _small_config(steps=3))
    np.testing.assert_array_equal(first.params.embed, second.params.embed)
    assert first.batch_log == second.batch_log


def test_pretraining_without_pairs(toy_corpus):
    with pytest.raises(TrainingError):
        pretrain(toy_corpus, {"code_code": [], "code_doc": [], "code_comment": []}, _small_config())


def test_metrics_are_written(toy_corpus, toy_pairs, tmp_path):
    path = tmp_path / "metrics.csv"
    pretrain(toy_corpus, toy_pairs, _small_config(steps=2), metrics_path=str(path))
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == METRIC_COLUMNS


def test_hard_negatives_exclude_gold(toy_corpus, toy_params, toy_queries):
    index = build_index(toy_params, toy_corpus)
    mined = mine_hard_negatives(toy_params, toy_queries, index, k=3)

    assert [m.query_id for m in mined] == [q.query_id for q in toy_queries]
    for query, negatives in zip(toy_queries, mined):
        assert len(negatives.negative_ids) == 3
        assert not set(negatives.negative_ids) & set(query.gold_ids)


def test_hard_negatives_from_a_small_pool(toy_corpus, toy_params, toy_queries):
    query = toy_queries[0]
    pool = [r for r in toy_corpus if r.id in query.gold_ids] + [toy_corpus[0]]
    pool = list({r.id: r for r in pool}.values())
    index = build_index(toy_params, pool)
    mined = mine_hard_negatives(toy_params, [query], index, k=5)
    assert mined[0].negative_ids == [r.id for r in pool if r.id not in query.gold_ids]


@pytest.mark.parametrize("strategy", ["inbatch", "hardneg", "ar2"])
def test_finetune_strategies_update_the_encoder(toy_corpus, toy_params, toy_queries, strategy):
    config = FinetuneConfig(strategy=strategy, steps=3, batch_size=4, hard_negative_k=2, refresh_every=2, seed=5)
    ar2 = AR2Config(negative_size=2, pool_size=4, g_steps=3, d_steps=2, rounds=1, batch_size=4, d_dim=8, seed=5)
    rounds = []
    tuned = finetune(toy_params, toy_queries, toy_corpus, config, ar2, stats=rounds)

    assert isinstance(tuned, EncoderParams)
    assert tuned.vocab == toy_params.vocab
    assert not np.array_equal(tuned.proj, toy_params.proj)
    if strategy == "ar2":
        assert len(rounds) == 1
        assert 0.0 <= rounds[0].d_accuracy <= 1.0
        assert math.isfinite(rounds[0].d_loss)
    else:
        assert rounds == []


def test_later_strategies_never_rank_training_queries_worse(toy_corpus, toy_params, toy_queries):
    ar2 = AR2Config(negative_size=2, pool_size=4, g_steps=4, d_steps=2, rounds=1, batch_size=4, d_dim=8, seed=5)
    scores = []
    for strategy in ("inbatch", "hardneg", "ar2"):
        config = FinetuneConfig(strategy=strategy, steps=4, batch_size=4, hard_negative_k=2, refresh_every=2, seed=5)
        tuned = finetune(toy_params, toy_queries, toy_corpus, config, ar2)
        scores.append(training_mrr(tuned, toy_queries, toy_corpus))
    assert scores[2] >= scores[1] >= scores[0]


def test_finetune_needs_two_queries(toy_corpus, toy_params, toy_queries):
    with pytest.raises(TrainingError):
        finetune(toy_params, toy_queries[:1], toy_corpus, FinetuneConfig(steps=1, batch_size=2))


def test_ar2_rounds_are_recorded(toy_corpus, toy_params, toy_queries):
    ar2 = AR2Config(negative_size=2, pool_size=4, g_steps=2, d_steps=2, rounds=2, batch_size=4, d_dim=8,
                    refresh_every=1, seed=8)
    stats = []
    ar2_finetune(toy_params, None, toy_queries, toy_corpus, ar2, stats=stats)
    assert [s.round for s in stats] == [1, 2]


def test_ar2_ranker_learns_to_rank_gold_code(toy_corpus, toy_params):
    labeled = labeled_pairs_from_docs(toy_corpus)
    ar2 = AR2Config(negative_size=3, pool_size=8, g_steps=0, d_steps=20, rounds=1, batch_size=8, d_dim=8, seed=4)
    stats = []
    ar2_finetune(toy_params, None, labeled, toy_corpus, ar2, stats=stats)
    assert not stats[0].aborted
    assert stats[0].d_accuracy > 0.5


def test_ar2_round_with_constant_ranker_leaves_the_retriever_alone(toy_corpus, toy_params, toy_queries):
    flat = CrossModelParams(
        vocab={app_config.UNK_TOKEN: 0}, embed=np.zeros((1, 4)), interaction=np.eye(4),
        lexical_weight=np.zeros(1), bias=np.zeros(1),
    )
    ar2 = AR2Config(negative_size=2, pool_size=4, g_steps=3, d_steps=0, rounds=1, batch_size=4, seed=4)
    stats = []
    tuned = ar2_finetune(toy_params, flat, toy_queries, toy_corpus, ar2, stats=stats)
    assert stats[0].aborted
    assert stats[0].g_loss is None
    np.testing.assert_array_equal(tuned.proj, toy_params.proj)
    np.testing.assert_array_equal(tuned.embed, toy_params.embed)


@pytest.mark.slow
def test_pretraining_lowers_the_loss(toy_corpus, toy_pairs):
    result = pretrain(toy_corpus, toy_pairs, _small_config(steps=300, log_every=50, batch_size=16))
    losses = result.metrics["loss_total"].to_numpy()
    assert losses[-1] < losses[0]


@pytest.mark.slow
def test_finetuning_improves_training_queries(toy_corpus, toy_params, toy_queries):
    index = build_index(toy_params, toy_corpus)
    before = evaluate(toy_params, index, toy_queries).mrr
    tuned = finetune(toy_params, toy_queries, toy_corpus,
                     FinetuneConfig(strategy="inbatch", steps=200, batch_size=8, lr=5e-3))
    after = evaluate(tuned, build_index(tuned, toy_corpus), toy_queries).mrr
    assert after > before


SEEDS = (13, 1, 2)


def _test_mrr(params, corpus, config):
    return evaluate(params, build_index(params, corpus), load_queries(config.queries_path)).mrr


def _random_encoder(corpus, config):
    vocab = build_encoder_vocab(corpus, max_size=config.vocab_size)
    return EncoderParams.initialize(vocab, config.embed_dim, child_rng(config.seed, "init"))


def _finetuned(params, corpus, config, pairs, strategy):
    labeled = labeled_pairs_from_docs(corpus, equivalents=[p.key for p in pairs["code_code"]])
    return finetune(params, labeled, corpus, config.replace(finetune_strategy=strategy).finetuning(), config.ar2())


@pytest.mark.slow
def test_pretraining_spreads_and_aligns_embeddings(toy_corpus, toy_pairs, toy_config):
    metrics = pretrain(toy_corpus, toy_pairs, toy_config.replace(pretrain_steps=2000).training()).metrics
    assert metrics["l_uniform"].iloc[-1] < metrics["l_uniform"].iloc[0]
    assert metrics["l_align"].iloc[-1] <= metrics["l_align"].iloc[0]


@pytest.mark.slow
def test_finetuning_strategies_are_ordered(toy_corpus, toy_run):
    scores = {"random": [], "inbatch": [], "hardneg": [], "ar2": []}
    for seed in SEEDS:
        config, pairs, pretrained = toy_run(seed)
        scores["random"].append(_test_mrr(_random_encoder(toy_corpus, config), toy_corpus, config))
        for strategy in ("inbatch", "hardneg", "ar2"):
            tuned = _finetuned(pretrained, toy_corpus, config, pairs, strategy)
            scores[strategy].append(_test_mrr(tuned, toy_corpus, config))

    median = {name: statistics.median(values) for name, values in scores.items()}
    assert median["ar2"] >= median["hardneg"] >= median["inbatch"]
    assert median["inbatch"] >= median["random"] + 0.10


@pytest.mark.slow
def test_dropping_bimodal_pairs_from_pretraining_costs_mrr(toy_corpus, toy_run):
    scores = {"full": [], "unimodal": [], "random": []}
    for seed in SEEDS:
        config, pairs, pretrained = toy_run(seed)
        unimodal = pretrain(toy_corpus, pairs, config.replace(modality_mix=[1.0, 0.0, 0.0]).training()).params
        scores["full"].append(_test_mrr(_finetuned(pretrained, toy_corpus, config, pairs, "inbatch"),
                                        toy_corpus, config))
        scores["unimodal"].append(_test_mrr(_finetuned(unimodal, toy_corpus, config, pairs, "inbatch"),
                                            toy_corpus, config))
        scores["random"].append(_test_mrr(_random_encoder(toy_corpus, config), toy_corpus, config))

    median = {name: statistics.median(values) for name, values in scores.items()}
    assert median["full"] >= median["unimodal"] >= median["random"]
