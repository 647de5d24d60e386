import json
import math

import numpy as np
import pytest

from coderet.encoder.checkpoint import load_checkpoint, load_checkpoint_with_config, save_checkpoint
from coderet.encoder.losses import (
    Batch,
    contrastive_loss,
    distillation_loss,
    info_nce,
    kl_to_target,
    total_loss,
)
from coderet.encoder.model import drop_tokens, encode, encode_many, similarity
from coderet.encoder.optim import OptimizerState, linear_schedule, optimizer_step
from coderet.encoder.params import EncoderParams, build_vocab
from coderet.errors import EncoderError
from coderet.utils import child_rng

TOKENS = ["sort", "list", "items", "reverse", "string", "text", "count", "words", "open", "file"]

PAIRS = [
    (["sort", "list"], ["sort", "items", "list"]),
    (["reverse", "string"], ["reverse", "text", "string"]),
    (["count", "words"], ["count", "words", "text"]),
    (["open", "file"], ["file", "open", "items"]),
]


def _params(seed, d=8):
    return EncoderParams.initialize(build_vocab([TOKENS]), d, child_rng(seed, "gradcheck"))


def _batch(modality="code_doc"):
    return Batch(anchors=[a for a, _ in PAIRS], positives=[p for _, p in PAIRS], modality=modality)


def _numeric_grad(loss_fn, params, name, index, eps=1e-6):
    array = getattr(params, name)
    plus, minus = array.copy(), array.copy()
    plus[index] += eps
    minus[index] -= eps
    return (loss_fn(params.replace(**{name: plus})) - loss_fn(params.replace(**{name: minus}))) / (2 * eps)


def _check_gradients(loss_fn, params, grads, rng, samples=6):
    for name in EncoderParams.PARAM_NAMES:
        array = getattr(params, name)
        for _ in range(samples):
            index = tuple(int(rng.integers(s)) for s in array.shape)
            numeric = _numeric_grad(loss_fn, params, name, index)
            analytic = grads[name][index]
            assert abs(numeric - analytic) <= 1e-6 + 1e-4 * abs(numeric), (name, index, numeric, analytic)


@pytest.mark.parametrize("seed", range(10))
def test_contrastive_gradients_match_finite_differences(seed):
    params = _params(seed)
    batch = _batch()
    _, grads = contrastive_loss(params, batch, 1.0)
    _check_gradients(lambda p: contrastive_loss(p, batch, 1.0)[0], params, grads, np.random.default_rng(seed))


def test_gradients_with_explicit_negatives():
    params = _params(42)
    batch = Batch(anchors=[a for a, _ in PAIRS], positives=[p for _, p in PAIRS], modality="query_code",
                  negatives=[["items", "text"], ["words"]])
    _, grads = contrastive_loss(params, batch, 20.0)
    _check_gradients(lambda p: contrastive_loss(p, batch, 20.0)[0], params, grads, np.random.default_rng(1))


@pytest.mark.parametrize("seed", range(3))
def test_distillation_gradients_match_finite_differences(seed):
    params = _params(100 + seed)
    queries = [["sort", "list"], ["count", "words"]]
    candidates = [[["sort", "items"], ["text"], ["open", "file"]],
                  [["count", "words", "text"], ["reverse"], ["list"]]]
    target = np.array([[2.0, -1.0, 0.5], [1.5, 0.0, -2.0]])
    _, grads = distillation_loss(params, queries, candidates, target, 20.0)
    loss_fn = lambda p: distillation_loss(p, queries, candidates, target, 20.0)[0]  # noqa: E731
    _check_gradients(loss_fn, params, grads, np.random.default_rng(seed))


def test_loss_of_indistinguishable_batch_is_log_n():
    params = _params(0)
    same = ["sort", "list"]
    batch = Batch(anchors=[same] * 4, positives=[same] * 4, modality="code_code")
    loss, _ = contrastive_loss(params, batch, 1.0)
    assert loss == pytest.approx(math.log(4))


def test_info_nce_of_orthogonal_pairs():
    loss, _, _ = info_nce(np.eye(4), np.eye(4), 1.0)
    assert loss == pytest.approx(math.log(1 + 3 * math.exp(-1)), abs=1e-4)
    assert loss == pytest.approx(0.7437, abs=1e-4)


def test_contrastive_loss_ignores_pair_order():
    params = _params(5)
    order = [2, 0, 3, 1]
    shuffled = Batch(anchors=[PAIRS[i][0] for i in order], positives=[PAIRS[i][1] for i in order],
                     modality="code_doc")
    loss, grads = contrastive_loss(params, _batch(), 20.0)
    shuffled_loss, shuffled_grads = contrastive_loss(params, shuffled, 20.0)
    assert shuffled_loss == pytest.approx(loss)
    for name in EncoderParams.PARAM_NAMES:
        np.testing.assert_allclose(shuffled_grads[name], grads[name], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_contrastive_loss_is_positive(seed):
    params = _params(seed)
    for temperature in (1.0, 20.0):
        loss, _ = contrastive_loss(params, _batch(), temperature)
        assert loss > 0


def test_sharper_temperature_lowers_loss_of_separated_pairs():
    rng = np.random.default_rng(3)
    vectors = rng.normal(size=(5, 8))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    losses = [info_nce(vectors, vectors, t)[0] for t in (1.0, 5.0, 20.0)]
    assert losses[0] > losses[1] > losses[2] > 0


def test_contrastive_loss_needs_two_pairs():
    with pytest.raises(EncoderError):
        contrastive_loss(_params(0), Batch(anchors=[["sort"]], positives=[["list"]], modality="code_doc"), 1.0)


def test_batch_validation():
    with pytest.raises(EncoderError):
        Batch(anchors=[["a"], ["b"]], positives=[["a"]], modality="code_doc")
    with pytest.raises(EncoderError):
        Batch(anchors=[["a"]], positives=[["a"]], modality="pixels")


def test_total_loss_skips_absent_terms():
    params = _params(5)
    batch = _batch()
    only_doc, _ = total_loss(params, None, batch, None)
    direct, _ = contrastive_loss(params, batch, 1.0)
    assert only_doc == pytest.approx(direct)

    both, _ = total_loss(params, _batch("code_code"), batch, None)
    assert both == pytest.approx(2 * direct)

    with pytest.raises(EncoderError):
        total_loss(params, None, None, None)


def test_kl_to_identical_target_is_zero():
    logits = np.array([[1.0, 2.0, 3.0], [0.0, -1.0, 4.0]])
    loss, grad = kl_to_target(logits, logits)
    assert loss == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(grad, 0.0, atol=1e-12)


def test_encoding_is_unit_norm():
    params = _params(3)
    for tokens in (["sort"], ["open", "file", "items"], ["unseen", "tokens"]):
        assert np.linalg.norm(encode(params, tokens)) == pytest.approx(1.0)


def test_encoding_ignores_token_order_and_repetition():
    params = _params(3)
    tokens = ["reverse", "text", "string", "sort"]
    base = encode(params, tokens)
    np.testing.assert_allclose(encode(params, list(reversed(tokens))), base, atol=1e-12)
    np.testing.assert_allclose(encode(params, tokens + tokens), base, atol=1e-12)


def test_encode_rejects_empty_input():
    with pytest.raises(EncoderError):
        encode(_params(0), [])


def test_dropout_needs_rng():
    with pytest.raises(EncoderError):
        encode(_params(0), ["sort", "list"], dropout_p=0.5)


def test_drop_tokens_never_empties_input():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert drop_tokens(["a", "b"], 0.99, rng)
    assert drop_tokens(["a", "b"], 0.0, rng) == ["a", "b"]


def test_encode_many_matches_encode():
    params = _params(9)
    lists = [["sort", "list"], ["open", "file"], ["count"]]
    rows = encode_many(params, lists, batch_size=2)
    for row, tokens in zip(rows, lists):
        np.testing.assert_allclose(row, encode(params, tokens), atol=1e-12)


def test_params_must_be_shared():
    params = _params(0)
    with pytest.raises(EncoderError):
        EncoderParams(vocab=params.vocab, embed=params.embed, proj=params.proj,
                      proj_bias=params.proj_bias, d=params.d, shared=False)


def test_build_vocab_is_deterministic():
    vocab = build_vocab([["b", "a", "b"], ["c", "a"]], max_size=3)
    assert vocab == {"<unk>": 0, "a": 1, "b": 2}


def test_zero_gradient_is_a_fixed_point():
    params = _params(1)
    grads = {name: np.zeros_like(value) for name, value in params.arrays().items()}
    updated, state = optimizer_step(params, grads, OptimizerState(), lr=0.1, weight_decay=0.0)
    for name in EncoderParams.PARAM_NAMES:
        np.testing.assert_array_equal(getattr(updated, name), getattr(params, name))
    assert state.step == 1


def test_non_finite_gradient_is_skipped():
    params = _params(1)
    grads = {name: np.zeros_like(value) for name, value in params.arrays().items()}
    grads["proj"][0, 0] = np.nan
    updated, state = optimizer_step(params, grads, OptimizerState(), lr=0.1, weight_decay=0.01)
    assert updated is params
    assert state.step == 0
    assert state.skipped == 1


def test_gradient_shape_is_checked():
    params = _params(1)
    with pytest.raises(EncoderError):
        optimizer_step(params, {"proj": np.zeros((2, 2))}, OptimizerState(), lr=0.1, weight_decay=0.0)
    with pytest.raises(EncoderError):
        optimizer_step(params, {"unknown": np.zeros(2)}, OptimizerState(), lr=0.1, weight_decay=0.0)


def test_optimizer_decreases_a_quadratic():
    params = _params(2)
    start = float(np.sum(params.proj ** 2))
    state = OptimizerState()
    for _ in range(50):
        params, state = optimizer_step(params, {"proj": 2 * params.proj}, state, lr=0.05, weight_decay=0.0)
    assert float(np.sum(params.proj ** 2)) < 0.5 * start


def test_optimizer_is_deterministic():
    def run():
        params, state = _params(4), OptimizerState()
        batch = _batch()
        for _ in range(5):
            _, grads = contrastive_loss(params, batch, 1.0)
            params, state = optimizer_step(params, grads, state, lr=0.01, weight_decay=0.01)
        return params

    first, second = run(), run()
    for name in EncoderParams.PARAM_NAMES:
        np.testing.assert_array_equal(getattr(first, name), getattr(second, name))


def test_optimizer_does_not_mutate_inputs():
    params = _params(6)
    before = params.proj.copy()
    _, grads = contrastive_loss(params, _batch(), 1.0)
    optimizer_step(params, grads, OptimizerState(), lr=0.5, weight_decay=0.1)
    np.testing.assert_array_equal(params.proj, before)


def test_linear_schedule():
    assert linear_schedule(0, 100, 10) == pytest.approx(0.1)
    assert linear_schedule(9, 100, 10) == pytest.approx(1.0)
    assert linear_schedule(10, 100, 10) == pytest.approx(1.0)
    assert linear_schedule(99, 100, 10) == pytest.approx(1 / 90)
    assert linear_schedule(0, 100, 0) == pytest.approx(1.0)


def test_checkpoint_reload_is_bit_identical(tmp_path):
    params = _params(11)
    path = save_checkpoint(params, str(tmp_path / "encoder.json"), config={"seed": 11})
    loaded, config = load_checkpoint_with_config(path)

    assert loaded.vocab == params.vocab
    assert config == {"seed": 11}
    for name in EncoderParams.PARAM_NAMES:
        np.testing.assert_array_equal(getattr(loaded, name), getattr(params, name))
    np.testing.assert_array_equal(encode(loaded, ["sort", "list"]), encode(params, ["sort", "list"]))


def test_identical_params_write_identical_bytes(tmp_path):
    first = save_checkpoint(_params(12), str(tmp_path / "a.json"))
    second = save_checkpoint(_params(12), str(tmp_path / "b.json"))
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()


def test_checkpoint_version_is_checked(tmp_path):
    path = save_checkpoint(_params(0), str(tmp_path / "encoder.json"))
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    payload["version"] = 99
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
    with pytest.raises(EncoderError):
        load_checkpoint(path)


def test_foreign_file_is_not_a_checkpoint(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"weights": []}', encoding="utf-8")
    with pytest.raises(EncoderError):
        load_checkpoint(str(path))


def test_similarity_of_encodings():
    params = _params(4)
    u = encode(params, ["sort", "list"])
    v = encode(params, ["open", "file"])
    assert similarity(u, u) == pytest.approx(1.0)
    assert -1.0 <= similarity(u, v) <= 1.0
    assert similarity(u, v) == pytest.approx(similarity(v, u))
