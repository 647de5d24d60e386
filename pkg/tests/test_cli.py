import json
import os

import pytest
from click.testing import CliRunner

from cli import cli
from coderet.dynamic_config import PipelineConfig, dump_config, load_pipeline_config, parse_config
from coderet.errors import ConfigError
from coderet.pairmine.pairs import TrainingPair, write_pairs
from coderet.pipeline import run_pipeline
from coderet.stats import language_pair_matrix, report_stats


@pytest.fixture
def pairs_dir(tmp_path):
    out = tmp_path / "pairs"
    out.mkdir()
    write_pairs([
        TrainingPair(f"p.py::f{i}#doc", f"p.py::f{i}", "code_doc", "direct",
                     left_language="python", right_language="python")
        for i in range(3)
    ], str(out / "code_doc.jsonl"))
    write_pairs([
        TrainingPair("java/A.java::sort", "python/a.py::sort", "code_code", "name_match", match_score=1.0,
                     left_language="java", right_language="python"),
        TrainingPair("java/A.java::max", "java/B.java::max", "code_code", "doc_match", match_score=0.9,
                     left_language="java", right_language="java"),
    ], str(out / "code_code.jsonl"))
    return out


def test_config_round_trip():
    config = PipelineConfig(seed=42, languages=["java"], tau2_keep_fraction=0.5)
    text = dump_config(config)
    assert dump_config(parse_config(text)) == text
    assert parse_config(text) == config


def test_unknown_config_key():
    with pytest.raises(ConfigError):
        parse_config("seed: 1\nlearning_rate_of_doom: 3\n")


def test_config_must_be_a_mapping():
    with pytest.raises(ConfigError):
        parse_config("- just\n- a list\n")


def test_invalid_eval_mode():
    with pytest.raises(ConfigError):
        PipelineConfig(eval_mode="image")


def test_languages_accept_a_comma_separated_string():
    assert PipelineConfig(languages="python, java").languages == ["python", "java"]
    with pytest.raises(ConfigError):
        PipelineConfig(languages="")


def test_config_resolution_order(tmp_path, monkeypatch):
    monkeypatch.setenv("CODERET_SEED", "99")
    monkeypatch.setenv("CODERET_TAU1", "0.8")
    assert load_pipeline_config(None).seed == 99

    path = tmp_path / "config.yaml"
    path.write_text("seed: 5\n", encoding="utf-8")
    config = load_pipeline_config(str(path))
    assert config.seed == 5
    assert config.tau1 == 0.8
    assert load_pipeline_config(str(path), seed=7).seed == 7


def test_explicit_null_in_config_file_beats_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CODERET_TAU2_KEEP_FRACTION", "0.5")
    assert load_pipeline_config(None).tau2_keep_fraction == 0.5

    path = tmp_path / "config.yaml"
    path.write_text("tau2_keep_fraction: null\n", encoding="utf-8")
    assert load_pipeline_config(str(path)).tau2_keep_fraction is None


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_pipeline_config(str(tmp_path / "absent.yaml"))


def test_unknown_key_in_config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("seed: 1\nbatchsize: 8\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_pipeline_config(str(path))


def test_stage_configs():
    config = PipelineConfig(tau1=0.6, finetune_strategy="hardneg", ar2_rounds=3, seed=4)
    assert config.mining().tau1 == 0.6
    assert config.mining().seed == 4
    assert config.finetuning().strategy == "hardneg"
    assert config.ar2().rounds == 3
    assert config.training().modality_mix == pytest.approx((1 / 3, 1 / 3, 1 / 3))


def test_report_stats(pairs_dir, tmp_path):
    out_path = tmp_path / "stats.json"
    stats, report = report_stats(str(pairs_dir), out_path=str(out_path))

    assert stats["counts"] == {"code_doc": 3, "code_comment": 0, "code_code": 2}
    assert stats["total"] == 5
    assert stats["code_code_cross_language"] == 1
    assert stats["language_pairs"] == {"java-java": 1, "java-python": 1}
    assert "code_doc" in report
    with open(out_path, encoding="utf-8") as f:
        assert json.load(f) == stats


def test_stats_counts_match_line_counts(pairs_dir):
    stats, _ = report_stats(str(pairs_dir))
    for modality in ("code_doc", "code_code"):
        with open(pairs_dir / f"{modality}.jsonl", encoding="utf-8") as f:
            assert stats["counts"][modality] == len(f.read().splitlines())


def test_stats_of_an_empty_directory(tmp_path):
    (tmp_path / "code_code.jsonl").write_text("", encoding="utf-8")
    stats, report = report_stats(str(tmp_path))
    assert stats["total"] == 0
    assert stats["language_pairs"] == {}
    assert "(none)" in report


def test_language_pair_matrix_is_upper_triangular():
    rows = [
        {"left_language": "python", "right_language": "java"},
        {"left_language": "java", "right_language": "python"},
        {"left_language": "go", "right_language": "go"},
    ]
    matrix = language_pair_matrix(rows)
    assert list(matrix.index) == ["go", "java", "python"]
    assert matrix.loc["java", "python"] == 2
    assert matrix.loc["python", "java"] == 0
    assert matrix.loc["go", "go"] == 1


def test_cli_stats(pairs_dir, tmp_path):
    out = tmp_path / "run"
    result = CliRunner().invoke(cli, ["stats", "--pairs", str(pairs_dir), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "java" in result.output
    assert os.path.exists(out / "pair_stats.json")


def test_cli_ingest_to_jsonl(tmp_path):
    target = tmp_path / "corpus.jsonl"
    result = CliRunner().invoke(cli, ["ingest", "--out", str(target)])
    assert result.exit_code == 0, result.output
    with open(target, encoding="utf-8") as f:
        assert len(f.read().splitlines()) == 60


def test_cli_mine_writes_pairs_into_out(tmp_path, repo_config_path):
    runner = CliRunner()
    corpus = tmp_path / "corpus.jsonl"
    assert runner.invoke(cli, ["ingest", "--out", str(corpus)]).exit_code == 0

    pairs = tmp_path / "pairs"
    result = runner.invoke(cli, ["mine", "-c", repo_config_path, "--corpus", str(corpus), "--out", str(pairs),
                                 "--tau1", "0.8", "--tau2", "0.5"])
    assert result.exit_code == 0, result.output
    for name in ("code_doc.jsonl", "code_comment.jsonl", "code_code.jsonl",
                 "candidates_name.jsonl", "candidates_doc.jsonl", "mining_stats.json"):
        assert os.path.exists(pairs / name), name

    stats, _ = report_stats(str(pairs))
    assert stats["counts"]["code_doc"] > 0
    assert stats["counts"]["code_comment"] > 0
    with open(pairs / "mining_stats.json", encoding="utf-8") as f:
        assert json.load(f)["counts"] == stats["counts"]


def test_cli_mine_rejects_bad_thresholds(tmp_path):
    runner = CliRunner()
    corpus = tmp_path / "corpus.jsonl"
    assert runner.invoke(cli, ["ingest", "--out", str(corpus)]).exit_code == 0
    result = runner.invoke(cli, ["mine", "--corpus", str(corpus), "--out", str(tmp_path), "--tau1", "1.5"])
    assert result.exit_code == 2


def test_cli_unknown_language_exits_with_error(tmp_path):
    result = CliRunner().invoke(cli, ["ingest", "--langs", "cobol", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_cli_pipeline_with_a_bad_corpus_root(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text(f"corpus_root: {tmp_path / 'missing'}\n", encoding="utf-8")
    out = tmp_path / "run"
    result = CliRunner().invoke(cli, ["pipeline", "-c", str(config), "--out", str(out)])

    assert result.exit_code == 2
    with open(out / "manifest.json", encoding="utf-8") as f:
        manifest = json.load(f)
    assert manifest["failed"]["stage"] == "ingest"
    assert manifest["stages"] == {}


@pytest.mark.slow
def test_pipeline_is_deterministic(tmp_path):
    config = PipelineConfig().replace(
        matcher_batch_size=8, matcher_epochs=1, denoise=False, batch_size=8, pretrain_steps=20,
        log_every=10, finetune_steps=5, finetune_batch_size=4, embed_dim=16,
    )
    manifests = []
    for name in ("first", "second"):
        context = run_pipeline(config, str(tmp_path / name))
        assert context.get_result("report").mrr > 0
        with open(tmp_path / name / "manifest.json", encoding="utf-8") as f:
            manifests.append(json.load(f))

    assert manifests[0]["stages"] == manifests[1]["stages"]
    assert manifests[0]["config_sha256"] == manifests[1]["config_sha256"]
    assert set(manifests[0]["stages"]) == {"ingest", "mine", "pretrain", "finetune", "eval"}
