"""
End-to-end run: ingest → mine → pretrain → finetune → eval.

In a full run every stage writes into its own subdirectory of the run directory,
and the run finishes with manifest.json, holding the resolved config and a sha256
per artifact. Standalone CLI commands write straight into --out. A failing stage
raises StageError; artifacts of earlier stages stay.
"""

import logging
import os
from dataclasses import asdict
from typing import Any, Dict, List, Optional, Sequence

from coderet.corpus.parser import parse_corpus
from coderet.corpus.records import ParseWarning, write_corpus
from coderet.dynamic_config import PipelineConfig, dump_config
from coderet.encoder.checkpoint import save_checkpoint
from coderet.errors import CodeRetError, StageError
from coderet.pairmine.code_code import mine_code_code
from coderet.pairmine.pairs import build_code_comment_pairs, build_code_doc_pairs, write_pairs
from coderet.retrieval.evaluate import evaluate, evaluate_code_to_code
from coderet.retrieval.index import build_index
from coderet.retrieval.queries import labeled_pairs_from_docs, load_groups, load_queries
from coderet.train.finetune import finetune
from coderet.train.pretrain import pretrain
from coderet.utils import file_sha256, write_json, write_jsonl

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class PipelineContext:
    """
    Shared state of one run: config, output directory, in-memory results and written
    artifacts. A flat context writes every stage straight into out_dir.
    """

    def __init__(self, config: PipelineConfig, out_dir: str, flat: bool = False):
        self.config = config
        self.out_dir = out_dir
        self.flat = flat
        self.results: Dict[str, Any] = {}
        self.artifacts: Dict[str, List[str]] = {}
        self.errors: Dict[str, str] = {}

    def add_result(self, key: str, value: Any):
        self.results[key] = value

    def get_result(self, key: str, default: Any = None) -> Any:
        return self.results.get(key, default)

    def require(self, key: str, stage: str) -> Any:
        if key not in self.results:
            raise StageError(stage, message=f"missing input '{key}' (run the earlier stages first)")
        return self.results[key]

    def stage_dir(self, stage: str) -> str:
        path = self.out_dir if self.flat else os.path.join(self.out_dir, stage)
        os.makedirs(path, exist_ok=True)
        return path

    def add_artifact(self, stage: str, path: str):
        self.artifacts.setdefault(stage, []).append(path)

    def add_error(self, key: str, error: Exception):
        self.errors[key] = str(error)


class PipelineStage:
    """Base class for pipeline stages."""

    def __init__(self, name: str):
        self.name = name

    def run(self, context: PipelineContext) -> None:
        raise NotImplementedError("Subclass must implement run")

    def execute(self, context: PipelineContext) -> None:
        logger.info(f"Executing stage: {self.name}")
        try:
            self.run(context)
        except StageError as e:
            context.add_error(self.name, e)
            raise
        except (CodeRetError, ValueError, OSError) as e:
            context.add_error(self.name, e)
            raise StageError(self.name, e) from e


class IngestStage(PipelineStage):
    def __init__(self):
        super().__init__("ingest")

    def run(self, context: PipelineContext) -> None:
        config = context.config
        warnings: List[ParseWarning] = []
        corpus = parse_corpus(config.corpus_root, config.languages, warnings=warnings,
                              workers=config.parse_workers)
        out = context.stage_dir(self.name)
        path = os.path.join(out, "corpus.jsonl")
        write_corpus(corpus, path)
        context.add_artifact(self.name, path)
        if warnings:
            # absolute paths would make the artifact depend on the checkout location
            warn_path = os.path.join(out, "warnings.jsonl")
            write_jsonl(({"path": os.path.relpath(w.path, config.corpus_root), "reason": w.reason}
                         for w in warnings), warn_path)
            context.add_artifact(self.name, warn_path)
        context.add_result("corpus", corpus)
        context.add_result("parse_warnings", warnings)


class MineStage(PipelineStage):
    def __init__(self):
        super().__init__("mine")

    def run(self, context: PipelineContext) -> None:
        corpus = context.require("corpus", self.name)
        pairs = {
            "code_doc": build_code_doc_pairs(corpus),
            "code_comment": build_code_comment_pairs(corpus),
        }
        mining = mine_code_code(corpus, context.config.mining())
        pairs["code_code"] = mining.pairs

        out = context.stage_dir(self.name)
        files = {
            "code_doc.jsonl": pairs["code_doc"],
            "code_comment.jsonl": pairs["code_comment"],
            "code_code.jsonl": pairs["code_code"],
            "candidates_name.jsonl": mining.name_candidates,
            "candidates_doc.jsonl": mining.doc_candidates,
        }
        for filename, rows in files.items():
            path = os.path.join(out, filename)
            write_pairs(rows, path)
            context.add_artifact(self.name, path)
        stats_path = os.path.join(out, "mining_stats.json")
        write_json(dict(mining.stats, counts={m: len(p) for m, p in pairs.items()}), stats_path)
        context.add_artifact(self.name, stats_path)
        context.add_result("pairs", pairs)


class PretrainStage(PipelineStage):
    def __init__(self):
        super().__init__("pretrain")

    def run(self, context: PipelineContext) -> None:
        corpus = context.require("corpus", self.name)
        pairs = context.require("pairs", self.name)
        out = context.stage_dir(self.name)
        metrics_path = os.path.join(out, "metrics.csv")
        result = pretrain(corpus, pairs, context.config.training(), metrics_path=metrics_path)
        checkpoint = save_checkpoint(result.params, os.path.join(out, "encoder.json"),
                                     config=context.config.to_dict())
        context.add_artifact(self.name, metrics_path)
        context.add_artifact(self.name, checkpoint)
        context.add_result("params", result.params)
        context.add_result("pretrain_metrics", result.metrics)


class FinetuneStage(PipelineStage):
    """Fine-tune on the training queries, or on docs as queries when none are configured."""

    def __init__(self):
        super().__init__("finetune")

    def run(self, context: PipelineContext) -> None:
        config = context.config
        corpus = context.require("corpus", self.name)
        params = context.require("params", self.name)
        if config.train_queries_path:
            labeled = load_queries(config.train_queries_path)
        else:
            code_code = (context.get_result("pairs") or {}).get("code_code", [])
            labeled = labeled_pairs_from_docs(corpus, equivalents=[p.key for p in code_code])
        logger.info(f"Fine-tuning ({config.finetune_strategy}) on {len(labeled)} labeled queries")

        rounds = []
        params = finetune(params, labeled, corpus, config.finetuning(), config.ar2(), stats=rounds)
        out = context.stage_dir(self.name)
        checkpoint = save_checkpoint(params, os.path.join(out, "encoder.json"), config=config.to_dict())
        context.add_artifact(self.name, checkpoint)
        if rounds:
            rounds_path = os.path.join(out, "ar2_rounds.json")
            write_json([asdict(r) for r in rounds], rounds_path)
            context.add_artifact(self.name, rounds_path)
        context.add_result("params", params)


class EvalStage(PipelineStage):
    def __init__(self, report_path: Optional[str] = None):
        super().__init__("eval")
        self.report_path = report_path

    def run(self, context: PipelineContext) -> None:
        config = context.config
        corpus = context.require("corpus", self.name)
        params = context.require("params", self.name)
        target = [config.target_lang] if config.target_lang else None
        report_config = {"eval_mode": config.eval_mode, "target_lang": config.target_lang, "seed": config.seed}

        if config.eval_mode == "code":
            if not config.groups_path:
                raise StageError(self.name, message="code-to-code evaluation needs groups_path")
            groups, _ = load_groups(config.groups_path)
            report = evaluate_code_to_code(params, corpus, groups, report_config, languages=target)
        else:
            index = build_index(params, corpus, languages=target)
            report = evaluate(params, index, load_queries(config.queries_path), report_config)

        path = report.write(self.report_path or os.path.join(context.stage_dir(self.name), "report.json"))
        context.add_artifact(self.name, path)
        context.add_result("report", report)


def default_stages() -> List[PipelineStage]:
    return [IngestStage(), MineStage(), PretrainStage(), FinetuneStage(), EvalStage()]


def write_manifest(context: PipelineContext, failed: Optional[StageError] = None) -> str:
    """Manifest paths are relative to the run directory so identical runs hash identically."""
    stages = {}
    for stage, paths in context.artifacts.items():
        stages[stage] = {os.path.relpath(p, context.out_dir).replace(os.sep, "/"): file_sha256(p)
                         for p in paths}
    manifest = {"config": context.config.to_dict(), "stages": stages}
    config_path = context.get_result("config_path")
    if config_path:
        manifest["config_sha256"] = file_sha256(config_path)
    if failed is not None:
        manifest["failed"] = {"stage": failed.stage, "error": str(failed)}
    path = os.path.join(context.out_dir, MANIFEST_NAME)
    write_json(manifest, path)
    return path


def run_stages(context: PipelineContext, stages: Sequence[PipelineStage]) -> PipelineContext:
    for stage in stages:
        try:
            stage.execute(context)
        except StageError as e:
            logger.error(f"Stage {e.stage} failed: {e}")
            write_manifest(context, failed=e)
            raise
    return context


def run_pipeline(config: PipelineConfig, out_dir: str) -> PipelineContext:
    """Run every stage in order and write the run manifest."""
    os.makedirs(out_dir, exist_ok=True)
    context = PipelineContext(config, out_dir)
    config_path = os.path.join(out_dir, "config.yaml")
    with open(config_path, "w", encoding="utf-8") as f:
        f.write(dump_config(config))
    context.add_result("config_path", config_path)

    run_stages(context, default_stages())
    manifest = write_manifest(context)
    logger.info(f"Pipeline finished, manifest at {manifest}")
    return context
