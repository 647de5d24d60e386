import functools
import logging
import os
import sys

import click

from coderet.corpus.records import read_corpus, write_corpus
from coderet.dynamic_config import load_pipeline_config
from coderet.encoder.checkpoint import load_checkpoint
from coderet.errors import CodeRetError, StageError
from coderet.logging_config import setup_logging
from coderet.pairmine.pairs import MODALITIES, read_pairs
from coderet.pipeline import (
    EvalStage,
    FinetuneStage,
    IngestStage,
    MineStage,
    PipelineContext,
    PretrainStage,
    run_pipeline,
)
from coderet.retrieval.index import build_index, export_embeddings
from coderet.stats import report_stats
from coderet.train.config import STRATEGIES


def common_options(func):
    """--config, --seed, --out and --verbose, shared by every command."""
    @click.option('--config', '-c', 'config_path', type=click.Path(exists=True), help='YAML configuration file.')
    @click.option('--seed', type=int, default=None, help='Seed for every random choice of the run.')
    @click.option('--out', '-o', type=click.Path(), default='./runs', show_default=True, help='Output directory.')
    @click.option('--verbose', is_flag=True, help='Enable verbose output.')
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        if kwargs.get('verbose'):
            setup_logging(logging.DEBUG)
        try:
            return func(*args, **kwargs)
        except StageError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(2)
        except CodeRetError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(1)
    return wrapper


def _context(config_path, out, **overrides) -> PipelineContext:
    config = load_pipeline_config(config_path, **overrides)
    os.makedirs(out, exist_ok=True)
    return PipelineContext(config, out, flat=True)


def _load_pairs(pairs_dir):
    pairs = {}
    for modality in MODALITIES:
        path = os.path.join(pairs_dir, f"{modality}.jsonl")
        pairs[modality] = read_pairs(path) if os.path.exists(path) else []
    return pairs


def _echo_artifacts(context, stage):
    for path in context.artifacts.get(stage, []):
        click.echo(f"   ↳ {path}")


@click.group()
def cli():
    """
    🔎 CodeRet - contrastive code retrieval with mined positive pairs
    """


@cli.command()
@click.option('--root', type=click.Path(), default=None, help='Directory with the source files.')
@click.option('--langs', type=str, default=None, help='Comma-separated languages, e.g. python,java.')
@common_options
def ingest(root, langs, config_path, seed, out, verbose):
    """Parse a source tree into a function corpus (JSONL)."""
    context = _context(config_path, out if not out.endswith(".jsonl") else os.path.dirname(out) or ".",
                       seed=seed, corpus_root=root, languages=langs)
    click.echo(f"📂 Ingesting {context.config.corpus_root} ({', '.join(context.config.languages)})")
    IngestStage().execute(context)
    corpus = context.get_result("corpus")
    if out.endswith(".jsonl"):
        write_corpus(corpus, out)
        click.echo(f"✅ {len(corpus)} functions → {out}")
    else:
        click.echo(f"✅ {len(corpus)} functions")
        _echo_artifacts(context, "ingest")
    warnings = context.get_result("parse_warnings") or []
    if warnings:
        click.echo(f"⚠️ {len(warnings)} files skipped")


@cli.command()
@click.option('--corpus', 'corpus_path', type=click.Path(exists=True), required=True, help='Corpus JSONL.')
@click.option('--tau1', type=float, default=None, help='NameMatcher/DocMatcher similarity threshold.')
@click.option('--tau2', type=float, default=None, help='CrossModel score threshold.')
@click.option('--tau2-keep', 'tau2_keep_fraction', type=float, default=None,
              help='Keep this share of the doc-matched CrossModel scores instead of a fixed tau2.')
@common_options
def mine(corpus_path, tau1, tau2, tau2_keep_fraction, config_path, seed, out, verbose):
    """Build code-doc, code-comment and denoised code-code pairs into --out."""
    context = _context(config_path, out, seed=seed, tau1=tau1, tau2=tau2, tau2_keep_fraction=tau2_keep_fraction)
    context.add_result("corpus", read_corpus(corpus_path))
    click.echo(f"⛏️ Mining pairs from {corpus_path}")
    MineStage().execute(context)
    counts = {m: len(p) for m, p in context.get_result("pairs").items()}
    click.echo(f"✅ Pairs: {counts}")
    _echo_artifacts(context, "mine")


@cli.command()
@click.option('--corpus', 'corpus_path', type=click.Path(exists=True), required=True, help='Corpus JSONL.')
@click.option('--pairs', 'pairs_dir', type=click.Path(exists=True, file_okay=False), required=True,
              help='Directory with code_doc/code_comment/code_code JSONL files.')
@common_options
def pretrain(corpus_path, pairs_dir, config_path, seed, out, verbose):
    """Contrastive pre-training of the encoder on the mined pairs."""
    context = _context(config_path, out, seed=seed)
    context.add_result("corpus", read_corpus(corpus_path))
    context.add_result("pairs", _load_pairs(pairs_dir))
    click.echo(f"🏋️ Pre-training for {context.config.pretrain_steps} steps")
    PretrainStage().execute(context)
    metrics = context.get_result("pretrain_metrics")
    click.echo(f"✅ Loss {metrics['loss_total'].iloc[0]:.4f} → {metrics['loss_total'].iloc[-1]:.4f}")
    _echo_artifacts(context, "pretrain")


@cli.command()
@click.option('--corpus', 'corpus_path', type=click.Path(exists=True), required=True, help='Corpus JSONL.')
@click.option('--checkpoint', type=click.Path(exists=True), required=True, help='Pre-trained encoder.')
@click.option('--pairs', 'pairs_dir', type=click.Path(exists=True, file_okay=False), default=None,
              help='Mined pairs; code-code partners become extra gold ids of doc queries.')
@click.option('--train-queries', type=click.Path(exists=True), default=None,
              help='Labeled training queries JSONL; docs are used as queries when omitted.')
@click.option('--strategy', type=click.Choice(list(STRATEGIES)), default=None, help='Negative sampling regime.')
@common_options
def finetune(corpus_path, checkpoint, pairs_dir, train_queries, strategy, config_path, seed, out, verbose):
    """Fine-tune an encoder on labeled query-code pairs."""
    context = _context(config_path, out, seed=seed, finetune_strategy=strategy, train_queries_path=train_queries)
    context.add_result("corpus", read_corpus(corpus_path))
    context.add_result("params", load_checkpoint(checkpoint))
    if pairs_dir:
        context.add_result("pairs", _load_pairs(pairs_dir))
    click.echo(f"🎯 Fine-tuning with strategy '{context.config.finetune_strategy}'")
    FinetuneStage().execute(context)
    click.echo("✅ Fine-tuning done")
    _echo_artifacts(context, "finetune")


@cli.command(name="eval")
@click.option('--index', 'checkpoint', type=click.Path(exists=True), required=True,
              help='Encoder checkpoint that embeds the corpus into the search index.')
@click.option('--corpus', 'corpus_path', type=click.Path(exists=True), required=True, help='Corpus JSONL.')
@click.option('--queries', type=click.Path(exists=True), default=None, help='Labeled test queries JSONL.')
@click.option('--groups', type=click.Path(exists=True), default=None, help='Functionality groups JSON (code mode).')
@click.option('--mode', type=click.Choice(['text', 'code']), default=None, help='Text-to-code or code-to-code.')
@click.option('--target-lang', type=str, default=None, help='Restrict the candidate pool to one language.')
@click.option('--report', type=click.Path(), default=None, help='Where to write the report JSON.')
@click.option('--export', type=click.Path(), default=None, help='Write the index embeddings as TSV.')
@common_options
def evaluate(checkpoint, corpus_path, queries, groups, mode, target_lang, report, export,
             config_path, seed, out, verbose):
    """Evaluate retrieval with MRR (text) or MAP@R (code)."""
    context = _context(config_path, out, seed=seed, queries_path=queries, groups_path=groups,
                       eval_mode=mode, target_lang=target_lang)
    corpus = read_corpus(corpus_path)
    params = load_checkpoint(checkpoint)
    context.add_result("corpus", corpus)
    context.add_result("params", params)
    click.echo(f"📏 Evaluating {checkpoint} ({context.config.eval_mode} mode)")
    EvalStage(report_path=report).execute(context)
    result = context.get_result("report")
    if result.map_at_r is not None:
        click.echo(f"✅ MAP@R {result.map_at_r:.4f}, MRR {result.mrr:.4f}")
    else:
        click.echo(f"✅ MRR {result.mrr:.4f} over {len(result.per_query_rank)} queries")
    _echo_artifacts(context, "eval")
    if export:
        target = [context.config.target_lang] if context.config.target_lang else None
        export_embeddings(build_index(params, corpus, languages=target), export)
        click.echo(f"📄 Embeddings exported to {export}")


@cli.command()
@click.option('--pairs', 'pairs_dir', type=click.Path(exists=True, file_okay=False), required=True,
              help='Directory with the pair JSONL files.')
@common_options
def stats(pairs_dir, config_path, seed, out, verbose):
    """Print pair counts and the code-code language-pair matrix."""
    os.makedirs(out, exist_ok=True)
    json_path = os.path.join(out, "pair_stats.json")
    _, report = report_stats(pairs_dir, out_path=json_path)
    click.echo(report)
    click.echo(f"📄 Statistics saved to {json_path}")


@cli.command()
@common_options
def pipeline(config_path, seed, out, verbose):
    """Run ingest → mine → pretrain → finetune → eval and write a manifest."""
    config = load_pipeline_config(config_path, seed=seed)
    click.echo(f"🚀 Running the full pipeline → {out}")
    context = run_pipeline(config, out)
    result = context.get_result("report")
    for stage in context.artifacts:
        click.echo(f"✔️ {stage}")
        _echo_artifacts(context, stage)
    click.echo(f"✅ Completed. MRR {result.mrr:.4f}. Manifest saved in → {os.path.join(out, 'manifest.json')}")


if __name__ == "__main__":
    cli()
