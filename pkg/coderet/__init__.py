"""CodeRet - contrastive code retrieval with mined positive pairs."""

from coderet.logging_config import setup_logging

# Set up logging configuration
setup_logging()

# Version of the coderet package
__version__ = "0.1.0"

# Import main components
from coderet.corpus import FunctionRecord, parse_corpus
from coderet.dynamic_config import PipelineConfig, load_pipeline_config
from coderet.encoder import EncoderParams, load_checkpoint, save_checkpoint
from coderet.pairmine import MiningConfig, TrainingPair, build_code_code_corpus
from coderet.pipeline import PipelineContext, run_pipeline
from coderet.retrieval import DenseIndex, EvalReport, build_index, evaluate
from coderet.stats import report_stats

__all__ = [
    'DenseIndex',
    'EncoderParams',
    'EvalReport',
    'FunctionRecord',
    'MiningConfig',
    'PipelineConfig',
    'PipelineContext',
    'TrainingPair',
    'build_code_code_corpus',
    'build_index',
    'evaluate',
    'load_checkpoint',
    'load_pipeline_config',
    'parse_corpus',
    'report_stats',
    'run_pipeline',
    'save_checkpoint',
]
