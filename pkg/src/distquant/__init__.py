"""Distributed rate-adaptive feature quantization for linear regression."""

from .adaptive import RateSchedule, adapt, reduce_codebook
from .clustering import Clustering1D, LloydResult, kmeans1d_weighted, weighted_lloyd
from .core import (CalibrationSet, DimensionError, DistributedQuantizer,
                   FeaturePartition, InvalidCodebookError, LinearModel,
                   SensorCodebook, assumption1_diagnostic, evaluate_mse,
                   predict, project, quantize)
from .experiments import StrategyResults, SyntheticSpec, gen_synthetic, run_figure2
from .scheme import TrainConfig, projected_distortion, train_agnostic, train_distributed
from .simnet import (MalformedFrameError, MessageFrame, SessionTranscript,
                     decode_index, encode_index, run_session)

__version__ = "0.1.0"

__all__ = [
    "CalibrationSet", "Clustering1D", "DimensionError", "DistributedQuantizer",
    "FeaturePartition", "InvalidCodebookError", "LinearModel", "LloydResult",
    "MalformedFrameError", "MessageFrame", "RateSchedule", "SensorCodebook",
    "SessionTranscript", "StrategyResults", "SyntheticSpec", "TrainConfig",
    "adapt", "assumption1_diagnostic", "decode_index", "encode_index",
    "evaluate_mse", "gen_synthetic", "kmeans1d_weighted", "predict", "project",
    "projected_distortion", "quantize", "reduce_codebook", "run_figure2",
    "run_session", "train_agnostic", "train_distributed", "weighted_lloyd",
]
