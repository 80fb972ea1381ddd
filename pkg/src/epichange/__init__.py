"""Epidemic changepoint detection with unknown background and nuisance segments."""

__version__ = "0.1.0"

from .cost import CostParams, PenaltyScale, Pruning, cost_fixed_mean, cost_mle_mean, default_penalty, penalty
from .epidetect import DetectionResult, Segment, detect_epidemic, op_fixed_background
from .errors import (
    AllPointsSegmented, BadBinCount, BadRange, ConfigError, DegenerateScale, EmptyInput, EmptySeries,
    EpichangeError, MissingColumn, NonFiniteValue, NonPositiveSigma, ParseError, TooLarge, TooShort,
    UnknownScenario, WindowTooShort,
)
from .ingest import bin_mean, read_series, robust_background, write_series
from .metrics import ReplicationSummary, sic, summarize, tpr
from .nuisance import detect_nuisance, window_cost_Cprime
from .oracle import EnumerationBudget, brute_fixed_bg, brute_nuisance, brute_unknown_bg
from .series import TimeSeries, build
from .simgen import GroundTruth, ScenarioSpec, generate

__all__ = [
    "CostParams", "PenaltyScale", "Pruning", "cost_fixed_mean", "cost_mle_mean", "default_penalty", "penalty",
    "DetectionResult", "Segment", "detect_epidemic", "op_fixed_background",
    "bin_mean", "read_series", "robust_background", "write_series",
    "ReplicationSummary", "sic", "summarize", "tpr",
    "detect_nuisance", "window_cost_Cprime",
    "EnumerationBudget", "brute_fixed_bg", "brute_nuisance", "brute_unknown_bg",
    "TimeSeries", "build", "GroundTruth", "ScenarioSpec", "generate",
    "AllPointsSegmented", "BadBinCount", "BadRange", "ConfigError", "DegenerateScale", "EmptyInput",
    "EmptySeries", "EpichangeError", "MissingColumn", "NonFiniteValue", "NonPositiveSigma", "ParseError",
    "TooLarge", "TooShort", "UnknownScenario", "WindowTooShort",
]
