"""Dropout-uncertainty pseudo-label filtering and calibration analysis."""

from .calibration import (
    CalibrationBin,
    CalibrationReport,
    CalibrationSample,
    calibration_report,
    calibration_samples,
    ece,
    mce,
    rce,
    reliability_bins,
)
from .edit_distance import (
    CorpusErrorRate,
    EditScore,
    corpus_error_rate,
    edit_distance,
    normalized_eds,
    utterance_error_rate,
)
from .simulate import NoiseChannel, SimCorpusSpec, corrupt, simulate_bundle, simulate_corpus
from .tokenization import NormalizationOptions, TokenSequence, TokenUnit, tokenize
from .uncertainty import (
    FilterDecision,
    HypothesisBundle,
    SweepPoint,
    UncertaintyRecord,
    filter_corpus,
    filter_decision,
    percentage_sweep,
    predictive_uncertainty,
    threshold_sweep,
)

__version__ = "0.1.0"
