"""Reliability bins and calibration errors (ECE, MCE, RMS-ECE).

Confidence is the filter's ``1 - pred_uncert``; accuracy is ``1 - err`` of
the reference decode against ground truth. Both are floored at zero.
Bins are equal-width on confidence, ``[lo, hi)`` with the last bin closed.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._parallel import pmap
from .edit_distance import utterance_error_rate
from .errors import EvaluationUnavailableError
from .tokenization import DEFAULT_OPTIONS, NormalizationOptions, TokenUnit, tokenize
from .uncertainty import HypothesisBundle, check_unique_ids, predictive_uncertainty

DEFAULT_BINS = 15


@dataclass(frozen=True)
class CalibrationSample:
    id: str
    confidence: float
    accuracy: float


@dataclass(frozen=True)
class CalibrationBin:
    index: int  # 1-based
    lo: float
    hi: float
    count: int
    n: int
    mean_confidence: float | None
    mean_accuracy: float | None

    @property
    def mass(self) -> float:
        return self.count / self.n

    @property
    def exact_mass(self) -> Fraction:
        return Fraction(self.count, self.n)

    @property
    def gap(self) -> float | None:
        if self.count == 0:
            return None
        return abs(self.mean_accuracy - self.mean_confidence)


@dataclass(frozen=True)
class CalibrationReport:
    M: int
    n: int
    bins: tuple[CalibrationBin, ...]
    ece: float
    mce: float
    rce: float
    mean_confidence: float
    mean_accuracy: float


def _clamp01(x: float) -> float:
    if not math.isfinite(x):
        return 0.0
    return min(1.0, max(0.0, x))


def _sample(bundle, unit, opts, accuracy_unit):
    rec = predictive_uncertainty(bundle, unit, opts)
    err = utterance_error_rate(
        tokenize(bundle.truth, accuracy_unit, opts), tokenize(bundle.ref_hyp, accuracy_unit, opts)
    ).normalized
    return CalibrationSample(bundle.id, rec.confidence, _clamp01(1.0 - err))


def calibration_samples(
    corpus: Sequence[HypothesisBundle],
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    accuracy_unit: TokenUnit | None = None,
    threads: int = 1,
) -> list[CalibrationSample]:
    """Confidence/accuracy pairs; accuracy uses ``unit`` unless overridden."""
    missing = [b.id for b in corpus if b.truth is None]
    if missing:
        raise EvaluationUnavailableError(
            f"{len(missing)} bundle(s) lack truth, e.g. {missing[0]!r}"
        )
    check_unique_ids(corpus)
    unit = TokenUnit(unit)
    acc_unit = unit if accuracy_unit is None else TokenUnit(accuracy_unit)
    fn = functools.partial(_sample, unit=unit, opts=opts, accuracy_unit=acc_unit)
    return pmap(fn, corpus, threads)


def bin_index(confidence: float, M: int) -> int:
    """0-based bin for ``confidence`` under ``[m/M, (m+1)/M)`` bins."""
    idx = min(int(confidence * M), M - 1)
    # float product can land on the wrong side of a boundary; fix against m/M
    if idx > 0 and confidence < idx / M:
        idx -= 1
    elif idx < M - 1 and confidence >= (idx + 1) / M:
        idx += 1
    return max(idx, 0)


def reliability_bins(samples: Sequence[CalibrationSample], M: int = DEFAULT_BINS) -> list[CalibrationBin]:
    if M < 1:
        raise ValueError("M must be >= 1")
    if not samples:
        raise ValueError("no calibration samples")
    n = len(samples)
    # sort so per-bin float sums do not depend on input order
    ordered = sorted(samples, key=lambda s: (s.confidence, s.accuracy, s.id))
    conf: list[list[float]] = [[] for _ in range(M)]
    acc: list[list[float]] = [[] for _ in range(M)]
    for s in ordered:
        m = bin_index(s.confidence, M)
        conf[m].append(s.confidence)
        acc[m].append(s.accuracy)
    bins = []
    for m in range(M):
        c = len(conf[m])
        bins.append(
            CalibrationBin(
                index=m + 1,
                lo=m / M,
                hi=(m + 1) / M,
                count=c,
                n=n,
                mean_confidence=math.fsum(conf[m]) / c if c else None,
                mean_accuracy=math.fsum(acc[m]) / c if c else None,
            )
        )
    return bins


def _n_of(bins, n):
    n = sum(b.count for b in bins) if n is None else n
    if n == 0:
        raise ValueError("n must be positive")
    return n


def ece(bins: Sequence[CalibrationBin], n: int | None = None) -> float:
    n = _n_of(bins, n)
    gaps = [b.gap for b in bins if b.count]
    value = math.fsum(b.count * b.gap for b in bins if b.count) / n
    # a weighted mean cannot exceed the max; clip last-ulp rounding overshoot
    return min(value, max(gaps)) if gaps else value


def mce(bins: Sequence[CalibrationBin]) -> float:
    gaps = [b.gap for b in bins if b.count]
    if not gaps:
        raise ValueError("all bins are empty")
    return max(gaps)


def rce(bins: Sequence[CalibrationBin], n: int | None = None) -> float:
    n = _n_of(bins, n)
    top = max((b.gap for b in bins if b.count), default=0.0)
    if top == 0:
        return 0.0
    # scale by the largest gap so tiny gaps do not underflow when squared
    return top * math.sqrt(math.fsum(b.count / n * (b.gap / top) ** 2 for b in bins if b.count))


def report_from_samples(samples: Sequence[CalibrationSample], M: int = DEFAULT_BINS) -> CalibrationReport:
    bins = reliability_bins(samples, M)
    n = len(samples)
    return CalibrationReport(
        M=M,
        n=n,
        bins=tuple(bins),
        ece=ece(bins, n),
        mce=mce(bins),
        rce=rce(bins, n),
        mean_confidence=math.fsum(s.confidence for s in samples) / n,
        mean_accuracy=math.fsum(s.accuracy for s in samples) / n,
    )


def calibration_report(
    corpus: Sequence[HypothesisBundle],
    M: int = DEFAULT_BINS,
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    accuracy_unit: TokenUnit | None = None,
    threads: int = 1,
) -> CalibrationReport:
    samples = calibration_samples(corpus, unit, opts, accuracy_unit, threads)
    return report_from_samples(samples, M)
