"""Dropout-disagreement uncertainty, threshold filtering and sweeps.

An utterance's predictive uncertainty is the largest normalised edit
distance between its no-dropout reference decode and any of its T dropout
samples. Confidence is one minus that, floored at zero. Filtering keeps an
utterance iff its uncertainty is at most the threshold.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._parallel import pmap
from .edit_distance import CorpusErrorRate, EditScore, normalized_eds, utterance_error_rate
from .errors import CorpusValidationError, EvaluationUnavailableError
from .tokenization import DEFAULT_OPTIONS, NormalizationOptions, TokenUnit, tokenize


@dataclass(frozen=True)
class HypothesisBundle:
    id: str
    ref_hyp: str
    samples: tuple[str, ...]
    truth: str | None = None

    def __post_init__(self):
        if not isinstance(self.samples, tuple):
            object.__setattr__(self, "samples", tuple(self.samples))
        if len(self.samples) < 1:
            raise CorpusValidationError(f"bundle {self.id!r} has no samples")

    @property
    def T(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class UncertaintyRecord:
    id: str
    T: int
    unit: TokenUnit
    per_sample_eds: tuple[EditScore, ...]

    @property
    def pred_uncert(self) -> float:
        return max(s.normalized for s in self.per_sample_eds)

    @property
    def exact_pred_uncert(self) -> Fraction | None:
        """Exact maximum, or ``None`` when any sample is max-uncertain."""
        vals = [s.exact for s in self.per_sample_eds]
        if any(v is None for v in vals):
            return None
        return max(vals)

    @property
    def confidence(self) -> float:
        return confidence_from_uncertainty(self.pred_uncert)


def confidence_from_uncertainty(pred_uncert: float) -> float:
    if not math.isfinite(pred_uncert) or pred_uncert >= 1.0:
        return 0.0
    return 1.0 - pred_uncert


@dataclass(frozen=True)
class FilterDecision:
    id: str
    tau: float
    accepted: bool
    pred_uncert: float


@dataclass(frozen=True)
class SweepPoint:
    tau_or_fraction: float
    mode: str  # "threshold" or "percentage"
    accepted_count: int
    accepted_fraction: float
    wer: CorpusErrorRate | None
    cer: CorpusErrorRate | None


def predictive_uncertainty(
    bundle: HypothesisBundle,
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
) -> UncertaintyRecord:
    unit = TokenUnit(unit)
    ref = tokenize(bundle.ref_hyp, unit, opts)
    eds = tuple(normalized_eds(ref, tokenize(s, unit, opts)) for s in bundle.samples)
    return UncertaintyRecord(bundle.id, len(eds), unit, eds)


def filter_decision(record: UncertaintyRecord, tau: float) -> FilterDecision:
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    pu = record.pred_uncert
    # inf <= tau is False for any finite tau; an infinite tau still rejects the sentinel
    accepted = math.isfinite(pu) and pu <= tau
    return FilterDecision(record.id, tau, accepted, pu)


def check_unique_ids(corpus: Sequence[HypothesisBundle]) -> None:
    seen: set[str] = set()
    for b in corpus:
        if b.id in seen:
            raise CorpusValidationError(f"duplicate utterance id {b.id!r}")
        seen.add(b.id)


def score_corpus(
    corpus: Sequence[HypothesisBundle],
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    threads: int = 1,
) -> list[UncertaintyRecord]:
    """Uncertainty records for every bundle, in corpus order."""
    fn = functools.partial(predictive_uncertainty, unit=TokenUnit(unit), opts=opts)
    return pmap(fn, corpus, threads)


def _rank_key(record: UncertaintyRecord) -> tuple[float, str]:
    return (record.pred_uncert, record.id)


def filter_corpus(
    corpus: Sequence[HypothesisBundle],
    tau: float,
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    threads: int = 1,
) -> tuple[list[str], list[str], list[UncertaintyRecord]]:
    """Partition a corpus at ``tau``.

    Returns ``(accepted_ids, rejected_ids, records)``; both id lists are
    ordered by (uncertainty, id), records follow corpus order.
    """
    if not corpus:
        raise CorpusValidationError("empty corpus")
    check_unique_ids(corpus)
    records = score_corpus(corpus, unit, opts, threads)
    accepted, rejected = [], []
    for rec in sorted(records, key=_rank_key):
        (accepted if filter_decision(rec, tau).accepted else rejected).append(rec.id)
    return accepted, rejected, records


@dataclass(frozen=True)
class TruthScores:
    """Error of the reference decode against ground truth, in both units."""

    word: EditScore
    char: EditScore


def truth_scores(
    bundle: HypothesisBundle, opts: NormalizationOptions = DEFAULT_OPTIONS
) -> TruthScores:
    if bundle.truth is None:
        raise EvaluationUnavailableError(f"bundle {bundle.id!r} has no truth")
    w = utterance_error_rate(
        tokenize(bundle.truth, TokenUnit.WORD, opts), tokenize(bundle.ref_hyp, TokenUnit.WORD, opts)
    )
    c = utterance_error_rate(
        tokenize(bundle.truth, TokenUnit.CHAR, opts), tokenize(bundle.ref_hyp, TokenUnit.CHAR, opts)
    )
    return TruthScores(w, c)


def _score_and_evaluate(bundle, unit, opts):
    return predictive_uncertainty(bundle, unit, opts), truth_scores(bundle, opts)


class _RankedCorpus:
    """Records sorted by (uncertainty, id) with prefix sums for fast sweeps."""

    def __init__(self, records: list[UncertaintyRecord], evals: list[TruthScores]):
        order = sorted(range(len(records)), key=lambda i: _rank_key(records[i]))
        self.n = len(records)
        self.uncert = [records[i].pred_uncert for i in order]
        self.n_finite = bisect.bisect_left(self.uncert, math.inf)
        self._word = _Prefix([evals[i].word for i in order])
        self._char = _Prefix([evals[i].char for i in order])

    def count_at(self, tau: float) -> int:
        if math.isinf(tau):
            return self.n_finite
        return bisect.bisect_right(self.uncert, tau)

    def point(self, x: float, mode: str, k: int) -> SweepPoint:
        return SweepPoint(x, mode, k, k / self.n, self._word.rate(k), self._char.rate(k))


class _Prefix:
    def __init__(self, scores: list[EditScore]):
        self.edits = [0]
        self.refs = [0]
        self.nonempty = [0]
        self.norm: list[float] = []
        for s in scores:
            self.edits.append(self.edits[-1] + (s.raw_edits if s.ref_len else 0))
            self.refs.append(self.refs[-1] + s.ref_len)
            self.nonempty.append(self.nonempty[-1] + (1 if s.ref_len else 0))
            self.norm.append(s.raw_edits / s.ref_len if s.ref_len else math.nan)

    def rate(self, k: int) -> CorpusErrorRate | None:
        m = self.nonempty[k]
        if m == 0:
            return None
        mean = math.fsum(v for v in self.norm[:k] if not math.isnan(v)) / m
        return CorpusErrorRate(self.edits[k], self.refs[k], mean, m, k - m)


def _ranked(corpus, unit, opts, threads) -> _RankedCorpus:
    if not corpus:
        raise CorpusValidationError("empty corpus")
    check_unique_ids(corpus)
    missing = [b.id for b in corpus if b.truth is None]
    if missing:
        raise EvaluationUnavailableError(
            f"{len(missing)} bundle(s) lack truth, e.g. {missing[0]!r}"
        )
    fn = functools.partial(_score_and_evaluate, unit=TokenUnit(unit), opts=opts)
    pairs = pmap(fn, corpus, threads)
    return _RankedCorpus([p[0] for p in pairs], [p[1] for p in pairs])


def default_tau_grid(step: float = 0.05) -> list[float]:
    n = round(1.0 / step)
    return [round(i * step, 10) for i in range(n + 1)]


def threshold_sweep(
    corpus: Sequence[HypothesisBundle],
    tau_grid: Sequence[float] | None = None,
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    threads: int = 1,
    terminal: bool = True,
) -> list[SweepPoint]:
    """Accepted-set WER/CER at each threshold of an ascending grid.

    With ``terminal`` set, a final point at ``tau = inf`` covers every
    utterance with finite uncertainty.
    """
    grid = list(default_tau_grid() if tau_grid is None else tau_grid)
    for a, b in zip(grid, grid[1:]):
        if not a < b:
            raise ValueError("tau grid must be strictly ascending")
    if grid and (grid[0] < 0 or grid[-1] > 1):
        raise ValueError("tau grid must lie in [0, 1]")
    ranked = _ranked(corpus, unit, opts, threads)
    points = [ranked.point(t, "threshold", ranked.count_at(t)) for t in grid]
    if terminal:
        points.append(ranked.point(math.inf, "threshold", ranked.n_finite))
    return points


def prefix_size(fraction: float, n: int) -> int:
    # round first so 0.07 * 100 == 7.000000000000001 does not ceil to 8
    return min(n, math.ceil(round(fraction * n, 9)))


def percentage_sweep(
    corpus: Sequence[HypothesisBundle],
    fractions: Sequence[float],
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    threads: int = 1,
) -> list[SweepPoint]:
    """Accepted-set WER/CER for the lowest-uncertainty prefix of each fraction."""
    fractions = list(fractions)
    for a, b in zip(fractions, fractions[1:]):
        if not a < b:
            raise ValueError("fractions must be strictly ascending")
    if fractions and (fractions[0] <= 0 or fractions[-1] > 1):
        raise ValueError("fractions must lie in (0, 1]")
    ranked = _ranked(corpus, unit, opts, threads)
    return [ranked.point(f, "percentage", prefix_size(f, ranked.n)) for f in fractions]
