"""Desk-scale reproductions of the filtering failure and its mitigations.

Shared by ``scripts/`` and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .calibration import CalibrationReport, calibration_report
from .simulate import MixtureComponent, NoiseChannel, SimCorpusSpec, sample_transcripts, simulate_corpus
from .tokenization import TokenUnit
from .uncertainty import HypothesisBundle, SweepPoint, percentage_sweep, threshold_sweep

# 20% confidently wrong (shared errors, no dropout disagreement), 80% mildly
# noisy with real dropout disagreement.
SEVERE_MIXTURE = (
    MixtureComponent(0.2, 0.5, 0.0),
    MixtureComponent(0.8, 0.05, 0.2),
)

# Like SEVERE_MIXTURE, but the bad component still wavers a little under
# dropout, so more samples have a chance to expose it.
GRADED_MIXTURE = (
    MixtureComponent(0.2, 0.5, 0.05),
    MixtureComponent(0.8, 0.05, 0.01),
)


@dataclass(frozen=True)
class MixtureSetup:
    n: int = 10_000
    T: int = 3
    seed: int = 0
    mixture: tuple[MixtureComponent, ...] = SEVERE_MIXTURE
    mean_words: int = 15


def build_corpus(setup: MixtureSetup, threads: int = 1) -> list[HypothesisBundle]:
    truths = sample_transcripts(setup.n, seed=setup.seed, mean_words=setup.mean_words)
    channel = NoiseChannel(T=setup.T, seed=setup.seed)
    return simulate_corpus(SimCorpusSpec(truths, channel, setup.mixture), threads)


def with_severe_p_base(setup: MixtureSetup, p_base: float) -> MixtureSetup:
    """Same mixture with the first (severe) component's p_base replaced."""
    first, *rest = setup.mixture
    return replace(setup, mixture=(replace(first, p_base=p_base), *rest))


@dataclass(frozen=True)
class FailureShape:
    lowest_tau: float
    lowest_wer: float
    half_tau: float
    half_fraction: float
    half_wer: float

    @property
    def ratio(self) -> float:
        return self.lowest_wer / self.half_wer


def failure_shape(points: list[SweepPoint]) -> FailureShape:
    """Compare the first non-empty accepted set with the one at ~50% accepted.

    The half point is the first grid threshold accepting at least half of
    the corpus.
    """
    lowest = next(p for p in points if p.accepted_count > 0 and p.wer is not None)
    half = next(p for p in points if p.accepted_fraction >= 0.5 and p.wer is not None)
    return FailureShape(
        lowest.tau_or_fraction,
        lowest.wer.rate,
        half.tau_or_fraction,
        half.accepted_fraction,
        half.wer.rate,
    )


def sweep(corpus, unit=TokenUnit.WORD, threads: int = 1) -> list[SweepPoint]:
    return threshold_sweep(corpus, None, unit, threads=threads)


def prefix_cer(corpus, fraction: float, unit: TokenUnit, threads: int = 1) -> float:
    (point,) = percentage_sweep(corpus, [fraction], unit, threads=threads)
    return point.cer.rate


def calibration(corpus, M: int = 15, threads: int = 1) -> CalibrationReport:
    return calibration_report(corpus, M, TokenUnit.WORD, threads=threads)
