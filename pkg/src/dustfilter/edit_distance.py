"""Levenshtein distance over token sequences and WER/CER style error rates."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .tokenization import TokenSequence, TokenUnit

log = logging.getLogger(__name__)

MAX_UNCERTAIN = math.inf


class UndefinedRateError(ValueError):
    """Raised when an error rate has no reference tokens to normalise by."""


@njit(cache=True, nogil=True)
def _levenshtein_codes(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n < m:
        a, b = b, a
        n, m = m, n
    if m == 0:
        return n
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, np.int64)
    for i in range(n):
        cur[0] = i + 1
        ai = a[i]
        for j in range(m):
            best = prev[j] + (ai != b[j])
            alt = prev[j + 1] + 1
            if alt < best:
                best = alt
            alt = cur[j] + 1
            if alt < best:
                best = alt
            cur[j + 1] = best
        prev, cur = cur, prev
    return prev[m]


def _encode_pair(a: Sequence, b: Sequence) -> tuple[np.ndarray, np.ndarray]:
    vocab = {t: i for i, t in enumerate(dict.fromkeys((*a, *b)))}
    return (
        np.array([vocab[t] for t in a], dtype=np.int64),
        np.array([vocab[t] for t in b], dtype=np.int64),
    )


def _encode_chars(tokens: Sequence[str]) -> np.ndarray:
    return np.frombuffer("".join(tokens).encode("utf-32-le"), dtype=np.uint32)


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance between two sequences of hashable items."""
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 0:
        return len(a)
    if tuple(a) == tuple(b):
        return 0
    if all(isinstance(t, str) and len(t) == 1 for t in a) and all(
        isinstance(t, str) and len(t) == 1 for t in b
    ):
        return int(_levenshtein_codes(_encode_chars(a), _encode_chars(b)))
    return int(_levenshtein_codes(*_encode_pair(a, b)))


def _check_units(a: TokenSequence, b: TokenSequence) -> None:
    if a.unit != b.unit:
        raise ValueError(f"token unit mismatch: {a.unit.value} vs {b.unit.value}")


def edit_distance(a: TokenSequence, b: TokenSequence) -> int:
    _check_units(a, b)
    ta, tb = a.tokens, b.tokens
    if ta == tb:
        return 0
    if not ta or not tb:
        return len(ta) + len(tb)
    if a.unit is TokenUnit.CHAR:
        return int(_levenshtein_codes(_encode_chars(ta), _encode_chars(tb)))
    return int(_levenshtein_codes(*_encode_pair(ta, tb)))


@dataclass(frozen=True)
class EditScore:
    """Edit count normalised by the reference length.

    ``normalized`` is ``inf`` (the max-uncertain sentinel) for an empty
    reference against a non-empty hypothesis.
    """

    raw_edits: int
    ref_len: int

    @property
    def max_uncertain(self) -> bool:
        return self.ref_len == 0 and self.raw_edits > 0

    @property
    def normalized(self) -> float:
        if self.ref_len == 0:
            return MAX_UNCERTAIN if self.raw_edits else 0.0
        return self.raw_edits / self.ref_len

    @property
    def exact(self) -> Fraction | None:
        """Exact rational value, ``None`` for the sentinel."""
        if self.ref_len == 0:
            return None if self.raw_edits else Fraction(0)
        return Fraction(self.raw_edits, self.ref_len)


def normalized_eds(ref: TokenSequence, hyp: TokenSequence) -> EditScore:
    return EditScore(edit_distance(ref, hyp), len(ref))


def utterance_error_rate(truth: TokenSequence, hyp: TokenSequence) -> EditScore:
    return EditScore(edit_distance(truth, hyp), len(truth))


@dataclass(frozen=True)
class CorpusErrorRate:
    total_edits: int
    total_ref_tokens: int
    per_utterance_mean: float
    n_utterances: int
    excluded_empty: int = 0

    @property
    def rate(self) -> float:
        return self.total_edits / self.total_ref_tokens

    @property
    def exact_rate(self) -> Fraction:
        return Fraction(self.total_edits, self.total_ref_tokens)


def aggregate_scores(scores: Iterable[EditScore]) -> CorpusErrorRate:
    """Fold precomputed per-utterance scores into a corpus error rate.

    Scores with an empty reference are dropped and counted in
    ``excluded_empty``.
    """
    edits = ref = excluded = 0
    normalized: list[float] = []
    for s in scores:
        if s.ref_len == 0:
            excluded += 1
            continue
        edits += s.raw_edits
        ref += s.ref_len
        normalized.append(s.raw_edits / s.ref_len)
    if excluded:
        log.warning("excluded %d utterance(s) with empty truth", excluded)
    if not normalized:
        raise UndefinedRateError("no utterances with non-empty truth")
    n = len(normalized)
    # fsum is exactly rounded, so the mean does not depend on input order
    return CorpusErrorRate(edits, ref, math.fsum(normalized) / n, n, excluded)


def corpus_error_rate(pairs: Sequence[tuple[TokenSequence, TokenSequence]]) -> CorpusErrorRate:
    """Corpus rate as total edits over total truth tokens."""
    if not pairs:
        raise UndefinedRateError("empty pair list")
    unit = pairs[0][0].unit
    for truth, hyp in pairs:
        if truth.unit != unit or hyp.unit != unit:
            raise ValueError("all pairs must share one token unit")
    return aggregate_scores(utterance_error_rate(t, h) for t, h in pairs)
