from fractions import Fraction
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dustfilter.errors import CorpusValidationError, EvaluationUnavailableError
from dustfilter.tokenization import TokenUnit
from dustfilter.uncertainty import (
    HypothesisBundle,
    default_tau_grid,
    filter_corpus,
    filter_decision,
    percentage_sweep,
    predictive_uncertainty,
    prefix_size,
    score_corpus,
    threshold_sweep,
)

W, C = TokenUnit.WORD, TokenUnit.CHAR
REF = "signs of ankylosin spondylitis detected"
T1 = "sgns o ankylosin spondylitis detectd"
T2 = "sgns of avkclozin sondilietis detected"
TRUTH = "signs of ankylosing spondylitis detected"
EXAMPLE = HypothesisBundle("u1", REF, (T1, T2), TRUTH)

words = st.lists(st.sampled_from(["a", "b", "c", "dd"]), max_size=6).map(" ".join)


@st.composite
def corpora(draw, with_truth=True):
    n = draw(st.integers(1, 8))
    out = []
    for i in range(n):
        samples = tuple(draw(st.lists(words, min_size=1, max_size=4)))
        truth = draw(words) if with_truth else draw(st.none() | words)
        out.append(HypothesisBundle(f"u{i}", draw(words), samples, truth))
    return out


def test_worked_example_dust():
    rec = predictive_uncertainty(EXAMPLE, W)
    assert rec.exact_pred_uncert == Fraction(3, 5)
    assert rec.pred_uncert == 0.6
    assert rec.confidence == pytest.approx(0.4)


def test_worked_example_cdust():
    rec = predictive_uncertainty(EXAMPLE, C)
    assert [s.exact for s in rec.per_sample_eds] == [Fraction(3, 35), Fraction(7, 35)]
    assert rec.exact_pred_uncert == Fraction(1, 5)
    assert rec.confidence == pytest.approx(0.8)


def test_perfect_consensus():
    rec = predictive_uncertainty(HypothesisBundle("u", "a b c", ("a b c",) * 3), W)
    assert rec.pred_uncert == 0 and rec.confidence == 1


def test_confidence_clamps_above_one():
    # 1 reference word, samples add words: eds = 3/1
    rec = predictive_uncertainty(HypothesisBundle("u", "a", ("a b c d",)), W)
    assert rec.pred_uncert == 3 and rec.confidence == 0


def test_empty_reference_is_max_uncertain():
    rec = predictive_uncertainty(HypothesisBundle("u", "", ("a",)), W)
    assert math.isinf(rec.pred_uncert) and rec.confidence == 0
    assert rec.exact_pred_uncert is None
    assert not filter_decision(rec, 1e9).accepted
    assert not filter_decision(rec, math.inf).accepted


def test_filter_decision_examples():
    rec = predictive_uncertainty(EXAMPLE, W)
    assert not filter_decision(rec, 0.4).accepted
    assert filter_decision(rec, 0.6).accepted  # ties accepted
    zero = predictive_uncertainty(HypothesisBundle("u", "a", ("a",)), W)
    assert filter_decision(zero, 0).accepted
    with pytest.raises(ValueError):
        filter_decision(zero, -0.1)


def test_filter_corpus_two_cdust_bundles():
    a = HypothesisBundle("a", REF, (T1,), TRUTH)  # max eds 3/35
    b = HypothesisBundle("b", REF, (T2,), TRUTH)  # max eds 7/35
    accepted, rejected, records = filter_corpus([b, a], 0.1, C)
    assert accepted == ["a"] and rejected == ["b"]
    assert [r.id for r in records] == ["b", "a"]


def test_filter_corpus_large_tau_accepts_all_finite():
    corpus = [EXAMPLE, HypothesisBundle("e", "", ("x",))]
    accepted, rejected, _ = filter_corpus(corpus, 10.0, W)
    assert accepted == ["u1"] and rejected == ["e"]


def test_filter_corpus_rejects_duplicates_and_empty():
    with pytest.raises(CorpusValidationError):
        filter_corpus([EXAMPLE, EXAMPLE], 0.5)
    with pytest.raises(CorpusValidationError):
        filter_corpus([], 0.5)


def test_bundle_needs_samples():
    with pytest.raises(CorpusValidationError):
        HypothesisBundle("x", "a", ())


def test_accepted_ordering():
    corpus = [
        HypothesisBundle("z", "a b", ("a b",)),
        HypothesisBundle("b", "a b", ("a c",)),
        HypothesisBundle("a", "a b", ("a b",)),
    ]
    accepted, _, _ = filter_corpus(corpus, 1.0)
    assert accepted == ["a", "z", "b"]


@settings(max_examples=60)
@given(corpora(), st.floats(0, 2), st.floats(0, 2))
def test_nested_acceptance(corpus, t1, t2):
    t1, t2 = sorted((t1, t2))
    a1 = set(filter_corpus(corpus, t1)[0])
    a2 = set(filter_corpus(corpus, t2)[0])
    assert a1 <= a2


@settings(max_examples=60)
@given(corpora(), st.floats(0, 2), st.sampled_from(list(TokenUnit)))
def test_acceptance_iff_le_tau(corpus, tau, unit):
    accepted, _, records = filter_corpus(corpus, tau, unit)
    for r in records:
        assert (r.id in accepted) == (r.pred_uncert <= tau)


@settings(max_examples=60)
@given(corpora(with_truth=False), st.floats(0, 2))
def test_truth_blind(corpus, tau):
    stripped = [HypothesisBundle(b.id, b.ref_hyp, b.samples, None) for b in corpus]
    assert filter_corpus(corpus, tau) == filter_corpus(stripped, tau)


@given(words, st.lists(words, min_size=1, max_size=4), words)
def test_sample_set_extension_monotone(ref, samples, extra):
    base = predictive_uncertainty(HypothesisBundle("u", ref, tuple(samples)))
    with_ref = predictive_uncertainty(HypothesisBundle("u", ref, tuple(samples) + (ref,)))
    with_any = predictive_uncertainty(HypothesisBundle("u", ref, tuple(samples) + (extra,)))
    assert with_ref.pred_uncert <= base.pred_uncert
    assert with_any.pred_uncert >= base.pred_uncert


@given(words, st.lists(words, min_size=1, max_size=4))
def test_confidence_relation(ref, samples):
    rec = predictive_uncertainty(HypothesisBundle("u", ref, tuple(samples)))
    if rec.pred_uncert <= 1:
        assert rec.confidence + rec.pred_uncert == pytest.approx(1, abs=1e-15)
    else:
        assert rec.confidence == 0


def test_parallel_scoring_matches_serial():
    corpus = [HypothesisBundle(f"u{i}", "a b c d", ("a b c", "a x c d", "b c d e")[: 1 + i % 3]) for i in range(40)]
    assert score_corpus(corpus, threads=3) == score_corpus(corpus, threads=1)


# --- sweeps -------------------------------------------------------------

def _corpus_with_truth():
    return [
        HypothesisBundle("a", "the cat sat", ("the cat sat",) * 3, "the cat sat"),
        HypothesisBundle("b", "the cat sat", ("the bat sat", "the cat sat"), "a cat sat"),
        HypothesisBundle("c", "a dog ran far", ("a dog ran", "dog ran far"), "a dog ran far away"),
        HypothesisBundle("d", "", ("x",), "something"),
    ]


def test_default_grid():
    grid = default_tau_grid()
    assert len(grid) == 21 and grid[0] == 0 and grid[-1] == 1 and grid[1] == 0.05


def test_threshold_sweep_by_hand():
    # uncertainties: a 0, c 1/4, b 1/3, d max-uncertain
    pts = threshold_sweep(_corpus_with_truth(), [0.0, 0.3, 0.4], W)
    assert [p.accepted_count for p in pts] == [1, 2, 3, 3]
    assert math.isinf(pts[-1].tau_or_fraction)
    # a: 0 of 3 truth words, c: 1 of 5
    assert pts[1].wer.exact_rate == Fraction(1, 8)
    # plus b: 1 of 3
    assert pts[2].wer.exact_rate == Fraction(2, 11)
    assert pts[0].accepted_fraction == 0.25


def test_threshold_sweep_all_zero_uncertainty():
    corpus = [HypothesisBundle(f"u{i}", "a b", ("a b",), "a c") for i in range(5)]
    pts = threshold_sweep(corpus, [0.0, 0.5, 1.0], W)
    assert all(p.accepted_fraction == 1 for p in pts)
    assert len({p.wer.rate for p in pts}) == 1


def test_sweep_requires_truth():
    with pytest.raises(EvaluationUnavailableError):
        threshold_sweep([EXAMPLE, HypothesisBundle("x", "a", ("a",))], [0.0])
    with pytest.raises(EvaluationUnavailableError):
        percentage_sweep([HypothesisBundle("x", "a", ("a",))], [1.0])


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        threshold_sweep([EXAMPLE], [0.5, 0.5])
    with pytest.raises(ValueError):
        threshold_sweep([EXAMPLE], [0.5, 1.5])
    with pytest.raises(ValueError):
        percentage_sweep([EXAMPLE], [0.0, 0.5])


def test_percentage_sweep():
    corpus = _corpus_with_truth()
    whole = threshold_sweep(corpus, [], W)[-1]
    pts = percentage_sweep(corpus, [0.25, 1.0], W)
    assert pts[0].accepted_count == 1
    assert pts[0].wer.rate == 0.0  # utterance "a" alone
    assert pts[1].accepted_count == 4
    # the whole corpus, including the max-uncertain utterance
    # d: empty reference against the one-word truth "something"
    assert pts[1].wer.total_edits == whole.wer.total_edits + 1


def test_prefix_size_rounding():
    assert prefix_size(0.07, 100) == 7
    assert prefix_size(0.05, 10_000) == 500
    assert prefix_size(0.001, 10) == 1
    assert prefix_size(1.0, 3) == 3


@settings(max_examples=40)
@given(corpora())
def test_sweep_counts_monotone(corpus):
    pts = threshold_sweep(corpus, default_tau_grid(0.1), W)
    counts = [p.accepted_count for p in pts]
    assert counts == sorted(counts)
