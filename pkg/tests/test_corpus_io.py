import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dustfilter.calibration import CalibrationSample, report_from_samples
from dustfilter.corpus_io import (
    SWEEP_COLUMNS,
    CorpusFormatError,
    parse_bundles,
    read_bundles,
    read_calibration,
    read_sweep,
    write_accepted_manifest,
    write_bundles,
    write_calibration,
    write_sweep,
)
from dustfilter.simulate import NoiseChannel, SimCorpusSpec, sample_transcripts, simulate_corpus
from dustfilter.tokenization import TokenUnit
from dustfilter.uncertainty import (
    HypothesisBundle,
    filter_decision,
    percentage_sweep,
    score_corpus,
    threshold_sweep,
)

CORPUS = simulate_corpus(
    SimCorpusSpec(sample_transcripts(40, seed=2), NoiseChannel(p_base=0.2, p_samp=0.2, seed=2))
)


def roundtrip(bundles):
    buf = io.StringIO()
    write_bundles(bundles, buf)
    buf.seek(0)
    return read_bundles(buf)


def test_one_valid_line():
    (b,) = read_bundles(io.StringIO('{"id": "a", "ref": "x y", "samples": ["x"]}\n'))
    assert b == HypothesisBundle("a", "x y", ("x",), None)


def test_missing_samples_names_field_and_line():
    with pytest.raises(CorpusFormatError) as e:
        read_bundles(io.StringIO('{"id": "a", "ref": "x"}\n'))
    assert e.value.errors[0].line == 1
    assert "samples" in str(e.value)


def test_order_preserved():
    lines = "".join(json.dumps({"id": f"u{i}", "ref": "a", "samples": ["a"]}) + "\n" for i in range(7))
    assert [b.id for b in read_bundles(io.StringIO(lines))] == [f"u{i}" for i in range(7)]


@pytest.mark.parametrize(
    "bad",
    [
        "not json",
        "[1, 2]",
        '{"id": "", "ref": "a", "samples": ["a"]}',
        '{"id": 3, "ref": "a", "samples": ["a"]}',
        '{"id": "a", "ref": null, "samples": ["a"]}',
        '{"id": "a", "ref": "a", "samples": []}',
        '{"id": "a", "ref": "a", "samples": [1]}',
        '{"id": "a", "ref": "a", "samples": ["a"], "truth": 5}',
    ],
)
def test_malformed_records(bad):
    with pytest.raises(CorpusFormatError):
        read_bundles(io.StringIO(bad + "\n"))


def test_duplicate_and_empty():
    dup = '{"id": "a", "ref": "a", "samples": ["a"]}\n' * 2
    with pytest.raises(CorpusFormatError, match="duplicate"):
        read_bundles(io.StringIO(dup))
    with pytest.raises(CorpusFormatError, match="empty"):
        read_bundles(io.StringIO(""))


def test_lenient_skips_and_counts():
    text = '{"id": "a", "ref": "a", "samples": ["a"]}\nbroken\n\n{"id": "b", "ref": "b"}\n{"id": "c", "ref": "c", "samples": ["c"]}\n'
    bundles, errors = parse_bundles(io.StringIO(text), strict=False)
    assert [b.id for b in bundles] == ["a", "c"]
    assert [e.line for e in errors] == [2, 4]
    with pytest.raises(CorpusFormatError) as e:
        parse_bundles(io.StringIO(text), strict=True)
    assert e.value.errors[0].line == 2


@settings(max_examples=200)
@given(st.lists(st.binary(max_size=60), max_size=5))
def test_arbitrary_bytes_never_crash(lines):
    data = b"\n".join(lines)
    try:
        read_bundles(io.BytesIO(data), strict=False)
    except CorpusFormatError:
        pass


def test_bundle_roundtrip():
    assert roundtrip(CORPUS) == CORPUS


text_st = st.text(st.characters(blacklist_categories=("Cs",)), max_size=20)


@given(st.lists(st.tuples(text_st, st.lists(text_st, min_size=1, max_size=3), st.none() | text_st), min_size=1, max_size=5))
def test_bundle_roundtrip_unicode(items):
    bundles = [HypothesisBundle(f"id{i}", r, tuple(s), t) for i, (r, s, t) in enumerate(items)]
    assert roundtrip(bundles) == bundles


def test_sweep_csv_roundtrip():
    pts = threshold_sweep(CORPUS, [0.0, 0.1, 0.5], TokenUnit.CHAR)
    buf = io.StringIO()
    write_sweep(pts, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    rows = read_sweep(io.StringIO(text))
    assert len(rows) == len(pts)
    for row, p in zip(rows, pts):
        assert row["accepted_count"] == p.accepted_count
        assert row["tau_or_fraction"] == pytest.approx(p.tau_or_fraction, abs=5e-7)
        assert row["accepted_fraction"] == pytest.approx(p.accepted_fraction, abs=5e-7)
        if p.wer is not None:
            assert row["wer_aggregate"] == pytest.approx(p.wer.rate, abs=5e-7)
            assert row["cer_mean"] == pytest.approx(p.cer.per_utterance_mean, abs=5e-7)


def test_sweep_csv_sizes():
    buf = io.StringIO()
    write_sweep([], buf)
    assert buf.getvalue().splitlines() == [",".join(SWEEP_COLUMNS)]
    buf = io.StringIO()
    write_sweep(percentage_sweep(CORPUS, [0.5]), buf)
    assert len(buf.getvalue().splitlines()) == 2
    assert buf.getvalue().endswith("\n") and "\r" not in buf.getvalue()


def test_calibration_csv():
    rep = report_from_samples([CalibrationSample("a", 0.8, 1.0), CalibrationSample("b", 0.6, 1.0)], 2)
    buf = io.StringIO()
    write_calibration(rep, buf)
    lines = buf.getvalue().splitlines()
    assert lines[:2] == ["M,n,ece,mce,rce,cnf,acc", "2,2,0.300000,0.300000,0.300000,0.700000,1.000000"]
    summary, bins = read_calibration(io.StringIO(buf.getvalue()))
    assert summary["ece"] == pytest.approx(0.3) and summary["n"] == 2
    assert sum(b["count"] for b in bins) == 2
    assert bins[0]["mean_conf"] is None
    assert bins[1]["mean_conf"] == pytest.approx(0.7)


def test_calibration_csv_perfect():
    rep = report_from_samples([CalibrationSample("a", 1.0, 1.0)], 15)
    buf = io.StringIO()
    write_calibration(rep, buf)
    summary, bins = read_calibration(io.StringIO(buf.getvalue()))
    assert (summary["ece"], summary["mce"], summary["rce"]) == (0, 0, 0)
    assert len(bins) == 15


def _manifest(tau):
    records = score_corpus(CORPUS)
    decisions = [filter_decision(r, tau) for r in records]
    buf = io.StringIO()
    n = write_accepted_manifest(decisions, CORPUS, buf)
    lines = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(lines) == n
    return lines, {r.id: r.pred_uncert for r in records}


def test_manifest():
    lines, uncert = _manifest(10.0)
    assert len(lines) == len(CORPUS)
    lines, uncert = _manifest(0.2)
    ids = [l["id"] for l in lines]
    assert set(ids) <= {b.id for b in CORPUS}
    keys = [(uncert[i], i) for i in ids]
    assert keys == sorted(keys)
    refs = {b.id: b.ref_hyp for b in CORPUS}
    assert all(l["pl"] == refs[l["id"]] for l in lines)


def test_manifest_empty_when_nothing_accepted():
    b = HypothesisBundle("x", "a b", ("c d",))
    d = filter_decision(score_corpus([b])[0], 0.0)
    buf = io.StringIO()
    assert write_accepted_manifest([d], [b], buf) == 0
    assert buf.getvalue() == ""
