"""Bundle JSONL ingestion and report/manifest writers.

Bundle line schema::

    {"id": str, "ref": str, "samples": [str, ...], "truth": str | null}

Reports are CSV with decimals written to 6 fractional digits.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .calibration import CalibrationReport
from .edit_distance import CorpusErrorRate
from .errors import CorpusValidationError
from .uncertainty import FilterDecision, HypothesisBundle, SweepPoint

log = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    "tau_or_fraction",
    "mode",
    "accepted_count",
    "accepted_fraction",
    "wer_aggregate",
    "wer_mean",
    "cer_aggregate",
    "cer_mean",
)
SUMMARY_COLUMNS = ("M", "n", "ece", "mce", "rce", "cnf", "acc")
BIN_COLUMNS = ("index", "lo", "hi", "count", "mass", "mean_conf", "mean_acc")


@dataclass(frozen=True)
class LineError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class CorpusFormatError(CorpusValidationError):
    def __init__(self, errors: Sequence[LineError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors[:5]))


def _parse_record(raw, lineno: int) -> HypothesisBundle:
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorpusFormatError([LineError(lineno, f"invalid UTF-8: {e.reason}")])
    try:
        obj = json.loads(raw)
    except (ValueError, RecursionError) as e:
        raise CorpusFormatError([LineError(lineno, f"invalid JSON: {e}")])
    if not isinstance(obj, dict):
        raise CorpusFormatError([LineError(lineno, "record is not a JSON object")])
    for key in ("id", "ref", "samples"):
        if key not in obj:
            raise CorpusFormatError([LineError(lineno, f"missing required field {key!r}")])
    uid, ref, samples, truth = obj["id"], obj["ref"], obj["samples"], obj.get("truth")
    if not isinstance(uid, str) or not uid:
        raise CorpusFormatError([LineError(lineno, "field 'id' must be a non-empty string")])
    if not isinstance(ref, str):
        raise CorpusFormatError([LineError(lineno, "field 'ref' must be a string")])
    if not isinstance(samples, list) or not samples or not all(isinstance(s, str) for s in samples):
        raise CorpusFormatError(
            [LineError(lineno, "field 'samples' must be a non-empty array of strings")]
        )
    if truth is not None and not isinstance(truth, str):
        raise CorpusFormatError([LineError(lineno, "field 'truth' must be a string or null")])
    return HypothesisBundle(uid, ref, tuple(samples), truth)


def parse_bundles(
    stream: Iterable, strict: bool = True
) -> tuple[list[HypothesisBundle], list[LineError]]:
    """Parse bundle JSONL; blank lines are ignored.

    Strict mode raises :class:`CorpusFormatError` on the first bad line.
    Lenient mode skips bad lines and returns them alongside the bundles.
    """
    bundles: list[HypothesisBundle] = []
    errors: list[LineError] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            b = _parse_record(raw, lineno)
            if b.id in seen:
                raise CorpusFormatError([LineError(lineno, f"duplicate id {b.id!r}")])
        except CorpusFormatError as e:
            if strict:
                raise
            errors.extend(e.errors)
            continue
        seen.add(b.id)
        bundles.append(b)
    if not bundles and not errors:
        raise CorpusFormatError([LineError(0, "empty corpus file")])
    if not bundles and strict:
        raise CorpusFormatError(errors)
    return bundles, errors


def read_bundles(stream: Iterable, strict: bool = True) -> list[HypothesisBundle]:
    bundles, errors = parse_bundles(stream, strict)
    if errors:
        log.warning("skipped %d malformed line(s); first: %s", len(errors), errors[0])
    if not bundles:
        raise CorpusFormatError(errors)
    return bundles


def bundle_to_json(b: HypothesisBundle) -> str:
    rec = {"id": b.id, "ref": b.ref_hyp, "samples": list(b.samples)}
    if b.truth is not None:
        rec["truth"] = b.truth
    return json.dumps(rec, ensure_ascii=False)


def write_bundles(bundles: Iterable[HypothesisBundle], stream: IO[str]) -> None:
    for b in bundles:
        stream.write(bundle_to_json(b) + "\n")


def read_truths(stream: Iterable[str]) -> list[str]:
    """One transcript per line; blank lines dropped."""
    return [line.rstrip("\r\n") for line in stream if line.strip()]


def fmt(x: float | None) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6f}"


def _parse_num(s: str) -> float | None:
    return None if s == "" else float(s)


def _writer(stream: IO[str]):
    return csv.writer(stream, lineterminator="\n")


def _rate_cells(r: CorpusErrorRate | None) -> list[str]:
    if r is None:
        return ["", ""]
    return [fmt(r.rate), fmt(r.per_utterance_mean)]


def write_sweep(points: Sequence[SweepPoint], stream: IO[str]) -> None:
    w = _writer(stream)
    w.writerow(SWEEP_COLUMNS)
    for p in points:
        w.writerow(
            [fmt(p.tau_or_fraction), p.mode, p.accepted_count, fmt(p.accepted_fraction)]
            + _rate_cells(p.wer)
            + _rate_cells(p.cer)
        )


def read_sweep(stream: IO[str]) -> list[dict]:
    """Parse a sweep CSV back into dicts of typed cells."""
    rows = list(csv.DictReader(stream))
    out = []
    for r in rows:
        d = {k: _parse_num(r[k]) for k in SWEEP_COLUMNS if k not in ("mode", "accepted_count")}
        d["mode"] = r["mode"]
        d["accepted_count"] = int(r["accepted_count"])
        out.append(d)
    return out


def write_calibration(report: CalibrationReport, stream: IO[str]) -> None:
    """Summary header + row, then bin header + one row per bin."""
    w = _writer(stream)
    w.writerow(SUMMARY_COLUMNS)
    w.writerow(
        [
            report.M,
            report.n,
            fmt(report.ece),
            fmt(report.mce),
            fmt(report.rce),
            fmt(report.mean_confidence),
            fmt(report.mean_accuracy),
        ]
    )
    w.writerow(BIN_COLUMNS)
    for b in report.bins:
        w.writerow(
            [b.index, fmt(b.lo), fmt(b.hi), b.count, fmt(b.mass), fmt(b.mean_confidence), fmt(b.mean_accuracy)]
        )


def read_calibration(stream: IO[str]) -> tuple[dict, list[dict]]:
    rows = list(csv.reader(stream))
    if len(rows) < 3 or tuple(rows[0]) != SUMMARY_COLUMNS or tuple(rows[2]) != BIN_COLUMNS:
        raise ValueError("not a calibration report")
    summary = dict(zip(SUMMARY_COLUMNS, rows[1]))
    summary = {k: int(v) if k in ("M", "n") else float(v) for k, v in summary.items()}
    bins = []
    for r in rows[3:]:
        d = dict(zip(BIN_COLUMNS, r))
        bins.append(
            {k: int(v) if k in ("index", "count") else _parse_num(v) for k, v in d.items()}
        )
    return summary, bins


def write_accepted_manifest(
    decisions: Iterable[FilterDecision],
    bundles: Iterable[HypothesisBundle],
    stream: IO[str],
) -> int:
    """JSONL ``{"id", "pl"}`` for accepted ids, ordered by (uncertainty, id).

    Returns the number of lines written.
    """
    by_id = {b.id: b for b in bundles}
    accepted = sorted((d for d in decisions if d.accepted), key=lambda d: (d.pred_uncert, d.id))
    for d in accepted:
        stream.write(json.dumps({"id": d.id, "pl": by_id[d.id].ref_hyp}, ensure_ascii=False) + "\n")
    return len(accepted)


def write_scores(records, stream: IO[str]) -> None:
    """Per-utterance uncertainty table (id, T, unit, pred_uncert, confidence)."""
    w = _writer(stream)
    w.writerow(("id", "T", "unit", "pred_uncert", "confidence"))
    for r in records:
        w.writerow((r.id, r.T, r.unit.value, fmt(r.pred_uncert), fmt(r.confidence)))


def dumps_bundles(bundles: Iterable[HypothesisBundle]) -> str:
    buf = io.StringIO()
    write_bundles(bundles, buf)
    return buf.getvalue()
