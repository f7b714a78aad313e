"""Command-line driver: simulate, filter, sweep, calibrate.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines whose
keys are long option names (``p-base`` or ``p_base``); explicit flags win.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import Sequence

from . import __version__
from .calibration import DEFAULT_BINS, calibration_report
from .corpus_io import (
    read_bundles,
    read_truths,
    write_accepted_manifest,
    write_bundles,
    write_calibration,
    write_scores,
    write_sweep,
)
from .errors import CorpusValidationError, EvaluationUnavailableError
from .simulate import MixtureComponent, NoiseChannel, SimCorpusSpec, sample_transcripts, simulate_corpus
from .tokenization import NormalizationOptions, TokenUnit
from .uncertainty import (
    default_tau_grid,
    filter_corpus,
    filter_decision,
    percentage_sweep,
    threshold_sweep,
)

log = logging.getLogger("dustfilter")

MODES = {"dust": TokenUnit.WORD, "cdust": TokenUnit.CHAR}


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _grid(text: str) -> list[float]:
    """``start:stop:step`` inclusive of stop."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    n = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(n + 1)]


def _mixture(text: str) -> list[MixtureComponent]:
    """``weight:p_base:p_samp,...``"""
    comps = []
    for part in text.split(","):
        try:
            w, pb, ps = (float(x) for x in part.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad mixture component {part!r}")
        comps.append(MixtureComponent(w, pb, ps))
    return comps


def _add_common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    p.add_argument("--config", help="key=value file supplying defaults for any long option")
    if needs_input:
        p.add_argument("-i", "--input", default="-", help="bundle JSONL (default stdin)")
        p.add_argument("--mode", choices=sorted(MODES), default="dust",
                       help="dust: word-level edit distance, cdust: character-level")
        p.add_argument("--lowercase", action="store_true")
        p.add_argument("--strip-punctuation", action="store_true")
        p.add_argument("--include-spaces", action="store_true",
                       help="count spaces as characters in cdust mode")
        p.add_argument("--lenient", action="store_true",
                       help="skip malformed input lines instead of aborting")
    p.add_argument("-o", "--output", default="-", help="output path (default stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dustfilter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a bundle corpus from a noise-channel teacher")
    _add_common(p, needs_input=False)
    p.add_argument("--truths", help="transcript file, one per line (default: built-in generator)")
    p.add_argument("--n-utterances", type=int, default=1000)
    p.add_argument("--mean-words", type=int, default=15)
    p.add_argument("--p-base", type=float, default=0.1)
    p.add_argument("--p-samp", type=float, default=0.1)
    p.add_argument("--mixture", type=_mixture,
                   help="per-utterance rates as weight:p_base:p_samp,... (overrides --p-base/--p-samp)")
    p.add_argument("--op-mix", type=_floats, default=[0.6, 0.2, 0.2],
                   help="substitute,delete,insert weights")
    p.add_argument("--char-mutation-prob", type=float, default=0.5)
    p.add_argument("-T", "--T", dest="T", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("filter", help="write the accepted pseudo-label manifest at one threshold")
    _add_common(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--scores", help="also write per-utterance uncertainty CSV here")

    p = sub.add_parser("sweep", help="accepted-set WER/CER over thresholds or accepted fractions")
    _add_common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=_grid, help="threshold grid start:stop:step (default 0:1:0.05)")
    g.add_argument("--taus", type=_floats, help="explicit ascending thresholds")
    g.add_argument("--fractions", type=_floats, help="accepted fractions in (0, 1]")
    p.add_argument("--no-terminal", action="store_true",
                   help="omit the accept-all-finite terminal point")

    p = sub.add_parser("calibrate", help="reliability bins and ECE/MCE/RCE report")
    _add_common(p)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--accuracy-unit", choices=[u.value for u in TokenUnit],
                   help="unit for the true error rate (default: follows --mode)")
    return parser


def read_config_file(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _config_argv(sub: argparse.ArgumentParser, cfg: dict[str, str]) -> list[str]:
    """Translate config entries into argv tokens for ``sub``."""
    actions = {a.dest: a for a in sub._actions if a.option_strings}
    argv = []
    for key, value in cfg.items():
        if key == "config" or key not in actions:
            raise ConfigError(f"unknown config key {key!r}")
        act = actions[key]
        flag = next(s for s in act.option_strings if s.startswith("--"))
        if isinstance(act, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                argv.append(flag)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise ConfigError(f"config key {key!r} expects a boolean")
        else:
            argv.append(f"{flag}={value}")
    return argv


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    cmd_pos = next((i for i, a in enumerate(argv) if a in subparsers), None)
    if known.config and cmd_pos is not None:
        cfg_argv = _config_argv(subparsers[argv[cmd_pos]], read_config_file(known.config))
        # config tokens go first so explicit flags override them
        argv = argv[: cmd_pos + 1] + cfg_argv + argv[cmd_pos + 1 :]
    args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(args: argparse.Namespace) -> None:
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if args.command == "filter" and args.tau < 0:
        raise ConfigError("--tau must be non-negative")
    if args.command == "calibrate" and args.bins < 1:
        raise ConfigError("--bins must be >= 1")
    if args.command == "simulate":
        if args.n_utterances < 1 and not args.truths:
            raise ConfigError("--n-utterances must be >= 1")
        if args.T < 1:
            raise ConfigError("-T must be >= 1")


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _load(args):
    if args.input == "-":
        return read_bundles(sys.stdin, strict=not args.lenient)
    with open(args.input, encoding="utf-8", errors="surrogateescape") as f:
        return read_bundles(f, strict=not args.lenient)


def _opts(args) -> NormalizationOptions:
    return NormalizationOptions(
        lowercase=args.lowercase,
        strip_punctuation=args.strip_punctuation,
        include_spaces_in_chars=args.include_spaces,
    )


def cmd_simulate(args) -> None:
    if args.truths:
        with open(args.truths, encoding="utf-8") as f:
            truths = read_truths(f)
    else:
        truths = sample_transcripts(args.n_utterances, seed=args.seed, mean_words=args.mean_words)
    channel = NoiseChannel(
        p_base=args.p_base,
        p_samp=args.p_samp,
        op_mix=tuple(args.op_mix),
        T=args.T,
        seed=args.seed,
        char_mutation_prob=args.char_mutation_prob,
    )
    spec = SimCorpusSpec(truths, channel, mixture=args.mixture)
    corpus = simulate_corpus(spec, threads=args.threads)
    with _open_out(args.output) as out:
        write_bundles(corpus, out)
    log.info("simulated %d bundles", len(corpus))


def cmd_filter(args) -> None:
    corpus = _load(args)
    unit = MODES[args.mode]
    accepted, rejected, records = filter_corpus(corpus, args.tau, unit, _opts(args), args.threads)
    decisions = [filter_decision(r, args.tau) for r in records]
    with _open_out(args.output) as out:
        write_accepted_manifest(decisions, corpus, out)
    if args.scores:
        with _open_out(args.scores) as out:
            write_scores(records, out)
    log.info("accepted %d / %d at tau=%g", len(accepted), len(corpus), args.tau)


def cmd_sweep(args) -> None:
    corpus = _load(args)
    unit = MODES[args.mode]
    if args.fractions is not None:
        points = percentage_sweep(corpus, args.fractions, unit, _opts(args), args.threads)
    else:
        grid = args.taus if args.taus is not None else (args.grid or default_tau_grid())
        points = threshold_sweep(
            corpus, grid, unit, _opts(args), args.threads, terminal=not args.no_terminal
        )
    with _open_out(args.output) as out:
        write_sweep(points, out)


def cmd_calibrate(args) -> None:
    corpus = _load(args)
    report = calibration_report(
        corpus,
        args.bins,
        MODES[args.mode],
        _opts(args),
        accuracy_unit=args.accuracy_unit,
        threads=args.threads,
    )
    with _open_out(args.output) as out:
        write_calibration(report, out)


COMMANDS = {
    "simulate": cmd_simulate,
    "filter": cmd_filter,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except (ConfigError, OSError) as e:
        print(f"dustfilter: error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(name)s: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    resolved = {k: v for k, v in sorted(vars(args).items())}
    log.info("resolved config: %s", resolved)
    try:
        COMMANDS[args.command](args)
    except EvaluationUnavailableError as e:
        print(f"dustfilter: evaluation unavailable: {e}", file=sys.stderr)
        return 3
    except (CorpusValidationError, ValueError, OSError) as e:
        print(f"dustfilter: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
