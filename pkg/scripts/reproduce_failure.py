"""Threshold sweep on the mixed-severity corpus: low thresholds keep bad labels.

    python3 scripts/reproduce_failure.py --seeds 0 1 2 3 4
"""

import argparse

from dustfilter.experiments import MixtureSetup, build_corpus, failure_shape, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    for seed in args.seeds:
        corpus = build_corpus(MixtureSetup(n=args.n, seed=seed), args.threads)
        points = sweep(corpus, threads=args.threads)
        print(f"seed {seed}")
        print(f"  {'tau':>6} {'accepted':>9} {'WER':>7}")
        for p in points:
            wer = "-" if p.wer is None else f"{p.wer.rate:.4f}"
            print(f"  {p.tau_or_fraction:>6.2f} {p.accepted_fraction:>9.1%} {wer:>7}")
        fs = failure_shape(points)
        print(f"  lowest-tau WER / half-accepted WER = {fs.lowest_wer:.3f} / {fs.half_wer:.3f} = {fs.ratio:.2f}")


if __name__ == "__main__":
    main()
