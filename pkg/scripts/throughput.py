"""Time scoring, filtering and a threshold sweep over a large simulated corpus."""

import argparse
import time

from dustfilter.simulate import NoiseChannel, SimCorpusSpec, sample_transcripts, simulate_corpus
from dustfilter.tokenization import TokenUnit
from dustfilter.uncertainty import filter_corpus, threshold_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--T", type=int, default=3)
    ap.add_argument("--tau", type=float, default=0.4)
    ap.add_argument("--mode", choices=["dust", "cdust"], default="dust")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    unit = TokenUnit.WORD if args.mode == "dust" else TokenUnit.CHAR

    t0 = time.perf_counter()
    truths = sample_transcripts(args.n, seed=8)
    corpus = simulate_corpus(SimCorpusSpec(truths, NoiseChannel(T=args.T, seed=8)), args.threads)
    print(f"simulated {args.n} bundles in {time.perf_counter() - t0:.1f}s")

    t0 = time.perf_counter()
    accepted, _, _ = filter_corpus(corpus, args.tau, unit, threads=args.threads)
    t1 = time.perf_counter()
    threshold_sweep(corpus, None, unit, threads=args.threads)
    t2 = time.perf_counter()
    print(f"filter: {t1 - t0:.1f}s ({len(accepted)} accepted), sweep: {t2 - t1:.1f}s, total {t2 - t0:.1f}s")


if __name__ == "__main__":
    main()
