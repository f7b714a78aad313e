"""Compare the mitigations: more samples, character tokens, a better teacher."""

import argparse

from dustfilter.experiments import (
    GRADED_MIXTURE,
    SEVERE_MIXTURE,
    MixtureSetup,
    build_corpus,
    calibration,
    failure_shape,
    prefix_cer,
    sweep,
    with_severe_p_base,
)
from dustfilter.tokenization import TokenUnit


def lowest_wer(setup, threads):
    return failure_shape(sweep(build_corpus(setup, threads), threads=threads)).lowest_wer


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print("lowest-tau WER, T=3 vs T=10")
    for name, mix in (("severe", SEVERE_MIXTURE), ("graded", GRADED_MIXTURE)):
        for seed in args.seeds:
            w3, w10 = (
                lowest_wer(MixtureSetup(n=args.n, T=T, seed=seed, mixture=mix), args.threads)
                for T in (3, 10)
            )
            print(f"  {name:<7} seed {seed}: {w3:.4f} -> {w10:.4f}")

    print("CER of the 5% most confident, DUST vs C-DUST")
    for seed in args.seeds:
        corpus = build_corpus(MixtureSetup(n=args.n, seed=seed), args.threads)
        d = prefix_cer(corpus, 0.05, TokenUnit.WORD, args.threads)
        c = prefix_cer(corpus, 0.05, TokenUnit.CHAR, args.threads)
        print(f"  seed {seed}: {d:.4f} vs {c:.4f}")

    print("calibration, severe p_base 0.5 -> 0.2 (ECE, RCE, CNF, ACC)")
    for seed in args.seeds:
        setup = MixtureSetup(n=args.n, seed=seed)
        for label, s in (("0.5", setup), ("0.2", with_severe_p_base(setup, 0.2))):
            r = calibration(build_corpus(s, args.threads), threads=args.threads)
            print(f"  seed {seed} p_base {label}: {r.ece:.4f} {r.rce:.4f} {r.mean_confidence:.4f} {r.mean_accuracy:.4f}")


if __name__ == "__main__":
    main()
