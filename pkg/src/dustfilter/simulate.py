"""Seeded two-stage noise-channel teacher.

Each truth is first corrupted at ``p_base`` into a shared "decoded base"
(what the teacher gets wrong regardless of dropout). The reference decode is
that base; each of the T dropout samples is the base corrupted again at
``p_samp`` (how much dropout makes the teacher waver).

Corruption scheme, per token position hit with probability ``rate``:

* substitute: with probability ``char_mutation_prob`` a single-character
  edit of the token (substitute/delete/insert one letter), otherwise a
  different word drawn uniformly from the corpus vocabulary;
* delete: the token is dropped;
* insert: the token is kept and a new token (drawn as for substitution) is
  placed after it.

Every utterance owns random streams derived from ``(seed, index)``, so a
corpus is a pure function of its spec and the order or parallelism of
generation does not matter. The base stream does not depend on T.
"""

from __future__ import annotations

import functools
import hashlib
import random
from dataclasses import dataclass, field
from typing import Sequence

from ._parallel import pmap
from .tokenization import TokenSequence, TokenUnit, tokenize
from .uncertainty import HypothesisBundle

SUB, DEL, INS = 0, 1, 2
DEFAULT_OP_MIX = (0.6, 0.2, 0.2)
DEFAULT_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class NoiseChannel:
    p_base: float = 0.1
    p_samp: float = 0.1
    op_mix: tuple[float, float, float] = DEFAULT_OP_MIX
    T: int = 3
    seed: int = 0
    char_mutation_prob: float = 0.5

    def __post_init__(self):
        for name in ("p_base", "p_samp", "char_mutation_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        mix = tuple(float(x) for x in self.op_mix)
        if len(mix) != 3 or any(x < 0 for x in mix) or sum(mix) <= 0:
            raise ValueError(f"op_mix must be three non-negative weights, got {self.op_mix}")
        total = sum(mix)
        object.__setattr__(self, "op_mix", tuple(x / total for x in mix))
        if self.T < 1:
            raise ValueError("T must be >= 1")


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    p_base: float
    p_samp: float


@dataclass(frozen=True)
class SimCorpusSpec:
    truths: tuple[str, ...]
    channel: NoiseChannel = field(default_factory=NoiseChannel)
    # per-utterance (p_base, p_samp) drawn from these; overrides the channel's rates
    mixture: tuple[MixtureComponent, ...] | None = None
    id_prefix: str = "utt"

    def __post_init__(self):
        object.__setattr__(self, "truths", tuple(self.truths))
        if not self.truths:
            raise ValueError("truths must be non-empty")
        for i, t in enumerate(self.truths):
            if not t.split():
                raise ValueError(f"truth {i} is empty")
        if self.mixture is not None:
            object.__setattr__(self, "mixture", tuple(self.mixture))
            if not self.mixture or sum(c.weight for c in self.mixture) <= 0:
                raise ValueError("mixture needs positive total weight")


def stream(seed: int, *key: int) -> random.Random:
    """Independent Mersenne Twister stream for ``(seed, *key)``."""
    digest = hashlib.blake2b(repr((seed, *key)).encode(), digest_size=16).digest()
    return random.Random(int.from_bytes(digest, "little"))


def _mutate_chars(word: str, rng: random.Random, alphabet: str) -> str:
    for _ in range(8):
        op = rng.randrange(3) if len(word) > 1 else rng.choice((0, 2))
        pos = rng.randrange(len(word))
        if op == 0:
            out = word[:pos] + rng.choice(alphabet) + word[pos + 1 :]
        elif op == 1:
            out = word[:pos] + word[pos + 1 :]
        else:
            out = word[:pos] + rng.choice(alphabet) + word[pos:]
        if out != word:
            return out
    return word + alphabet[0] if word[-1] != alphabet[0] else word + alphabet[-1]


def _new_token(
    tok: str,
    rng: random.Random,
    vocab: Sequence[str],
    char_mutation_prob: float,
    alphabet: str,
    unit: TokenUnit,
) -> str:
    if unit is TokenUnit.CHAR:
        choices = [c for c in alphabet if c != tok] or [alphabet[0]]
        return rng.choice(choices)
    if rng.random() < char_mutation_prob or len(vocab) < 2:
        return _mutate_chars(tok, rng, alphabet)
    while True:
        w = vocab[rng.randrange(len(vocab))]
        if w != tok:
            return w


def corrupt(
    tokens: TokenSequence,
    rate: float,
    op_mix: Sequence[float] = DEFAULT_OP_MIX,
    rng: random.Random | None = None,
    vocab: Sequence[str] = (),
    char_mutation_prob: float = 0.5,
    alphabet: str = DEFAULT_ALPHABET,
) -> TokenSequence:
    """Hit each position independently with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if rng is None:
        rng = random.Random(0)
    if len(tokens) == 0 or rate == 0.0:
        return tokens
    total = sum(op_mix)
    p_sub, p_del = op_mix[0] / total, op_mix[1] / total
    vocab = vocab or sorted(set(tokens.tokens))
    out: list[str] = []
    for tok in tokens.tokens:
        if rng.random() >= rate:
            out.append(tok)
            continue
        u = rng.random()
        op = SUB if u < p_sub else DEL if u < p_sub + p_del else INS
        if op == SUB:
            out.append(_new_token(tok, rng, vocab, char_mutation_prob, alphabet, tokens.unit))
        elif op == INS:
            out.append(tok)
            out.append(_new_token(tok, rng, vocab, char_mutation_prob, alphabet, tokens.unit))
        # DEL: drop
    return TokenSequence(tuple(out), tokens.unit, tokens.include_spaces)


def _rates(channel: NoiseChannel, mixture, seed: int, index: int) -> tuple[float, float]:
    if not mixture:
        return channel.p_base, channel.p_samp
    comp = stream(seed, index, 0).choices(mixture, weights=[c.weight for c in mixture])[0]
    return comp.p_base, comp.p_samp


def simulate_bundle(
    truth: str,
    channel: NoiseChannel,
    index: int = 0,
    vocab: Sequence[str] = (),
    uid: str | None = None,
    mixture: Sequence[MixtureComponent] | None = None,
) -> HypothesisBundle:
    """One bundle whose streams are derived from ``(channel.seed, index)``."""
    p_base, p_samp = _rates(channel, mixture, channel.seed, index)
    truth_tokens = tokenize(truth, TokenUnit.WORD)
    kw = dict(op_mix=channel.op_mix, vocab=vocab, char_mutation_prob=channel.char_mutation_prob)
    base = corrupt(truth_tokens, p_base, rng=stream(channel.seed, index, 1), **kw)
    samples = tuple(
        corrupt(base, p_samp, rng=stream(channel.seed, index, 2 + t), **kw).text()
        for t in range(channel.T)
    )
    return HypothesisBundle(
        id=uid if uid is not None else f"utt{index:07d}",
        ref_hyp=base.text(),
        samples=samples,
        truth=truth,
    )


def corpus_vocabulary(truths: Sequence[str]) -> list[str]:
    return sorted({w for t in truths for w in t.split()})


def _bundle_at(index, spec: SimCorpusSpec, vocab):
    width = max(7, len(str(len(spec.truths) - 1)))
    return simulate_bundle(
        spec.truths[index],
        spec.channel,
        index,
        vocab,
        uid=f"{spec.id_prefix}{index:0{width}d}",
        mixture=spec.mixture,
    )


def simulate_corpus(spec: SimCorpusSpec, threads: int = 1) -> list[HypothesisBundle]:
    vocab = corpus_vocabulary(spec.truths)
    fn = functools.partial(_bundle_at, spec=spec, vocab=vocab)
    return pmap(fn, range(len(spec.truths)), threads)


# Built-in transcript generator: common English words, seeded lengths.
_WORDS = """
the of and to in is was that for on with as by at from his her they this
have had not are but be which one all were we when there can an your more
said has each about what their if will up other out many then them these so
some would make like him into time two look see way could people than first
been call who its now find long down day did get come made may part over new
sound take only little work know place year live me back give most very after
thing our just name good sentence man think say great where help through much
before line right too mean old any same tell boy follow came want show also
around form three small set put end does another well large must big even such
because turn here why ask went men read need land different home us move try
kind hand picture again change off play spell air away animal house point page
letter mother answer found study still learn should world high every near add
food between own below country plant last school father keep tree never start
city earth eye light thought head under story saw left few while along might
close something seem next hard open example begin life always those both paper
together got group often run important until children side feet car mile night
walk white sea began grow took river four carry state once book hear stop
without second later miss idea enough eat face watch far really almost let
above girl sometimes mountain cut young talk soon list song being leave family
signs ankylosing spondylitis detected patient doctor morning weather station
report market price music video question reason season minute evening window
""".split()


def builtin_vocabulary() -> list[str]:
    return sorted(set(_WORDS))


def sample_transcripts(
    n: int, seed: int = 0, mean_words: int = 15, spread: int = 7
) -> list[str]:
    """``n`` seeded pseudo-sentences with lengths uniform on mean +/- spread."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed, -1)
    vocab = builtin_vocabulary()
    lo = max(1, mean_words - spread)
    hi = mean_words + spread
    return [" ".join(rng.choices(vocab, k=rng.randint(lo, hi))) for _ in range(n)]
