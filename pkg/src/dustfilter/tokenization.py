"""Word- and character-level tokenization of transcripts."""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass, field

_WS = re.compile(r"\s+")


class TokenUnit(str, enum.Enum):
    WORD = "word"
    CHAR = "char"


@dataclass(frozen=True)
class NormalizationOptions:
    lowercase: bool = False
    strip_punctuation: bool = False
    # Word tokenization always collapses whitespace regardless of this flag.
    collapse_whitespace: bool = True
    include_spaces_in_chars: bool = False


DEFAULT_OPTIONS = NormalizationOptions()


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    unit: TokenUnit
    include_spaces: bool = field(default=False, compare=False)

    def __post_init__(self):
        for tok in self.tokens:
            if not tok:
                raise ValueError("empty token")
            if self.unit is TokenUnit.WORD and _WS.search(tok):
                raise ValueError(f"word token contains whitespace: {tok!r}")
            if self.unit is TokenUnit.CHAR:
                if len(tok) != 1:
                    raise ValueError(f"char token must be a single scalar: {tok!r}")
                if not self.include_spaces and tok.isspace():
                    raise ValueError("whitespace char token with spaces excluded")

    @classmethod
    def _trusted(cls, tokens: tuple[str, ...], unit: TokenUnit, include_spaces: bool = False):
        # skips __post_init__ checks; only for tokens built to satisfy them
        seq = object.__new__(cls)
        object.__setattr__(seq, "tokens", tokens)
        object.__setattr__(seq, "unit", unit)
        object.__setattr__(seq, "include_spaces", include_spaces)
        return seq

    def __len__(self) -> int:
        return len(self.tokens)

    def length(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        sep = " " if self.unit is TokenUnit.WORD else ""
        return sep.join(self.tokens)


def _strip_punct(text: str) -> str:
    return "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))


def normalize(text: str, opts: NormalizationOptions = DEFAULT_OPTIONS) -> str:
    if opts.lowercase:
        text = text.lower()
    if opts.strip_punctuation:
        text = _strip_punct(text)
    if opts.collapse_whitespace:
        text = _WS.sub(" ", text).strip()
    return text


def tokenize(
    text: str,
    unit: TokenUnit = TokenUnit.WORD,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
) -> TokenSequence:
    """Split ``text`` into word tokens or one token per Unicode scalar.

    Character tokens skip whitespace unless ``opts.include_spaces_in_chars``
    is set. Empty or whitespace-only input gives an empty sequence.
    """
    unit = TokenUnit(unit)
    if unit is TokenUnit.WORD or not opts.include_spaces_in_chars:
        # str.split() already collapses and strips whitespace runs
        if opts.lowercase:
            text = text.lower()
        if opts.strip_punctuation:
            text = _strip_punct(text)
        if unit is TokenUnit.WORD:
            return TokenSequence._trusted(tuple(text.split()), unit)
        return TokenSequence._trusted(tuple("".join(text.split())), unit)
    norm = normalize(text, opts)
    if not norm.strip():
        return TokenSequence._trusted((), unit, True)
    return TokenSequence._trusted(tuple(norm), unit, True)
