"""Input normalization and key-term extraction.

The extractor here is the deterministic default: stopword filtering plus
frequency scoring. Contextual-embedding extractors can be plugged in through
the ``scorer`` argument of :func:`extract_terms`; the speech front-end is an
``AsrAdapter`` so tests never need a real recognizer.
"""

from __future__ import annotations

import hashlib
import io
import json
import unicodedata
import wave
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from .errors import AdapterError, AdapterUnavailable, DecodeError

# Fixed function-word list shipped with the module so extraction is stable
# across environments. Bump the version when the list changes.
STOPWORDS_VERSION = 1
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can cannot could did do does doing down
during each few for from further had has have having he her here hers herself
him himself his how i if in into is it its itself just me more most my myself
no nor not now of off on once only or other our ours ourselves out over own
same she should so some such than that the their theirs them themselves then
there these they this those through to too under until up very was we were
what when where which while who whom why will with would you your yours
yourself yourselves
""".split())


@dataclass(frozen=True)
class NormalizedText:
    original: str
    tokens: tuple[str, ...]
    source: str = "typed"  # "typed" | "transcribed"


@dataclass(frozen=True)
class Term:
    term: str
    score: float
    rank: int  # 1-based


@dataclass(frozen=True)
class TermList:
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.terms)

    def words(self) -> list[str]:
        return [t.term for t in self.terms]


def _strip_punct(text: str) -> str:
    # Punctuation and symbol characters are removed, not replaced by spaces,
    # so "don't" -> "dont" and "H2O!" -> "h2o".
    return "".join(
        ch for ch in text if not unicodedata.category(ch).startswith(("P", "S"))
    )


def normalize_text(raw: str, source: str = "typed") -> NormalizedText:
    """Lowercase, NFC-normalize, strip punctuation and split on whitespace."""
    normed = unicodedata.normalize("NFC", raw).lower()
    tokens = tuple(tok for tok in _strip_punct(normed).split() if tok)
    return NormalizedText(original=raw, tokens=tokens, source=source)


class AsrAdapter(Protocol):
    """WAV bytes (PCM 16-bit, mono, 16 kHz) -> UTF-8 transcript."""

    def __call__(self, audio: bytes) -> str: ...


class MockASR:
    """Lookup-table recognizer configured by {sha256(audio): transcript}."""

    def __init__(self, table: dict[str, str]):
        self.table = dict(table)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "MockASR":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def __call__(self, audio: bytes) -> str:
        digest = hashlib.sha256(audio).hexdigest()
        if digest not in self.table:
            raise AdapterError(f"mock ASR has no transcript for audio sha256={digest}")
        return self.table[digest]


def _validate_wav(audio: bytes) -> None:
    if not audio:
        raise DecodeError("zero-length audio")
    try:
        with wave.open(io.BytesIO(audio)) as wav:
            frames = wav.getnframes()
            width = wav.getsampwidth()
            channels = wav.getnchannels()
            rate = wav.getframerate()
    except (wave.Error, EOFError) as exc:
        raise DecodeError(f"not a readable WAV stream: {exc}") from exc
    if frames == 0:
        raise DecodeError("audio contains no samples")
    if (width, channels, rate) != (2, 1, 16000):
        raise DecodeError(
            f"expected PCM 16-bit mono 16 kHz, got width={width} "
            f"channels={channels} rate={rate}"
        )


def transcribe(audio: bytes, asr: AsrAdapter | None) -> NormalizedText:
    """Run the ASR adapter and normalize its transcript."""
    if asr is None:
        raise AdapterUnavailable("no ASR adapter configured")
    _validate_wav(audio)
    return normalize_text(asr(audio), source="transcribed")


# A scorer maps the token stream to {term: score}; extract_terms handles
# ordering, tie-breaking and truncation uniformly for every scorer.
TermScorer = Callable[[tuple[str, ...]], dict[str, float]]


def frequency_scorer(tokens: tuple[str, ...]) -> dict[str, float]:
    return dict(Counter(tok for tok in tokens if tok not in STOPWORDS))


def extract_terms(
    text: NormalizedText,
    max_terms: int,
    scorer: TermScorer = frequency_scorer,
) -> TermList:
    """Rank terms by score; ties break on first occurrence then spelling."""
    if max_terms < 1:
        raise ValueError(f"max_terms must be >= 1, got {max_terms}")
    scores = scorer(text.tokens)
    first_seen = {}
    for idx, tok in enumerate(text.tokens):
        first_seen.setdefault(tok, idx)
    ranked = sorted(
        scores.items(),
        key=lambda kv: (-kv[1], first_seen.get(kv[0], len(text.tokens)), kv[0]),
    )[:max_terms]
    return TermList(
        terms=tuple(
            Term(term=term, score=float(score), rank=i + 1)
            for i, (term, score) in enumerate(ranked)
        )
    )
