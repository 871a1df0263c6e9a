"""Labeled URL corpus and seeded round generation.

A corpus file is line-delimited: ``url | label | brand | note`` with
``legit``/``phish`` labels, ``#`` comments, and optional ``id = ...`` /
``version = ...`` header lines. A round is 5 legit + 5 phish worms sampled
without replacement and shuffled by a seeded generator; the same
(corpus, seed, rules, brands) always produces the identical round.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .cues import BrandList, RuleSet, Verdict, analyze
from .urls import MalformedUrl, ParsedUrl, SuffixList, parse_url, serialize


class CorpusFormatError(ValueError):
    """A corpus record could not be parsed."""


class DuplicateUrl(CorpusFormatError):
    """The same URL (after normalization) appears twice."""


class InsufficientEntries(ValueError):
    """Not enough legit/phish entries to form a round."""


class Label(Enum):
    LEGIT = "legit"
    PHISH = "phish"


@dataclass(frozen=True)
class CorpusEntry:
    url: ParsedUrl
    label: Label
    brand: str | None = None
    note: str | None = None

    @property
    def url_text(self) -> str:
        return serialize(self.url)


@dataclass(frozen=True)
class Corpus:
    entries: tuple[CorpusEntry, ...]
    id: str = "corpus"
    version: str = "0"

    def by_label(self, label: Label) -> list[CorpusEntry]:
        return [e for e in self.entries if e.label is label]


@dataclass(frozen=True)
class WormItem:
    url: ParsedUrl
    truth: Label
    verdict: Verdict

    @property
    def url_text(self) -> str:
        return serialize(self.url)


@dataclass(frozen=True)
class Round:
    worms: tuple[WormItem, ...]
    seed: int
    corpus_id: str


def load_corpus(text: str | bytes, corpus_id: str = "corpus") -> Corpus:
    """Parse and validate a corpus file.

    Raises CorpusFormatError / DuplicateUrl / InsufficientEntries. A corpus
    needs at least 5 legit and 5 phish entries or no round can be formed.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    version = "0"
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if sep and key.strip() in ("id", "version") and "|" not in line:
            if key.strip() == "id":
                corpus_id = value.strip()
            else:
                version = value.strip()
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) < 2 or len(fields) > 4:
            raise CorpusFormatError(f"line {lineno}: expected 'url | label [| brand [| note]]'")
        url_text, label_text = fields[0], fields[1]
        brand = fields[2] if len(fields) > 2 and fields[2] not in ("", "-") else None
        note = fields[3] if len(fields) > 3 and fields[3] not in ("", "-") else None
        try:
            url = parse_url(url_text)
        except MalformedUrl as exc:
            raise CorpusFormatError(f"line {lineno}: bad url: {exc}") from None
        try:
            label = Label(label_text.lower())
        except ValueError:
            raise CorpusFormatError(
                f"line {lineno}: label must be legit or phish, got {label_text!r}"
            ) from None
        canonical = serialize(url)
        if canonical in seen:
            raise DuplicateUrl(f"line {lineno}: duplicate url {canonical}")
        seen.add(canonical)
        entries.append(CorpusEntry(url=url, label=label, brand=brand, note=note))

    corpus = Corpus(tuple(entries), id=corpus_id, version=version)
    _require_counts(corpus, 5, 5)
    return corpus


def load_corpus_file(path: str | Path) -> Corpus:
    path = Path(path)
    return load_corpus(path.read_text(encoding="utf-8"), corpus_id=path.stem)


def sample_corpus() -> Corpus:
    """The illustrative 5+5 corpus bundled with the package."""
    text = resources.files("phishpond.data").joinpath("sample_corpus.txt").read_text("utf-8")
    return load_corpus(text)


def _require_counts(corpus: Corpus, legit: int, phish: int) -> None:
    n_legit = len(corpus.by_label(Label.LEGIT))
    n_phish = len(corpus.by_label(Label.PHISH))
    if n_legit < legit or n_phish < phish:
        raise InsufficientEntries(
            f"need at least {legit} legit and {phish} phish entries, "
            f"corpus has {n_legit} legit / {n_phish} phish"
        )


@dataclass(frozen=True)
class ValidationReport:
    """Advisory corpus quality report for tip coverage."""

    uncued_phish: tuple[str, ...]  # phish URLs where only the fallback tip exists
    cued_legit: tuple[tuple[str, str], ...]  # (url, rule ids) on legit entries

    @property
    def clean(self) -> bool:
        return not self.uncued_phish and not self.cued_legit


def validate_corpus(
    corpus: Corpus,
    rules: RuleSet | None = None,
    brands: BrandList | None = None,
    suffixes: SuffixList | None = None,
) -> ValidationReport:
    """Flag phish entries with zero cues and legit entries with any cue."""
    uncued = []
    cued_legit = []
    for entry in corpus.entries:
        verdict = analyze(entry.url, rules, brands, suffixes)
        if entry.label is Label.PHISH and not verdict.suspicious:
            uncued.append(entry.url_text)
        elif entry.label is Label.LEGIT and verdict.suspicious:
            rule_ids = ",".join(c.rule_id for c in verdict.cues)
            cued_legit.append((entry.url_text, rule_ids))
    return ValidationReport(tuple(uncued), tuple(cued_legit))


def generate_round(
    corpus: Corpus,
    seed: int,
    rules: RuleSet | None = None,
    brands: BrandList | None = None,
    suffixes: SuffixList | None = None,
    legit_count: int = 5,
    phish_count: int = 5,
) -> Round:
    """Sample ``legit_count`` + ``phish_count`` worms and shuffle them.

    Deterministic: driven entirely by ``random.Random(seed)`` over the
    corpus in file order. Verdicts are precomputed so the teacher can hand
    out tips without re-running the rules mid-game.
    """
    legit = corpus.by_label(Label.LEGIT)
    phish = corpus.by_label(Label.PHISH)
    if len(legit) < legit_count or len(phish) < phish_count:
        raise InsufficientEntries(
            f"need {legit_count} legit and {phish_count} phish, "
            f"corpus has {len(legit)} legit / {len(phish)} phish"
        )
    rng = random.Random(seed)
    picked = rng.sample(legit, legit_count) + rng.sample(phish, phish_count)
    rng.shuffle(picked)
    worms = tuple(
        WormItem(url=e.url, truth=e.label, verdict=analyze(e.url, rules, brands, suffixes))
        for e in picked
    )
    return Round(worms=worms, seed=seed, corpus_id=corpus.id)


def withheld_entries(corpus: Corpus, round_: Round) -> list[CorpusEntry]:
    """Corpus entries not used by ``round_``; the pool quiz items draw from."""
    used = {serialize(w.url) for w in round_.worms}
    return [e for e in corpus.entries if e.url_text not in used]
