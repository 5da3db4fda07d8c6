"""Simulate out-of-vocabulary conditions by filtering sentences that mention target terms.

A sentence is removed when any of its tokens equals a target term or a naive
plural of one (term + "s" or term + "es"). Matching happens at token
granularity after light tokenization, never by raw substring, so "anemic"
does not trigger removal for the term "anemia".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .graph import open_maybe_gzip

_STRIP_CHARS = ".,;:!?()\"'[]"

PLURAL_SUFFIXES = ("s", "es")  # naive rule; irregular plurals are out of scope


@dataclass
class FilterStats:
    total: int = 0
    removed: int = 0
    term_hits: dict[str, int] = field(default_factory=dict)  # sentences removed per term

    @property
    def kept(self) -> int:
        return self.total - self.removed

    @property
    def removal_fraction(self) -> float:
        return self.removed / self.total if self.total else 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "total_sentences": self.total,
                "removed_sentences": self.removed,
                "kept_sentences": self.kept,
                "removal_fraction": self.removal_fraction,
                "term_hits": dict(sorted(self.term_hits.items())),
            },
            indent=2,
        )


def tokenize_sentence(line: str) -> list[str]:
    """Lower-case, split on whitespace, strip surrounding punctuation, keep hyphens."""
    tokens = []
    for raw in line.lower().split():
        tok = raw.strip(_STRIP_CHARS)
        if tok:
            tokens.append(tok)
    return tokens


def _matched_terms(tokens: list[str], terms: set[str]) -> set[str]:
    hits = set()
    for tok in tokens:
        if tok in terms:
            hits.add(tok)
        for suffix in PLURAL_SUFFIXES:
            if tok.endswith(suffix) and tok[: -len(suffix)] in terms:
                hits.add(tok[: -len(suffix)])
    return hits


def filter_corpus(
    sentences: Iterable[str], terms: set[str]
) -> tuple[list[str], FilterStats]:
    """Drop every sentence containing a target term (singular or plural form).

    Kept sentences pass through byte-identical. Each removed sentence counts
    one hit for every distinct term that matched it.
    """
    stats = FilterStats()
    kept: list[str] = []
    for sentence in sentences:
        stats.total += 1
        hits = _matched_terms(tokenize_sentence(sentence), terms)
        if hits:
            stats.removed += 1
            for term in hits:
                stats.term_hits[term] = stats.term_hits.get(term, 0) + 1
        else:
            kept.append(sentence)
    return kept, stats


def filter_corpus_file(in_path: str, out_path: str, terms: set[str]) -> FilterStats:
    """Streaming variant: line-by-line over possibly gzipped files, order preserved."""
    stats = FilterStats()
    with open_maybe_gzip(in_path) as src, open_maybe_gzip(out_path, "wt") as dst:
        for line in src:
            sentence = line.rstrip("\n")
            stats.total += 1
            hits = _matched_terms(tokenize_sentence(sentence), terms)
            if hits:
                stats.removed += 1
                for term in hits:
                    stats.term_hits[term] = stats.term_hits.get(term, 0) + 1
            else:
                dst.write(sentence + "\n")
    return stats
