"""Word tri-gram similarity and the three-stage candidate filtering cascade.

Stage 1 drops near-copies of the original (sim > copy_threshold) and
zero-overlap outliers (sim <= floor_similarity). Stage 2 greedily drops
candidates too similar (> dedup_threshold) to an already kept one. The
surviving annotated sets form the cleaned paraphrase pool from which the
n-per-original training sets are drawn.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Sequence

from .records import TweetRecord

DROP_REASONS = ("none", "copy", "zero_overlap", "near_duplicate")


@dataclass(frozen=True)
class FilterConfig:
    ngram_order: int = 3
    copy_threshold: float = 0.95
    dedup_threshold: float = 0.50
    floor_similarity: float = 0.0

    def __post_init__(self):
        if self.ngram_order < 1:
            raise ValueError("ngram_order must be >= 1")
        for name in ("copy_threshold", "dedup_threshold", "floor_similarity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.floor_similarity < self.copy_threshold:
            raise ValueError("floor_similarity must be < copy_threshold")
        if self.dedup_threshold > self.copy_threshold:
            raise ValueError("dedup_threshold must be <= copy_threshold")

    @classmethod
    def from_dict(cls, d: dict) -> "FilterConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Candidate:
    text: str
    sim_to_original: float = 0.0
    kept: bool = True
    drop_reason: str = "none"

    def __post_init__(self):
        if self.drop_reason not in DROP_REASONS:
            raise ValueError(f"unknown drop_reason {self.drop_reason!r}")
        if self.kept and self.drop_reason != "none":
            raise ValueError("kept candidate cannot carry a drop_reason")
        if not 0.0 <= self.sim_to_original <= 1.0:
            raise ValueError("sim_to_original must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "sim_to_original": self.sim_to_original,
            "kept": self.kept,
            "drop_reason": self.drop_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        return cls(
            text=d["text"],
            sim_to_original=d.get("sim_to_original", 0.0),
            kept=d.get("kept", True),
            drop_reason=d.get("drop_reason", "none"),
        )


@dataclass(frozen=True)
class ParaphraseSet:
    """One original plus its generated candidates, in generation order."""

    original: TweetRecord
    candidates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))

    @classmethod
    def from_texts(cls, original: TweetRecord, texts: Iterable[str]) -> "ParaphraseSet":
        # sim annotations are placeholders until a filtering pass fills them
        return cls(original=original, candidates=tuple(Candidate(text=t) for t in texts))

    def kept_candidates(self) -> tuple:
        return tuple(c for c in self.candidates if c.kept)

    def to_dict(self) -> dict:
        return {
            "original": self.original.to_dict(),
            "candidates": [c.to_dict() for c in self.candidates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParaphraseSet":
        return cls(
            original=TweetRecord.from_dict(d["original"]),
            candidates=tuple(Candidate.from_dict(c) for c in d["candidates"]),
        )


def trigram_set(text: str, n: int) -> frozenset:
    """Contiguous word n-grams of the lowercased text.

    Texts with fewer than n tokens collapse to a single gram of all tokens,
    so short texts still compare meaningfully instead of scoring 0 everywhere.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tokens = text.lower().split()
    if not tokens:
        return frozenset()
    if len(tokens) < n:
        return frozenset({" ".join(tokens)})
    return frozenset(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def trigram_similarity(a: str, b: str, cfg: FilterConfig = FilterConfig()) -> float:
    """Jaccard coefficient over word n-gram sets.

    1.0 when both gram sets are empty, 0.0 when exactly one is.
    """
    ga = trigram_set(a, cfg.ngram_order)
    gb = trigram_set(b, cfg.ngram_order)
    if not ga and not gb:
        return 1.0
    if not ga or not gb:
        return 0.0
    return len(ga & gb) / len(ga | gb)


def filter_against_original(
    original: str, candidates: Sequence[str], cfg: FilterConfig
) -> tuple:
    """Stage 1: annotate each candidate against the original.

    Kept iff floor_similarity < sim <= copy_threshold.
    """
    orig_grams = trigram_set(original, cfg.ngram_order)
    out = []
    for text in candidates:
        grams = trigram_set(text, cfg.ngram_order)
        if not orig_grams and not grams:
            sim = 1.0
        elif not orig_grams or not grams:
            sim = 0.0
        else:
            sim = len(orig_grams & grams) / len(orig_grams | grams)
        if sim > cfg.copy_threshold:
            out.append(Candidate(text, sim, kept=False, drop_reason="copy"))
        elif sim <= cfg.floor_similarity:
            out.append(Candidate(text, sim, kept=False, drop_reason="zero_overlap"))
        else:
            out.append(Candidate(text, sim, kept=True))
    return tuple(out)


def dedup_candidates(candidates: Sequence[Candidate], cfg: FilterConfig) -> tuple:
    """Stage 2: greedy scan in generation order.

    A still-kept candidate survives iff its similarity to every previously
    kept candidate is <= dedup_threshold. Candidates already dropped by
    stage 1 pass through unchanged.
    """
    kept_grams: list[frozenset] = []
    out = []
    for cand in candidates:
        if not cand.kept:
            out.append(cand)
            continue
        grams = trigram_set(cand.text, cfg.ngram_order)
        dup = False
        for prev in kept_grams:
            if not grams and not prev:
                sim = 1.0
            elif not grams or not prev:
                sim = 0.0
            else:
                sim = len(grams & prev) / len(grams | prev)
            if sim > cfg.dedup_threshold:
                dup = True
                break
        if dup:
            out.append(dataclasses.replace(cand, kept=False, drop_reason="near_duplicate"))
        else:
            kept_grams.append(grams)
            out.append(cand)
    return tuple(out)


def filter_set(pset: ParaphraseSet, cfg: FilterConfig) -> ParaphraseSet:
    """Run both stages over one set, recomputing all annotations."""
    texts = [c.text for c in pset.candidates]
    annotated = filter_against_original(pset.original.text, texts, cfg)
    annotated = dedup_candidates(annotated, cfg)
    return ParaphraseSet(original=pset.original, candidates=annotated)


def build_para_clean(sets: Sequence[ParaphraseSet], cfg: FilterConfig) -> list:
    """Filter every set; originals with zero survivors are retained so the
    loss is visible downstream."""
    return [filter_set(s, cfg) for s in sets]


def select_para_n(para_clean: Sequence[ParaphraseSet], n: int) -> list:
    """First min(n, survivors) kept candidates per original, as new records.

    Each emitted record inherits the original's label, topic, and dataset;
    its id is the original id plus a '#p<j>' suffix (j is 1-based position
    among the kept candidates), so output for a smaller n is always a prefix
    of the output for a larger one.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for pset in para_clean:
        for j, cand in enumerate(pset.kept_candidates()[:n], start=1):
            out.append(
                TweetRecord(
                    id=f"{pset.original.id}#p{j}",
                    text=cand.text,
                    label=pset.original.label,
                    topic=pset.original.topic,
                    dataset=pset.original.dataset,
                )
            )
    return out
