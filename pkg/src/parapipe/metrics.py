"""Evaluation arithmetic: corpus BLEU, macro F1, run and dataset averaging.

Scores live as fractions in [0, 1] everywhere; rendering multiplies by 100
with two decimals. BLEU here is corpus-level with uniform weights over
orders 1..4 and the standard brevity penalty; a zero clipped precision at
any contributing order yields a raw score of 0, with add-epsilon smoothing
available separately for reporting.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptyInput, LengthMismatch, UnknownLabel


@dataclass(frozen=True)
class BleuReport:
    score: float
    smoothed_score: float
    precisions: tuple
    matches: tuple
    totals: tuple
    brevity_penalty: float
    hyp_length: int
    ref_length: int


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def corpus_bleu_report(
    references: Sequence[Sequence[str]],
    hypotheses: Sequence[Sequence[str]],
    max_order: int = 4,
    smooth_eps: float = 0.1,
) -> BleuReport:
    """Full breakdown of a corpus BLEU computation.

    Orders whose corpus-wide denominator is zero (every hypothesis shorter
    than the order) are excluded from the geometric mean, so scoring a
    corpus against itself is exactly 1 regardless of text lengths.
    """
    if len(references) != len(hypotheses):
        raise LengthMismatch(
            f"{len(references)} references vs {len(hypotheses)} hypotheses"
        )
    if not references:
        raise EmptyInput("no reference/hypothesis pairs")
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for ref, hyp in zip(references, hypotheses):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for k in range(1, max_order + 1):
            hyp_grams = _ngram_counts(hyp, k)
            if not hyp_grams:
                continue
            ref_grams = _ngram_counts(ref, k)
            totals[k - 1] += sum(hyp_grams.values())
            for gram, cnt in hyp_grams.items():
                matches[k - 1] += min(cnt, ref_grams[gram])
    if hyp_len == 0:
        raise EmptyInput("all hypotheses empty")
    if hyp_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    raw_precisions = []
    smoothed = []
    for m, t in zip(matches, totals):
        if t == 0:
            continue
        raw_precisions.append(m / t)
        smoothed.append(m / t if m > 0 else smooth_eps / t)
    if any(p == 0.0 for p in raw_precisions):
        score = 0.0
    else:
        score = bp * math.exp(
            sum(math.log(p) for p in raw_precisions) / len(raw_precisions)
        )
    smoothed_score = bp * math.exp(
        sum(math.log(p) for p in smoothed) / len(smoothed)
    )
    return BleuReport(
        score=score,
        smoothed_score=smoothed_score,
        precisions=tuple(raw_precisions),
        matches=tuple(matches),
        totals=tuple(totals),
        brevity_penalty=bp,
        hyp_length=hyp_len,
        ref_length=ref_len,
    )


def corpus_bleu(
    references: Sequence[Sequence[str]],
    hypotheses: Sequence[Sequence[str]],
    max_order: int = 4,
) -> float:
    return corpus_bleu_report(references, hypotheses, max_order).score


def macro_f1(
    gold: Sequence[str], predicted: Sequence[str], classes: Sequence[str]
) -> float:
    """Unweighted mean of per-class F1 over the declared class set.

    A class with P + R = 0 contributes 0. Classes never occurring in gold
    or predictions still count in the denominator (declared-class
    convention), so the score depends on the task's class inventory.
    """
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold vs {len(predicted)} predicted")
    if not gold:
        raise EmptyInput("no labels")
    if not classes:
        raise EmptyInput("empty class set")
    declared = set(classes)
    for lab in gold:
        if lab not in declared:
            raise UnknownLabel(f"gold label {lab!r} not in class set")
    for lab in predicted:
        if lab not in declared:
            raise UnknownLabel(f"predicted label {lab!r} not in class set")
    total = 0.0
    for c in classes:
        tp = sum(1 for g, p in zip(gold, predicted) if g == c and p == c)
        pred_c = sum(1 for p in predicted if p == c)
        gold_c = sum(1 for g in gold if g == c)
        if tp == 0:
            continue
        prec = tp / pred_c
        rec = tp / gold_c
        total += 2 * prec * rec / (prec + rec)
    return total / len(classes)


def mean_over_runs(run_scores: Sequence[float]) -> float:
    if not run_scores:
        raise EmptyInput("no run scores")
    return sum(run_scores) / len(run_scores)


@dataclass(frozen=True)
class ScoreTable:
    """Per-dataset scores, optionally backed by the per-run maps they
    average over. Keys keep insertion order for rendering."""

    scores: dict
    runs: tuple = ()

    def __post_init__(self):
        for name, v in self.scores.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"score for {name!r} outside [0, 1]: {v}")

    @classmethod
    def from_runs(cls, runs: Sequence[Mapping[str, float]]) -> "ScoreTable":
        if not runs:
            raise EmptyInput("no runs")
        names = list(runs[0])
        for r in runs[1:]:
            if list(r) != names:
                raise LengthMismatch("runs disagree on dataset keys")
        scores = {n: mean_over_runs([r[n] for r in runs]) for n in names}
        return cls(scores=scores, runs=tuple(dict(r) for r in runs))


def global_average(table: ScoreTable) -> float:
    if not table.scores:
        raise EmptyInput("no datasets in table")
    return sum(table.scores.values()) / len(table.scores)


def render_table(table: ScoreTable) -> str:
    """Plain-text table: one row per dataset plus an Average row, scores
    shown x100 with two decimals."""
    if not table.scores:
        raise EmptyInput("no datasets in table")
    width = max(len("Average"), max(len(n) for n in table.scores))
    lines = []
    for name, v in table.scores.items():
        lines.append(f"{name:<{width}}  {100 * v:6.2f}")
    lines.append("-" * (width + 8))
    lines.append(f"{'Average':<{width}}  {100 * global_average(table):6.2f}")
    return "\n".join(lines)
