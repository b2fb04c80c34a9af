"""Dataset ingestion, deterministic splitting, decay auditing, paraphrase
corpus assembly, and manifest provenance.

All file output is byte-stable: JSON is written with sorted keys and no
trailing randomness, and every random choice flows from an explicit seed,
so rerunning a command with the same inputs reproduces artifacts exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    ChecksumMismatch,
    EmptyInput,
    ParseError,
    TooFewRecords,
    UnknownLabel,
    UnknownSource,
)
from .records import DATASET_CLASSES, TOPIC_TASKS, TweetRecord

SOURCES = ("PIT2015", "LanguageNet", "Opusparcus", "QQP")

# Valid label values per source (format of the upstream distributions).
SOURCE_LABEL_RANGES: dict[str, range] = {
    "PIT2015": range(0, 6),      # graded 0..5
    "LanguageNet": range(0, 7),  # graded 0..6
    "Opusparcus": range(1, 5),   # quality buckets 1..4
    "QQP": range(0, 2),          # duplicate flag
}

# Pairs kept when assembling the paraphraser training corpus.
KEEP_LABELS: dict[str, frozenset] = {
    "PIT2015": frozenset({4, 5}),
    "LanguageNet": frozenset({4, 5, 6}),
    "Opusparcus": frozenset({4}),
    "QQP": frozenset({1}),
}


@dataclass(frozen=True)
class CorpusPair:
    sentence_a: str
    sentence_b: str
    source: str
    similarity_label: int

    def __post_init__(self):
        if not self.sentence_a or not self.sentence_b:
            raise ValueError("both sentences must be non-empty")
        if self.source not in SOURCE_LABEL_RANGES:
            raise UnknownSource(f"unknown corpus source {self.source!r}")
        if self.similarity_label not in SOURCE_LABEL_RANGES[self.source]:
            raise ValueError(
                f"label {self.similarity_label} outside {self.source} range"
            )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusPair":
        return cls(
            sentence_a=d["sentence_a"],
            sentence_b=d["sentence_b"],
            source=d["source"],
            similarity_label=int(d["similarity_label"]),
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    dev_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0
    stratify_by_label: bool = False

    def __post_init__(self):
        fr = (self.train_fraction, self.dev_fraction, self.test_fraction)
        if any(f <= 0 for f in fr):
            raise ValueError("split fractions must be positive")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"split fractions sum to {sum(fr)}, expected 1")

    @classmethod
    def from_dict(cls, d: dict) -> "SplitSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class DecayReport:
    dataset: str
    original_count: int
    retrieved_count: int
    decay_rate: float
    retrieval_rate: float
    unknown_retrieved: int = 0
    empty_original: bool = False

    def __post_init__(self):
        if self.retrieved_count > self.original_count:
            raise ValueError("retrieved_count cannot exceed original_count")
        if not 0.0 <= self.decay_rate <= 1.0:
            raise ValueError("decay_rate outside [0, 1]")
        if self.retrieval_rate + self.decay_rate != 1.0:
            raise ValueError("retrieval_rate and decay_rate must sum to 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def round_half_up(x: float) -> int:
    """round() ties go to even; split sizing wants 0.5 to round up."""
    return math.floor(x + 0.5)


def split_dataset(records: Sequence[TweetRecord], spec: SplitSpec):
    """Seeded uniform shuffle, then contiguous slices: test, dev, train
    remainder. Returns (train, dev, test).

    With stratify_by_label, the same rule is applied inside each label
    group (groups visited in sorted label order, one shared RNG), so split
    sizes may differ from the unstratified rounding by a record or two.
    """
    n = len(records)
    if n < 3:
        raise TooFewRecords(f"need at least 3 records to split, got {n}")
    rng = random.Random(spec.seed)

    def carve(block: list):
        n_test = round_half_up(spec.test_fraction * len(block))
        n_dev = round_half_up(spec.dev_fraction * len(block))
        test = block[:n_test]
        dev = block[n_test : n_test + n_dev]
        train = block[n_test + n_dev :]
        return train, dev, test

    if not spec.stratify_by_label:
        order = list(records)
        rng.shuffle(order)
        train, dev, test = carve(order)
    else:
        groups: dict[str, list] = {}
        for r in records:
            groups.setdefault(r.label, []).append(r)
        train, dev, test = [], [], []
        for label in sorted(groups):
            block = groups[label]
            rng.shuffle(block)
            tr, dv, te = carve(block)
            train.extend(tr)
            dev.extend(dv)
            test.extend(te)
    if not train:
        raise TooFewRecords("fractions leave no training records")
    return train, dev, test


def carve_dev(
    train: Sequence[TweetRecord], fraction: float = 0.10, seed: int = 0
):
    """Split off a dev portion from an existing training set.

    Returns (train', dev); dev size = round(fraction * |train|).
    """
    if len(train) < 2:
        raise TooFewRecords(f"need at least 2 records, got {len(train)}")
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    order = list(train)
    random.Random(seed).shuffle(order)
    n_dev = round_half_up(fraction * len(order))
    dev = order[:n_dev]
    remainder = order[n_dev:]
    return remainder, dev


def audit_decay(original_ids, retrieved_ids, dataset: str = "") -> DecayReport:
    """Compare an original ID list against what rehydration returned.

    Retrieved IDs absent from the original list are counted separately and
    excluded from the intersection. decay = 1 - |orig ∩ retr| / |orig|.
    """
    orig = set(original_ids)
    retr = set(retrieved_ids)
    matched = orig & retr
    unknown = len(retr - orig)
    if not orig:
        return DecayReport(
            dataset=dataset,
            original_count=0,
            retrieved_count=0,
            decay_rate=0.0,
            retrieval_rate=1.0,
            unknown_retrieved=unknown,
            empty_original=True,
        )
    decay = 1.0 - len(matched) / len(orig)
    return DecayReport(
        dataset=dataset,
        original_count=len(orig),
        retrieved_count=len(matched),
        decay_rate=decay,
        retrieval_rate=1.0 - decay,
        unknown_retrieved=unknown,
    )


def decay_from_counts(original: int, retrieved: int, dataset: str = "") -> DecayReport:
    """Decay arithmetic straight from counts (for published-table audits
    where the raw ID lists are not available)."""
    if original < 0 or retrieved < 0 or retrieved > original:
        raise ValueError("need 0 <= retrieved <= original")
    if original == 0:
        return DecayReport(dataset, 0, 0, 0.0, 1.0, empty_original=True)
    decay = 1.0 - retrieved / original
    return DecayReport(dataset, original, retrieved, decay, 1.0 - decay)


def aggregate_decay(reports: Sequence[DecayReport]) -> dict:
    """Macro (mean of rates) and micro (pooled counts) retrieval aggregates.

    The two differ whenever dataset sizes are skewed; both are reported so
    downstream claims can cite either convention explicitly.
    """
    if not reports:
        raise EmptyInput("no decay reports")
    macro = sum(r.retrieval_rate for r in reports) / len(reports)
    total_orig = sum(r.original_count for r in reports)
    total_retr = sum(r.retrieved_count for r in reports)
    micro = total_retr / total_orig if total_orig else 0.0
    return {"macro_mean_retrieval": macro, "micro_retrieval": micro}


def filter_paraphrase_corpus(pairs: Sequence[CorpusPair]) -> list:
    """Keep pairs whose label marks them as paraphrases under their
    source's convention."""
    out = []
    for p in pairs:
        if p.source not in KEEP_LABELS:
            raise UnknownSource(f"unknown corpus source {p.source!r}")
        if p.similarity_label in KEEP_LABELS[p.source]:
            out.append(p)
    return out


def merge_corpora(
    filtered_sets: Sequence[Sequence[CorpusPair]],
    drop_exact_duplicates: bool = False,
):
    """Concatenate per-source pair lists. Returns (pairs, counts_by_source).

    With drop_exact_duplicates, pairs with identical (sentence_a,
    sentence_b) keep only their first occurrence, across sources.
    """
    merged: list[CorpusPair] = []
    counts: dict[str, int] = {}
    seen = set()
    for block in filtered_sets:
        for p in block:
            if drop_exact_duplicates:
                key = (p.sentence_a, p.sentence_b)
                if key in seen:
                    continue
                seen.add(key)
            merged.append(p)
            counts[p.source] = counts.get(p.source, 0) + 1
    return merged, counts


def config_hash(config: Mapping) -> str:
    """sha256 of the canonical JSON form of a config mapping."""
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class DatasetManifest:
    """Provenance record binding artifact files to the configs, seed, and
    counts that produced them. The checksum covers every field except
    itself and created_at, so stamped and unstamped manifests verify the
    same way."""

    dataset: str
    source: str
    normalization_hash: str = ""
    filter_hash: str = ""
    split: dict | None = None
    counts: dict = field(default_factory=dict)
    tool_version: str = ""
    created_at: str | None = None
    extra: dict = field(default_factory=dict)
    checksum: str = ""

    def payload(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("checksum")
        d.pop("created_at")
        return d

    def stamp(self) -> "DatasetManifest":
        return dataclasses.replace(self, checksum=config_hash(self.payload()))

    def verify(self) -> None:
        want = config_hash(self.payload())
        if self.checksum != want:
            raise ChecksumMismatch(
                f"manifest checksum {self.checksum[:12]}... does not match "
                f"recomputed {want[:12]}..."
            )


def write_manifest(manifest: DatasetManifest, path: str) -> None:
    if not manifest.checksum:
        manifest = manifest.stamp()
    manifest.verify()
    blob = json.dumps(
        dataclasses.asdict(manifest), sort_keys=True, ensure_ascii=False, indent=2
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(blob + "\n")


def read_manifest(path: str) -> DatasetManifest:
    if not os.path.exists(path):
        raise ParseError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(f"manifest {path}: {e}") from None
    known = {f.name for f in dataclasses.fields(DatasetManifest)}
    try:
        manifest = DatasetManifest(**{k: v for k, v in raw.items() if k in known})
    except TypeError as e:
        raise ParseError(f"manifest {path}: {e}") from None
    manifest.verify()
    return manifest


STANDARD_FIELDS = ("id", "text", "label", "topic")


def _remap(column_map: Mapping[str, str] | None):
    cmap = dict(column_map or {})
    return {f: cmap.get(f, f) for f in STANDARD_FIELDS}


def load_dataset(
    path: str,
    format: str = "jsonl",
    column_map: Mapping[str, str] | None = None,
    dataset: str = "",
    classes: Sequence[str] | None = None,
) -> list:
    """Read a labeled dataset file into validated records.

    column_map translates standard field names (id, text, label, topic) to
    the file's own keys/headers. Labels are checked against the declared
    class set: the explicit `classes` argument, or the registry entry for
    `dataset` when one exists. Without either, labels pass unchecked.
    """
    if classes is None:
        classes = DATASET_CLASSES.get(dataset)
    declared = set(classes) if classes is not None else None
    cmap = _remap(column_map)
    if format == "jsonl":
        rows = _iter_jsonl_rows(path, cmap)
    elif format == "tsv":
        rows = _iter_tsv_rows(path, cmap)
    else:
        raise ParseError(f"unknown dataset format {format!r}")
    records = []
    for lineno, row in rows:
        try:
            rec = TweetRecord(
                id=str(row["id"]),
                text=row["text"],
                label=str(row["label"]),
                topic=row.get("topic"),
                dataset=dataset,
            )
        except (ValueError, TypeError) as e:
            raise ParseError(f"{path}:{lineno}: {e}") from None
        if declared is not None and rec.label not in declared:
            raise UnknownLabel(
                f"{path}:{lineno}: label {rec.label!r} not in declared classes"
            )
        records.append(rec)
    return records


def _iter_jsonl_rows(path: str, cmap: Mapping[str, str]):
    if not os.path.exists(path):
        raise ParseError(f"dataset not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}:{lineno}: bad JSON ({e.msg})") from None
            if not isinstance(obj, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            row = {}
            for fieldname, key in cmap.items():
                if key in obj:
                    row[fieldname] = obj[key]
            for required in ("id", "text", "label"):
                if required not in row:
                    raise ParseError(
                        f"{path}:{lineno}: missing field {cmap[required]!r}"
                    )
            yield lineno, row


def _iter_tsv_rows(path: str, cmap: Mapping[str, str]):
    if not os.path.exists(path):
        raise ParseError(f"dataset not found: {path}")
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            return
        header = header_line.rstrip("\n").split("\t")
        index = {}
        for fieldname, col in cmap.items():
            if col in header:
                index[fieldname] = header.index(col)
        for required in ("id", "text", "label"):
            if required not in index:
                raise ParseError(f"{path}:1: header lacks column {cmap[required]!r}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) < len(header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(header)} columns, got {len(cols)}"
                )
            row = {f: cols[i] for f, i in index.items()}
            if row.get("topic") == "":
                row["topic"] = None
            yield lineno, row


def write_records(records: Iterable[TweetRecord], path: str) -> int:
    """One sorted-keys JSON object per line; returns the line count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_records(path: str, dataset: str = "") -> list:
    return load_dataset(path, format="jsonl", dataset=dataset)


def load_id_list(path: str) -> set:
    """Newline-delimited IDs; blank lines ignored."""
    if not os.path.exists(path):
        raise ParseError(f"id list not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def load_corpus_pairs(path: str, source: str) -> list:
    """JSONL of {sentence_a, sentence_b, similarity_label} for one source."""
    if source not in SOURCE_LABEL_RANGES:
        raise UnknownSource(f"unknown corpus source {source!r}")
    if not os.path.exists(path):
        raise ParseError(f"corpus file not found: {path}")
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}:{lineno}: bad JSON ({e.msg})") from None
            try:
                pairs.append(
                    CorpusPair(
                        sentence_a=obj["sentence_a"],
                        sentence_b=obj["sentence_b"],
                        source=source,
                        similarity_label=int(obj["similarity_label"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"{path}:{lineno}: {e}") from None
    return pairs


def write_corpus_pairs(pairs: Iterable[CorpusPair], path: str) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_dict(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


@dataclass(frozen=True)
class TrainingConfigExport:
    """Hyperparameter profile emitted for external trainers; this toolkit
    never trains models itself."""

    model_tag: str
    role: str                      # "paraphraser" | "classifier"
    epochs: int
    schedule: str                  # "constant" | "linear-peak"
    learning_rate: float
    max_sequence_length: int
    weight_decay: float = 0.0
    patience: int | None = None
    batch_size: int | None = None

    def __post_init__(self):
        if self.schedule not in ("constant", "linear-peak"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.epochs <= 0 or self.learning_rate <= 0 or self.max_sequence_length <= 0:
            raise ValueError("epochs, learning_rate, max_sequence_length must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


def paraphraser_profile(model_tag: str = "t5-base") -> TrainingConfigExport:
    return TrainingConfigExport(
        model_tag=model_tag,
        role="paraphraser",
        epochs=20,
        schedule="constant",
        learning_rate=3e-4,
        max_sequence_length=512,
    )


def classifier_profile(model_tag: str, dataset: str = "") -> TrainingConfigExport:
    return TrainingConfigExport(
        model_tag=model_tag,
        role="classifier",
        epochs=20,
        schedule="linear-peak",
        learning_rate=1e-5,
        max_sequence_length=72 if dataset in TOPIC_TASKS else 64,
        weight_decay=0.01,
        patience=5,
        batch_size=32,
    )
