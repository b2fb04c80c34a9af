"""Core record type and the registry of known social meaning datasets."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TweetRecord:
    """One labeled social media post."""

    id: str
    text: str
    label: str
    topic: str | None = None
    dataset: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if not self.text:
            raise ValueError("record text must be non-empty")

    def to_dict(self) -> dict:
        d = {"id": self.id, "text": self.text, "label": self.label}
        if self.topic is not None:
            d["topic"] = self.topic
        if self.dataset:
            d["dataset"] = self.dataset
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TweetRecord":
        return cls(
            id=str(d["id"]),
            text=d["text"],
            label=str(d["label"]),
            topic=d.get("topic"),
            dataset=d.get("dataset", ""),
        )


# Declared class sets for the 17 bundled dataset configurations. Labels of
# loaded records are validated against these when the dataset tag is known.
DATASET_CLASSES: dict[str, tuple[str, ...]] = {
    "crisis_oltea": ("on-topic", "off-topic"),
    "emo_moham": ("anger", "joy", "optimism", "sadness"),
    "hate_bas": ("hateful", "none"),
    "hate_waseem": ("racism", "sexism", "none"),
    "hate_david": ("hate", "offensive", "neither"),
    "humor_potash": ("humor", "not humor"),
    "humor_meaney": ("humor", "not humor"),
    "irony_hee_a": ("ironic", "not ironic"),
    "irony_hee_b": ("ironic by clash", "situational irony", "other irony", "non-ironic"),
    "offense_zamp": ("offensive", "not offensive"),
    "sarc_riloff": ("sarcastic", "non-sarcastic"),
    "sarc_ptacek": ("sarcastic", "non-sarcastic"),
    "sarc_rajad": ("sarcastic", "non-sarcastic"),
    "sarc_bam": ("sarcastic", "non-sarcastic"),
    "senti_rosen": ("negative", "neutral", "positive"),
    "senti_thel": ("negative", "positive"),
    "stance_moham": ("against", "favor", "none"),
}

# Datasets whose samples were collected by searching for seed hashtags.
# Only these carry non-empty seed hashtag sets during normalization; the
# actual seed lists are supplied per run (they are not part of the datasets'
# redistributable metadata).
HASHTAG_COLLECTED: frozenset[str] = frozenset(
    {"sarc_riloff", "sarc_ptacek", "sarc_rajad", "sarc_bam", "irony_hee_a", "irony_hee_b"}
)

# Tasks where a topic term is appended to the post at training time; their
# exported classifier profile uses the longer sequence cap.
TOPIC_TASKS: frozenset[str] = frozenset({"crisis_oltea", "stance_moham"})


@dataclass(frozen=True)
class DatasetConfig:
    """Per-dataset run configuration: where it lives and how to read it."""

    name: str
    path: str
    format: str = "jsonl"
    column_map: dict = field(default_factory=dict)
    seed_hashtags: frozenset[str] = frozenset()

    def classes(self) -> tuple[str, ...] | None:
        return DATASET_CLASSES.get(self.name)
