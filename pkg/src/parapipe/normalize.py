"""Deterministic text normalization of social media posts.

Masks user mentions and hyperlinks with placeholder tokens, removes the seed
hashtags a dataset was collected with, and optionally strips emoji. All
operations are pure functions; normalization of a full record is idempotent.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

from .errors import EmptyAfterNormalization
from .records import TweetRecord

# A mention is one or more '@' followed by 1-15 word characters, not embedded
# inside a longer word run on either side (so emails and 16+ char handles are
# left alone).
MENTION_RE = re.compile(r"(?<!\w)@+\w{1,15}(?!\w)")

# Scheme-prefixed URLs anywhere; bare "www." only at a word boundary.
URL_RE = re.compile(r"https?://\S+|(?<!\w)www\.\S+")


@dataclass(frozen=True)
class NormalizationConfig:
    user_token: str = "USER"
    url_token: str = "URL"
    seed_hashtags: frozenset = frozenset()
    strip_emoji: bool = False
    collapse_whitespace: bool = True

    def __post_init__(self):
        for name in ("user_token", "url_token"):
            tok = getattr(self, name)
            if not tok or any(c.isspace() for c in tok):
                raise ValueError(f"{name} must be non-empty and contain no whitespace")
        object.__setattr__(self, "seed_hashtags", normalize_seeds(self.seed_hashtags))

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in known}
        if "seed_hashtags" in kwargs:
            kwargs["seed_hashtags"] = frozenset(kwargs["seed_hashtags"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "user_token": self.user_token,
            "url_token": self.url_token,
            "seed_hashtags": sorted(self.seed_hashtags),
            "strip_emoji": self.strip_emoji,
            "collapse_whitespace": self.collapse_whitespace,
        }


def normalize_seeds(seeds) -> frozenset:
    """Store seed hashtags lowercase with a leading '#'."""
    out = set()
    for s in seeds:
        s = s.strip().lower()
        if not s:
            continue
        if not s.startswith("#"):
            s = "#" + s
        out.add(s)
    return frozenset(out)


def mask_mentions(text: str, cfg: NormalizationConfig) -> str:
    """Replace every user mention with the configured placeholder token."""
    return MENTION_RE.sub(cfg.user_token, text)


def mask_urls(text: str, cfg: NormalizationConfig) -> str:
    """Replace every hyperlink with the configured placeholder token."""
    return URL_RE.sub(cfg.url_token, text)


def strip_seed_hashtags(text: str, seeds) -> str:
    """Delete whole whitespace-delimited tokens whose lowercase form is a seed.

    Case-insensitive, mid-text occurrences included. Returns the text
    unchanged when nothing matches, so untouched inputs stay byte-identical.
    """
    if not seeds:
        return text
    tokens = text.split()
    kept = [t for t in tokens if t.lower() not in seeds]
    if len(kept) == len(tokens):
        return text
    return " ".join(kept)


# Code point ranges that render as emoji on their own.
_EMOJI_ALWAYS = (
    (0x1F300, 0x1F5FF),  # misc symbols and pictographs (incl. skin tone modifiers)
    (0x1F600, 0x1F64F),  # emoticons
    (0x1F680, 0x1F6FF),  # transport and map
    (0x1F900, 0x1F9FF),  # supplemental symbols and pictographs
    (0x1FA70, 0x1FAFF),  # symbols and pictographs extended-A
    (0x1F1E6, 0x1F1FF),  # regional indicators
)

# Ranges that render as emoji only with an explicit emoji variation selector.
_EMOJI_WITH_VS = (
    (0x2600, 0x27BF),  # misc symbols and dingbats
    (0x2B00, 0x2BFF),  # arrows, geometric shapes
    (0x00A9, 0x00A9),
    (0x00AE, 0x00AE),
    (0x2122, 0x2122),
)

_VS16 = 0xFE0F
_VS15 = 0xFE0E
_ZWJ = 0x200D
_SKIN_TONE = (0x1F3FB, 0x1F3FF)


def _in_ranges(cp: int, ranges) -> bool:
    return any(lo <= cp <= hi for lo, hi in ranges)


def _is_base(text: str, i: int) -> bool:
    cp = ord(text[i])
    if _in_ranges(cp, _EMOJI_ALWAYS):
        return True
    if _in_ranges(cp, _EMOJI_WITH_VS):
        return i + 1 < len(text) and ord(text[i + 1]) == _VS16
    return False


def _emoji_spans(text: str) -> list[tuple[int, int]]:
    """Half-open [start, end) spans of emoji units.

    A unit is a base pictograph plus attached variation selectors and skin
    tone modifiers, extended across zero-width joiners so a joined sequence
    counts as one emoji.
    """
    spans = []
    i, n = 0, len(text)
    ri_lo, ri_hi = 0x1F1E6, 0x1F1FF
    while i < n:
        if not _is_base(text, i):
            i += 1
            continue
        j = i + 1
        # A flag is a pair of regional indicators; fold the pair into one unit.
        if ri_lo <= ord(text[i]) <= ri_hi and j < n and ri_lo <= ord(text[j]) <= ri_hi:
            j += 1
        while j < n:
            cp = ord(text[j])
            if cp in (_VS16, _VS15) or _SKIN_TONE[0] <= cp <= _SKIN_TONE[1]:
                j += 1
            elif cp == _ZWJ and j + 1 < n and _is_base(text, j + 1):
                j += 2
            else:
                break
        spans.append((i, j))
        i = j
    return spans


def count_emoji(text: str) -> int:
    """Number of emoji units in the text (modifier sequences count once)."""
    return len(_emoji_spans(text))


def strip_emoji(text: str) -> str:
    """Remove all emoji units and collapse the remaining whitespace."""
    spans = _emoji_spans(text)
    if spans:
        parts = []
        prev = 0
        for start, end in spans:
            parts.append(text[prev:start])
            prev = end
        parts.append(text[prev:])
        text = "".join(parts)
    return " ".join(text.split())


def normalize_text(text: str, cfg: NormalizationConfig) -> str:
    """Apply URL masking, mention masking, seed hashtag removal, and optional
    emoji stripping until a fixed point, then collapse whitespace.

    The rewrite passes repeat because removing emoji can expose a maskable
    pattern (e.g. a mention glyph-split by an emoji); iterating to a fixed
    point is what makes the whole function idempotent.

    Raises EmptyAfterNormalization when nothing but whitespace remains.
    """
    prev = None
    for _ in range(8):
        if text == prev:
            break
        prev = text
        text = mask_urls(text, cfg)
        text = mask_mentions(text, cfg)
        text = strip_seed_hashtags(text, cfg.seed_hashtags)
        if cfg.strip_emoji:
            text = strip_emoji(text)
    if cfg.collapse_whitespace:
        text = " ".join(text.split())
    if not text.strip():
        raise EmptyAfterNormalization("text is empty after normalization")
    return text


def normalize_tweet(record: TweetRecord, cfg: NormalizationConfig) -> TweetRecord:
    """Return a copy of the record with normalized text."""
    return dataclasses.replace(record, text=normalize_text(record.text, cfg))
