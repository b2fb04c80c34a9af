"""Candidate generators: a deterministic stub and a checkpoint wrapper.

The stub needs no model assets. Its output for a given (text, num_return,
top_p, max_length, seed) tuple is a pure function of those values: the RNG
is seeded from their repr (string seeding is stable across processes), so
two servers started from the same config answer identically.

The rewrite rules are chosen so a downstream similarity cascade sees every
case it handles: verbatim copies, near-copies, plausible rewrites via a
small synonym table, token shuffles, repeats of an earlier candidate, and
unrelated filler with no lexical overlap.
"""

import random

SYNONYMS = {
    "good": "great",
    "great": "good",
    "bad": "awful",
    "happy": "glad",
    "sad": "unhappy",
    "big": "huge",
    "small": "tiny",
    "fast": "quick",
    "really": "truly",
    "very": "so",
    "think": "believe",
    "love": "adore",
    "hate": "despise",
    "nice": "pleasant",
    "today": "now",
}

# deliberately disjoint from SYNONYMS and from typical test vocabularies
FILLER = (
    "quartz", "violet", "ember", "drift", "lantern", "mosaic",
    "pepper", "canyon", "harbor", "velvet", "juniper", "cinder",
)


class StubGenerator:
    """Rule-based paraphrase stand-in. Pure computation, no assets."""

    def __init__(self, default_seed: int = 0):
        self.default_seed = default_seed

    def generate(self, text, num_return, top_p, max_length, seed):
        effective = self.default_seed if seed is None else seed
        rng = random.Random(repr((effective, top_p, max_length, text)))
        tokens = text.split()
        out = []
        for _ in range(num_return):
            roll = rng.random()
            if roll < 0.15:
                cand = text
            elif roll < 0.30 and out:
                cand = rng.choice(out)
            elif roll < 0.45:
                cand = " ".join(rng.choice(FILLER) for _ in range(rng.randint(3, 7)))
            elif roll < 0.65:
                cand = self._near_copy(tokens, rng)
            elif roll < 0.85:
                cand = self._synonym_swap(tokens, rng)
            else:
                cand = self._shuffle(tokens, rng)
            cand = " ".join(cand.split()[:max_length]) or text
            out.append(cand)
        return out

    def _near_copy(self, tokens, rng):
        t = list(tokens)
        t.insert(rng.randrange(len(t) + 1), rng.choice(FILLER))
        return " ".join(t)

    def _synonym_swap(self, tokens, rng):
        t = [SYNONYMS.get(tok.lower(), tok) for tok in tokens]
        for _ in range(rng.randint(1, 3)):
            if len(t) > 1 and rng.random() < 0.5:
                t.pop(rng.randrange(len(t)))
            else:
                t.insert(rng.randrange(len(t) + 1), rng.choice(FILLER))
        return " ".join(t)

    def _shuffle(self, tokens, rng):
        t = list(tokens)
        rng.shuffle(t)
        return " ".join(t)


class CheckpointGenerator:
    """Wraps a fine-tuned seq2seq checkpoint behind the same interface.

    Imports the model stack lazily so stub deployments never touch it.
    Outputs from this family of models contain no emoji, so pipelines that
    must preserve emoji need to re-inject them downstream; the stub mirrors
    plain-text outputs only. Construction loads weights and can take a
    while; call it once at startup, not per request.
    """

    def __init__(self, checkpoint: str, device: str = "cpu"):
        import torch  # deferred heavy imports
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(checkpoint).to(device)
        self.device = device
        self._torch = torch

    def generate(self, text, num_return, top_p, max_length, seed):
        torch = self._torch
        if seed is not None:
            torch.manual_seed(seed)
        enc = self.tokenizer(text, return_tensors="pt", truncation=True,
                             max_length=max_length).to(self.device)
        with torch.no_grad():
            seqs = self.model.generate(
                **enc,
                do_sample=True,
                top_p=top_p,  # 1.0 means no nucleus truncation
                max_length=max_length,
                num_return_sequences=num_return,
            )
        return self.tokenizer.batch_decode(seqs, skip_special_tokens=True)


def load_generator(config):
    """Build the generator a config asks for; stub mode loads nothing."""
    if config.stub_mode:
        return StubGenerator(default_seed=config.defaults.seed)
    return CheckpointGenerator(config.checkpoint, config.device)
