#!/usr/bin/env python3
"""End-to-end offline pipeline demo on synthetic data.

Builds a dataset, normalizes it, fabricates deterministic candidate
paraphrases locally (no backend needed), filters them, selects Para-n
training sets, and splits the result. Everything lands in --workdir and
reruns are byte-identical.
"""

import argparse
import json
import os
import random
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))


def sh(*argv):
    print("+", " ".join(argv))
    subprocess.run(argv, check=True)


def fabricate_candidates(records_path, out_path, seed, num_return=10):
    """Deterministic local stand-in for a generation backend: shuffles,
    drops, and word-substitutes the original tokens."""
    swaps = {"the": "a", "my": "our", "loves": "likes", "hates": "dislikes",
             "today": "tonight", "again": "once more"}
    with open(records_path, encoding="utf-8") as fh:
        records = [json.loads(l) for l in fh if l.strip()]
    with open(out_path, "w", encoding="utf-8") as fh:
        for rec in records:
            rng = random.Random((seed, rec["id"]).__repr__())
            tokens = rec["text"].split()
            cands = []
            for _ in range(num_return):
                roll = rng.random()
                toks = list(tokens)
                if roll < 0.15:
                    pass                      # verbatim copy
                elif roll < 0.5:
                    toks = [swaps.get(t, t) for t in toks]
                elif roll < 0.8:
                    k = rng.randrange(len(toks))
                    toks = toks[k:] + toks[:k]  # rotation keeps most trigrams at k=0 only
                else:
                    toks = ["completely", "different", "content", str(rng.randint(0, 9))]
                cands.append(" ".join(toks))
            line = {"id": rec["id"], "candidates": cands}
            fh.write(json.dumps(line, sort_keys=True, ensure_ascii=False) + "\n")
    print(f"fabricated candidates for {len(records)} records -> {out_path}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="demo_run")
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20260817)
    args = ap.parse_args()

    os.makedirs(args.workdir, exist_ok=True)
    raw = os.path.join(args.workdir, "raw.jsonl")
    norm = os.path.join(args.workdir, "normalized.jsonl")
    cands = os.path.join(args.workdir, "candidates.jsonl")
    clean = os.path.join(args.workdir, "para_clean.jsonl")

    sh(sys.executable, os.path.join(HERE, "make_synth_dataset.py"),
       "--n", str(args.n), "--seed", str(args.seed), "--out", raw)
    sh("parapipe", "normalize", "--in", raw, "--out", norm,
       "--seed-hashtags", "#monday")
    fabricate_candidates(norm, cands, args.seed)
    sh("parapipe", "para-clean", "--in", norm, "--candidates", cands,
       "--out", clean)
    for n in (1, 2, 4, 5):
        out = os.path.join(args.workdir, f"para{n}.jsonl")
        sh("parapipe", "select-para-n", "--in", clean, "--n", str(n), "--out", out)
    sh("parapipe", "split", "--in", os.path.join(args.workdir, "para5.jsonl"),
       "--out-dir", os.path.join(args.workdir, "splits"), "--seed", str(args.seed))
    print("demo artifacts in", args.workdir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
