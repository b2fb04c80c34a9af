#!/usr/bin/env python3
"""Generate a synthetic labeled dataset for pipeline demos and benchmarks.

Texts deliberately mix mentions, links, hashtags, and emoji so every
normalization path gets exercised. Fully seeded: same flags, same bytes.
"""

import argparse
import json
import random

NOUNS = "cat dog train meeting coffee game weather road team movie".split()
VERBS = "loves hates watches misses joins skips enjoys avoids".split()
EXTRA = "today again finally maybe honestly truly never always".split()
EMOJI = ["\U0001f600", "\U0001f389", "\U0001f44d", "\U0001f622", "\U0001f525"]


def make_text(rng: random.Random) -> str:
    parts = [
        "my" if rng.random() < 0.5 else "the",
        rng.choice(NOUNS),
        rng.choice(VERBS),
        "the",
        rng.choice(NOUNS),
        rng.choice(EXTRA),
    ]
    if rng.random() < 0.3:
        parts.insert(0, f"@user{rng.randint(1, 99)}")
    if rng.random() < 0.2:
        parts.append(f"https://t.co/{rng.randint(100, 999)}")
    if rng.random() < 0.25:
        parts.append("#monday")
    if rng.random() < 0.3:
        parts.append(rng.choice(EMOJI))
    return " ".join(parts)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--classes", default="pos,neg")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    classes = args.classes.split(",")
    rng = random.Random(args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for i in range(args.n):
            row = {
                "id": f"s{i:05d}",
                "text": make_text(rng),
                "label": rng.choice(classes),
            }
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    print(f"wrote {args.n} records to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
