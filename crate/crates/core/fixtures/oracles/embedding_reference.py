#!/usr/bin/env python3
"""Toy 100-d word-vector table and brute-force consistency cases.

Vectors use small integers in the first few components (rest zero) so every
cosine can be checked by hand. Writes fixtures/embeddings/toy.100d.txt and
fixtures/embeddings/consistency_cases.json. Run from crates/core/.
"""
import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[2]
DIM = 100

HEAD = {
    "stone":     [4, 1, 0, 0, 0],
    "rock":      [3, 1, 1, 0, 0],
    "ground":    [1, 0, 3, 1, 0],
    "tower":     [1, 3, 0, 0, 1],
    "dragon":    [0, 0, 0, 2, 3],
    "sculpture": [2, 2, 0, 0, 1],
    "water":     [0, 0, 4, 0, -1],
    "money":     [-1, 0, 0, 3, 0],
    "tree":      [0, 1, 2, 0, 2],
    "sky":       [0, 2, 1, -2, 0],
}

CASES = [
    (["stone"], ["stone"]),
    (["rock"], ["stone", "ground"]),
    (["rock"], ["ground", "stone"]),
    (["stone"], ["stone", "tower"]),
    (["water", "water"], ["water"]),
    (["rock", "dragon", "tree", "money"], ["stone", "sculpture", "sky"]),
    (["dragon", "unicorn", "tower"], ["sculpture", "tree"]),
    (["money", "sky"], ["water", "tower", "ground"]),
    (["unicorn"], ["stone"]),
    (["stone"], ["unicorn"]),
]


def vec(word):
    v = np.zeros(DIM)
    v[: len(HEAD[word])] = HEAD[word]
    return v


def cos(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def main():
    lines = []
    for w in HEAD:
        lines.append(w + " " + " ".join(f"{x:g}" for x in vec(w)))
    (ROOT / "fixtures" / "embeddings" / "toy.100d.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    cases = []
    for tokens, labels in CASES:
        in_labels = [l for l in labels if l in HEAD]
        pairs, skipped = [], 0
        for t in tokens:
            if t not in HEAD or not in_labels:
                skipped += 1
                continue
            sims = [cos(vec(t), vec(l)) for l in in_labels]
            best = int(np.argmax(sims))  # first maximum
            pairs.append([t, in_labels[best], sims[best]])
        value = float(np.mean([p[2] for p in pairs])) if pairs else None
        cases.append({"tokens": tokens, "labels": labels, "value": value, "matched_pairs": pairs, "skipped_tokens": skipped})
    out = ROOT / "fixtures" / "embeddings" / "consistency_cases.json"
    out.write_text(json.dumps({"cases": cases}, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(cases)} cases")


if __name__ == "__main__":
    main()
