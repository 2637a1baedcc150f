#!/usr/bin/env python3
"""Median-split and IQR-fence fixtures.

High labels are counted by brute force (number of scores strictly below
each score vs. the sorted middle); fences use numpy's linear quantiles.
Writes fixtures/corpus/*.json. Run from crates/core/.
"""
import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[2]


def brute_median(xs):
    s = sorted(xs)
    n = len(s)
    return s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2


def split_case(xs):
    med = brute_median(xs)
    return {"scores": xs, "high": [x > med for x in xs], "n_high": sum(x > med for x in xs)}


def fence_case(rng, n, kind):
    if kind == "heavy":
        score = np.round(rng.lognormal(4, 1.2, n)).astype(int)
        comments = np.round(rng.lognormal(2.5, 1.0, n)).astype(int) + 5
    else:
        score = rng.integers(5, 60, n)
        comments = rng.integers(5, 40, n)
        score[rng.integers(0, n)] = 5000
    fences = []
    keep = np.ones(n, dtype=bool)
    for col in (score, comments):
        q1, q3 = np.percentile(col.astype(float), [25, 75])
        lo, hi = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
        fences.append([lo, hi])
        keep &= (col >= lo) & (col <= hi)
    return {"score": score.tolist(), "num_comments": comments.tolist(), "fences": fences, "keep": keep.tolist()}


def main():
    rng = np.random.default_rng(20240501)
    uniform = rng.uniform(size=100).tolist()
    assert len(set(uniform)) == 100
    splits = [split_case(uniform)] + [split_case(rng.uniform(size=n).tolist()) for n in (1, 2, 7, 33)]
    splits.append(split_case([0.5] * 4 + [0.1, 0.9]))
    (ROOT / "fixtures/corpus/median_split.json").write_text(json.dumps({"cases": splits}, indent=1))

    fences = [fence_case(rng, n, kind) for n in (4, 8, 25, 120, 997) for kind in ("heavy", "spike")]
    (ROOT / "fixtures/corpus/iqr_fences.json").write_text(json.dumps({"cases": fences}))


if __name__ == "__main__":
    main()
