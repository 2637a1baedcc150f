#!/usr/bin/env python3
"""Brute-force 1 - Pearson r matrices for random feature matrices.

Each pair is computed independently with scipy.stats.pearsonr. Writes
fixtures/distinct/pearson_*.json. Run from crates/core/.
"""
import json
from pathlib import Path

import numpy as np
from scipy.stats import pearsonr

ROOT = Path(__file__).resolve().parents[2]


def case(rng, n, d, kind):
    if kind == "relu":
        f = np.maximum(rng.normal(0.2, 1.0, size=(n, d)), 0.0)
    else:
        f = rng.normal(size=(n, d)) * rng.uniform(0.5, 3.0, size=(n, 1)) + rng.normal(size=(n, 1))
    f = f.astype(np.float32).astype(np.float64)  # f32-representable inputs
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                m[i, j] = 1.0 - pearsonr(f[i], f[j])[0]
    means = m.sum(axis=1) / (n - 1)
    return {"rows": f.tolist(), "distance": m.tolist(), "mean_dissimilarity": means.tolist()}


def main():
    rng = np.random.default_rng(20240611)
    out = ROOT / "fixtures" / "distinct"
    out.mkdir(parents=True, exist_ok=True)
    for name, n, d, kind in [("pearson_5x12", 5, 12, "gauss"), ("pearson_20x500", 20, 500, "relu")]:
        (out / f"{name}.json").write_text(json.dumps(case(rng, n, d, kind)) + "\n", encoding="utf-8")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
