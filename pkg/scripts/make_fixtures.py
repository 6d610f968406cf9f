#!/usr/bin/env python3
"""Regenerate the bundled benchmark fixtures in data/.

Both datasets are synthetic stand-ins matching the published summary
statistics of their namesakes (size, dimension, positive count):

* banana: two interleaved crescent-shaped clusters in 2-d,
  1000 rows, 439 positives.
* ringnorm: 20-d Gaussian mixture, positives from N(0, 4I) and negatives
  from N(m, I) with m_j = 2/sqrt(20), 1000 rows, 503 positives.
"""

import csv
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def make_banana(rng, n_pos=439, n_neg=561, noise=0.18):
    t_pos = rng.uniform(0.0, np.pi, size=n_pos)
    pos = np.column_stack([np.cos(t_pos), np.sin(t_pos)])
    t_neg = rng.uniform(0.0, np.pi, size=n_neg)
    neg = np.column_stack([1.0 - np.cos(t_neg), 0.5 - np.sin(t_neg)])
    x = np.vstack([pos, neg]) + rng.normal(scale=noise, size=(n_pos + n_neg, 2))
    y = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
    return x, y


def make_ringnorm(rng, n_pos=503, n_neg=497, dim=20):
    pos = rng.normal(scale=2.0, size=(n_pos, dim))
    shift = 2.0 / np.sqrt(dim)
    neg = rng.normal(loc=shift, scale=1.0, size=(n_neg, dim))
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
    return x, y


def write_csv(path, x, y, rng):
    order = rng.permutation(x.shape[0])
    x, y = x[order], y[order]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"f{j + 1}" for j in range(x.shape[1])] + ["label"])
        for row, label in zip(x, y):
            writer.writerow([repr(float(v)) for v in row] + [str(int(label))])
    print(f"wrote {path}: n={x.shape[0]}, d={x.shape[1]}, positives={(y > 0).sum()}")


def main():
    DATA_DIR.mkdir(exist_ok=True)
    rng = np.random.default_rng(8591)
    write_csv(DATA_DIR / "banana.csv", *make_banana(rng), rng=rng)
    write_csv(DATA_DIR / "ringnorm.csv", *make_ringnorm(rng), rng=rng)


if __name__ == "__main__":
    main()
