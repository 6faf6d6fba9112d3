"""Seeded synthetic datasets shared by module tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

# Frozen inputs of the label-noise recovery check. The golden recall below was
# produced by running tests/oracles.py:oracle_label_issues on exactly this
# generator output before the production implementation existed; the check
# asserts production recall >= NOISE_RECALL_GOLDEN - 0.02.
NOISE_N = 3000
NOISE_K = 3
NOISE_FLIP_FRACTION = 0.05
NOISE_MARGIN = 3.0
NOISE_SEED = 20230725
NOISE_RECALL_GOLDEN = 0.76


def noisy_label_dataset(
    n=NOISE_N,
    k=NOISE_K,
    flip_fraction=NOISE_FLIP_FRACTION,
    margin=NOISE_MARGIN,
    seed=NOISE_SEED,
):
    """Observed labels, per-class probabilities, and the flipped row indices.

    The probability model is an oracle over the *true* labels: logits are unit
    Gaussians with `margin` added on the true class, then softmaxed. A
    flip_fraction share of observed labels is flipped uniformly to another
    class, so the flipped indices are exactly the rows a label-fault detector
    should recover.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    true = rng.integers(0, k, size=n)
    logits = rng.normal(0.0, 1.0, size=(n, k))
    logits[np.arange(n), true] += margin
    shifted = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    probs /= probs.sum(axis=1, keepdims=True)
    observed = true.copy()
    n_flip = int(round(n * flip_fraction))
    flip_idx = rng.choice(n, size=n_flip, replace=False)
    offsets = rng.integers(1, k, size=n_flip)
    observed[flip_idx] = (true[flip_idx] + offsets) % k
    return observed, probs, np.sort(flip_idx)


def gaussian_blob_with_outlier(n=500, dims=2, sigma=1.0, distance=10.0, seed=7):
    """n inlier rows around the origin plus one far outlier appended last."""
    rng = np.random.Generator(np.random.PCG64(seed))
    inliers = rng.normal(0.0, sigma, size=(n, dims))
    outlier = np.full((1, dims), distance * sigma)
    return np.vstack([inliers, outlier])


# Disjoint-support fixture of the divergence golden check: 100 reference values
# in [0.005, 0.995] and 100 test values in [2.005, 2.995], chosen off the
# bin-edge grid so the histogram assignment is float-robust.
def disjoint_support_values():
    ref = [0.005 + 0.01 * i for i in range(100)]
    test = [2.005 + 0.01 * i for i in range(100)]
    return ref, test


# Pinned by the pre-build oracle run (oracle_feature_divergence, bins=10).
DISJOINT_JSD_GOLDEN = 0.7615859514757799
