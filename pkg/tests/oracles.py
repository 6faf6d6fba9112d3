"""Brute-force reference implementations used to cross-check the production code.

Everything here is written as plain loops over Python scalars, independent of
the vectorized implementations under src/. Keep it that way: these functions
are the oracle side of the dual-route checks.
"""

from __future__ import annotations

import math


def oracle_class_thresholds(labels, probs):
    """t[j] = mean predicted probability of class j over rows labeled j."""
    k = len(probs[0])
    sums = [0.0] * k
    counts = [0] * k
    for lab, row in zip(labels, probs):
        sums[lab] += row[lab]
        counts[lab] += 1
    if any(c == 0 for c in counts):
        raise ValueError("class with zero rows")
    return [s / c for s, c in zip(sums, counts)]


def oracle_confident_joint(labels, probs):
    """Returns (C, uncounted_indices) by the per-row confident-assignment rule."""
    k = len(probs[0])
    t = oracle_class_thresholds(labels, probs)
    joint = [[0] * k for _ in range(k)]
    uncounted = []
    for r, (lab, row) in enumerate(zip(labels, probs)):
        above = [j for j in range(k) if row[j] >= t[j]]
        if not above:
            uncounted.append(r)
            continue
        best = above[0]
        for j in above[1:]:
            if row[j] > row[best]:  # ties keep the lowest class index
                best = j
        joint[lab][best] += 1
    return joint, uncounted


def oracle_label_issues(labels, probs):
    """List of (row, given, suggested, confidence) for off-diagonal rows."""
    k = len(probs[0])
    t = oracle_class_thresholds(labels, probs)
    issues = []
    for r, (lab, row) in enumerate(zip(labels, probs)):
        above = [j for j in range(k) if row[j] >= t[j]]
        if not above:
            continue
        best = above[0]
        for j in above[1:]:
            if row[j] > row[best]:
                best = j
        if best != lab:
            issues.append((r, lab, best, row[best]))
    return issues


def oracle_overlap_pairs(train_rows, test_rows):
    """All (i, j) index pairs with equal canonical rows, by O(n*m) comparison."""
    pairs = []
    for i, trow in enumerate(train_rows):
        for j, srow in enumerate(test_rows):
            if trow == srow:
                pairs.append((i, j))
    return pairs


def oracle_histogram(values, lo, hi, bins):
    """Equal-width histogram via edge scan (not the floor-index shortcut)."""
    width = (hi - lo) / bins
    edges = [lo + i * width for i in range(bins + 1)]
    counts = [0] * bins
    for x in values:
        placed = False
        for i in range(bins):
            if edges[i] <= x < edges[i + 1]:
                counts[i] += 1
                placed = True
                break
        if not placed:  # x == hi lands in the last (closed) bin
            counts[bins - 1] += 1
    return counts


def oracle_jsd_from_counts(counts_p, counts_q):
    """Jensen-Shannon divergence (base 2) after add-one smoothing of counts."""
    bins = len(counts_p)
    n_p = sum(counts_p) + bins
    n_q = sum(counts_q) + bins
    p = [(c + 1) / n_p for c in counts_p]
    q = [(c + 1) / n_q for c in counts_q]
    m = [(a + b) / 2 for a, b in zip(p, q)]
    kl_pm = sum(a * math.log2(a / c) for a, c in zip(p, m))
    kl_qm = sum(b * math.log2(b / c) for b, c in zip(q, m))
    return 0.5 * kl_pm + 0.5 * kl_qm


def oracle_feature_divergence(ref_values, test_values, bins):
    """Full histogram + JSD pipeline for a single numeric feature."""
    lo = min(min(ref_values), min(test_values))
    hi = max(max(ref_values), max(test_values))
    if hi == lo:
        return 0.0
    cp = oracle_histogram(ref_values, lo, hi, bins)
    cq = oracle_histogram(test_values, lo, hi, bins)
    return oracle_jsd_from_counts(cp, cq)


def oracle_harmonic(n):
    """H(n) as an exact fraction, for the isolation-forest path normalizer."""
    from fractions import Fraction

    return sum(Fraction(1, i) for i in range(1, n + 1))


def oracle_c_factor(n):
    """c(n) = 2*H(n-1) - 2*(n-1)/n computed from exact fractions."""
    from fractions import Fraction

    if n <= 1:
        return 0.0
    return float(2 * oracle_harmonic(n - 1) - Fraction(2 * (n - 1), n))
