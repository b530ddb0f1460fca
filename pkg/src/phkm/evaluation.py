"""Adjusted Rand index from the pair-counting contingency table."""

from fractions import Fraction

import numpy as np


def _pairs(counts) -> int:
    counts = np.asarray(counts, dtype=object)
    return int(sum(c * (c - 1) // 2 for c in counts.ravel()))


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected agreement between two labelings of the same items.

    Computed in exact integer arithmetic. When the expected and maximal
    index coincide (both labelings all-in-one or all-singletons) the result
    is 1.0 for identical partitions and 0.0 otherwise.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"label vectors must be 1-d and equally long, got {a.shape} and {b.shape}")
    n = len(a)
    if n < 2:
        raise ValueError("need at least two items")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia.ravel(), ib.ravel()), 1)
    index = _pairs(table)
    rows = _pairs(table.sum(axis=1))
    cols = _pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    num = 2 * (index * total - rows * cols)
    den = (rows + cols) * total - 2 * rows * cols
    if den == 0:
        nonzero = table > 0
        same = bool(np.all(nonzero.sum(axis=0) == 1) and np.all(nonzero.sum(axis=1) == 1))
        return 1.0 if same else 0.0
    return float(Fraction(num, den))
