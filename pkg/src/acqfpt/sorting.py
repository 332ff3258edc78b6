"""Linear-time grouping of integer key rows by LSD radix sort.

Keys are dense non-negative ids below a known bound. Each key column is
split into 16-bit digits; numpy's stable sort on uint16 is a radix sort, so
a full pass is linear in the number of rows. Setting the environment
variable ``ACQFPT_COMPARISON_SORT=1`` switches to ``np.lexsort`` for
debugging.
"""
from __future__ import annotations

import os

import numpy as np


def comparison_sort_enabled() -> bool:
    return os.environ.get("ACQFPT_COMPARISON_SORT") == "1"


def radix_order(keys: np.ndarray, bound: int) -> np.ndarray:
    """Permutation sorting the rows of ``keys`` lexicographically (stable)."""
    keys = np.asarray(keys, dtype=np.int64)
    if keys.ndim == 1:
        keys = keys[:, None]
    m, width = keys.shape
    if m == 0 or width == 0:
        return np.arange(m, dtype=np.int64)
    if comparison_sort_enabled():
        return np.lexsort(keys.T[::-1]).astype(np.int64)
    digits = max(1, (int(max(bound, 1)) - 1).bit_length() + 15 >> 4)
    perm = np.arange(m, dtype=np.int64)
    for col in range(width - 1, -1, -1):
        column = keys[:, col]
        for d in range(digits):
            digit = ((column[perm] >> (16 * d)) & 0xFFFF).astype(np.uint16)
            perm = perm[np.argsort(digit, kind="stable")]
    return perm


def group_ids(keys: np.ndarray, bound: int) -> tuple[np.ndarray, int]:
    """Dense class id per row (equal rows share an id, ids follow key order) and the class count."""
    keys = np.asarray(keys, dtype=np.int64)
    if keys.ndim == 1:
        keys = keys[:, None]
    m = keys.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.int64), 0
    perm = radix_order(keys, bound)
    ordered = keys[perm]
    starts = np.ones(m, dtype=bool)
    if keys.shape[1]:
        starts[1:] = (ordered[1:] != ordered[:-1]).any(axis=1)
    else:
        starts[1:] = False
    sorted_ids = np.cumsum(starts) - 1
    ids = np.empty(m, dtype=np.int64)
    ids[perm] = sorted_ids
    return ids, int(sorted_ids[-1]) + 1
