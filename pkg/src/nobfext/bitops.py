"""Bit scatter/gather helpers shared by the enumeration kernels.

All outcome integers follow the package convention: coordinate i of a
source is bit i (LSB-first) of the packed int.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def scatter_bits(value: int, positions: Sequence[int]) -> int:
    """Deposit bit j of value at positions[j]."""
    out = 0
    for j, p in enumerate(positions):
        out |= ((value >> j) & 1) << p
    return out


def gather_bits(value: int, positions: Sequence[int]) -> int:
    """Collect the bits at positions into a compact int, positions[j] -> bit j."""
    out = 0
    for j, p in enumerate(positions):
        out |= ((value >> p) & 1) << j
    return out


def scatter_bits_vec(values: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    out = np.zeros(values.shape, dtype=np.uint64)
    v = values.astype(np.uint64, copy=False)
    for j, p in enumerate(positions):
        out |= ((v >> np.uint64(j)) & np.uint64(1)) << np.uint64(p)
    return out


def gather_bits_vec(values: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    out = np.zeros(values.shape, dtype=np.uint64)
    v = values.astype(np.uint64, copy=False)
    for j, p in enumerate(positions):
        out |= ((v >> np.uint64(p)) & np.uint64(1)) << np.uint64(j)
    return out
