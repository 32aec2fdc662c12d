"""Orthonormal 2D DCT-II on square blocks, plus the zigzag scan order."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def dct_matrix(block: int) -> np.ndarray:
    """Orthonormal DCT-II basis; row u is the u-th frequency vector."""
    x = np.arange(block)
    m = np.cos(np.pi * (2 * x[None, :] + 1) * x[:, None] / (2 * block))
    m *= np.sqrt(2.0 / block)
    m[0] *= np.sqrt(0.5)
    return m


def dct2(block: np.ndarray) -> np.ndarray:
    """Forward 2D DCT of one block or a (..., B, B) stack."""
    m = dct_matrix(block.shape[-1])
    return np.matmul(np.matmul(m, block), m.T)


def idct2(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of dct2."""
    m = dct_matrix(coeffs.shape[-1])
    return np.matmul(np.matmul(m.T, coeffs), m)


@lru_cache(maxsize=None)
def zigzag_order(block: int) -> np.ndarray:
    """Flat in-block indices in JPEG-style zigzag order (length block**2)."""
    order = []
    for s in range(2 * block - 1):
        rows = range(max(0, s - block + 1), min(s, block - 1) + 1)
        if s % 2 == 0:
            rows = reversed(rows)
        order.extend(r * block + (s - r) for r in rows)
    return np.asarray(order, dtype=np.int64)
