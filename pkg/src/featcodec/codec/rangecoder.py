"""Lossless adaptive entropy layer, with compiled/pure backend selection.

The compiled extension is preferred when it built; the pure-Python twin
is the fallback. Both produce byte-identical streams, so fixtures and
golden files are backend-independent. ``benchmarks/bench_backends.py``
compares their throughput.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import CodecError, FormatError

try:
    from . import _speedups as kernel

    BACKEND = "compiled"
except ImportError:  # extension not built: fall back to the pure twin
    from . import _purepy as kernel

    BACKEND = "python"


def range_encode(symbols, alphabet_size: int) -> bytes:
    """Encode integer symbols in [0, alphabet_size) to a self-framed stream.

    The two sides share only the alphabet size; the adaptive frequency
    model starts uniform and tracks the stream identically on both ends.
    """
    if alphabet_size < 1 or alphabet_size > (1 << 16):
        raise CodecError(f"alphabet size {alphabet_size} outside [1, 65536]")
    syms = np.ascontiguousarray(symbols, dtype=np.int64)
    if syms.ndim != 1:
        raise CodecError("symbols must be a 1D sequence")
    header = struct.pack("<I", syms.size)
    if syms.size == 0:
        return header
    return header + kernel.encode_symbols(syms, alphabet_size)


def range_decode(data: bytes, alphabet_size: int) -> np.ndarray:
    """Inverse of range_encode; raises CodecError on desync or truncation."""
    if len(data) < 4:
        raise FormatError("range-coded stream shorter than its count header")
    (count,) = struct.unpack_from("<I", data, 0)
    if count == 0:
        return np.empty(0, dtype=np.int32)
    return kernel.decode_symbols(data[4:], count, alphabet_size)
