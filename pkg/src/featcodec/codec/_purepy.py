"""Pure-Python entropy kernels: adaptive range coder and coefficient codec.

This is the fallback twin of the compiled ``_speedups`` extension; both
must produce byte-identical streams. The coder is a carry-propagating
byte-oriented range coder (64-bit low, 32-bit range, renormalizing below
2^24). Symbol probabilities come from order-0 adaptive frequency tables
(init 1, increment 32, halved when the total passes 2^14), so encoder and
decoder stay in sync with no side information.

Coefficient payloads binarize each zigzag-scanned block as zero-run /
level tokens: a run symbol (or end-of-block) from the model of the band
the run starts in, then the level's magnitude-size symbol from the band
of the coefficient, then the remaining magnitude bits and the sign as
raw bypass bits. Bands split the scan at positions 1, bsq/16, and bsq/4.
A 16-bit sentinel (0xA55A) closes every stream so decoder desync is
detected instead of yielding garbage.
"""

from __future__ import annotations

import numpy as np

from ..errors import CodecError

TOP = 1 << 24
MASK32 = 0xFFFFFFFF
MODEL_INCREMENT = 32
MODEL_MAX_TOTAL = 1 << 14
SENTINEL = 0xA55A
MAX_LEVEL_BITS = 24


class RangeEncoder:
    __slots__ = ("_low", "_range", "_cache", "_cache_size", "_out")

    def __init__(self):
        self._low = 0
        self._range = MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()

    def _shift_low(self):
        low = self._low
        if low < 0xFF000000 or low > MASK32:
            carry = low >> 32
            self._out.append((self._cache + carry) & 0xFF)
            if self._cache_size > 1:
                self._out.extend(
                    bytes(((0xFF + carry) & 0xFF,)) * (self._cache_size - 1)
                )
            self._cache = (low >> 24) & 0xFF
            self._cache_size = 0
        self._cache_size += 1
        self._low = (low & 0xFFFFFF) << 8

    def encode(self, cum: int, freq: int, total: int):
        r = self._range // total
        self._low += r * cum
        self._range = r * freq
        while self._range < TOP:
            self._shift_low()
            self._range <<= 8

    def encode_bits(self, value: int, nbits: int):
        """Bypass-code nbits of value, most significant first."""
        for i in range(nbits - 1, -1, -1):
            self._range >>= 1
            if (value >> i) & 1:
                self._low += self._range
            if self._range < TOP:
                self._shift_low()
                self._range <<= 8

    def finish(self) -> bytes:
        for _ in range(5):
            self._shift_low()
        return bytes(self._out)


class RangeDecoder:
    __slots__ = ("_data", "_pos", "_range", "_code", "_r")

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._range = MASK32
        self._code = 0
        self._r = 1
        for _ in range(5):
            self._code = ((self._code << 8) | self._next_byte()) & MASK32

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise CodecError("payload exhausted mid-stream")
        b = self._data[self._pos]
        self._pos += 1
        return b

    def decode_target(self, total: int) -> int:
        self._r = self._range // total
        dv = self._code // self._r
        return total - 1 if dv >= total else dv

    def consume(self, cum: int, freq: int):
        self._code -= self._r * cum
        self._range = self._r * freq
        while self._range < TOP:
            self._code = ((self._code << 8) | self._next_byte()) & MASK32
            self._range <<= 8

    def decode_bits(self, nbits: int) -> int:
        v = 0
        for _ in range(nbits):
            self._range >>= 1
            bit = 1 if self._code >= self._range else 0
            if bit:
                self._code -= self._range
            v = (v << 1) | bit
            if self._range < TOP:
                self._code = ((self._code << 8) | self._next_byte()) & MASK32
                self._range <<= 8
        return v


class AdaptiveModel:
    """Order-0 adaptive frequencies with a Fenwick tree for prefix sums."""

    __slots__ = ("n", "freq", "total", "_tree", "_topbit")

    def __init__(self, n: int):
        self.n = n
        self.freq = [1] * n
        self.total = n
        topbit = 1
        while (topbit << 1) <= n:
            topbit <<= 1
        self._topbit = topbit
        self._rebuild()

    def _rebuild(self):
        tree = [0] * (self.n + 1)
        for i, f in enumerate(self.freq):
            j = i + 1
            tree[j] += f
            p = j + (j & -j)
            if p <= self.n:
                tree[p] += tree[j]
        self._tree = tree

    def cum(self, s: int) -> int:
        acc = 0
        tree = self._tree
        while s > 0:
            acc += tree[s]
            s -= s & -s
        return acc

    def find(self, target: int) -> tuple[int, int]:
        """Symbol s with cum(s) <= target < cum(s) + freq[s], plus cum(s)."""
        tree = self._tree
        idx = 0
        rem = target
        bit = self._topbit
        while bit:
            nxt = idx + bit
            if nxt <= self.n and tree[nxt] <= rem:
                idx = nxt
                rem -= tree[nxt]
            bit >>= 1
        return idx, target - rem

    def update(self, s: int):
        self.freq[s] += MODEL_INCREMENT
        self.total += MODEL_INCREMENT
        j = s + 1
        tree = self._tree
        while j <= self.n:
            tree[j] += MODEL_INCREMENT
            j += j & -j
        if self.total > MODEL_MAX_TOTAL:
            freq = self.freq
            total = 0
            for i in range(self.n):
                f = (freq[i] + 1) >> 1
                freq[i] = f
                total += f
            self.total = total
            self._rebuild()

    def encode_with(self, enc: RangeEncoder, s: int):
        enc.encode(self.cum(s), self.freq[s], self.total)
        self.update(s)

    def decode_with(self, dec: RangeDecoder) -> int:
        s, cum = self.find(dec.decode_target(self.total))
        dec.consume(cum, self.freq[s])
        self.update(s)
        return s


def encode_symbols(symbols, alphabet_size: int) -> bytes:
    """Range-code a symbol sequence with one adaptive order-0 model."""
    enc = RangeEncoder()
    model = AdaptiveModel(alphabet_size)
    for s in np.asarray(symbols, dtype=np.int64).tolist():
        if not 0 <= s < alphabet_size:
            raise CodecError(f"symbol {s} outside alphabet [0, {alphabet_size})")
        model.encode_with(enc, s)
    enc.encode_bits(SENTINEL, 16)
    return enc.finish()


def decode_symbols(data: bytes, count: int, alphabet_size: int) -> np.ndarray:
    dec = RangeDecoder(data)
    model = AdaptiveModel(alphabet_size)
    out = np.empty(count, dtype=np.int32)
    for i in range(count):
        out[i] = model.decode_with(dec)
    if dec.decode_bits(16) != SENTINEL:
        raise CodecError("end-of-stream sentinel mismatch: decoder desync")
    return out


def _band(pos: int, bsq: int) -> int:
    if pos == 0:
        return 0
    if pos < bsq // 16:
        return 1
    if pos < bsq // 4:
        return 2
    return 3


def encode_coeff_blocks(zz: np.ndarray) -> bytes:
    """Run/level-code zigzagged coefficient blocks (nblocks x bsq, int32)."""
    nblocks, bsq = zz.shape
    enc = RangeEncoder()
    run_models = [AdaptiveModel(bsq + 1) for _ in range(4)]
    size_models = [AdaptiveModel(MAX_LEVEL_BITS) for _ in range(4)]
    eob = bsq
    for b in range(nblocks):
        row = zz[b].tolist()
        pos = 0
        while pos < bsq:
            nz = pos
            while nz < bsq and row[nz] == 0:
                nz += 1
            if nz == bsq:
                run_models[_band(pos, bsq)].encode_with(enc, eob)
                break
            run_models[_band(pos, bsq)].encode_with(enc, nz - pos)
            level = row[nz]
            mag = -level if level < 0 else level
            size = mag.bit_length()
            if size > MAX_LEVEL_BITS:
                raise CodecError(f"coefficient magnitude {mag} too large to code")
            size_models[_band(nz, bsq)].encode_with(enc, size - 1)
            if size > 1:
                enc.encode_bits(mag - (1 << (size - 1)), size - 1)
            enc.encode_bits(1 if level < 0 else 0, 1)
            pos = nz + 1
    enc.encode_bits(SENTINEL, 16)
    return enc.finish()


def decode_coeff_blocks(data: bytes, nblocks: int, bsq: int) -> np.ndarray:
    dec = RangeDecoder(data)
    run_models = [AdaptiveModel(bsq + 1) for _ in range(4)]
    size_models = [AdaptiveModel(MAX_LEVEL_BITS) for _ in range(4)]
    eob = bsq
    out = np.zeros((nblocks, bsq), dtype=np.int32)
    for b in range(nblocks):
        row = out[b]
        pos = 0
        while pos < bsq:
            sym = run_models[_band(pos, bsq)].decode_with(dec)
            if sym == eob:
                break
            pos += sym
            if pos >= bsq:
                raise CodecError("run symbol overflows block: corrupt payload")
            size = size_models[_band(pos, bsq)].decode_with(dec) + 1
            mag = 1 << (size - 1)
            if size > 1:
                mag += dec.decode_bits(size - 1)
            row[pos] = -mag if dec.decode_bits(1) else mag
            pos += 1
    if dec.decode_bits(16) != SENTINEL:
        raise CodecError("end-of-stream sentinel mismatch: decoder desync")
    return out
