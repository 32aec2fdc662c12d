# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_purepy``: identical algorithm, identical bytes.

See the pure-Python module for the format description. Any change here
must be mirrored there; the cross-backend test asserts byte equality.
"""

from libc.stdint cimport int32_t, int64_t, uint8_t, uint32_t, uint64_t
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memset

import numpy as np

from featcodec.errors import CodecError

cdef enum:
    TOP = 16777216            # 1 << 24
    MODEL_INCREMENT = 32
    MODEL_MAX_TOTAL = 16384   # 1 << 14
    SENTINEL = 0xA55A
    MAX_LEVEL_BITS = 24


cdef class _Encoder:
    cdef uint64_t low
    cdef uint32_t range_
    cdef uint32_t cache
    cdef uint64_t cache_size
    cdef uint8_t* buf
    cdef size_t cap
    cdef size_t size

    def __cinit__(self):
        self.low = 0
        self.range_ = 0xFFFFFFFFU
        self.cache = 0
        self.cache_size = 1
        self.cap = 1 << 16
        self.size = 0
        self.buf = <uint8_t*> malloc(self.cap)
        if self.buf == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self.buf != NULL:
            free(self.buf)

    cdef inline int _put(self, uint8_t b) except -1:
        cdef uint8_t* grown
        if self.size == self.cap:
            self.cap <<= 1
            grown = <uint8_t*> realloc(self.buf, self.cap)
            if grown == NULL:
                raise MemoryError()
            self.buf = grown
        self.buf[self.size] = b
        self.size += 1
        return 0

    cdef inline int _shift_low(self) except -1:
        cdef uint32_t carry
        if self.low < <uint64_t> 0xFF000000U or self.low > <uint64_t> 0xFFFFFFFFU:
            carry = <uint32_t> (self.low >> 32)
            self._put(<uint8_t> ((self.cache + carry) & 0xFF))
            while self.cache_size > 1:
                self._put(<uint8_t> ((0xFF + carry) & 0xFF))
                self.cache_size -= 1
            self.cache = <uint32_t> ((self.low >> 24) & 0xFF)
            self.cache_size = 0
        self.cache_size += 1
        self.low = (self.low & 0xFFFFFF) << 8
        return 0

    cdef inline int encode(self, uint32_t cum, uint32_t freq, uint32_t total) except -1:
        cdef uint32_t r = self.range_ // total
        self.low += <uint64_t> r * cum
        self.range_ = r * freq
        while self.range_ < TOP:
            self._shift_low()
            self.range_ <<= 8
        return 0

    cdef inline int encode_bits(self, uint32_t value, int nbits) except -1:
        cdef int i
        for i in range(nbits - 1, -1, -1):
            self.range_ >>= 1
            if (value >> i) & 1:
                self.low += self.range_
            if self.range_ < TOP:
                self._shift_low()
                self.range_ <<= 8
        return 0

    cdef bytes finish(self):
        cdef int k
        for k in range(5):
            self._shift_low()
        return (<char*> self.buf)[:self.size]


cdef class _Decoder:
    cdef const uint8_t[::1] view
    cdef size_t pos
    cdef size_t size
    cdef uint32_t range_
    cdef uint32_t code
    cdef uint32_t r

    def __cinit__(self, const uint8_t[::1] data):
        cdef int k
        self.view = data
        self.pos = 0
        self.size = data.shape[0]
        self.range_ = 0xFFFFFFFFU
        self.code = 0
        self.r = 1
        for k in range(5):
            self.code = (self.code << 8) | <uint32_t> self._next_byte()

    cdef inline int _next_byte(self) except -1:
        cdef int b
        if self.pos >= self.size:
            raise CodecError("payload exhausted mid-stream")
        b = self.view[self.pos]
        self.pos += 1
        return b

    cdef inline uint32_t decode_target(self, uint32_t total) except? 0xFFFFFFFF:
        cdef uint32_t dv
        self.r = self.range_ // total
        dv = self.code // self.r
        if dv >= total:
            dv = total - 1
        return dv

    cdef inline int consume(self, uint32_t cum, uint32_t freq) except -1:
        self.code -= self.r * cum
        self.range_ = self.r * freq
        while self.range_ < TOP:
            self.code = (self.code << 8) | <uint32_t> self._next_byte()
            self.range_ <<= 8
        return 0

    cdef inline int64_t decode_bits(self, int nbits) except? -1:
        cdef int64_t v = 0
        cdef int bit, k
        for k in range(nbits):
            self.range_ >>= 1
            bit = 1 if self.code >= self.range_ else 0
            if bit:
                self.code -= self.range_
            v = (v << 1) | bit
            if self.range_ < TOP:
                self.code = (self.code << 8) | <uint32_t> self._next_byte()
                self.range_ <<= 8
        return v


cdef class _Model:
    cdef int n
    cdef int topbit
    cdef uint32_t total
    cdef uint32_t* freq
    cdef uint32_t* tree

    def __cinit__(self, int n):
        cdef int i
        self.n = n
        self.total = n
        self.topbit = 1
        while (self.topbit << 1) <= n:
            self.topbit <<= 1
        self.freq = <uint32_t*> malloc(n * sizeof(uint32_t))
        self.tree = <uint32_t*> malloc((n + 1) * sizeof(uint32_t))
        if self.freq == NULL or self.tree == NULL:
            raise MemoryError()
        for i in range(n):
            self.freq[i] = 1
        self._rebuild()

    def __dealloc__(self):
        if self.freq != NULL:
            free(self.freq)
        if self.tree != NULL:
            free(self.tree)

    cdef void _rebuild(self):
        cdef int i, j, p
        memset(self.tree, 0, (self.n + 1) * sizeof(uint32_t))
        for i in range(self.n):
            j = i + 1
            self.tree[j] += self.freq[i]
            p = j + (j & -j)
            if p <= self.n:
                self.tree[p] += self.tree[j]

    cdef inline uint32_t cum(self, int s):
        cdef uint32_t acc = 0
        while s > 0:
            acc += self.tree[s]
            s -= s & -s
        return acc

    cdef inline int find(self, uint32_t target, uint32_t* cum_out):
        cdef int idx = 0
        cdef int bit = self.topbit
        cdef int nxt
        cdef uint32_t rem = target
        while bit:
            nxt = idx + bit
            if nxt <= self.n and self.tree[nxt] <= rem:
                idx = nxt
                rem -= self.tree[nxt]
            bit >>= 1
        cum_out[0] = target - rem
        return idx

    cdef void update(self, int s):
        cdef int i, j
        cdef uint32_t f, total
        self.freq[s] += MODEL_INCREMENT
        self.total += MODEL_INCREMENT
        j = s + 1
        while j <= self.n:
            self.tree[j] += MODEL_INCREMENT
            j += j & -j
        if self.total > MODEL_MAX_TOTAL:
            total = 0
            for i in range(self.n):
                f = (self.freq[i] + 1) >> 1
                self.freq[i] = f
                total += f
            self.total = total
            self._rebuild()

    cdef inline int encode_with(self, _Encoder enc, int s) except -1:
        enc.encode(self.cum(s), self.freq[s], self.total)
        self.update(s)
        return 0

    cdef inline int decode_with(self, _Decoder dec) except -1:
        cdef uint32_t cum = 0
        cdef int s = self.find(dec.decode_target(self.total), &cum)
        dec.consume(cum, self.freq[s])
        self.update(s)
        return s


def encode_symbols(symbols, int alphabet_size):
    """Range-code a symbol sequence with one adaptive order-0 model."""
    cdef int64_t[::1] syms = np.ascontiguousarray(symbols, dtype=np.int64)
    cdef _Encoder enc = _Encoder()
    cdef _Model model = _Model(alphabet_size)
    cdef Py_ssize_t i
    cdef int64_t s
    for i in range(syms.shape[0]):
        s = syms[i]
        if s < 0 or s >= alphabet_size:
            raise CodecError(f"symbol {s} outside alphabet [0, {alphabet_size})")
        model.encode_with(enc, <int> s)
    enc.encode_bits(SENTINEL, 16)
    return enc.finish()


def decode_symbols(data, int count, int alphabet_size):
    cdef _Decoder dec = _Decoder(data)
    cdef _Model model = _Model(alphabet_size)
    out = np.empty(count, dtype=np.int32)
    cdef int32_t[::1] view = out
    cdef Py_ssize_t i
    for i in range(count):
        view[i] = <int32_t> model.decode_with(dec)
    if dec.decode_bits(16) != SENTINEL:
        raise CodecError("end-of-stream sentinel mismatch: decoder desync")
    return out


cdef inline int _band(int pos, int bsq):
    if pos == 0:
        return 0
    if pos < bsq // 16:
        return 1
    if pos < bsq // 4:
        return 2
    return 3


def encode_coeff_blocks(zz):
    """Run/level-code zigzagged coefficient blocks (nblocks x bsq, int32)."""
    cdef int32_t[:, ::1] blocks = np.ascontiguousarray(zz, dtype=np.int32)
    cdef Py_ssize_t nblocks = blocks.shape[0]
    cdef int bsq = <int> blocks.shape[1]
    cdef _Encoder enc = _Encoder()
    cdef list run_models = [_Model(bsq + 1) for _ in range(4)]
    cdef list size_models = [_Model(MAX_LEVEL_BITS) for _ in range(4)]
    cdef int eob = bsq
    cdef Py_ssize_t b
    cdef int pos, nz, size
    cdef int32_t level
    cdef uint32_t mag, tmp
    for b in range(nblocks):
        pos = 0
        while pos < bsq:
            nz = pos
            while nz < bsq and blocks[b, nz] == 0:
                nz += 1
            if nz == bsq:
                (<_Model> run_models[_band(pos, bsq)]).encode_with(enc, eob)
                break
            (<_Model> run_models[_band(pos, bsq)]).encode_with(enc, nz - pos)
            level = blocks[b, nz]
            mag = <uint32_t> (-level) if level < 0 else <uint32_t> level
            size = 0
            tmp = mag
            while tmp:
                size += 1
                tmp >>= 1
            if size > MAX_LEVEL_BITS:
                raise CodecError(f"coefficient magnitude {mag} too large to code")
            (<_Model> size_models[_band(nz, bsq)]).encode_with(enc, size - 1)
            if size > 1:
                enc.encode_bits(mag - (<uint32_t> 1 << (size - 1)), size - 1)
            enc.encode_bits(1 if level < 0 else 0, 1)
            pos = nz + 1
    enc.encode_bits(SENTINEL, 16)
    return enc.finish()


def decode_coeff_blocks(data, Py_ssize_t nblocks, int bsq):
    cdef _Decoder dec = _Decoder(data)
    cdef list run_models = [_Model(bsq + 1) for _ in range(4)]
    cdef list size_models = [_Model(MAX_LEVEL_BITS) for _ in range(4)]
    cdef int eob = bsq
    out = np.zeros((nblocks, bsq), dtype=np.int32)
    cdef int32_t[:, ::1] view = out
    cdef Py_ssize_t b
    cdef int pos, sym, size
    cdef uint32_t mag
    for b in range(nblocks):
        pos = 0
        while pos < bsq:
            sym = (<_Model> run_models[_band(pos, bsq)]).decode_with(dec)
            if sym == eob:
                break
            pos += sym
            if pos >= bsq:
                raise CodecError("run symbol overflows block: corrupt payload")
            size = (<_Model> size_models[_band(pos, bsq)]).decode_with(dec) + 1
            mag = <uint32_t> 1 << (size - 1)
            if size > 1:
                mag += <uint32_t> dec.decode_bits(size - 1)
            view[b, pos] = -(<int32_t> mag) if dec.decode_bits(1) else <int32_t> mag
            pos += 1
    if dec.decode_bits(16) != SENTINEL:
        raise CodecError("end-of-stream sentinel mismatch: decoder desync")
    return out
