"""Built-in lossy intra codec for packed planes.

Encoding pads the plane to block multiples by edge replication, applies
an orthonormal block DCT, divides coefficients by step(qp) = 2^((qp-4)/6)
with round-half-away-from-zero, zigzag-scans each block, and entropy-codes
the result (see ``rangecoder``). The bitstream is self-describing:

    magic "FCBS" | version u16 | width u32 | height u32 | bits u8 | qp u8
    | provenance-length u32 | provenance (JSON, UTF-8) | payload

all little-endian; the payload's first byte is the block size. total_bits
is 8x the serialized byte length, header included.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CodecError, FormatError, ValidationError
from ..packing import PackedPlane, PlaneProvenance
from .rangecoder import BACKEND, kernel, range_decode, range_encode
from .transform import dct2, idct2, zigzag_order

MAGIC = b"FCBS"
VERSION = 1
_HEAD = struct.Struct("<4sHIIBBI")

MAX_COEFF_MAGNITUDE = (1 << 24) - 1


@dataclass(frozen=True)
class CodecConfig:
    qp: int
    block: int = 16
    bits: int = 10

    def __post_init__(self):
        if not 0 <= self.qp <= 51:
            raise ValidationError(f"qp {self.qp} outside [0, 51]")
        if not 2 <= self.block <= 64:
            raise ValidationError(f"block size {self.block} outside [2, 64]")
        if not 8 <= self.bits <= 16:
            raise ValidationError(f"bits {self.bits} outside [8, 16]")

    @property
    def step(self) -> float:
        return 2.0 ** ((self.qp - 4) / 6.0)


class Bitstream:
    """A serialized FCBS stream plus its parsed header fields."""

    def __init__(self, raw: bytes):
        if len(raw) < _HEAD.size:
            raise FormatError("bitstream shorter than the fixed header")
        magic, version, width, height, bits, qp, prov_len = _HEAD.unpack_from(raw, 0)
        if magic != MAGIC:
            raise FormatError(f"bad bitstream magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"unsupported bitstream version {version}")
        off = _HEAD.size
        if len(raw) < off + prov_len:
            raise FormatError("truncated provenance blob")
        try:
            prov = PlaneProvenance.from_json_dict(
                json.loads(raw[off : off + prov_len].decode("utf-8"))
            )
        except (ValueError, KeyError) as exc:
            raise FormatError(f"bad provenance blob: {exc}") from None
        self.raw = raw
        self.width = width
        self.height = height
        self.bits = bits
        self.qp = qp
        self.provenance = prov
        self.payload = raw[off + prov_len :]

    @classmethod
    def assemble(
        cls,
        width: int,
        height: int,
        bits: int,
        qp: int,
        provenance: PlaneProvenance,
        payload: bytes,
    ) -> "Bitstream":
        blob = json.dumps(
            provenance.to_json_dict(), sort_keys=True, separators=(",", ":")
        ).encode("utf-8")
        head = _HEAD.pack(MAGIC, VERSION, width, height, bits, qp, len(blob))
        return cls(head + blob + payload)

    @property
    def total_bits(self) -> int:
        return 8 * len(self.raw)

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.raw)

    @classmethod
    def load(cls, path: str | Path) -> "Bitstream":
        return cls(Path(path).read_bytes())


def _round_half_away(y: np.ndarray) -> np.ndarray:
    return np.floor(np.abs(y) + 0.5) * np.sign(y)


def _pad_to_blocks(samples: np.ndarray, block: int) -> np.ndarray:
    h, w = samples.shape
    ph = (-h) % block
    pw = (-w) % block
    if ph or pw:
        samples = np.pad(samples, ((0, ph), (0, pw)), mode="edge")
    return samples


def _to_blocks(plane: np.ndarray, block: int) -> tuple[np.ndarray, int, int]:
    h, w = plane.shape
    nbr, nbc = h // block, w // block
    blocks = plane.reshape(nbr, block, nbc, block).transpose(0, 2, 1, 3)
    return blocks.reshape(nbr * nbc, block, block), nbr, nbc


def _from_blocks(blocks: np.ndarray, nbr: int, nbc: int, block: int) -> np.ndarray:
    return (
        blocks.reshape(nbr, nbc, block, block)
        .transpose(0, 2, 1, 3)
        .reshape(nbr * block, nbc * block)
    )


def encode(plane: PackedPlane, cfg: CodecConfig) -> Bitstream:
    """Transform-code a packed plane into a self-describing bitstream."""
    if plane.bits != cfg.bits:
        raise ValidationError(
            f"plane bit depth {plane.bits} disagrees with config {cfg.bits}"
        )
    padded = _pad_to_blocks(plane.samples.astype(np.float64), cfg.block)
    blocks, _, _ = _to_blocks(padded, cfg.block)
    levels = _round_half_away(dct2(blocks) / cfg.step)
    if abs(levels).max(initial=0.0) > MAX_COEFF_MAGNITUDE:
        raise CodecError("quantized coefficient exceeds the 24-bit level limit")
    zz = levels.astype(np.int32).reshape(levels.shape[0], -1)[
        :, zigzag_order(cfg.block)
    ]
    payload = bytes([cfg.block]) + kernel.encode_coeff_blocks(zz)
    return Bitstream.assemble(
        width=plane.width,
        height=plane.height,
        bits=cfg.bits,
        qp=cfg.qp,
        provenance=plane.provenance,
        payload=payload,
    )


def decode(b: Bitstream | bytes) -> PackedPlane:
    """Reconstruct the packed plane from a bitstream. Deterministic."""
    if not isinstance(b, Bitstream):
        b = Bitstream(b)
    if not b.payload:
        raise CodecError("empty payload")
    block = b.payload[0]
    if not 2 <= block <= 64:
        raise CodecError(f"bad block size {block} in payload")
    cfg = CodecConfig(qp=b.qp, block=block, bits=b.bits)
    ph = b.height + ((-b.height) % block)
    pw = b.width + ((-b.width) % block)
    nbr, nbc = ph // block, pw // block
    zz = kernel.decode_coeff_blocks(b.payload[1:], nbr * nbc, block * block)
    flat = np.empty_like(zz)
    flat[:, zigzag_order(block)] = zz
    coeffs = flat.reshape(-1, block, block).astype(np.float64) * cfg.step
    pixels = _round_half_away(idct2(coeffs))
    pixels = np.clip(pixels, 0, (1 << b.bits) - 1)
    plane = _from_blocks(pixels, nbr, nbc, block)[: b.height, : b.width]
    return PackedPlane(
        samples=plane.astype(np.uint16),
        bits=b.bits,
        provenance=b.provenance,
    )


__all__ = [
    "BACKEND",
    "Bitstream",
    "CodecConfig",
    "decode",
    "dct2",
    "encode",
    "idct2",
    "range_decode",
    "range_encode",
    "zigzag_order",
]
