"""Raw YUV-400 import/export so an external 10-bit codec can be slotted in.

The .yuv file is a headerless luma-only plane: one little-endian 16-bit
word per sample, values 0..1023, raster order, padded on the right and
bottom to multiples of 4 by edge replication (minimum CU alignment; the
conformance window crops it back, and the full-size packed shapes need
no padding). A JSON sidecar records the true dimensions, padding, packing
provenance, and suggested encoder flags; the toolkit never launches the
external codec itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .packing import PackedPlane, PlaneProvenance

PAD_MULTIPLE = 4

# Encoder settings the plane was produced for, kept verbatim in the sidecar.
VTM_FLAGS = (
    "-c encoder_intra_vtm.cfg --InputChromaFormat=400 --ConformanceWindowMode=1 "
    "--InternalBitDepth=10 --InputBitDepth=10 --OutputBitDepth=10"
)


@dataclass
class SidecarMeta:
    width: int
    height: int
    pad_right: int
    pad_bottom: int
    bits: int
    task: str
    qp_hint: int | None
    vtm_flags: str
    provenance: PlaneProvenance

    def to_json_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "pad_right": self.pad_right,
            "pad_bottom": self.pad_bottom,
            "bits": self.bits,
            "task": self.task,
            "qp_hint": self.qp_hint,
            "vtm_flags": self.vtm_flags,
            "provenance": self.provenance.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SidecarMeta":
        return cls(
            width=int(d["width"]),
            height=int(d["height"]),
            pad_right=int(d["pad_right"]),
            pad_bottom=int(d["pad_bottom"]),
            bits=int(d["bits"]),
            task=d["task"],
            qp_hint=d.get("qp_hint"),
            vtm_flags=d.get("vtm_flags", ""),
            provenance=PlaneProvenance.from_json_dict(d["provenance"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SidecarMeta":
        try:
            return cls.from_json_dict(json.loads(Path(path).read_text()))
        except (ValueError, KeyError) as exc:
            raise FormatError(f"{path}: bad sidecar: {exc}") from None


def sidecar_path(yuv_path: str | Path) -> Path:
    return Path(yuv_path).with_suffix(".json")


def export_yuv400(
    p: PackedPlane, path: str | Path, qp_hint: int | None = None
) -> SidecarMeta:
    """Write the plane as padded 16-bit-per-sample YUV-400 plus sidecar."""
    if p.bits != 10:
        raise ValidationError(f"YUV-400 export requires 10-bit planes, got {p.bits}")
    pad_bottom = (-p.height) % PAD_MULTIPLE
    pad_right = (-p.width) % PAD_MULTIPLE
    padded = p.samples
    if pad_bottom or pad_right:
        padded = np.pad(padded, ((0, pad_bottom), (0, pad_right)), mode="edge")
    Path(path).write_bytes(padded.astype("<u2").tobytes())
    meta = SidecarMeta(
        width=p.width,
        height=p.height,
        pad_right=pad_right,
        pad_bottom=pad_bottom,
        bits=p.bits,
        task=p.provenance.task.name,
        qp_hint=qp_hint,
        vtm_flags=VTM_FLAGS,
        provenance=p.provenance,
    )
    meta.save(sidecar_path(path))
    return meta


def import_yuv400(path: str | Path, meta: SidecarMeta) -> PackedPlane:
    """Read a .yuv written by export_yuv400 (or an external codec's output)."""
    raw = Path(path).read_bytes()
    full_w = meta.width + meta.pad_right
    full_h = meta.height + meta.pad_bottom
    expected = full_w * full_h * 2
    if len(raw) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for a padded "
            f"{full_h}x{full_w} plane, got {len(raw)}"
        )
    samples = np.frombuffer(raw, dtype="<u2").reshape(full_h, full_w)
    if samples.size and int(samples.max()) > 1023:
        raise FormatError(f"{path}: sample value above the 10-bit maximum 1023")
    cropped = samples[: meta.height, : meta.width]
    return PackedPlane(
        samples=np.ascontiguousarray(cropped),
        bits=meta.bits,
        provenance=meta.provenance,
    )


def measure_bits(path: str | Path) -> int:
    """Size of a bitstream file in bits (8x its byte size)."""
    return 8 * Path(path).stat().st_size
