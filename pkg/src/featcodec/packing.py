"""Deterministic, invertible reshaping of quantized tensors into 2D planes.

Layouts, all row-major:

* Cls, CSR: the tensor already is 2D; packing is the identity.
* Seg (P, H, W): patches stacked vertically -> (P*H, W).
* Dpt (2, 4, R, C): per image the four layer features are concatenated
  left-to-right in SP_DM1..SP_DM4 order -> (R, 4C); the original image's
  strip is stacked above the flipped image's -> (2R, 4C).
* TTI (16, H, W): channels 4g..4g+3 form subgroup g, concatenated
  horizontally -> (H, 4W); subgroups stacked vertically -> (4H, 4W).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .containers import SplitPointId, TaskKind, shape_in_family
from .errors import ValidationError
from .preprocess import QuantizedTensor, TruncationRegion


@dataclass(frozen=True)
class PlaneProvenance:
    """Everything unpack needs to rebuild the exact QuantizedTensor."""

    task: TaskKind
    splits: tuple[SplitPointId, ...]
    shape: tuple[int, ...]
    regions: tuple[TruncationRegion, ...]
    bits: int
    source_id: str = ""

    def to_json_dict(self) -> dict:
        return {
            "task": self.task.name,
            "splits": [s.name for s in self.splits],
            "shape": list(self.shape),
            "regions": [[r.lo, r.hi] for r in self.regions],
            "bits": self.bits,
            "source_id": self.source_id,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PlaneProvenance":
        return cls(
            task=TaskKind[d["task"]],
            splits=tuple(SplitPointId[s] for s in d["splits"]),
            shape=tuple(int(e) for e in d["shape"]),
            regions=tuple(TruncationRegion(float(lo), float(hi)) for lo, hi in d["regions"]),
            bits=int(d["bits"]),
            source_id=d.get("source_id", ""),
        )


@dataclass
class PackedPlane:
    """A 2D integer plane in raster order, the codec's input and output."""

    samples: np.ndarray
    bits: int
    provenance: PlaneProvenance

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.uint16)
        if self.samples.ndim != 2:
            raise ValidationError("plane: samples must be 2D")
        if self.samples.size and int(self.samples.max()) >= (1 << self.bits):
            raise ValidationError(f"plane: sample above {self.bits}-bit range")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]


def packed_dims(task: TaskKind, shape: tuple[int, ...]) -> tuple[int, int]:
    """Plane (height, width) that pack produces for this tensor shape."""
    if not shape_in_family(task, shape):
        raise ValidationError(
            f"shape family: cannot pack {task.name} tensor of shape {shape}"
        )
    if task in (TaskKind.Cls, TaskKind.CSR):
        return shape[0], shape[1]
    if task is TaskKind.Seg:
        p, h, w = shape
        return p * h, w
    if task is TaskKind.Dpt:
        _, _, r, c = shape
        return 2 * r, 4 * c
    p, h, w = shape  # TTI
    return 4 * h, 4 * w


def pack(q: QuantizedTensor) -> PackedPlane:
    """Rearrange a quantized tensor into its single 2D plane."""
    height, width = packed_dims(q.task, q.shape)
    codes = q.codes
    if q.task in (TaskKind.Cls, TaskKind.CSR):
        plane = codes
    elif q.task is TaskKind.Seg:
        plane = codes.reshape(height, width)
    elif q.task is TaskKind.Dpt:
        # (2, 4, R, C) -> layers left-to-right, original above flipped
        strips = [np.concatenate(list(codes[i]), axis=1) for i in range(2)]
        plane = np.concatenate(strips, axis=0)
    else:  # TTI: (16, H, W) -> 4 subgroups of 4 channels
        rows = [
            np.concatenate(list(codes[4 * g : 4 * g + 4]), axis=1) for g in range(4)
        ]
        plane = np.concatenate(rows, axis=0)
    return PackedPlane(
        samples=plane,
        bits=q.bits,
        provenance=PlaneProvenance(
            q.task, q.splits, q.shape, q.regions, q.bits, q.source_id
        ),
    )


def unpack(p: PackedPlane) -> QuantizedTensor:
    """Exact inverse of pack, driven by the plane's provenance."""
    prov = p.provenance
    height, width = packed_dims(prov.task, prov.shape)
    if (p.height, p.width) != (height, width):
        raise ValidationError(
            f"plane dims {p.height}x{p.width} do not match the "
            f"{height}x{width} expected for {prov.task.name} {prov.shape}"
        )
    if p.bits != prov.bits:
        raise ValidationError("plane bits disagree with provenance bits")
    s = p.samples
    if prov.task in (TaskKind.Cls, TaskKind.CSR):
        codes = s
    elif prov.task is TaskKind.Seg:
        codes = s.reshape(prov.shape)
    elif prov.task is TaskKind.Dpt:
        _, _, r, c = prov.shape
        codes = np.stack(
            [
                np.stack([s[i * r : (i + 1) * r, k * c : (k + 1) * c] for k in range(4)])
                for i in range(2)
            ]
        )
    else:  # TTI
        _, h, w = prov.shape
        codes = np.concatenate(
            [
                np.stack([s[g * h : (g + 1) * h, j * w : (j + 1) * w] for j in range(4)])
                for g in range(4)
            ]
        )
    return QuantizedTensor(
        task=prov.task,
        splits=prov.splits,
        codes=np.ascontiguousarray(codes),
        bits=prov.bits,
        regions=prov.regions,
        source_id=prov.source_id,
    )
