"""Feature tensor container: task metadata, validation, and FTEN file I/O.

FTEN layout (all multi-byte values little-endian):

    magic "FTEN" | version u16 | task u8 | split-count u8 | split ids (u8 each)
    | ndim u8 | reserved u8 | extents (u32 each) | source-id length u16
    | source-id UTF-8 bytes | raw float32 data, row-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"FTEN"
VERSION = 1


class TaskKind(IntEnum):
    Cls = 0
    Seg = 1
    Dpt = 2
    CSR = 3
    TTI = 4

    @classmethod
    def parse(cls, name: str) -> "TaskKind":
        for member in cls:
            if member.name.lower() == name.lower():
                return member
        raise ValidationError(f"unknown task {name!r}")


class SplitPointId(IntEnum):
    SP_DS = 0
    SP_DM1 = 1
    SP_DM2 = 2
    SP_DM3 = 3
    SP_DM4 = 4
    SP_G = 5
    SP_H = 6


# Split-point tags each task must carry, in order.
TASK_SPLITS: dict[TaskKind, tuple[SplitPointId, ...]] = {
    TaskKind.Cls: (SplitPointId.SP_DS,),
    TaskKind.Seg: (SplitPointId.SP_DS,),
    TaskKind.Dpt: (
        SplitPointId.SP_DM1,
        SplitPointId.SP_DM2,
        SplitPointId.SP_DM3,
        SplitPointId.SP_DM4,
    ),
    TaskKind.CSR: (SplitPointId.SP_G,),
    TaskKind.TTI: (SplitPointId.SP_H,),
}

# Full-size shapes as produced by the source models.
CANONICAL_SHAPE: dict[TaskKind, tuple[int, ...]] = {
    TaskKind.Cls: (257, 1536),
    TaskKind.Seg: (2, 1370, 1536),
    TaskKind.Dpt: (2, 4, 1611, 1536),
    TaskKind.CSR: (64, 4096),
    TaskKind.TTI: (16, 128, 128),
}

# Shape-family patterns: fixed extents are pinned, None extents are free.
# Token-grid rows are identity-defining for the single-split ViT features
# (Cls 257, Seg 1370); Dpt pins the original/flipped pair and the four
# aggregated layers; TTI pins its 16 latent channels. Free extents allow
# scaled-down tensors to exercise the same code paths as full-size ones.
FAMILY_PATTERN: dict[TaskKind, tuple[int | None, ...]] = {
    TaskKind.Cls: (257, None),
    TaskKind.Seg: (None, 1370, None),
    TaskKind.Dpt: (2, 4, None, None),
    TaskKind.CSR: (None, None),
    TaskKind.TTI: (16, None, None),
}


def shape_in_family(task: TaskKind, shape: tuple[int, ...]) -> bool:
    pattern = FAMILY_PATTERN[task]
    if len(shape) != len(pattern):
        return False
    return all(
        ext >= 1 and (fixed is None or ext == fixed)
        for ext, fixed in zip(shape, pattern)
    )


@dataclass
class FeatureTensor:
    """An n-dimensional float32 feature with its task/split-point metadata."""

    task: TaskKind
    splits: tuple[SplitPointId, ...]
    data: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        self.task = TaskKind(self.task)
        self.splits = tuple(SplitPointId(s) for s in self.splits)
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureTensor):
            return NotImplemented
        return (
            self.task == other.task
            and self.splits == other.splits
            and self.source_id == other.source_id
            and self.shape == other.shape
            and np.array_equal(
                self.data.view(np.uint32), other.data.view(np.uint32)
            )
        )


def validate_feature(t: FeatureTensor) -> None:
    """Raise ValidationError naming the first violated invariant."""
    if t.data.dtype != np.float32:
        raise ValidationError("dtype: data must be float32")
    if t.data.ndim == 0 or t.data.size == 0:
        raise ValidationError("element count: tensor must be non-empty")
    if not np.isfinite(t.data).all():
        raise ValidationError("finiteness: data contains NaN or Inf")
    expected = TASK_SPLITS[t.task]
    if t.splits != expected:
        raise ValidationError(
            f"split points: {t.task.name} requires "
            f"{[s.name for s in expected]}, got {[s.name for s in t.splits]}"
        )
    if not shape_in_family(t.task, t.shape):
        pattern = FAMILY_PATTERN[t.task]
        want = "x".join("N" if p is None else str(p) for p in pattern)
        raise ValidationError(
            f"shape family: {t.task.name} expects {want}, got "
            + "x".join(str(e) for e in t.shape)
        )


def make_feature(
    task: TaskKind,
    data: np.ndarray,
    source_id: str = "",
    splits: tuple[SplitPointId, ...] | None = None,
) -> FeatureTensor:
    """Build a validated FeatureTensor with the task's standard split tags."""
    t = FeatureTensor(
        task=task,
        splits=TASK_SPLITS[task] if splits is None else splits,
        data=data,
        source_id=source_id,
    )
    validate_feature(t)
    return t


_HEAD = struct.Struct("<4sHBB")  # magic, version, task, split-count


def save_feature(t: FeatureTensor, path: str | Path) -> None:
    """Write the tensor in FTEN format. Save then load is byte-identical."""
    validate_feature(t)
    sid = t.source_id.encode("utf-8")
    if len(sid) > 0xFFFF:
        raise ValidationError("source_id: longer than 65535 UTF-8 bytes")
    parts = [
        _HEAD.pack(MAGIC, VERSION, int(t.task), len(t.splits)),
        bytes(int(s) for s in t.splits),
        struct.pack("<BB", t.data.ndim, 0),
        struct.pack(f"<{t.data.ndim}I", *t.shape),
        struct.pack("<H", len(sid)),
        sid,
        np.ascontiguousarray(t.data, dtype="<f4").tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def load_feature(path: str | Path) -> FeatureTensor:
    """Read an FTEN file, rejecting malformed headers and truncated payloads."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise FormatError(f"{path}: shorter than the fixed header")
    magic, version, task_code, nsplits = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    try:
        task = TaskKind(task_code)
    except ValueError:
        raise FormatError(f"{path}: unknown task code {task_code}") from None
    off = _HEAD.size
    if len(raw) < off + nsplits + 2:
        raise FormatError(f"{path}: truncated split/shape header")
    try:
        splits = tuple(SplitPointId(b) for b in raw[off : off + nsplits])
    except ValueError:
        raise FormatError(f"{path}: unknown split-point code") from None
    off += nsplits
    ndim, _reserved = struct.unpack_from("<BB", raw, off)
    off += 2
    if len(raw) < off + 4 * ndim + 2:
        raise FormatError(f"{path}: truncated extents")
    shape = struct.unpack_from(f"<{ndim}I", raw, off)
    off += 4 * ndim
    (sid_len,) = struct.unpack_from("<H", raw, off)
    off += 2
    if len(raw) < off + sid_len:
        raise FormatError(f"{path}: truncated source id")
    source_id = raw[off : off + sid_len].decode("utf-8")
    off += sid_len
    count = 1
    for ext in shape:
        count *= ext
    expected = count * 4
    got = len(raw) - off
    if got != expected:
        raise FormatError(
            f"{path}: data length mismatch, header shape needs "
            f"{expected} bytes but file carries {got}"
        )
    data = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
    t = FeatureTensor(
        task=task,
        splits=splits,
        data=data.reshape(shape),
        source_id=source_id,
    )
    validate_feature(t)
    return t
