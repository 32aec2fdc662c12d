"""Truncation, uniform quantization to integer codes, and the inverses.

Quantization maps a clamped value x in [lo, hi] to
round_half_away_from_zero((x - lo) / (hi - lo) * (2^bits - 1)); rounding
half away from zero is fixed so code values are bit-reproducible.
De-quantization is lo + code / (2^bits - 1) * (hi - lo).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .containers import FeatureTensor, SplitPointId, TaskKind, validate_feature
from .errors import ValidationError

DEFAULT_BITS = 10


@dataclass(frozen=True)
class TruncationRegion:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValidationError("truncation region: bounds must be finite")
        if not self.lo < self.hi:
            raise ValidationError(
                f"truncation region: lo {self.lo} must be < hi {self.hi}"
            )

    @property
    def width(self) -> float:
        return self.hi - self.lo


class TruncationTable:
    """Map from (task, split point) to a truncation region."""

    def __init__(self, regions: dict[tuple[TaskKind, SplitPointId], TruncationRegion]):
        self._regions = dict(regions)

    def region_for(self, task: TaskKind, split: SplitPointId) -> TruncationRegion:
        try:
            return self._regions[(task, split)]
        except KeyError:
            raise ValidationError(
                f"missing truncation entry for {task.name}/{split.name}"
            ) from None

    def regions_for(self, t: FeatureTensor) -> tuple[TruncationRegion, ...]:
        return tuple(self.region_for(t.task, s) for s in t.splits)

    def items(self):
        return self._regions.items()

    @classmethod
    def from_dict(cls, entries: dict[str, tuple[float, float]]) -> "TruncationTable":
        """Build from {"Task/SP_ID": [lo, hi]} entries, the config-file form."""
        regions = {}
        for key, (lo, hi) in entries.items():
            task_name, _, split_name = key.partition("/")
            try:
                task = TaskKind[task_name]
                split = SplitPointId[split_name]
            except KeyError:
                raise ValidationError(f"bad truncation table key {key!r}") from None
            regions[(task, split)] = TruncationRegion(float(lo), float(hi))
        return cls(regions)

    def to_dict(self) -> dict[str, tuple[float, float]]:
        return {
            f"{task.name}/{split.name}": (r.lo, r.hi)
            for (task, split), r in self._regions.items()
        }


@dataclass
class QuantizedTensor:
    """Integer code values plus the regions that define their scale."""

    task: TaskKind
    splits: tuple[SplitPointId, ...]
    codes: np.ndarray
    bits: int
    regions: tuple[TruncationRegion, ...]
    source_id: str = ""

    def __post_init__(self):
        self.task = TaskKind(self.task)
        self.splits = tuple(SplitPointId(s) for s in self.splits)
        self.regions = tuple(self.regions)
        if not 8 <= self.bits <= 16:
            raise ValidationError(f"bits: {self.bits} outside [8, 16]")
        if len(self.regions) != len(self.splits):
            raise ValidationError("regions: need one region per split point")
        self.codes = np.ascontiguousarray(self.codes, dtype=np.uint16)
        if self.codes.size and int(self.codes.max()) > self.max_code:
            raise ValidationError(
                f"codes: value above {self.max_code} for {self.bits}-bit codes"
            )

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.codes.shape)

    @property
    def max_code(self) -> int:
        return (1 << self.bits) - 1


def subtensor_views(task: TaskKind, arr: np.ndarray) -> Iterator[np.ndarray]:
    """Yield one view per split-point sub-tensor (layer axis 1 for Dpt)."""
    if task is TaskKind.Dpt:
        for k in range(arr.shape[1]):
            yield arr[:, k]
    else:
        yield arr


def truncate(t: FeatureTensor, table: TruncationTable) -> FeatureTensor:
    """Clamp every element into its sub-tensor's truncation region."""
    validate_feature(t)
    regions = table.regions_for(t)
    out = t.data.copy()
    for region, view in zip(regions, subtensor_views(t.task, out)):
        np.clip(view, np.float32(region.lo), np.float32(region.hi), out=view)
    return FeatureTensor(t.task, t.splits, out, t.source_id)


def _round_half_away(y: np.ndarray) -> np.ndarray:
    return np.floor(np.abs(y) + 0.5) * np.sign(y)


def quantize_uniform(
    t: FeatureTensor,
    table: TruncationTable | tuple[TruncationRegion, ...],
    bits: int = DEFAULT_BITS,
) -> QuantizedTensor:
    """Quantize to integer codes, clamping out-of-region values first.

    Clamping (rather than erroring) keeps quantization-only runs, which use
    the empirical min/max as their region, on the same code path.
    """
    if not 8 <= bits <= 16:
        raise ValidationError(f"bits: {bits} outside [8, 16]")
    validate_feature(t)
    regions = (
        table.regions_for(t) if isinstance(table, TruncationTable) else tuple(table)
    )
    if len(regions) != len(t.splits):
        raise ValidationError("regions: need one region per split point")
    max_code = (1 << bits) - 1
    codes = np.empty(t.shape, dtype=np.uint16)
    for region, src, dst in zip(
        regions,
        subtensor_views(t.task, t.data),
        subtensor_views(t.task, codes),
    ):
        x = np.clip(src.astype(np.float64), region.lo, region.hi)
        y = (x - region.lo) / (region.hi - region.lo) * max_code
        np.copyto(dst, np.clip(_round_half_away(y), 0, max_code).astype(np.uint16))
    return QuantizedTensor(t.task, t.splits, codes, bits, regions, t.source_id)


def empirical_region(t: FeatureTensor) -> TruncationRegion:
    """Global [min, max] of the tensor, the lossless-clamp region."""
    lo = float(t.data.min())
    hi = float(t.data.max())
    if hi <= lo:
        hi = lo + 1.0  # constant tensor: any width maps all values to code 0
    return TruncationRegion(lo, hi)


def empirical_regions(t: FeatureTensor) -> tuple[TruncationRegion, ...]:
    """Per-sub-tensor empirical regions for quantization-only runs."""
    regs = []
    for view in subtensor_views(t.task, t.data):
        lo = float(view.min())
        hi = float(view.max())
        if hi <= lo:
            hi = lo + 1.0
        regs.append(TruncationRegion(lo, hi))
    return tuple(regs)


def dequantize(q: QuantizedTensor) -> FeatureTensor:
    """Map codes back to floats: lo + code / (2^bits - 1) * (hi - lo)."""
    out = np.empty(q.shape, dtype=np.float32)
    for region, src, dst in zip(
        q.regions,
        subtensor_views(q.task, q.codes),
        subtensor_views(q.task, out),
    ):
        x = region.lo + src.astype(np.float64) / q.max_code * (region.hi - region.lo)
        np.copyto(dst, x.astype(np.float32))
    return FeatureTensor(q.task, q.splits, out, q.source_id)


def normalize(t: FeatureTensor, table: TruncationTable) -> FeatureTensor:
    """Map each sub-tensor's region onto [0, 1]."""
    validate_feature(t)
    regions = table.regions_for(t)
    out = np.empty(t.shape, dtype=np.float32)
    for region, src, dst in zip(
        regions,
        subtensor_views(t.task, t.data),
        subtensor_views(t.task, out),
    ):
        y = (src.astype(np.float64) - region.lo) / (region.hi - region.lo)
        np.copyto(dst, y.astype(np.float32))
    return FeatureTensor(t.task, t.splits, out, t.source_id)


def denormalize(t: FeatureTensor, table: TruncationTable) -> FeatureTensor:
    """Inverse of normalize, up to float rounding."""
    validate_feature(t)
    regions = table.regions_for(t)
    out = np.empty(t.shape, dtype=np.float32)
    for region, src, dst in zip(
        regions,
        subtensor_views(t.task, t.data),
        subtensor_views(t.task, out),
    ):
        x = src.astype(np.float64) * (region.hi - region.lo) + region.lo
        np.copyto(dst, x.astype(np.float32))
    return FeatureTensor(t.task, t.splits, out, t.source_id)
