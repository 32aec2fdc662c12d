"""Unified evaluation: bits per feature point, MSE, accuracy drop, and the
MSE-accuracy coefficient of determination.

BPFP divides total coded bits by the element count of the ORIGINAL feature
tensor, never the packed or padded plane, so padding and packing cannot
flatter a codec. Accuracy values are external inputs; for RMSE-scored
tasks the reciprocal of RMSE serves as the accuracy proxy, so its drop is
100 * (1 - baseline / achieved).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .containers import TaskKind
from .errors import ValidationError


class AccuracyKind(str, Enum):
    Percent = "Percent"
    MIoU = "MIoU"
    RMSE = "RMSE"
    ClipScore = "ClipScore"


# Metric each task is scored with.
TASK_ACCURACY_KIND: dict[TaskKind, AccuracyKind] = {
    TaskKind.Cls: AccuracyKind.Percent,
    TaskKind.Seg: AccuracyKind.MIoU,
    TaskKind.Dpt: AccuracyKind.RMSE,
    TaskKind.CSR: AccuracyKind.Percent,
    TaskKind.TTI: AccuracyKind.ClipScore,
}


def bpfp(total_bits: int, original_shape: Sequence[int]) -> float:
    """Bits per feature point of the original (pre-packing) tensor."""
    if total_bits < 0:
        raise ValidationError("total_bits must be non-negative")
    n = 1
    for ext in original_shape:
        n *= int(ext)
    if not original_shape or n <= 0:
        raise ValidationError("original shape must have positive extents")
    return total_bits / n


def feature_mse(a, b) -> float:
    """Mean squared elementwise difference between two equal-shape tensors."""
    da = np.asarray(a.data if hasattr(a, "data") else a, dtype=np.float64)
    db = np.asarray(b.data if hasattr(b, "data") else b, dtype=np.float64)
    if da.shape != db.shape:
        raise ValidationError(f"shape mismatch: {da.shape} vs {db.shape}")
    return float(np.mean((da - db) ** 2))


def accuracy_drop(baseline: float, achieved: float, kind: AccuracyKind) -> float:
    """Percentage decrease in accuracy relative to an uncompressed baseline."""
    kind = AccuracyKind(kind)
    if baseline <= 0:
        raise ValidationError("baseline accuracy must be positive")
    if kind is AccuracyKind.RMSE:
        if achieved <= 0:
            raise ValidationError("RMSE must be positive")
        return 100.0 * (1.0 - baseline / achieved)
    return 100.0 * (baseline - achieved) / baseline


def r_squared(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Squared Pearson correlation between two samples."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValidationError("need two equal-length samples of size >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValidationError("zero-variance input: correlation undefined")
    return float(dx @ dy) ** 2 / (sxx * syy)


@dataclass
class RDRecord:
    """One (rate, distortion, accuracy) measurement."""

    task: TaskKind
    label: str
    total_bits: int
    feature_points: int
    mse: float
    accuracy: float | None = None
    accuracy_kind: AccuracyKind | None = None
    drop: float | None = None

    def __post_init__(self):
        self.task = TaskKind(self.task)
        if self.accuracy_kind is not None:
            self.accuracy_kind = AccuracyKind(self.accuracy_kind)
        if self.feature_points <= 0:
            raise ValidationError("feature_points must be positive")
        if self.mse < 0:
            raise ValidationError("mse must be non-negative")

    @property
    def bpfp(self) -> float:
        return self.total_bits / self.feature_points

    @classmethod
    def from_json_dict(cls, d: dict, default_task: TaskKind | None = None) -> "RDRecord":
        task_name = d.get("task")
        if task_name is not None:
            task = TaskKind.parse(task_name)
        elif default_task is not None:
            task = default_task
        else:
            raise ValidationError("record carries no task and no default given")
        shape = d["shape"]
        n = 1
        for ext in shape:
            n *= int(ext)
        return cls(
            task=task,
            label=str(d["label"]),
            total_bits=int(d["total_bits"]),
            feature_points=n,
            mse=float(d["mse"]),
            accuracy=None if d.get("accuracy") is None else float(d["accuracy"]),
            accuracy_kind=(
                None if d.get("accuracy_kind") is None else AccuracyKind(d["accuracy_kind"])
            ),
        )


@dataclass
class RDCurve:
    """Per-task rate-distortion-accuracy curve, highest rate first."""

    task: TaskKind
    records: list[RDRecord] = field(default_factory=list)
    baseline_accuracy: float | None = None

    def mse_accuracy_r2(self) -> float:
        pts = [(r.mse, r.accuracy) for r in self.records if r.accuracy is not None]
        if len(pts) < 2:
            raise ValidationError("need >= 2 records with accuracy for r_squared")
        return r_squared([p[0] for p in pts], [p[1] for p in pts])


def build_curve(
    records: Iterable[RDRecord], baseline_accuracy: float | None = None
) -> RDCurve:
    """Assemble and sort records; fill in drops when a baseline is given."""
    recs = list(records)
    if not recs:
        raise ValidationError("cannot build a curve from zero records")
    tasks = {r.task for r in recs}
    if len(tasks) > 1:
        raise ValidationError(f"mixed tasks in one curve: {sorted(t.name for t in tasks)}")
    kinds = {r.accuracy_kind for r in recs if r.accuracy_kind is not None}
    if len(kinds) > 1:
        raise ValidationError("mixed accuracy kinds in one curve")
    recs.sort(key=lambda r: -r.bpfp)
    if baseline_accuracy is not None:
        for r in recs:
            if r.accuracy is not None:
                kind = r.accuracy_kind or TASK_ACCURACY_KIND[r.task]
                r.drop = accuracy_drop(baseline_accuracy, r.accuracy, kind)
    return RDCurve(task=recs[0].task, records=recs, baseline_accuracy=baseline_accuracy)


def load_records(path: str | Path, default_task: TaskKind | None = None) -> list[RDRecord]:
    """Read a JSON array of {label, total_bits, shape, mse, accuracy, accuracy_kind}."""
    try:
        entries = json.loads(Path(path).read_text())
    except ValueError as exc:
        raise ValidationError(f"{path}: bad records file: {exc}") from None
    if not isinstance(entries, list):
        raise ValidationError(f"{path}: records file must hold a JSON array")
    return [RDRecord.from_json_dict(e, default_task) for e in entries]


def write_curve_csv(curve: RDCurve, path: str | Path) -> None:
    """Emit the curve as CSV with columns label,bpfp,mse,accuracy,drop."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "bpfp", "mse", "accuracy", "drop"])
        for r in curve.records:
            w.writerow(
                [
                    r.label,
                    f"{r.bpfp:.6f}",
                    f"{r.mse:.6g}",
                    "" if r.accuracy is None else f"{r.accuracy:.6g}",
                    "" if r.drop is None else f"{r.drop:.2f}",
                ]
            )


def curve_summary(curve: RDCurve) -> dict:
    """Headline numbers for reports: rate range, drop range, and R^2."""
    summary: dict = {
        "task": curve.task.name,
        "points": len(curve.records),
        "bpfp_max": max(r.bpfp for r in curve.records),
        "bpfp_min": min(r.bpfp for r in curve.records),
    }
    try:
        summary["mse_accuracy_r2"] = curve.mse_accuracy_r2()
    except ValidationError:
        summary["mse_accuracy_r2"] = None
    drops = [r.drop for r in curve.records if r.drop is not None]
    if drops:
        summary["drop_min"] = min(drops)
        summary["drop_max"] = max(drops)
    return summary
