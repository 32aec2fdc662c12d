"""Deterministic synthetic feature generators for desk-scale testing.

Three models: a band-limited smooth field, iid uniform noise, and
"vstripe", whose rows are constant so its block-DCT energy sits in the
first coefficient column (the striped-redundancy regime the analysis
suite looks for). Values span 1.05x the task's default truncation region
so clamping is exercised.
"""

from __future__ import annotations

import numpy as np

from .containers import (
    CANONICAL_SHAPE,
    FAMILY_PATTERN,
    TASK_SPLITS,
    FeatureTensor,
    TaskKind,
    make_feature,
)
from .errors import ValidationError
from .preprocess import TruncationTable, subtensor_views

MODELS = ("smooth", "noise", "vstripe")

_SMOOTH_COMPONENTS = 6
_OVERSHOOT = 1.05


def scaled_shape(task: TaskKind, scale: int) -> tuple[int, ...]:
    """Canonical shape with every free extent divided by scale (min 1)."""
    if scale < 1:
        raise ValidationError(f"scale {scale} must be >= 1")
    return tuple(
        ext if fixed is not None else max(1, ext // scale)
        for ext, fixed in zip(CANONICAL_SHAPE[task], FAMILY_PATTERN[task])
    )


def _smooth_plane(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    r = np.arange(rows)[:, None] / max(rows, 1)
    c = np.arange(cols)[None, :] / max(cols, 1)
    field = np.zeros((rows, cols))
    for _ in range(_SMOOTH_COMPONENTS):
        u, v = rng.integers(0, 5, size=2)
        if u == 0 and v == 0:
            u = 1
        amp = rng.uniform(0.5, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        field += amp * np.cos(2.0 * np.pi * (u * r + v * c) + phase)
    peak = np.abs(field).max()
    return field / peak if peak > 0 else field


def synth_feature(
    task: TaskKind,
    model: str = "smooth",
    seed: int = 0,
    scale: int = 1,
    table: TruncationTable | None = None,
) -> FeatureTensor:
    """Generate a reproducible feature tensor of the task's shape family."""
    if model not in MODELS:
        raise ValidationError(f"unknown synth model {model!r}; pick from {MODELS}")
    if table is None:
        from .config import default_truncation_table

        table = default_truncation_table()
    shape = scaled_shape(task, scale)
    rng = np.random.default_rng([seed, int(task), MODELS.index(model)])
    if model == "noise":
        field = rng.uniform(-1.0, 1.0, size=shape)
    elif model == "vstripe":
        field = np.broadcast_to(
            rng.uniform(-1.0, 1.0, size=shape[:-1] + (1,)), shape
        ).copy()
    else:
        field = np.empty(shape)
        lead = shape[:-2] if len(shape) > 2 else ()
        for idx in np.ndindex(*lead) if lead else [()]:
            field[idx] = _smooth_plane(rng, shape[-2], shape[-1])
    out = np.empty(shape, dtype=np.float32)
    for split, src, dst in zip(
        TASK_SPLITS[task],
        subtensor_views(task, field),
        subtensor_views(task, out),
    ):
        region = table.region_for(task, split)
        mid = 0.5 * (region.lo + region.hi)
        half = 0.5 * region.width
        np.copyto(dst, (mid + _OVERSHOOT * half * src).astype(np.float32))
    return make_feature(
        task,
        out,
        source_id=f"synth:{task.name}:{model}:seed{seed}:scale{scale}",
    )
