"""Dataset statistics: extrema, intensity variance, Sobel gradient
magnitude, frequency histograms/CDFs, and block-DCT energy maps.

Intensity variance and gradient magnitude operate on 10-bit quantized
codes (empirical min/max region unless one is given); for n-dimensional
features both are computed on the packed 2D plane. Gradient codes are
scaled to [0, 1] before the Sobel filter and the mean interior magnitude
is reported x1e5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec.transform import dct2
from .containers import FeatureTensor, validate_feature
from .errors import ValidationError
from .packing import pack
from .preprocess import (
    DEFAULT_BITS,
    TruncationRegion,
    empirical_region,
    quantize_uniform,
)

GM_SCALE = 1e5

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T


def basic_stats(t: FeatureTensor) -> tuple[float, float, float]:
    """(min, max, mean) over all elements."""
    validate_feature(t)
    data = t.data.astype(np.float64)
    return float(data.min()), float(data.max()), float(data.mean())


def _quantized_plane(
    t: FeatureTensor, region: TruncationRegion | None, bits: int = DEFAULT_BITS
) -> np.ndarray:
    r = empirical_region(t) if region is None else region
    q = quantize_uniform(t, (r,) * len(t.splits), bits=bits)
    return pack(q).samples


def intensity_variance(
    t: FeatureTensor, region: TruncationRegion | None = None
) -> float:
    """Population variance of the 10-bit code values."""
    validate_feature(t)
    codes = _quantized_plane(t, region).astype(np.float64)
    return float(codes.var())


def gradient_magnitude(
    t: FeatureTensor, region: TruncationRegion | None = None
) -> float:
    """Mean interior Sobel magnitude of the normalized code plane, x1e5."""
    validate_feature(t)
    plane = _quantized_plane(t, region).astype(np.float64) / ((1 << DEFAULT_BITS) - 1)
    h, w = plane.shape
    if h < 3 or w < 3:
        raise ValidationError(f"packed plane {h}x{w} too small for a 3x3 filter")
    gx = (
        (plane[:-2, 2:] + 2 * plane[1:-1, 2:] + plane[2:, 2:])
        - (plane[:-2, :-2] + 2 * plane[1:-1, :-2] + plane[2:, :-2])
    )
    gy = (
        (plane[2:, :-2] + 2 * plane[2:, 1:-1] + plane[2:, 2:])
        - (plane[:-2, :-2] + 2 * plane[:-2, 1:-1] + plane[:-2, 2:])
    )
    return float(np.hypot(gx, gy).mean() * GM_SCALE)


def histogram_cdf(
    t: FeatureTensor, nbins: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equal-width (edges, counts, cdf) over the empirical value range.

    Counts are raw; log scaling is a rendering choice, not a data one.
    A constant tensor degenerates to a single bin holding every element.
    """
    if nbins < 2:
        raise ValidationError(f"nbins {nbins} must be >= 2")
    validate_feature(t)
    data = t.data.astype(np.float64).ravel()
    lo, hi = float(data.min()), float(data.max())
    if hi <= lo:
        edges = np.array([lo, hi])
        counts = np.array([data.size], dtype=np.int64)
    else:
        counts, edges = np.histogram(data, bins=nbins, range=(lo, hi))
        counts = counts.astype(np.int64)
    cdf = np.cumsum(counts) / data.size
    return edges, counts, cdf


@dataclass
class EnergyMap:
    """Absolute block-DCT coefficients plus energy-location fractions."""

    block: int
    grids: np.ndarray  # (rows, cols, block, block) of |coefficient|
    dc_fraction: float
    first_row_fraction: float
    first_col_fraction: float
    mean_removed: bool

    @property
    def mean_grid(self) -> np.ndarray:
        return self.grids.reshape(-1, self.block, self.block).mean(axis=0)


def dct_energy_map(
    t: FeatureTensor,
    block: int = 16,
    region: TruncationRegion | None = None,
    remove_mean: bool = True,
) -> EnergyMap:
    """Tile the quantized plane into blocks and transform each one.

    Tiles cover the largest block multiple; trailing partial rows/columns
    are dropped. Zero-energy input (a constant plane) reports 1.0 for all
    fractions: the degenerate convention for "no energy anywhere else".
    """
    validate_feature(t)
    plane = _quantized_plane(t, region).astype(np.float64)
    h, w = plane.shape
    if h < block or w < block:
        raise ValidationError(f"packed plane {h}x{w} smaller than block {block}")
    rows, cols = h // block, w // block
    tiles = (
        plane[: rows * block, : cols * block]
        .reshape(rows, block, cols, block)
        .transpose(0, 2, 1, 3)
    )
    if remove_mean:
        tiles = tiles - tiles.mean(axis=(2, 3), keepdims=True)
    coeffs = dct2(tiles)
    energy = coeffs**2
    total = float(energy.sum())
    if total == 0.0:
        dc = first_row = first_col = 1.0
    else:
        dc = float(energy[:, :, 0, 0].sum()) / total
        first_row = float(energy[:, :, 0, :].sum()) / total
        first_col = float(energy[:, :, :, 0].sum()) / total
    return EnergyMap(
        block=block,
        grids=np.abs(coeffs),
        dc_fraction=dc,
        first_row_fraction=first_row,
        first_col_fraction=first_col,
        mean_removed=remove_mean,
    )


@dataclass
class StatsReport:
    """Everything the analyze command reports for one feature."""

    source_id: str
    task: str
    shape: tuple[int, ...]
    min: float
    max: float
    mean: float
    iv: float
    gm: float | None
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    cdf: np.ndarray
    log_scale_hint: bool = True
    energy: EnergyMap | None = None

    def to_json_dict(self) -> dict:
        d = {
            "source_id": self.source_id,
            "task": self.task,
            "shape": list(self.shape),
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "iv": self.iv,
            "gm": self.gm,
            "histogram": {
                "edges": self.hist_edges.tolist(),
                "counts": self.hist_counts.tolist(),
                "log_scale_hint": self.log_scale_hint,
            },
            "cdf": self.cdf.tolist(),
        }
        if self.energy is not None:
            d["dct_energy"] = {
                "block": self.energy.block,
                "mean_removed": self.energy.mean_removed,
                "dc_fraction": self.energy.dc_fraction,
                "first_row_fraction": self.energy.first_row_fraction,
                "first_col_fraction": self.energy.first_col_fraction,
                "mean_abs_grid": self.energy.mean_grid.tolist(),
            }
        return d


def analyze_feature(
    t: FeatureTensor,
    nbins: int = 100,
    dct_block: int | None = None,
    region: TruncationRegion | None = None,
) -> StatsReport:
    """Run the full statistics suite on one feature."""
    mn, mx, mean = basic_stats(t)
    edges, counts, cdf = histogram_cdf(t, nbins)
    try:
        gm = gradient_magnitude(t, region)
    except ValidationError:
        gm = None  # plane too small for the Sobel window
    energy = None
    if dct_block is not None:
        energy = dct_energy_map(t, block=dct_block, region=region)
    return StatsReport(
        source_id=t.source_id,
        task=t.task.name,
        shape=t.shape,
        min=mn,
        max=mx,
        mean=mean,
        iv=intensity_variance(t, region),
        gm=gm,
        hist_edges=edges,
        hist_counts=counts,
        cdf=cdf,
        energy=energy,
    )
