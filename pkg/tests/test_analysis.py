import numpy as np
import pytest

from featcodec.analysis import (
    SOBEL_X,
    SOBEL_Y,
    analyze_feature,
    basic_stats,
    dct_energy_map,
    gradient_magnitude,
    histogram_cdf,
    intensity_variance,
)
from featcodec.containers import TaskKind, make_feature
from featcodec.errors import ValidationError
from featcodec.preprocess import TruncationRegion

# Brute-force Sobel mean on the 5x5 step fixture (columns 0-1 low,
# 2-4 high): six interior pixels see |Gx| = 4, three see 0.
STEP_EDGE_GM = (6 * 4.0 + 3 * 0.0) / 9 * 1e5  # 266666.66..


def csr_feature(data):
    return make_feature(TaskKind.CSR, np.asarray(data, np.float32))


def test_basic_stats():
    assert basic_stats(csr_feature([[-1.0, 0.0, 1.0]])) == (-1.0, 1.0, 0.0)
    assert basic_stats(csr_feature([[2.5, 2.5]])) == (2.5, 2.5, 2.5)


def test_iv_constant_zero():
    assert intensity_variance(csr_feature([[3.0] * 10] * 4)) == 0.0


def test_iv_alternating_extremes():
    data = np.tile([0.0, 1.0], (4, 8))
    iv = intensity_variance(csr_feature(data))
    assert iv == pytest.approx(1023**2 / 4, abs=1e-6)


def test_iv_uniform_monte_carlo(rng):
    data = rng.uniform(0, 1, size=(1000, 1000)).astype(np.float32)
    iv = intensity_variance(csr_feature(data))
    assert iv == pytest.approx(1024**2 / 12, rel=0.05)


def test_iv_gm_shift_invariance(rng):
    data = rng.uniform(-2, 2, size=(64, 64)).astype(np.float32)
    region = TruncationRegion(-2.0, 2.0)
    shifted_region = TruncationRegion(-2.0 + 5.0, 2.0 + 5.0)
    t0 = csr_feature(data)
    t1 = csr_feature(data + 5.0)
    assert intensity_variance(t0, region) == intensity_variance(t1, shifted_region)
    assert gradient_magnitude(t0, region) == gradient_magnitude(t1, shifted_region)


def test_gm_constant_zero():
    assert gradient_magnitude(csr_feature(np.ones((8, 8)))) == 0.0


def test_gm_step_edge_matches_brute_force():
    plane = np.zeros((5, 5), np.float32)
    plane[:, 2:] = 1023.0
    t = csr_feature(plane)
    gm = gradient_magnitude(t, TruncationRegion(0.0, 1023.0))
    assert gm == pytest.approx(STEP_EDGE_GM, abs=1e-6)


def test_gm_brute_force_oracle(rng):
    # independent 3x3 convolution against the sliced implementation
    data = rng.uniform(-3, 3, size=(9, 11)).astype(np.float32)
    t = csr_feature(data)
    region = TruncationRegion(-3.0, 3.0)
    got = gradient_magnitude(t, region)

    codes = np.floor(
        (np.clip(data.astype(np.float64), -3, 3) + 3) / 6 * 1023 + 0.5
    )
    plane = codes / 1023.0
    mags = []
    for r in range(1, 8):
        for c in range(1, 10):
            win = plane[r - 1 : r + 2, c - 1 : c + 2]
            gx = (win * SOBEL_X).sum()
            gy = (win * SOBEL_Y).sum()
            mags.append(np.hypot(gx, gy))
    assert got == pytest.approx(np.mean(mags) * 1e5, rel=1e-12)


def test_gm_horizontal_ramp_has_zero_gy(rng):
    # values vary along columns only: the vertical-derivative kernel
    # responds nowhere
    plane = np.tile(np.arange(16, dtype=np.float32), (8, 1))
    t = csr_feature(plane)
    region = TruncationRegion(0.0, 15.0)
    codes = np.floor(plane.astype(np.float64) / 15 * 1023 + 0.5) / 1023
    gy = (
        (codes[2:, :-2] + 2 * codes[2:, 1:-1] + codes[2:, 2:])
        - (codes[:-2, :-2] + 2 * codes[:-2, 1:-1] + codes[:-2, 2:])
    )
    assert np.abs(gy).max() == 0.0
    assert gradient_magnitude(t, region) > 0  # gx alone drives it


def test_gm_too_small_plane():
    with pytest.raises(ValidationError, match="3x3"):
        gradient_magnitude(csr_feature(np.ones((2, 5))))


def test_histogram_constant():
    edges, counts, cdf = histogram_cdf(csr_feature(np.full((10, 100), 2.0)), 10)
    assert counts.tolist() == [1000]
    assert cdf.tolist() == [1.0]


def test_histogram_uniform_bins(rng):
    data = rng.uniform(0, 1, size=(1000, 1000)).astype(np.float32)
    edges, counts, cdf = histogram_cdf(csr_feature(data), 10)
    assert counts.sum() == data.size
    assert np.all(np.abs(counts / data.size - 0.1) < 0.005)
    assert cdf[-1] == pytest.approx(1.0)
    assert (np.diff(cdf) >= 0).all()


def test_histogram_counts_sum(rng):
    data = rng.standard_normal((50, 40)).astype(np.float32)
    _, counts, cdf = histogram_cdf(csr_feature(data), 7)
    assert counts.sum() == data.size
    assert cdf[-1] == pytest.approx(1.0)


def test_histogram_nbins_guard():
    with pytest.raises(ValidationError):
        histogram_cdf(csr_feature(np.ones((2, 2))), 1)


def test_energy_map_constant_plane_degenerate_convention():
    em = dct_energy_map(csr_feature(np.full((32, 32), 5.0)), block=16)
    assert em.dc_fraction == 1.0
    assert em.first_col_fraction == 1.0


def test_energy_map_identical_rows_first_row(rng):
    row = rng.uniform(-1, 1, size=64).astype(np.float32)
    t = csr_feature(np.tile(row, (64, 1)))
    em = dct_energy_map(t, block=16)
    assert em.first_row_fraction > 0.999


def test_energy_map_identical_cols_first_col(rng):
    col = rng.uniform(-1, 1, size=(64, 1)).astype(np.float32)
    t = csr_feature(np.tile(col, (1, 64)))
    em = dct_energy_map(t, block=16)
    assert em.first_col_fraction > 0.999


def test_energy_map_random_dc_small(rng):
    t = csr_feature(rng.uniform(-1, 1, size=(128, 128)).astype(np.float32))
    em = dct_energy_map(t, block=16)
    assert em.dc_fraction < 0.05  # mean removal kills the DC


def test_energy_map_parseval(rng):
    data = rng.uniform(-2, 2, size=(48, 48)).astype(np.float32)
    t = csr_feature(data)
    em = dct_energy_map(t, block=16, region=TruncationRegion(-2.0, 2.0))
    codes = np.floor((np.clip(data.astype(np.float64), -2, 2) + 2) / 4 * 1023 + 0.5)
    tiles = codes.reshape(3, 16, 3, 16).transpose(0, 2, 1, 3)
    tiles = tiles - tiles.mean(axis=(2, 3), keepdims=True)
    plane_energy = float((tiles**2).sum())
    coeff_energy = float((em.grids**2).sum())
    assert coeff_energy == pytest.approx(plane_energy, rel=1e-6)


def test_energy_map_raw_dc_mode():
    em = dct_energy_map(
        csr_feature(np.full((16, 16), 3.0)),
        block=16,
        region=TruncationRegion(0.0, 6.0),
        remove_mean=False,
    )
    assert em.dc_fraction == pytest.approx(1.0)
    assert em.grids[0, 0, 0, 0] > 0  # constant maps to code 512, DC = 16*512


def test_energy_map_block_guard():
    with pytest.raises(ValidationError, match="smaller than block"):
        dct_energy_map(csr_feature(np.ones((8, 8))), block=16)


def test_analyze_feature_report(rng):
    t = csr_feature(rng.uniform(-4, 4, (64, 64)).astype(np.float32))
    report = analyze_feature(t, nbins=32, dct_block=16)
    d = report.to_json_dict()
    assert d["task"] == "CSR"
    assert len(d["histogram"]["counts"]) == 32
    assert d["cdf"][-1] == pytest.approx(1.0)
    assert d["dct_energy"]["block"] == 16
    assert 0 <= d["dct_energy"]["dc_fraction"] <= 1
    assert d["histogram"]["log_scale_hint"] is True


def test_analyze_feature_small_plane_gm_none():
    t = csr_feature(np.ones((1, 5)))
    report = analyze_feature(t, nbins=4)
    assert report.gm is None
