import json

import numpy as np
import pytest

import featcodec as fc
from featcodec.cli import EXIT_CODEC, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from featcodec.containers import TaskKind, load_feature


def run(*argv):
    return main(list(argv))


@pytest.fixture
def tti_file(tmp_path):
    path = tmp_path / "tti.ften"
    assert run("synth", "tti", "--model", "smooth", "--scale", "8", "--out", str(path)) == EXIT_OK
    return path


def test_synth_writes_expected_shape(tmp_path):
    out = tmp_path / "t.ften"
    assert run("synth", "tti", "--out", str(out), "--scale", "8") == EXIT_OK
    assert load_feature(out).shape == (16, 16, 16)


def test_synth_canonical_tti_is_512_plane(tmp_path):
    out = tmp_path / "t.ften"
    assert run("synth", "tti", "--out", str(out)) == EXIT_OK
    t = load_feature(out)
    assert t.shape == (16, 128, 128)
    from featcodec.packing import packed_dims

    assert packed_dims(t.task, t.shape) == (512, 512)


def test_synth_determinism_via_cli(tmp_path):
    a, b = tmp_path / "a.ften", tmp_path / "b.ften"
    run("synth", "csr", "--seed", "5", "--scale", "16", "--out", str(a))
    run("synth", "csr", "--seed", "5", "--scale", "16", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_encode_decode_round_trip(tti_file, tmp_path, capsys):
    bs = tmp_path / "t.fcbs"
    manifest = tmp_path / "t.manifest.json"
    assert (
        run("encode", str(tti_file), "--qp", "32", "--out", str(bs), "--manifest", str(manifest))
        == EXIT_OK
    )
    m = json.loads(manifest.read_text())
    assert m["codec"] == "internal"
    assert m["total_bits"] == 8 * bs.stat().st_size
    assert m["bpfp"] == pytest.approx(m["total_bits"] / (16 * 16 * 16))

    out = tmp_path / "rec.ften"
    assert run("decode", str(bs), "--out", str(out), "--ref", str(tti_file)) == EXIT_OK
    captured = capsys.readouterr()
    assert "mse" in captured.out
    rec = load_feature(out)
    assert rec.shape == (16, 16, 16)
    assert rec.task == TaskKind.TTI


def test_decode_near_lossless_at_qp0(tti_file, tmp_path):
    bs = tmp_path / "t.fcbs"
    run("encode", str(tti_file), "--qp", "0", "--out", str(bs))
    out = tmp_path / "rec.ften"
    run("decode", str(bs), "--out", str(out))
    orig = load_feature(tti_file)
    rec = load_feature(out)
    tab = fc.default_truncation_table()
    truncated = fc.truncate(orig, tab)
    half_step = (4.09 + 3.05) / 2046
    # codec max error <= 1 code value on top of the quantizer half step
    assert np.abs(rec.data - truncated.data).max() <= 3 * half_step


def test_encode_qp_out_of_range(tti_file, tmp_path):
    assert run("encode", str(tti_file), "--qp", "60") == EXIT_VALIDATION


def test_encode_yuv_export(tti_file, tmp_path):
    out = tmp_path / "t.yuv"
    assert run("encode", str(tti_file), "--codec", "yuv-export", "--out", str(out)) == EXIT_OK
    assert out.stat().st_size == 64 * 64 * 2
    assert out.with_suffix(".json").exists()
    assert not list(tmp_path.glob("*.fcbs"))


def test_encode_none_codec_reports_bpfp_10(tti_file, tmp_path):
    manifest = tmp_path / "m.json"
    out = tmp_path / "r.ften"
    assert (
        run("encode", str(tti_file), "--codec", "none", "--out", str(out), "--manifest", str(manifest))
        == EXIT_OK
    )
    m = json.loads(manifest.read_text())
    assert m["bpfp"] == 10.0
    assert load_feature(out).shape == (16, 16, 16)


def test_encode_no_quant_rejected_for_internal(tti_file):
    assert run("encode", str(tti_file), "--no-quant") == EXIT_VALIDATION
    assert run("encode", str(tti_file), "--no-quant", "--codec", "yuv-export") == EXIT_VALIDATION


def test_encode_no_quant_truncation_only(tti_file, tmp_path):
    manifest = tmp_path / "m.json"
    out = tmp_path / "r.ften"
    assert (
        run(
            "encode", str(tti_file), "--no-quant", "--codec", "none",
            "--out", str(out), "--manifest", str(manifest),
        )
        == EXIT_OK
    )
    m = json.loads(manifest.read_text())
    assert m["bpfp"] == 32.0  # raw float accounting
    assert m["quantization"] is False
    rec = load_feature(out)
    orig = load_feature(tti_file)
    tab = fc.default_truncation_table()
    assert np.array_equal(rec.data, fc.truncate(orig, tab).data)


def test_encode_no_trunc_uses_empirical_range(tti_file, tmp_path):
    manifest = tmp_path / "m.json"
    out = tmp_path / "r.ften"
    run("encode", str(tti_file), "--no-trunc", "--codec", "none",
        "--out", str(out), "--manifest", str(manifest))
    m = json.loads(manifest.read_text())
    assert "empirical" in m["truncation"]
    orig = load_feature(tti_file)
    rec = load_feature(out)
    # empirical region loses nothing to clamping: error bounded by half step
    width = float(orig.data.max() - orig.data.min())
    assert np.abs(rec.data - orig.data).max() <= width / 2046 * (1 + 1e-6)


def test_pack_unpack_cycle(tti_file, tmp_path):
    yuv = tmp_path / "p.yuv"
    assert run("pack", str(tti_file), "--out", str(yuv)) == EXIT_OK
    rec = tmp_path / "r.ften"
    assert run("unpack", str(yuv), "--out", str(rec)) == EXIT_OK
    orig = load_feature(tti_file)
    back = load_feature(rec)
    tab = fc.default_truncation_table()
    truncated = fc.truncate(orig, tab)
    half_step = (4.09 + 3.05) / 2046
    assert np.abs(back.data - truncated.data).max() <= half_step * (1 + 1e-6)


def test_evaluate_published_ladder(tmp_path, capsys):
    n = 257 * 1536
    mses = [3.0117, 3.2324, 3.7424, 4.0751, 4.4588]
    accs = [100, 99, 81, 18, 2]
    bpfes = [1.90, 0.98, 0.21, 0.04, 0.01]
    records = [
        {
            "task": "Cls",
            "label": f"qp{q}",
            "total_bits": round(b * n),
            "shape": [257, 1536],
            "mse": m,
            "accuracy": a,
            "accuracy_kind": "Percent",
        }
        for q, b, m, a in zip((22, 27, 32, 37, 42), bpfes, mses, accs)
    ]
    rf = tmp_path / "records.json"
    rf.write_text(json.dumps(records))
    out = tmp_path / "curve.csv"
    assert run("evaluate", str(rf), "--baseline", "100", "--out", str(out)) == EXIT_OK
    captured = capsys.readouterr()
    assert "0.8933" in captured.out
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "label,bpfp,mse,accuracy,drop"
    assert lines[1].endswith("0.00")
    assert lines[3].endswith("19.00")


def test_evaluate_single_record_no_r2(tmp_path, capsys):
    records = [
        {"task": "TTI", "label": "x", "total_bits": 100, "shape": [16, 4, 4],
         "mse": 0.1, "accuracy": 30.0, "accuracy_kind": "ClipScore"}
    ]
    rf = tmp_path / "one.json"
    rf.write_text(json.dumps(records))
    assert run("evaluate", str(rf), "--baseline", "30.07") == EXIT_OK
    assert "mse_accuracy_r2: None" in capsys.readouterr().out


def test_evaluate_without_baseline_warns(tmp_path, capsys):
    records = [
        {"task": "Cls", "label": "a", "total_bits": 10, "shape": [257, 2],
         "mse": 0.5, "accuracy": 90, "accuracy_kind": "Percent"},
        {"task": "Cls", "label": "b", "total_bits": 20, "shape": [257, 2],
         "mse": 0.2, "accuracy": 95, "accuracy_kind": "Percent"},
    ]
    rf = tmp_path / "r.json"
    rf.write_text(json.dumps(records))
    assert run("evaluate", str(rf)) == EXIT_OK
    captured = capsys.readouterr()
    assert "drops omitted" in captured.err
    assert ",95," in (rf.parent / "r.curve.csv").read_text()


def test_analyze_reports(tti_file, tmp_path, capsys):
    summary = tmp_path / "summary.csv"
    assert (
        run("analyze", str(tti_file), "--bins", "50", "--dct-block", "16",
            "--out-dir", str(tmp_path), "--summary", str(summary))
        == EXIT_OK
    )
    report = json.loads((tmp_path / "tti.stats.json").read_text())
    assert report["task"] == "TTI"
    assert len(report["histogram"]["counts"]) == 50
    assert "dct_energy" in report
    assert summary.read_text().startswith("input,task,min,max,mean,iv,gm")


def test_analyze_missing_file_nonzero(tmp_path):
    code = run("analyze", str(tmp_path / "nope.ften"), "--summary", str(tmp_path / "s.csv"))
    assert code == EXIT_IO


def test_analyze_mixed_good_and_bad(tti_file, tmp_path):
    code = run(
        "analyze", str(tti_file), str(tmp_path / "missing.ften"),
        "--out-dir", str(tmp_path), "--summary", str(tmp_path / "s.csv"),
    )
    assert code != EXIT_OK
    assert (tmp_path / "tti.stats.json").exists()


def test_decode_corrupt_stream(tti_file, tmp_path):
    bs = tmp_path / "t.fcbs"
    run("encode", str(tti_file), "--qp", "32", "--out", str(bs))
    raw = bytearray(bs.read_bytes())
    raw[len(raw) // 2] ^= 0xFF
    bs.write_bytes(bytes(raw))
    code = run("decode", str(bs), "--out", str(tmp_path / "r.ften"))
    assert code in (EXIT_CODEC, EXIT_VALIDATION)  # desync or level overflow


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        run("synth")  # missing task argument
    assert exc.value.code == EXIT_USAGE


def test_env_config_override(tmp_path, monkeypatch, tti_file):
    cfg = {
        "qp_ladder": [22],
        "default_table": "wide",
        "tables": {"wide": {"TTI/SP_H": [-100, 100]}},
        "baselines": {},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    monkeypatch.setenv("FEATCODEC_CONFIG", str(cfg_path))
    manifest = tmp_path / "m.json"
    out = tmp_path / "r.ften"
    assert (
        run("encode", str(tti_file), "--codec", "none", "--out", str(out),
            "--manifest", str(manifest))
        == EXIT_OK
    )
    m = json.loads(manifest.read_text())
    assert m["truncation"] == "wide"
    # the wide region leaves values far from the defaults' clamp limits
    rec = load_feature(out)
    assert np.abs(rec.data).max() < 5.0  # data itself small vs [-100, 100]


def test_bad_ften_input(tmp_path):
    bad = tmp_path / "bad.ften"
    bad.write_bytes(b"not a container")
    assert run("encode", str(bad)) == EXIT_VALIDATION


def test_end_to_end_ladder_produces_monotone_curve(tmp_path, capsys):
    src = tmp_path / "cls.ften"
    run("synth", "cls", "--model", "smooth", "--scale", "16", "--out", str(src))
    records = []
    prev_bits = None
    for qp in (22, 27, 32, 37, 42):
        bs = tmp_path / f"q{qp}.fcbs"
        rec = tmp_path / f"q{qp}.ften"
        assert run("encode", str(src), "--qp", str(qp), "--out", str(bs)) == EXIT_OK
        assert run("decode", str(bs), "--out", str(rec)) == EXIT_OK
        m = json.loads((tmp_path / f"q{qp}.manifest.json").read_text())
        orig = load_feature(src)
        recon = load_feature(rec)
        mse = float(np.mean((orig.data.astype(np.float64) - recon.data.astype(np.float64)) ** 2))
        records.append(
            {"task": "Cls", "label": f"qp{qp}", "total_bits": m["total_bits"],
             "shape": list(orig.shape), "mse": mse, "accuracy": None,
             "accuracy_kind": None}
        )
        if prev_bits is not None:
            assert m["total_bits"] <= prev_bits
        prev_bits = m["total_bits"]
    mses = [r["mse"] for r in records]
    assert all(mses[i] <= mses[i + 1] for i in range(len(mses) - 1))
    rf = tmp_path / "ladder.json"
    rf.write_text(json.dumps(records))
    out = tmp_path / "curve.csv"
    assert run("evaluate", str(rf), "--out", str(out)) == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 6
    bpfps = [float(l.split(",")[1]) for l in lines[1:]]
    assert bpfps == sorted(bpfps, reverse=True)


def test_analyze_requires_inputs():
    with pytest.raises(SystemExit) as exc:
        run("analyze")
    assert exc.value.code == EXIT_USAGE


def test_decode_ref_shape_mismatch(tti_file, tmp_path):
    bs = tmp_path / "t.fcbs"
    run("encode", str(tti_file), "--qp", "32", "--out", str(bs))
    other = tmp_path / "other.ften"
    run("synth", "tti", "--scale", "16", "--out", str(other))
    code = run("decode", str(bs), "--out", str(tmp_path / "r.ften"), "--ref", str(other))
    assert code == EXIT_VALIDATION
