"""Command-line front end wiring the coding pipeline end to end.

Subcommands: analyze, synth, encode, decode, evaluate, pack, unpack.
Exit codes: 0 success, 2 usage, 3 validation/format, 4 I/O, 5 codec.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import codec
from .analysis import analyze_feature
from .config import ENV_VAR, load_config
from .containers import TaskKind, load_feature, save_feature
from .errors import CodecError, FormatError, ValidationError
from .metrics import (
    bpfp,
    build_curve,
    curve_summary,
    feature_mse,
    load_records,
    write_curve_csv,
)
from .packing import pack, unpack
from .preprocess import (
    dequantize,
    empirical_region,
    quantize_uniform,
    truncate,
)
from .synth import MODELS, synth_feature
from .yuv import SidecarMeta, export_yuv400, import_yuv400, sidecar_path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_CODEC = 5

RAW_FLOAT_BITS = 32  # bpfp accounting for un-quantized float32 output


def _fail(msg: str) -> None:
    print(f"featcodec: error: {msg}", file=sys.stderr)


def _error_code(exc: Exception) -> int:
    if isinstance(exc, (ValidationError, FormatError)):
        return EXIT_VALIDATION
    if isinstance(exc, CodecError):
        return EXIT_CODEC
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def cmd_analyze(args) -> int:
    rows = []
    failures = 0
    first_code = EXIT_OK
    for inp in args.inputs:
        try:
            t = load_feature(inp)
            report = analyze_feature(t, nbins=args.bins, dct_block=args.dct_block)
            out = Path(args.out_dir or Path(inp).parent) / (Path(inp).stem + ".stats.json")
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
            rows.append(
                {
                    "input": str(inp),
                    "task": report.task,
                    "min": report.min,
                    "max": report.max,
                    "mean": report.mean,
                    "iv": report.iv,
                    "gm": report.gm,
                }
            )
            print(f"analyzed {inp} -> {out}")
        except Exception as exc:  # per-file isolation; summarize at exit
            failures += 1
            if first_code == EXIT_OK:
                first_code = _error_code(exc)
            _fail(f"{inp}: {exc}")
    summary = Path(args.summary)
    with open(summary, "w") as fh:
        fh.write("input,task,min,max,mean,iv,gm\n")
        for r in rows:
            gm = "" if r["gm"] is None else f"{r['gm']:.6g}"
            fh.write(
                f"{r['input']},{r['task']},{r['min']:.6g},{r['max']:.6g},"
                f"{r['mean']:.6g},{r['iv']:.6g},{gm}\n"
            )
    print(f"summary -> {summary} ({len(rows)} ok, {failures} failed)")
    return first_code


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    t = synth_feature(
        TaskKind.parse(args.task),
        model=args.model,
        seed=args.seed,
        scale=args.scale,
        table=cfg.table(args.trunc_table),
    )
    out = args.out or f"{args.task.lower()}_{args.model}_s{args.seed}.ften"
    save_feature(t, out)
    print(f"synthesized {t.task.name} {'x'.join(map(str, t.shape))} -> {out}")
    return EXIT_OK


def _preprocess(t, cfg, args):
    """Shared truncate+quantize front half of encode/pack."""
    if args.no_trunc:
        regions = (empirical_region(t),) * len(t.splits)
        truncated = t
    else:
        table = cfg.table(args.trunc_table)
        regions = table.regions_for(t)
        truncated = truncate(t, table)
    q = quantize_uniform(truncated, regions, bits=args.bits)
    return truncated, q


def cmd_encode(args) -> int:
    if not 0 <= args.qp <= 51:
        raise ValidationError(f"qp {args.qp} outside [0, 51]")
    cfg = load_config(args.config)
    t = load_feature(args.input)
    manifest: dict = {
        "input": str(args.input),
        "task": t.task.name,
        "original_shape": list(t.shape),
        "codec": args.codec,
        "qp": args.qp,
        "bits": args.bits,
        "truncation": "empirical (--no-trunc)" if args.no_trunc else (args.trunc_table or cfg.default_table),
        "quantization": not args.no_quant,
    }
    stem = Path(args.out).with_suffix("") if args.out else Path(args.input).with_suffix("")
    if args.no_quant:
        if args.codec != "none":
            raise ValidationError(
                f"--no-quant cannot feed the {args.codec} codec: it requires "
                "integer samples; use --codec none for truncation-only runs"
            )
        recon = t if args.no_trunc else truncate(t, cfg.table(args.trunc_table))
        out = Path(args.out or f"{stem}.recon.ften")
        save_feature(recon, out)
        manifest["note"] = "quantization skipped; bpfp is raw float32 accounting"
        manifest["total_bits"] = RAW_FLOAT_BITS * t.data.size
        manifest["bpfp"] = float(RAW_FLOAT_BITS)
        manifest["output"] = str(out)
    else:
        _, q = _preprocess(t, cfg, args)
        if args.codec == "internal":
            plane = pack(q)
            bs = codec.encode(plane, codec.CodecConfig(qp=args.qp, block=args.block, bits=args.bits))
            out = Path(args.out or f"{stem}.fcbs")
            bs.save(out)
            manifest["total_bits"] = bs.total_bits
            manifest["bpfp"] = bpfp(bs.total_bits, t.shape)
            manifest["output"] = str(out)
        elif args.codec == "yuv-export":
            plane = pack(q)
            out = Path(args.out or f"{stem}.yuv")
            meta = export_yuv400(plane, out, qp_hint=args.qp)
            manifest["output"] = str(out)
            manifest["sidecar"] = str(sidecar_path(out))
            manifest["vtm_flags"] = meta.vtm_flags
        else:  # codec "none": quantize+dequantize, no transform coding
            recon = dequantize(q)
            out = Path(args.out or f"{stem}.recon.ften")
            save_feature(recon, out)
            manifest["total_bits"] = args.bits * t.data.size
            manifest["bpfp"] = bpfp(args.bits * t.data.size, t.shape)
            manifest["output"] = str(out)
    mpath = Path(args.manifest or f"{stem}.manifest.json")
    mpath.write_text(json.dumps(manifest, indent=2) + "\n")
    line = f"encoded {args.input} -> {manifest['output']} (manifest {mpath}"
    if "bpfp" in manifest:
        line += f", bpfp {manifest['bpfp']:.4f}"
    print(line + ")")
    return EXIT_OK


def cmd_decode(args) -> int:
    bs = codec.Bitstream.load(args.bitstream)
    plane = codec.decode(bs)
    recon = dequantize(unpack(plane))
    out = args.out or str(Path(args.bitstream).with_suffix(".recon.ften"))
    save_feature(recon, out)
    print(f"decoded {args.bitstream} -> {out}")
    if args.ref:
        ref = load_feature(args.ref)
        print(f"mse vs {args.ref}: {feature_mse(ref, recon):.6g}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    task = TaskKind.parse(args.task) if args.task else None
    records = load_records(args.records, default_task=task)
    baseline = args.baseline
    if baseline is None and records:
        b = cfg.baselines.get(records[0].task)
        if args.use_config_baseline and b is not None:
            baseline = b.accuracy
    if baseline is None:
        print("warning: no baseline given; accuracy drops omitted", file=sys.stderr)
    curve = build_curve(records, baseline_accuracy=baseline)
    out = args.out or str(Path(args.records).with_suffix(".curve.csv"))
    write_curve_csv(curve, out)
    summary = curve_summary(curve)
    print(f"curve -> {out}")
    for k, v in summary.items():
        print(f"  {k}: {v if not isinstance(v, float) else f'{v:.4f}'}")
    return EXIT_OK


def cmd_pack(args) -> int:
    cfg = load_config(args.config)
    t = load_feature(args.input)
    _, q = _preprocess(t, cfg, args)
    plane = pack(q)
    out = args.out or str(Path(args.input).with_suffix(".yuv"))
    export_yuv400(plane, out, qp_hint=args.qp_hint)
    print(
        f"packed {args.input} ({'x'.join(map(str, t.shape))}) -> {out} "
        f"({plane.height}x{plane.width})"
    )
    return EXIT_OK


def cmd_unpack(args) -> int:
    meta = SidecarMeta.load(args.meta or sidecar_path(args.plane))
    plane = import_yuv400(args.plane, meta)
    recon = dequantize(unpack(plane))
    out = args.out or str(Path(args.plane).with_suffix(".recon.ften"))
    save_feature(recon, out)
    print(f"unpacked {args.plane} -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="featcodec",
        description="Feature coding toolkit: preprocess, pack, code, and "
        "evaluate intermediate-feature tensors.",
    )
    p.add_argument(
        "--config",
        default=None,
        help=f"toolkit config JSON (default: ${ENV_VAR} or built-in)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="statistics reports for FTEN files")
    a.add_argument("inputs", nargs="+")
    a.add_argument("--bins", type=int, default=100)
    a.add_argument("--dct-block", type=int, default=None)
    a.add_argument("--out-dir", default=None)
    a.add_argument("--summary", default="analysis_summary.csv")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="generate a deterministic test feature")
    s.add_argument("task", choices=[t.name.lower() for t in TaskKind])
    s.add_argument("--model", choices=MODELS, default="smooth")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scale", type=int, default=1, help="divide free extents by this")
    s.add_argument("--trunc-table", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("encode", help="truncate, quantize, pack, and code")
    e.add_argument("input")
    e.add_argument("--qp", type=int, default=32)
    e.add_argument("--codec", choices=["internal", "yuv-export", "none"], default="internal")
    e.add_argument("--trunc-table", default=None, help="table name or JSON path")
    e.add_argument("--no-trunc", action="store_true", help="use the empirical range")
    e.add_argument("--no-quant", action="store_true", help="truncation-only run")
    e.add_argument("--bits", type=int, default=10)
    e.add_argument("--block", type=int, default=16)
    e.add_argument("--out", default=None)
    e.add_argument("--manifest", default=None)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="decode an FCBS bitstream back to FTEN")
    d.add_argument("bitstream")
    d.add_argument("--out", default=None)
    d.add_argument("--ref", default=None, help="reference FTEN for MSE")
    d.set_defaults(func=cmd_decode)

    v = sub.add_parser("evaluate", help="rate-accuracy curve from a records file")
    v.add_argument("records")
    v.add_argument("--task", default=None)
    v.add_argument("--baseline", type=float, default=None)
    v.add_argument("--use-config-baseline", action="store_true")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_evaluate)

    k = sub.add_parser("pack", help="preprocess and export a YUV-400 plane")
    k.add_argument("input")
    k.add_argument("--trunc-table", default=None)
    k.add_argument("--no-trunc", action="store_true")
    k.add_argument("--bits", type=int, default=10)
    k.add_argument("--qp-hint", type=int, default=None)
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_pack)

    u = sub.add_parser("unpack", help="import a YUV-400 plane back to FTEN")
    u.add_argument("plane")
    u.add_argument("--meta", default=None, help="sidecar path (default: <plane>.json)")
    u.add_argument("--out", default=None)
    u.set_defaults(func=cmd_unpack)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, FormatError, CodecError, OSError) as exc:
        _fail(str(exc))
        return _error_code(exc)


if __name__ == "__main__":
    sys.exit(main())
