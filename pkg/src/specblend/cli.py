"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical error.
Structured results go to stdout as JSON (CSV for ``analyze --csv``).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis, attention, bench, harness, spectral
from .errors import NumericalError, TensorIOError, ValidationError
from .tensorio import RngSpec, read_tensor, write_tensor

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(ValidationError):
    pass


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _out_dtype(src: np.ndarray):
    return np.float64 if src.dtype == np.float64 else np.float32


def cmd_gen_filter(args):
    lpf = spectral.gaussian_lpf(args.frames, args.height, args.width, args.d0)
    write_tensor(lpf, args.out)
    _emit({
        "dims": list(lpf.shape),
        "d0": args.d0,
        "dc_value": float(lpf[0, 0, 0]),
        "min_value": float(lpf.min()),
        "out": args.out,
    })


def _load_filter(args, shape):
    if args.filter:
        return read_tensor(args.filter)
    return spectral.gaussian_lpf(*shape[1:], args.d0)


def cmd_blend(args):
    g = spectral.check_video(read_tensor(args.global_path), "global feature")
    loc = spectral.check_video(read_tensor(args.local), "local feature")
    if g.shape != loc.shape:
        raise UsageError(f"shape mismatch: global {list(g.shape)} vs local {list(loc.shape)}")
    lpf = _load_filter(args, g.shape)
    out = spectral.spectral_blend(g, loc, lpf)
    result = {"dims": list(out.shape), "out": args.out}
    if args.verify:
        p = np.asarray(lpf, dtype=np.float64)[None]
        expected = p * spectral.dft3_oracle(g) + (1 - p) * spectral.dft3_oracle(loc)
        err = float(np.max(np.abs(spectral.dft3_oracle(out) - expected)))
        result.update(verify_max_abs_error=err, verified=err <= 1e-4)
        if err > 1e-4:
            _emit(result)
            raise NumericalError(f"blend spectrum deviates from the oracle by {err:.3g}")
    write_tensor(out.astype(_out_dtype(g)), args.out)
    _emit(result)


def cmd_attend(args):
    z = spectral.check_video(read_tensor(args.input), "input")
    C, N, h, w = z.shape
    weights = attention.AttentionWeights.random(C, RngSpec(args.weights_seed).generator(2))
    q, k, v = attention.project_qkv(attention.to_sequence(z), weights)
    want_maps = args.dump_maps is not None
    result = {"mode": args.mode, "dims": [C, N, h, w], "weights_seed": args.weights_seed}
    maps = None
    if args.mode == "global":
        out, maps = attention.global_attention(q, k, v, return_maps=want_maps)
        out = attention.from_sequence(out, h, w)
        k_band = args.alpha
    elif args.mode == "local":
        out, maps = attention.local_attention(q, k, v, args.alpha, return_maps=want_maps)
        out = attention.from_sequence(out, h, w)
        k_band = args.alpha
    elif args.mode == "sliding":
        starts = attention.window_starts(N, args.window, args.stride)
        out = attention.from_sequence(attention.sliding_window_attention(q, k, v, args.window, args.stride), h, w)
        result.update(windows=len(starts), window_starts=starts, window=args.window, stride=args.stride)
        if want_maps:
            raise UsageError("--dump-maps is not available for sliding mode")
    else:
        lpf = spectral.gaussian_lpf(N, h, w, args.d0)
        out = attention.spectralblend_ta(z, weights, args.alpha, lpf, args.step, args.tau)
        result.update(step=args.step, tau=args.tau, used_blend=args.step <= args.tau, d0=args.d0)
        if want_maps:
            _, local_maps = attention.local_attention(q, k, v, args.alpha, return_maps=True)
            _, global_maps = attention.global_attention(q, k, v, return_maps=True)
            maps = np.stack([local_maps, global_maps])
        k_band = args.alpha
    result["alpha"] = args.alpha
    write_tensor(out.astype(_out_dtype(z)), args.out)
    result["out"] = args.out
    if want_maps:
        write_tensor(maps.astype(np.float32), args.dump_maps)
        result["maps"] = args.dump_maps
        result["maps_dims"] = list(maps.shape)
        result["diagonality"] = attention.attention_diagonality(maps, k_band)
    _emit(result)


def _split_domains(text):
    return tuple(d.strip() for d in text.split(",") if d.strip())


def cmd_analyze(args):
    req = analysis.AnalysisRequest(args.video, args.baseline, args.split, _split_domains(args.domains))
    video, baseline = read_tensor(req.video), read_tensor(req.baseline)
    reports = analysis.compare_bands(video, baseline, req.split, req.domains)
    flicker = {
        "video_flicker_mad": analysis.temporal_flicker(video),
        "baseline_flicker_mad": analysis.temporal_flicker(baseline),
    }
    if args.csv:
        sys.stdout.write(analysis.reports_to_csv(reports, flicker))
    else:
        _emit({"reports": [r.to_dict() for r in reports], "temporal_flicker": {**flicker, "label": "raw MAD"}})


def cmd_simulate(args):
    mode = "sliding_window" if args.mode == "sliding" else args.mode
    cfg = harness.DenoiseConfig(
        frames=args.frames, steps=args.steps, tau=args.tau, alpha=args.alpha, d0=args.d0,
        mode=mode, noise_init=args.noise, seed=args.seed,
        segments=harness.parse_segments(args.segments) if args.segments else [],
        snapshot_every=10,
    ).validate()
    traj = harness.run_toy_denoise(cfg)
    manifest = harness.write_run(traj, args.outdir)
    _emit({
        "outdir": args.outdir,
        "manifest_sha256": manifest["manifest_sha256"],
        "final_dims": list(traj.final.shape),
        "blend_steps": manifest["blend_steps"],
        "files": manifest["files"],
    })


def cmd_bench(args):
    report = bench.bench_attention(args.frames, args.dim, args.spatial, args.window, args.stride, args.reps)
    if args.json:
        _emit(report.to_dict())
        return
    print(f"N={report.frames} d={report.dim} S={report.spatial} window={report.window} "
          f"stride={report.stride} reps={report.repetitions} backend={report.backend}")
    for mode in bench.MODES:
        print(f"  {mode:<15} {report.seconds[mode] * 1e3:9.2f} ms  passes={report.passes[mode]}"
              f"  attention evals={report.attention_evaluations[mode]}")
    print(f"  machine: {report.machine}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="specblend",
        description="Spectrally blended temporal attention: filters, blends, kernels, analysis, toy runs, benchmarks.",
        epilog="exit codes: 0 ok, 1 validation, 2 I/O, 3 numerical",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-filter", help="write a Gaussian low-pass filter")
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--height", type=int, required=True)
    s.add_argument("--width", type=int, required=True)
    s.add_argument("--d0", type=float, default=0.25)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_filter)

    s = sub.add_parser("blend", help="spectrally blend a global and a local feature")
    s.add_argument("--global", dest="global_path", required=True)
    s.add_argument("--local", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--filter")
    g.add_argument("--d0", type=float, default=0.25)
    s.add_argument("--out", required=True)
    s.add_argument("--verify", action="store_true", help="check the output spectrum with the brute-force DFT")
    s.set_defaults(func=cmd_blend)

    s = sub.add_parser("attend", help="run one temporal attention kernel with seeded weights")
    s.add_argument("--input", required=True)
    s.add_argument("--weights-seed", type=int, default=0)
    s.add_argument("--mode", choices=("global", "local", "sliding", "freelong"), default="global")
    s.add_argument("--alpha", type=int, default=8)
    s.add_argument("--window", type=int, default=16)
    s.add_argument("--stride", type=int, default=8)
    s.add_argument("--step", type=int, default=1)
    s.add_argument("--tau", type=int, default=25)
    s.add_argument("--d0", type=float, default=0.25)
    s.add_argument("--out", required=True)
    s.add_argument("--dump-maps")
    s.set_defaults(func=cmd_attend)

    s = sub.add_parser("analyze", help="band-energy report of a video against a short baseline")
    s.add_argument("--video", required=True)
    s.add_argument("--baseline", required=True)
    s.add_argument("--split", type=float, default=0.25)
    s.add_argument("--domains", default=",".join(spectral.DOMAINS))
    g = s.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true", help="JSON output (default)")
    g.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run the toy denoising loop and write a run directory")
    s.add_argument("--frames", type=int, default=128)
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--tau", type=int, default=25)
    s.add_argument("--alpha", type=int, default=8)
    s.add_argument("--d0", type=float, default=0.25)
    s.add_argument("--mode", choices=("direct", "sliding", "sliding_window", "freelong"), default="freelong")
    s.add_argument("--noise", choices=harness.NOISE_INITS, default="random")
    s.add_argument("--segments", help='e.g. "0:A,64:B"')
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--outdir", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bench", help="time direct, sliding-window and blended attention layers")
    s.add_argument("--frames", type=int, default=128)
    s.add_argument("--dim", type=int, default=64)
    s.add_argument("--spatial", type=int, default=256)
    s.add_argument("--window", type=int, default=16)
    s.add_argument("--stride", type=int, default=8)
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TensorIOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:  # e.g. seed out of range
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
