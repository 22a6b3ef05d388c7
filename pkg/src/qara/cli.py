"""Command-line entry point: ``qara <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

from qara import __version__
from qara.engine import (
    analytic_distribution,
    encode_window,
    sample_index,
    simulate_branches,
    simulate_statevector,
    window_distribution,
)
from qara.filters import (
    ArtifactSpec,
    FilterConfig,
    compute_quality,
    filter_image,
    inject_artifacts,
    median_filter,
    quantum_feedback_filter,
)
from qara.io import (
    RunManifest,
    generate_image,
    generate_signal,
    read_pgm,
    read_signal_csv,
    write_pgm,
    write_signal_csv,
)
from qara.rotation import gate_metrics
from qara.verify import run_all


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _window(text: str) -> int:
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be an integer, got {text!r}") from None
    if m < 2 or m > 1024 or m & (m - 1):
        raise argparse.ArgumentTypeError(
            f"window {m} is not a power of two in [2, 1024]; the counter register holds "
            "log2(window) qubits"
        )
    return m


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_verify(args) -> int:
    results = run_all(args.seed)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_distribution(args) -> int:
    w = encode_window(args.values, args.reference, args.bits, not args.no_unique)
    if args.backend == "statevector":
        sim = simulate_statevector(w)
    elif args.backend == "branches":
        sim = simulate_branches(w)
    else:
        sim = window_distribution(w)
    out = {
        "values": list(w.values),
        "reference": w.reference,
        "bits": w.geometry.n,
        "unique_mode": w.geometry.unique_mode,
        "backend": args.backend,
    }
    if not w.interferes:
        out["analytic"] = [float(p) for p in analytic_distribution(w).probs]
    counts = sample_index(sim, args.shots, args.seed) if args.shots else None
    out.update(sim.to_json(counts, args.shots, args.seed))
    print(_dump(out))
    return 0


def cmd_gatecount(args) -> int:
    table = {}
    for n in range(1, args.max_n + 1):
        count, serial, parallel = gate_metrics(n)
        table[str(n)] = {"gate_count": count, "serial_depth": serial, "parallel_depth": parallel}
    print(_dump(table))
    return 0


def _filter_config(args, bits: int) -> FilterConfig:
    return FilterConfig(
        window_M=args.window,
        bit_width_n=args.bits or bits,
        mode=args.mode,
        seed=args.seed,
        normalize=not args.no_normalize,
        stride=args.stride,
        reference_policy=args.reference_policy,
    )


def _finish(args, command, cfg, report, argv, outputs) -> None:
    if args.report:
        Path(args.report).write_text(_dump(report.to_json()) + "\n")
        outputs["report"] = args.report
    manifest = RunManifest(
        command=command,
        argv=list(argv),
        config={**asdict(cfg), "algorithm": args.algorithm},
        seed=args.seed,
        inputs={"input": args.input, "clean": args.clean},
        outputs=outputs,
        tool_version=__version__,
    )
    manifest.write(args.manifest or f"{args.output}.manifest.json")


def cmd_filter_signal(args, argv) -> int:
    signal = read_signal_csv(args.input, args.input_bits)
    cfg = _filter_config(args, signal.bit_width)
    if args.algorithm == "qara":
        run = quantum_feedback_filter(signal, cfg)
    else:
        run = median_filter(signal, cfg.window_M, cfg.stride, cfg.edge_policy)
    write_signal_csv(run.output, args.output)
    outputs = {"output": args.output}
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["window_ordinal", "reference", "chosen_index", "chosen_value"])
            writer.writerows(run.trace_rows())
        outputs["trace"] = args.trace
    clean = read_signal_csv(args.clean, args.input_bits) if args.clean else signal
    report = compute_quality(clean, run.output) if len(clean) == len(run.output) else None
    if report is None and args.report:
        raise ValueError("quality report needs stride 1 (output length differs from input)")
    _finish(args, "filter-signal", cfg, report, argv, outputs)
    return 0


def cmd_filter_image(args, argv) -> int:
    img = read_pgm(args.input)
    cfg = _filter_config(args, 8)
    out = filter_image(img, cfg, args.algorithm)
    write_pgm(out, args.output)
    clean = read_pgm(args.clean) if args.clean else img
    report = compute_quality(clean, out) if clean.pixels.shape == out.pixels.shape else None
    if report is None and args.report:
        raise ValueError("quality report needs stride 1 (output shape differs from input)")
    _finish(args, "filter-image", cfg, report, argv, {"output": args.output})
    return 0


def _is_pgm(path: str) -> bool:
    return Path(path).suffix.lower() == ".pgm"


def cmd_inject(args) -> int:
    data = read_pgm(args.input) if _is_pgm(args.input) else read_signal_csv(args.input)
    spec = ArtifactSpec(args.count, args.magnitude, args.shape, args.seed, args.size)
    corrupted, mask = inject_artifacts(data, spec)
    if _is_pgm(args.input):
        write_pgm(corrupted, args.output)
    else:
        write_signal_csv(corrupted, args.output)
    if args.mask:
        Path(args.mask).write_text(_dump([[int(i) for i in idx] for idx in zip(*mask.nonzero())]) + "\n")
    print(_dump({"affected": int(mask.sum()), **asdict(spec)}))
    return 0


def cmd_generate_signal(args) -> int:
    write_signal_csv(generate_signal(args.kind, args.length, args.amplitude, args.seed, args.noise), args.output)
    return 0


def cmd_generate_image(args) -> int:
    write_pgm(generate_image(args.kind, args.width, args.height), args.output)
    return 0


def cmd_replay(args) -> int:
    manifest = RunManifest.read(args.manifest)
    return main(manifest.argv)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qara", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the operator and engine invariant suites")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("distribution", help="index distribution for one window, as JSON")
    p.add_argument("--values", type=_int_list, required=True)
    p.add_argument("--reference", type=int, required=True)
    p.add_argument("--bits", type=_positive, required=True)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-unique", action="store_true", help="do not append indices to data words")
    p.add_argument("--backend", choices=["auto", "branches", "statevector"], default="auto")

    p = sub.add_parser("gatecount", help="gate count and depth table as JSON")
    p.add_argument("--max-n", type=_positive, default=10)

    for name in ("filter-signal", "filter-image"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} filtering with qara or median")
        p.add_argument("--input", required=True)
        p.add_argument("--output", required=True)
        p.add_argument("--algorithm", choices=["qara", "median"], default="qara")
        p.add_argument("--window", type=_window, default=8)
        p.add_argument("--bits", type=_positive, default=None, help="register width (default: data width)")
        p.add_argument("--mode", choices=["argmax", "sampled"], default="argmax")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--stride", type=_positive, default=1)
        p.add_argument("--no-normalize", action="store_true")
        p.add_argument("--reference-policy", choices=["feedback", "window_mean"], default="feedback")
        p.add_argument("--clean", help="clean reference for the quality report")
        p.add_argument("--report", help="write QualityReport JSON here")
        p.add_argument("--manifest", help="manifest path (default: OUTPUT.manifest.json)")
        if name == "filter-signal":
            p.add_argument("--input-bits", type=_positive, default=8)
            p.add_argument("--trace", help="write per-window trace CSV here")

    p = sub.add_parser("inject-artifact", help="corrupt a PGM or CSV input deterministically")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--magnitude", type=int, default=255)
    p.add_argument("--shape", choices=["impulse", "block"], default="impulse")
    p.add_argument("--size", type=_positive, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask", help="write affected positions as JSON here")

    p = sub.add_parser("generate-signal", help="write a synthetic signal CSV")
    p.add_argument("--kind", choices=["triangular", "constant", "ramp"], default="triangular")
    p.add_argument("--length", type=int, default=256)
    p.add_argument("--amplitude", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("generate-image", help="write a synthetic PGM image")
    p.add_argument("--kind", choices=["gradient", "constant"], default="gradient")
    p.add_argument("--width", type=_positive, default=64)
    p.add_argument("--height", type=_positive, default=64)
    p.add_argument("--output", required=True)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    handlers = {
        "verify": cmd_verify,
        "distribution": cmd_distribution,
        "gatecount": cmd_gatecount,
        "filter-signal": lambda a: cmd_filter_signal(a, argv),
        "filter-image": lambda a: cmd_filter_image(a, argv),
        "inject-artifact": cmd_inject,
        "generate-signal": cmd_generate_signal,
        "generate-image": cmd_generate_image,
        "replay": cmd_replay,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"qara {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
