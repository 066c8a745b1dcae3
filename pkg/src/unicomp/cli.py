"""Command line interface.

Subcommands:

    compress      read a container, compress, write tokens plus metadata
    analyze       run the same computation but emit only the report
    verify-bound  fuzz the reconstruction bound invariants
    bench         time the reference scan against the vectorized one

Exit codes: 0 on success, 1 when an invariant check fails or an internal
error surfaces, 2 on a configuration conflict, 3 on malformed input.
``UNICOMP_THREADS`` caps how many groups are processed concurrently; the
results never depend on it.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .baselines import attention_topk, random_selection, uniqueness_topk
from .errors import BudgetError, ConfigError, ContainerError, DegenerateFeatureError, UnicompError
from .grouping import VideoTensor
from .pipeline import CompressionConfig, analyze, compress
from .reporting import to_jsonable, write_report
from .spatial import benchmark
from .uctk import load_container, save_container
from .verify import run_bound_checks

__all__ = ["main", "entrypoint"]

SELECTORS = ("sdc", "unique-topk", "random", "attn-topk")


def _add_mode_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ratio", type=float, default=None, help="retain ratio in (0, 1]")
    parser.add_argument("--token-max", type=int, default=None, help="absolute emitted-token cap")
    parser.add_argument("--auto", action="store_true", help="uncapped redundancy-driven mode")
    parser.add_argument("--uf", type=float, default=0.005, help="frame grouping threshold")
    parser.add_argument("--uc", type=float, default=0.2, help="token redundancy threshold")
    parser.add_argument("--order", choices=("ids", "uniqueness"), default="ids")
    parser.add_argument("--no-fuse", action="store_true", help="disable neighbor fusion")
    parser.add_argument("--fgf", choices=("fusion", "first"), default="fusion",
                        help="group representative style")
    parser.add_argument("--alloc", choices=("softmax", "uniform"), default="softmax",
                        help="budget split across groups")


def _config_from_args(args) -> CompressionConfig:
    chosen = sum([args.ratio is not None, args.token_max is not None, bool(args.auto)])
    if chosen != 1:
        raise ConfigError("exactly one of --ratio, --token-max, or --auto is required")
    return CompressionConfig(
        frame_threshold=args.uf,
        token_threshold=args.uc,
        retain_ratio=args.ratio,
        token_max=args.token_max,
        mode="auto" if args.auto else "budgeted",
        order=args.order,
        fuse=not args.no_fuse,
        grouping=args.fgf,
        allocation=args.alloc,
    )


def _summary_line(report, suffix: str = "") -> str:
    totals = report.totals
    cap = totals["token_max"]
    return (
        f"groups={totals['groups']} retained={totals['retained']} "
        f"markers={totals['markers']} emitted={totals['emitted']} "
        f"token_max={'-' if cap is None else cap} "
        f"ratio={totals['retained_ratio']:.4f}" + suffix
    )


def _cmd_compress(args) -> int:
    config = _config_from_args(args)
    video = load_container(args.input)
    result = compress(video, config)

    rows = np.concatenate([f.retained_features for f in result.frames], axis=0)
    save_container(args.output, VideoTensor(frames=rows[None, :, :]))

    sidecar_path = args.sidecar or f"{args.output}.json"
    offset = 0
    groups = []
    for k, frame in enumerate(result.frames):
        start, end = result.grouping.spans[k]
        groups.append(
            {
                "span": [start, end],
                "retained_ids": list(frame.retained_ids),
                "row_offset": offset,
                "rows": frame.num_retained,
            }
        )
        offset += frame.num_retained
    sidecar = {
        "mode": config.mode,
        "order": config.order,
        "token_max": result.report.totals["token_max"],
        "emitted": result.report.totals["emitted"],
        "markers": list(result.markers),
        "groups": groups,
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(to_jsonable(sidecar), fh, sort_keys=True, indent=2)
        fh.write("\n")

    if args.report:
        write_report(result.report, args.report)

    print(_summary_line(result.report))
    print(f"wrote {args.output}")
    print(f"wrote {sidecar_path}")
    if args.report:
        print(f"wrote {args.report}")
    return 0


def _build_selector(name: str, seed: int, attention: np.ndarray | None):
    if name == "sdc":
        return None
    if name == "unique-topk":
        return lambda k, span, tokens, key, budget: uniqueness_topk(tokens, key_frame=key, budget=budget)
    if name == "random":
        return lambda k, span, tokens, key, budget: random_selection(tokens, budget, seed=seed + k)

    def run_attention(k, span, tokens, key, budget):
        start, end = span
        scores = attention[start:end].mean(axis=0)
        return attention_topk(tokens, scores, budget)

    return run_attention


def _cmd_analyze(args) -> int:
    config = _config_from_args(args)
    if args.selector != "sdc" and config.mode == "auto":
        raise ConfigError(f"--selector {args.selector} needs a budget and cannot run with --auto")
    video = load_container(args.input)

    attention = None
    if args.selector == "attn-topk":
        if not args.attn_scores:
            raise ConfigError("--selector attn-topk requires --attn-scores")
        attention = np.load(args.attn_scores)
        if attention.shape != (video.num_frames, video.tokens_per_frame):
            raise ContainerError(
                "attention scores must have shape "
                f"({video.num_frames}, {video.tokens_per_frame}), got {attention.shape}"
            )

    report = analyze(video, config, selector=_build_selector(args.selector, args.seed, attention))
    if args.report:
        write_report(report, args.report)
    print(_summary_line(report, suffix=f" selector={args.selector}"))
    if args.report:
        print(f"wrote {args.report}")
    return 0


def _cmd_verify_bound(args) -> int:
    extra = None
    if args.input:
        extra = list(load_container(args.input).frames)
    result = run_bound_checks(
        trials=args.trials, max_tokens=args.max_n, seed=args.seed, extra_frames=extra
    )

    by_check = {"nearest-identity": 0, "residual-bound": 0, "monotone-bound": 0}
    for violation in result.violations:
        by_check[violation["check"]] += 1

    print(
        f"nearest-identity: {by_check['nearest-identity']} violations, "
        f"max deviation {result.max_nearest_deviation:.3e} over {result.trials} trials"
    )
    print(f"residual-bound: {by_check['residual-bound']} violations over {result.trials} trials")
    print(f"monotone-bound: {by_check['monotone-bound']} violations over {result.trials} trials")
    print(
        f"softmax error above uniqueness bound in {result.softmax_exceedances}/{result.trials} "
        "trials (informational)"
    )
    if not result.ok:
        print("counterexample:", file=sys.stderr)
        print(json.dumps(to_jsonable(result.violations[0]), sort_keys=True), file=sys.stderr)
        print("verify-bound: FAIL")
        return 1
    print("verify-bound: PASS")
    return 0


def _cmd_bench(args) -> int:
    stats = benchmark(
        n=args.n,
        budget=args.kt,
        dim=args.d,
        token_threshold=args.uc,
        repeat=args.repeat,
        seed=args.seed,
    )
    print(
        f"spatial compression bench: n={stats['n']} budget={stats['budget']} "
        f"dim={stats['dim']} threshold={stats['token_threshold']} repeat={stats['repeat']}"
    )
    print(f"reference median: {stats['reference_ms']:.3f} ms")
    print(f"parallel median: {stats['parallel_ms']:.3f} ms")
    print(f"speedup: {stats['speedup']:.1f}x")
    print(f"mismatches: {stats['mismatches']}")
    return 0 if stats["mismatches"] == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unicomp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_compress = sub.add_parser("compress", help="compress a token container")
    p_compress.add_argument("--input", required=True)
    p_compress.add_argument("--output", required=True)
    _add_mode_flags(p_compress)
    p_compress.add_argument("--report", default=None, help="write the JSON report here")
    p_compress.add_argument("--sidecar", default=None,
                            help="metadata path (default: <output>.json)")
    p_compress.set_defaults(handler=_cmd_compress)

    p_analyze = sub.add_parser("analyze", help="report compression metrics without output tokens")
    p_analyze.add_argument("--input", required=True)
    _add_mode_flags(p_analyze)
    p_analyze.add_argument("--selector", choices=SELECTORS, default="sdc")
    p_analyze.add_argument("--seed", type=int, default=0, help="seed for --selector random")
    p_analyze.add_argument("--attn-scores", default=None,
                           help=".npy file of (T, N) scores for --selector attn-topk")
    p_analyze.add_argument("--report", default=None)
    p_analyze.set_defaults(handler=_cmd_analyze)

    p_verify = sub.add_parser("verify-bound", help="fuzz the bound invariants")
    p_verify.add_argument("--input", default=None, help="also check frames from this container")
    p_verify.add_argument("--trials", type=int, default=1000)
    p_verify.add_argument("--max-n", type=int, default=32)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(handler=_cmd_verify_bound)

    p_bench = sub.add_parser("bench", help="time reference vs parallel compression")
    p_bench.add_argument("--n", type=int, default=256)
    p_bench.add_argument("--kt", type=int, default=64)
    p_bench.add_argument("--d", type=int, default=32)
    p_bench.add_argument("--uc", type=float, default=0.2)
    p_bench.add_argument("--repeat", type=int, default=20)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(handler=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ContainerError, DegenerateFeatureError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except UnicompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
