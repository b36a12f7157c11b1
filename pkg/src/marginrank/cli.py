"""Command-line entry point.

Subcommands:
  rank          recover a leaderboard from an edges CSV
  sample-pairs  sample comparison pairs into an edges CSV
  simulate      run a budgeted convergence experiment against a MOS table
  metrics       compare two score CSVs (SRCC/PLCC) or evaluate a rollout group

Exit codes: 0 success, 2 usage or input error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

import numpy as np

from .aggregate import (
    EloConfig,
    elo_rank,
    lsq_recover,
    winrate_rank,
    write_leaderboard_csv,
)
from .errors import DisconnectedGraphWarning, InvalidInputError, UndefinedCorrelationError
from .graph import PairSampler
from .metrics import plcc, srcc
from .rewards import group_advantages
from .simulate import MosTable, NoiseModel, run_convergence_experiment, write_report


def _read_edges(path: str, require_margin: bool) -> tuple[list[str], list[tuple[str, str, float]]]:
    """Parse `left_id,right_id[,margin]`; returns ids in first-appearance order."""
    ids: list[str] = []
    seen: set[str] = set()
    rows: list[tuple[str, str, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise InvalidInputError(f"{path}: missing edges header")
        for lineno, row in enumerate(reader, start=2):
            if len(row) < (3 if require_margin else 2):
                raise InvalidInputError(f"{path}: malformed row {lineno}")
            left, right = row[0], row[1]
            margin = 0.0
            if require_margin:
                try:
                    margin = float(row[2])
                except ValueError as exc:
                    raise InvalidInputError(f"{path}: bad margin at row {lineno}") from exc
            for vid in (left, right):
                if vid not in seen:
                    seen.add(vid)
                    ids.append(vid)
            rows.append((left, right, margin))
    return ids, rows


def _read_scores(path: str) -> dict[str, float]:
    """Parse a two-or-more column CSV into id -> value, using columns 0 and 1."""
    scores: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)  # header
        for lineno, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise InvalidInputError(f"{path}: malformed row {lineno}")
            try:
                scores[row[0]] = float(row[1])
            except ValueError as exc:
                raise InvalidInputError(f"{path}: bad value at row {lineno}") from exc
    return scores


def cmd_rank(args: argparse.Namespace) -> int:
    if args.ids:
        ids = [line.strip() for line in Path(args.ids).read_text().splitlines() if line.strip()]
    else:
        ids = []
    file_ids, rows = _read_edges(args.edges, require_margin=True)
    if not args.ids:
        ids = file_ids
    index = {vid: i for i, vid in enumerate(ids)}
    edges = []
    for left, right, margin in rows:
        if left not in index or right not in index:
            missing = left if left not in index else right
            raise InvalidInputError(f"{args.edges}: id '{missing}' not in id list")
        edges.append((index[left], index[right], margin))

    elo_config = EloConfig(
        initial_rating=args.elo_initial,
        k_factor=args.elo_k,
        scale=args.elo_scale,
        draw_threshold=args.draw_threshold,
    )
    if not ids:
        print("warning: no comparisons and no ids; writing empty leaderboard", file=sys.stderr)
        Path(args.out).write_text("video_id,score,rank\n")
        return 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DisconnectedGraphWarning)
        if args.method == "lsq":
            board = lsq_recover(len(ids), edges)
        elif args.method == "elo":
            board = elo_rank(len(ids), edges, elo_config)
        elif args.method == "winrate":
            board = winrate_rank(len(ids), edges, args.draw_threshold)
        else:
            raise InvalidInputError(f"unknown method '{args.method}'")
    for warning in caught:
        if isinstance(warning.message, DisconnectedGraphWarning):
            print(f"warning: {warning.message}", file=sys.stderr)
    write_leaderboard_csv(args.out, ids, board)
    return 0


def cmd_sample_pairs(args: argparse.Namespace) -> int:
    if args.batch_size < 1:
        raise InvalidInputError("batch-size must be >= 1")
    if args.num_batches < 1:
        raise InvalidInputError("num-batches must be >= 1")
    if args.mos:
        ids = MosTable.from_csv(args.mos).ids
        n = len(ids)
    elif args.n:
        n = args.n
        ids = [str(i) for i in range(n)]
    else:
        raise InvalidInputError("either --n or --mos is required")
    sampler = PairSampler(n, args.seed, args.quantile_count, args.window_width)
    sampled: list[tuple[int, int]] = []
    for _ in range(args.num_batches):
        sampled.extend(sampler.sample_batch(args.batch_size))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left_id", "right_id"])
        for i, j in sampled:
            writer.writerow([ids[i], ids[j]])
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.mos:
        mos = MosTable.from_csv(args.mos)
    elif args.synthetic:
        mos = MosTable.synthetic(args.synthetic, seed=args.seeds[0])
    else:
        raise InvalidInputError("either --mos or --synthetic is required")
    noise = NoiseModel(
        sigma=args.sigma,
        flip_prob=args.flip_prob,
        clamp=(args.clamp_min, args.clamp_max),
    )
    elo_config = EloConfig(
        initial_rating=args.elo_initial,
        k_factor=args.elo_k,
        scale=args.elo_scale,
        draw_threshold=args.draw_threshold,
    )
    report = run_convergence_experiment(
        mos,
        noise,
        budget_multiplier=args.budget_multiplier,
        batch_size=args.batch_size,
        methods=args.methods.split(","),
        seeds=args.seeds,
        stability_tolerance=args.tolerance,
        elo_config=elo_config,
        draw_threshold=args.draw_threshold,
        rating_refresh=args.rating_refresh,
        workers=args.workers,
    )
    csv_path, json_path = write_report(report, args.outdir)
    for method in report.methods:
        budget = report.median_stability[method]["srcc"]
        print(f"{method}: median srcc stability budget {budget:g}")
    print(f"wrote {csv_path} and {json_path}")
    if args.plot:
        _plot_report(report, Path(args.outdir) / "convergence.png")
    return 0


def _plot_report(report, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for ax, metric in zip(axes, ("srcc", "plcc")):
        for method in report.methods:
            curve = report.median_curves[method][metric]
            ax.plot(curve.budgets, curve.values, label=method)
        ax.set_xlabel("comparisons")
        ax.set_ylabel(metric)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print(f"wrote {path}")


def cmd_metrics(args: argparse.Namespace) -> int:
    if args.group_rewards:
        rewards = [float(tok) for tok in args.group_rewards.split(",")]
        advantages = group_advantages(rewards, args.eps_std)
        print("advantages " + " ".join(f"{a:.4f}" for a in advantages))
        if not (args.pred and args.truth):
            return 0
    if not (args.pred and args.truth):
        raise InvalidInputError("pred and truth CSVs are required")
    pred = _read_scores(args.pred)
    truth = _read_scores(args.truth)
    missing = sorted(set(pred) ^ set(truth))
    if missing:
        raise InvalidInputError(f"id sets differ; first missing id: '{missing[0]}'")
    ids = sorted(pred)
    p = [pred[i] for i in ids]
    t = [truth[i] for i in ids]
    print(f"srcc {srcc(p, t):.4f}")
    print(f"plcc {plcc(p, t):.4f}")
    return 0


def _add_elo_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--elo-initial", type=float, default=1500.0)
    parser.add_argument("--elo-k", type=float, default=32.0)
    parser.add_argument("--elo-scale", type=float, default=400.0)
    parser.add_argument("--draw-threshold", type=float, default=0.2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marginrank",
        description="Pairwise-margin leaderboard recovery and convergence experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rank = sub.add_parser("rank", help="recover a leaderboard from an edges CSV")
    rank.add_argument("edges", help="CSV with header left_id,right_id,margin")
    rank.add_argument("-o", "--out", required=True, help="leaderboard CSV to write")
    rank.add_argument("--method", default="lsq", choices=["lsq", "elo", "winrate"])
    rank.add_argument("--ids", help="text file with one video id per line (includes isolated ids)")
    _add_elo_flags(rank)
    rank.set_defaults(func=cmd_rank)

    sample = sub.add_parser("sample-pairs", help="sample comparison pairs")
    sample.add_argument("--n", type=int, help="number of videos (integer ids)")
    sample.add_argument("--mos", help="mos CSV supplying the video ids")
    sample.add_argument("--num-batches", type=int, default=1)
    sample.add_argument("--batch-size", type=int, default=64)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--quantile-count", type=int, default=10)
    sample.add_argument("--window-width", type=float, default=0.5)
    sample.add_argument("-o", "--out", required=True, help="edges CSV to write")
    sample.set_defaults(func=cmd_sample_pairs)

    simulate = sub.add_parser("simulate", help="run a convergence experiment")
    simulate.add_argument("--mos", help="CSV with header video_id,mos")
    simulate.add_argument("--synthetic", type=int, metavar="N",
                          help="generate N synthetic MOS values instead of reading a file")
    simulate.add_argument("--seeds", type=lambda s: [int(tok) for tok in s.split(",")],
                          default=[0], help="comma-separated experiment seeds")
    simulate.add_argument("--budget-multiplier", type=float, default=5.0)
    simulate.add_argument("--batch-size", type=int, default=64)
    simulate.add_argument("--sigma", type=float, default=0.0)
    simulate.add_argument("--flip-prob", type=float, default=0.0)
    simulate.add_argument("--clamp-min", type=float, default=-4.0)
    simulate.add_argument("--clamp-max", type=float, default=4.0)
    simulate.add_argument("--methods", default="lsq,elo,winrate")
    simulate.add_argument("--tolerance", type=float, default=0.005)
    simulate.add_argument("--rating-refresh", default="lsq", choices=["lsq", "elo"])
    simulate.add_argument("--workers", type=int, default=1)
    simulate.add_argument("--outdir", required=True)
    simulate.add_argument("--plot", action="store_true",
                          help="also render convergence.png from the median curves")
    _add_elo_flags(simulate)
    simulate.set_defaults(func=cmd_simulate)

    metrics = sub.add_parser("metrics", help="SRCC/PLCC between two score CSVs")
    metrics.add_argument("pred", nargs="?", help="CSV of predicted scores (video_id,value,...)")
    metrics.add_argument("truth", nargs="?", help="CSV of ground-truth scores")
    metrics.add_argument("--group-rewards",
                         help="comma-separated rollout rewards; prints group advantages")
    metrics.add_argument("--eps-std", type=float, default=1e-4)
    metrics.set_defaults(func=cmd_metrics)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (InvalidInputError, UndefinedCorrelationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
