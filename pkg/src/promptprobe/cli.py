"""Command-line entry point: ``promptprobe {eval,attack,dyval,leaderboard,wordfreq}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .config import RunConfig, load_config, with_attacks_only
from .dyval import DyValSpec, emit_batch, write_dyval_dataset
from .errors import ConfigError, EmptyRun, PromptProbeError
from .pipeline import plan_run_id, run_sweep
from .pipeline.sweep import run_file

log = logging.getLogger("promptprobe")

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 1, 2


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--parallelism", type=int, help="concurrent requests and cells (overrides the config)")
    p.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="promptprobe", description="Prompt robustness evaluation harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("eval", parents=[common], help="run an evaluation sweep")
    sub.add_parser("attack", parents=[common], help="run the attacks listed in a config")

    dy = sub.add_parser("dyval", parents=[common], help="generate a reasoning dataset")
    dy.add_argument("--task", required=True)
    dy.add_argument("--depth", type=int, default=3)
    dy.add_argument("--width", type=int, default=2)
    dy.add_argument("--extra-links", type=int, default=0)
    dy.add_argument("--min-value", type=int, default=1)
    dy.add_argument("--max-value", type=int, default=9)
    dy.add_argument("--count", type=int, default=100)
    dy.add_argument("--fewshot", type=int, default=0, help="size of the few-shot pool to emit alongside")
    dy.add_argument("--name", help="dataset name (default: <task>_dyn)")

    for name, helptext in (("leaderboard", "aggregate run records"), ("wordfreq", "count words hit by attacks")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("run_dir", nargs="?", help="directory of run files (default: --out or ./runs)")
        p.add_argument("--csv", help="also write the table as CSV to this path")
        if name == "leaderboard":
            p.add_argument("--view", choices=analysis.VIEWS, default="standard")
        else:
            p.add_argument("--top", type=int, default=None)
    return parser


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required")
    overrides = {"out": args.out, "seed": args.seed, "parallelism": args.parallelism}
    return load_config(args.config, overrides)


def _header(**items) -> None:
    print("# " + " ".join(f"{k}={v}" for k, v in items.items()))


def _sweep(cfg: RunConfig, label: str) -> int:
    cells = cfg.plan()
    run_id = plan_run_id(cells)
    _header(command=label, run_id=run_id, seed=cfg.seed, parallelism=cfg.parallelism, cells=len(cells))
    records = run_sweep(cells, cfg.out, cfg.parallelism, run_id, validate=False)
    width = max(len(r.cell_id) for r in records)
    for r in records:
        if r.ok:
            detail = " ".join(f"{k}={v:.4f}" for k, v in r.metrics.items())
            if r.attack_summary:
                s = r.attack_summary
                detail += f" clean={s['clean_score']:.4f} attacked={s['attacked_score']:.4f} drop={s['drop_rate']:.4f} queries={s['queries_used']}"
        else:
            detail = f"ERROR {r.error}"
        print(f"{r.cell_id.ljust(width)}  {r.status:5s}  {detail}")
    print(f"# wrote {run_file(cfg.out, run_id)}")
    failed = [r.cell_id for r in records if not r.ok]
    if failed:
        print(f"{len(failed)} of {len(records)} cells failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_eval(args) -> int:
    return _sweep(_load(args), "eval")


def cmd_attack(args) -> int:
    return _sweep(with_attacks_only(_load(args)), "attack")


def cmd_dyval(args) -> int:
    seed = 0 if args.seed is None else args.seed
    spec = DyValSpec(args.task, args.depth, args.width, args.extra_links, (args.min_value, args.max_value), seed)
    name = args.name or f"{args.task}_dyn"
    out = Path(args.out or "datasets") / name
    samples = emit_batch(spec, args.count)
    # the few-shot pool uses a disjoint seed range
    shots = emit_batch(DyValSpec(**{**spec.to_json(), "seed": seed + args.count}), args.fewshot) if args.fewshot else ()
    write_dyval_dataset(out, name, samples, shots)
    _header(command="dyval", task=args.task, seed=seed, depth=args.depth, width=args.width, count=args.count)
    print(f"# wrote {out}")
    return EXIT_OK


def _run_dir(args) -> Path:
    return Path(args.run_dir or args.out or "runs")


def cmd_leaderboard(args) -> int:
    docs = analysis.load_runs(_run_dir(args))
    table = analysis.leaderboard(docs, args.view)
    print(analysis.render_text(table), end="")
    if args.csv:
        Path(args.csv).write_text(analysis.render_csv(table))
    return EXIT_OK


def cmd_wordfreq(args) -> int:
    docs = analysis.load_runs(_run_dir(args))
    freqs = analysis.word_frequencies(docs)
    print(analysis.render_wordfreq(freqs, args.top), end="")
    if args.csv:
        lines = ["word,count"] + [f"{w},{c}" for w, c in freqs]
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "attack": cmd_attack,
    "dyval": cmd_dyval,
    "leaderboard": cmd_leaderboard,
    "wordfreq": cmd_wordfreq,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, EmptyRun) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PromptProbeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
