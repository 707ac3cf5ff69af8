"""Command-line entry point: ``fairgraph <command> ...``.

Commands: ``stats``, ``generate``, ``rebalance``, ``train``, ``eval``,
``select`` and ``bench``.  Metrics print in percentage points; JSON output
keeps the internal [0, 1] scale unless stated otherwise.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, graphdata, metrics, models, rebalance, selection, syngen


def _cmd_stats(args) -> int:
    g = graphdata.load_bundle(args.bundle)
    st = graphdata.compute_stats(g)
    if args.json:
        print(json.dumps(st.to_dict(), indent=2))
    else:
        print(st.format_table())
    return 0


def _cmd_generate(args) -> int:
    if args.config:
        if args.out is None:
            raise SystemExit("error: --out is required with --config")
        cfg = syngen.SynConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
    else:
        cfg = syngen.preset(args.preset, 0 if args.seed is None else args.seed)
    out = Path(args.out or cfg.name)
    g = syngen.generate(cfg)
    graphdata.save_bundle(g, out)
    st = graphdata.compute_stats(g)
    print(f"wrote {out}: {st.num_nodes} nodes, {st.num_edges} edges")
    return 0


def _cmd_rebalance(args) -> int:
    g = graphdata.load_bundle(args.bundle)
    if args.spec:
        spec = rebalance.RebalanceSpec.load(args.spec)
        if args.seed is not None:
            spec = rebalance.RebalanceSpec(spec.deltas, args.seed)
    else:
        spec = rebalance.get_recipe(args.recipe, 0 if args.seed is None else args.seed)
    new = rebalance.apply_rebalance(g, spec)
    graphdata.save_bundle(new, args.out)
    print(f"wrote {args.out}: {g.num_edges} -> {new.num_edges} edges")
    return 0


def _read_scores(path, n: int) -> np.ndarray:
    scores = np.full(n, np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["id", "score"]:
            raise ValueError(f"{path}:1: expected header id,score")
        for row in reader:
            try:
                i, s = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{reader.line_num}: malformed row {row!r}") from None
            if not 0 <= i < n:
                raise ValueError(f"{path}:{reader.line_num}: node id {i} out of range")
            scores[i] = s
    return scores


def _cmd_eval(args) -> int:
    g = graphdata.load_bundle(args.bundle)
    scores = _read_scores(args.pred, g.n)
    m = g.mask(args.split)
    missing = np.flatnonzero(m & np.isnan(scores))
    if missing.size:
        raise ValueError(f"no score for {missing.size} {args.split} nodes (first: {missing[0]})")
    p = metrics.PredictionSet(scores[m], g.labels[m], g.sens[m], threshold=args.threshold)
    bundle = metrics.evaluate(p)
    print(json.dumps(bundle.to_dict(), indent=2))
    print(bundle.format_table())
    return 0


def _write_scores(path, scores) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("id,score\n")
        for i, s in enumerate(scores.tolist()):
            fh.write(f"{i},{s!r}\n")


def _cmd_train(args) -> int:
    g = graphdata.load_bundle(args.bundle)
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    data["kind"] = args.model
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = models.ModelConfig.from_dict(data)
    adj = models.normalize_adjacency(g) if cfg.kind == "gcn" else None
    params, log = models.fit(cfg, g, adj)
    if args.log:
        log.save(args.log)
    if args.pred:
        if args.select != "final" and len(log):
            choice = selection.select(log, args.select)
            params = log.params_at(choice.best_epoch)
            print(f"selected epoch {choice.best_epoch} ({args.select})")
        _write_scores(args.pred, models.predict(cfg, params, g, adj))
    print(f"trained {cfg.kind} for {cfg.epochs} epochs")
    return 0


def _cmd_select(args) -> int:
    log = models.EpochLog.load(args.log)
    result = selection.select(log, args.strategy, early_exit=args.early_exit,
                              acc_floor=args.acc_floor, roc_floor=args.roc_floor)
    print(result.to_json())
    return 0


def _cmd_bench(args) -> int:
    plan_path = Path(args.plan)
    plan = bench.BenchPlan.from_dict(json.loads(plan_path.read_text()), plan_path.parent)
    report = bench.run_benchmark(plan, out=args.out, workers=args.workers)
    print(report.to_markdown(), end="")
    return 1 if any(c.error for c in report.cells) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="group and edge-type statistics of a bundle")
    p.add_argument("bundle")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("generate", help="generate a synthetic bundle")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(syngen.PRESETS))
    src.add_argument("--config", help="SynConfig JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("rebalance", help="add/remove edges by type")
    p.add_argument("bundle")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--recipe", choices=sorted(rebalance.builtin_recipes()))
    src.add_argument("--spec", help="RebalanceSpec JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rebalance)

    p = sub.add_parser("train", help="train one model and write its epoch log")
    p.add_argument("--bundle", required=True)
    p.add_argument("--model", choices=("mlp", "gcn"), required=True)
    p.add_argument("--config", help="ModelConfig JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--log", help="epoch log output (JSON lines)")
    p.add_argument("--pred", help="prediction CSV output (id,score)")
    p.add_argument("--select", default="unified", choices=("unified", "s1", "s2", "s3", "final"),
                   help="which epoch's parameters produce --pred")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score predictions on a split")
    p.add_argument("--pred", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--split", default="test", choices=graphdata.SPLITS)
    p.add_argument("--threshold", type=float, default=0.0, help="logit threshold")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("select", help="pick an epoch from a saved log")
    p.add_argument("--log", required=True)
    p.add_argument("--strategy", default="unified", choices=("unified", "s1", "s2", "s3"))
    p.add_argument("--early-exit", action="store_true")
    p.add_argument("--acc-floor", type=float)
    p.add_argument("--roc-floor", type=float)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("bench", help="run a benchmark plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
