"""Multi-seed benchmark runner.

For every (dataset, method) cell and every hyperparameter grid point, one
model is trained per seed, an epoch is picked with the configured selection
strategy, and the parameters of that epoch are scored on the test split.  The
grid point with the highest mean validation accuracy (of the selected epochs)
is reported as mean and sample standard deviation over seeds.  Ties go to the
lexicographically smallest grid point.
"""
from __future__ import annotations

import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import selection as sel
from .graphdata import AttributedGraph, GroupId, load_bundle
from .metrics import PredictionSet, evaluate
from .models import ModelConfig, fit, normalize_adjacency, predict
from . import syngen

__all__ = ["BenchPlan", "RunResult", "CellReport", "BenchReport", "run_benchmark", "run_one"]

log = logging.getLogger(__name__)

METRICS = ("acc", "auc", "f1", "delta_sp", "delta_eo")
GROUP_KEYS = tuple(g.name for g in GroupId)


def _canonical(point: dict) -> str:
    return json.dumps(point, sort_keys=True)


@dataclass
class BenchPlan:
    """What to run.

    ``grid`` maps a method name to ``{field: [values, ...]}`` over
    :class:`ModelConfig` fields; a grid without method keys applies to every
    method.  ``base`` holds fixed ModelConfig fields (e.g. ``epochs``).
    """

    datasets: dict
    methods: list = field(default_factory=lambda: ["mlp", "gcn"])
    grid: dict = field(default_factory=dict)
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    selection: str = "unified"
    early_exit: bool = False
    acc_floor: float = None
    roc_floor: float = None
    base: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.seeds) < 2:
            raise ValueError("a benchmark needs at least two seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")

    def method_grid(self, method: str) -> list:
        """Grid points for ``method`` as dicts, in lexicographic order."""
        axes = self.grid.get(method, {}) if set(self.grid) & {"mlp", "gcn"} else self.grid
        names = sorted(axes)
        points = [dict(zip(names, vals)) for vals in itertools.product(*(axes[k] for k in names))]
        return sorted(points, key=_canonical) or [{}]

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "BenchPlan":
        base_dir = Path(base_dir)
        raw = data["datasets"]
        raw = [(None, item) for item in raw] if isinstance(raw, list) else list(raw.items())
        datasets = {}
        for name, item in raw:
            if isinstance(item, dict) and "preset" in item:
                cfg = syngen.preset(item["preset"], int(item.get("seed", 0)))
                name = name or item.get("name", cfg.name)
                datasets[name] = cfg
            else:
                path = Path(item)
                path = path if path.is_absolute() else base_dir / path
                datasets[name or path.name] = path
        keys = ("methods", "grid", "seeds", "selection", "early_exit",
                "acc_floor", "roc_floor", "base")
        return cls(datasets=datasets, **{k: data[k] for k in keys if k in data})


@dataclass
class RunResult:
    dataset: str
    method: str
    grid_point: dict
    seed: int
    best_epoch: int
    val_acc: float
    test: dict
    scores: np.ndarray = None
    log_text: str = ""

    @property
    def run_id(self) -> str:
        return f"{self.dataset}__{self.method}__{_point_slug(self.grid_point)}__s{self.seed}"

    def summary(self) -> dict:
        return {
            "run_id": self.run_id, "dataset": self.dataset, "method": self.method,
            "grid_point": self.grid_point, "seed": self.seed,
            "best_epoch": self.best_epoch, "val_acc": self.val_acc, "test": self.test,
        }


def _point_slug(point: dict) -> str:
    if not point:
        return "default"
    return "_".join(f"{k}={point[k]}" for k in sorted(point))


def _resolve(dataset) -> AttributedGraph:
    if isinstance(dataset, AttributedGraph):
        return dataset
    if isinstance(dataset, syngen.SynConfig):
        return syngen.generate(dataset)
    return load_bundle(dataset)


def run_one(g: AttributedGraph, dataset: str, method: str, point: dict, seed: int,
            plan: BenchPlan, adj=None) -> RunResult:
    """Train, select and test a single (grid point, seed) run."""
    cfg = ModelConfig(**{**plan.base, **point, "kind": method, "seed": seed})
    if method == "gcn" and adj is None:
        adj = normalize_adjacency(g)
    _, epoch_log = fit(cfg, g, adj)
    choice = sel.select(epoch_log, plan.selection, early_exit=plan.early_exit,
                        acc_floor=plan.acc_floor, roc_floor=plan.roc_floor)
    scores = predict(cfg, epoch_log.params_at(choice.best_epoch), g, adj)
    m = g.test
    bundle = evaluate(PredictionSet(scores[m], g.labels[m], g.sens[m]))
    return RunResult(dataset, method, point, seed, choice.best_epoch,
                     choice.chosen_metrics.val_acc, bundle.to_dict(),
                     scores, epoch_log.dumps())


def _run_cell(g, dataset, method, plan, point_seeds):
    adj = normalize_adjacency(g) if method == "gcn" else None
    return [run_one(g, dataset, method, p, s, plan, adj) for p, s in point_seeds]


@dataclass
class CellReport:
    dataset: str
    method: str
    grid_point: dict = None
    mean: dict = None
    std: dict = None
    runs: list = field(default_factory=list)
    error: str = None

    def to_dict(self) -> dict:
        return {"dataset": self.dataset, "method": self.method,
                "grid_point": self.grid_point, "mean": self.mean, "std": self.std,
                "runs": [r.run_id for r in self.runs], "error": self.error}


def _flatten(test: dict) -> dict:
    out = {k: test[k] for k in METRICS}
    for g in GROUP_KEYS:
        out[g] = test["group_acc"].get(g, float("nan"))
    return out


def _aggregate(runs: list):
    rows = [_flatten(r.test) for r in runs]
    keys = list(rows[0])
    arr = np.array([[row[k] for k in keys] for row in rows])
    return (dict(zip(keys, arr.mean(axis=0).tolist())),
            dict(zip(keys, arr.std(axis=0, ddof=1).tolist())))


@dataclass
class BenchReport:
    cells: list
    metadata: dict = field(default_factory=dict)

    def cell(self, dataset: str, method: str) -> CellReport:
        for c in self.cells:
            if c.dataset == dataset and c.method == method:
                return c
        raise KeyError((dataset, method))

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "cells": [c.to_dict() for c in self.cells]}

    def to_markdown(self) -> str:
        head = ["Dataset", "Method", "ACC", "AUC", "F1", "Δ_SP", "Δ_EO", *GROUP_KEYS]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for c in self.cells:
            if c.error:
                vals = [f"failed: {c.error}"] + [""] * (len(head) - 3)
            else:
                vals = [f"{100 * c.mean[k]:.2f} ± {100 * c.std[k]:.2f}"
                        for k in (*METRICS, *GROUP_KEYS)]
            lines.append("| " + " | ".join([c.dataset, c.method, *vals]) + " |")
        return "\n".join(lines) + "\n"


def _write_run(out: Path, r: RunResult) -> None:
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    (runs / f"{r.run_id}.jsonl").write_text(r.log_text, encoding="utf-8")
    lines = ["id,score"] + [f"{i},{s!r}" for i, s in enumerate(r.scores.tolist())]
    (runs / f"{r.run_id}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (runs / f"{r.run_id}.json").write_text(json.dumps(r.summary(), indent=2) + "\n",
                                           encoding="utf-8")


def run_benchmark(plan: BenchPlan, out=None, workers: int = 1) -> BenchReport:
    """Run every cell of ``plan``; optionally write artifacts under ``out``.

    A failing run marks its whole cell as failed (the message is kept in
    ``CellReport.error``); other cells still run.
    """
    out = Path(out) if out is not None else None
    graphs = {name: _resolve(ds) for name, ds in plan.datasets.items()}
    jobs = []
    for name in graphs:
        for method in plan.methods:
            points = plan.method_grid(method)
            jobs.append((name, method, points,
                         [(p, s) for p in points for s in plan.seeds]))

    def submit_all(executor):
        futures = []
        for name, method, points, ps in jobs:
            args = (graphs[name], name, method, plan, ps)
            futures.append(executor.submit(_run_cell, *args) if executor
                           else _Done(_run_cell, args))
        return futures

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = submit_all(ex)
            outcomes = [_outcome(f) for f in futures]
    else:
        outcomes = [_outcome(f) for f in submit_all(None)]

    cells = []
    for (name, method, points, _), (runs, error) in zip(jobs, outcomes):
        cell = CellReport(name, method)
        if error is not None:
            log.warning("cell %s/%s failed: %s", name, method, error)
            cell.error = error
            cells.append(cell)
            continue
        if out is not None:
            for r in runs:
                _write_run(out, r)
        best_point, best_val = None, -np.inf
        for p in points:
            key = _canonical(p)
            val = float(np.mean([r.val_acc for r in runs if _canonical(r.grid_point) == key]))
            if val > best_val:
                best_point, best_val = p, val
        cell.grid_point = best_point
        cell.runs = [r for r in runs if _canonical(r.grid_point) == _canonical(best_point)]
        cell.mean, cell.std = _aggregate(cell.runs)
        cells.append(cell)

    metadata = {
        "selection": plan.selection,
        "early_exit": plan.early_exit,
        "seeds": list(plan.seeds),
        "workers": workers,
        "numpy": np.__version__,
        "omp_num_threads": os.environ.get("OMP_NUM_THREADS"),
    }
    report = BenchReport(cells, metadata)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                                         encoding="utf-8")
        (out / "report.md").write_text(report.to_markdown(), encoding="utf-8")
    return report


class _Done:
    """Eagerly evaluated stand-in for a future (serial mode)."""

    def __init__(self, fn, args):
        try:
            self._value, self._exc = fn(*args), None
        except Exception as exc:  # recorded per cell
            self._value, self._exc = None, exc

    def result(self):
        if self._exc is not None:
            raise self._exc
        return self._value


def _outcome(future):
    try:
        return future.result(), None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"
