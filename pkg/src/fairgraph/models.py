"""Reference learners with hand-written gradients.

Two model kinds share one parameterization, a stack of affine layers
``W0, b0, ..., W{L-1}, b{L-1}`` with ReLU between them and a scalar logit at
the end:

* ``mlp`` with ``layers = L`` (2 to 5) affine layers;
* ``gcn``: a single graph-convolution encoder ``ReLU(A_hat X W0 + b0)``
  followed by a linear head ``W1, b1``.

``A_hat = D^-1/2 (A + I) D^-1/2`` is the self-looped, symmetrically
normalized adjacency.  With no edges ``A_hat = I`` and the GCN computes the
same function as a 2-layer MLP with the same weights.

Training is full-batch Adam on the binary cross-entropy of the training nodes
plus an L2 penalty ``(weight_decay / 2) * sum ||W||^2`` on the weight
matrices (biases are not penalized).  Everything runs in float64.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, asdict, fields
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import rng as rngmod
from .graphdata import AttributedGraph
from .metrics import (PredictionSet, accuracy, binary_f1, delta_eo, delta_sp,
                      roc_auc, DegenerateGroupError, DegenerateMetricWarning)

__all__ = [
    "ModelConfig",
    "EpochRecord",
    "EpochLog",
    "normalize_adjacency",
    "init_params",
    "forward",
    "backward",
    "loss_and_grads",
    "Adam",
    "fit",
    "predict",
    "check_eval_split",
]

GRID = {
    "hidden": (16, 32),
    "lr": (1e-2, 1e-3, 1e-4),
    "weight_decay": (1e-4, 1e-5),
    "dropout": (0.0, 0.5, 0.8),
}
RECORD_FIELDS = ("epoch", "val_acc", "val_roc", "val_f1", "val_parity",
                 "val_equality", "val_loss")


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of one training run.

    ``grid_constrained=True`` restricts hidden size, learning rate, weight
    decay and dropout to the benchmark grids.
    """

    kind: str = "mlp"
    layers: int = None
    hidden: int = 16
    lr: float = 1e-2
    weight_decay: float = 1e-4
    dropout: float = 0.5
    epochs: int = 1000
    seed: int = 0
    grid_constrained: bool = False

    def __post_init__(self):
        if self.layers is None:
            object.__setattr__(self, "layers", 2 if self.kind == "mlp" else 1)
        self.validate()

    def validate(self) -> None:
        if self.kind not in ("mlp", "gcn"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "mlp" and not 2 <= self.layers <= 5:
            raise ValueError("mlp layers must be in 2..5")
        if self.kind == "gcn" and self.layers != 1:
            raise ValueError("gcn supports exactly one convolution layer")
        if self.hidden <= 0 or self.lr <= 0 or self.weight_decay < 0 or self.epochs < 0:
            raise ValueError("hidden and lr must be positive, weight_decay and epochs >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.grid_constrained:
            for name, allowed in GRID.items():
                if getattr(self, name) not in allowed:
                    raise ValueError(f"{name}={getattr(self, name)!r} not in grid {allowed}")

    @property
    def num_affine(self) -> int:
        return self.layers if self.kind == "mlp" else 2

    def replace(self, **changes) -> "ModelConfig":
        data = asdict(self)
        data.update(changes)
        return ModelConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown ModelConfig fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    val_acc: float
    val_roc: float
    val_f1: float
    val_parity: float
    val_equality: float
    val_loss: float

    @property
    def fairness(self) -> float:
        return self.val_parity + self.val_equality

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in RECORD_FIELDS})

    @classmethod
    def from_dict(cls, data: dict) -> "EpochRecord":
        missing = [k for k in RECORD_FIELDS if k not in data]
        if missing:
            raise ValueError(f"epoch record missing fields {missing}")
        return cls(int(data["epoch"]), *(float(data[k]) for k in RECORD_FIELDS[1:]))


@dataclass
class EpochLog:
    """Per-epoch validation records, with optional parameter snapshots
    (``snapshots[i]`` holds the parameters after ``records[i]``'s epoch)."""

    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i) -> EpochRecord:
        return self.records[i]

    def index_of(self, epoch: int) -> int:
        for i, r in enumerate(self.records):
            if r.epoch == epoch:
                return i
        raise KeyError(f"epoch {epoch} not in log")

    def params_at(self, epoch: int) -> dict:
        if not self.snapshots:
            raise ValueError("log carries no parameter snapshots")
        return self.snapshots[self.index_of(epoch)]

    def dumps(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "EpochLog":
        records = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(EpochRecord.from_dict(json.loads(line)))
            except (ValueError, TypeError) as exc:
                raise ValueError(f"line {line_no}: {exc}") from None
        return cls(records)

    @classmethod
    def load(cls, path) -> "EpochLog":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# model


def normalize_adjacency(g: AttributedGraph) -> sp.csr_matrix:
    """``D^-1/2 (A + I) D^-1/2`` as CSR.  Entries are ``dinv[i] * dinv[j]``,
    which makes the matrix exactly symmetric."""
    n = g.n
    u, v = g.edges[:, 0], g.edges[:, 1]
    deg = np.bincount(u, minlength=n) + np.bincount(v, minlength=n) + 1.0
    dinv = 1.0 / np.sqrt(deg)
    idx = np.arange(n)
    rows = np.concatenate([u, v, idx])
    cols = np.concatenate([v, u, idx])
    vals = dinv[rows] * dinv[cols]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def init_params(cfg: ModelConfig, d: int, rng: np.random.Generator = None) -> dict:
    """Glorot-uniform weights, zero biases."""
    if rng is None:
        rng = rngmod.stream(cfg.seed, rngmod.INIT)
    dims = [d] + [cfg.hidden] * (cfg.num_affine - 1) + [1]
    params = {}
    for l in range(cfg.num_affine):
        fan_in, fan_out = dims[l], dims[l + 1]
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        params[f"W{l}"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        params[f"b{l}"] = np.zeros(fan_out)
    return params


def _check_shapes(cfg, params, x):
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got {x.shape}")
    prev = x.shape[1]
    for l in range(cfg.num_affine):
        w, b = params.get(f"W{l}"), params.get(f"b{l}")
        if w is None or b is None:
            raise ValueError(f"missing parameters for layer {l}")
        if w.shape[0] != prev or b.shape != (w.shape[1],):
            raise ValueError(f"layer {l}: W{w.shape} b{b.shape} incompatible with input width {prev}")
        prev = w.shape[1]
    if prev != 1:
        raise ValueError("last layer must have one output")


def forward(cfg: ModelConfig, params: dict, adj, x: np.ndarray,
            training: bool = False, rng: np.random.Generator = None):
    """Logits for every node and a cache for :func:`backward`.

    Dropout (inverted, on every layer input) is active only when
    ``training`` is true and ``cfg.dropout > 0``; masks come from ``rng``.
    ``adj`` is required for ``gcn`` and ignored for ``mlp``.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_shapes(cfg, params, x)
    if cfg.kind == "gcn":
        if adj is None:
            raise ValueError("gcn forward needs a normalized adjacency")
        if adj.shape != (x.shape[0], x.shape[0]):
            raise ValueError(f"adjacency {adj.shape} does not match {x.shape[0]} nodes")
    drop = training and cfg.dropout > 0.0
    if drop and rng is None:
        raise ValueError("dropout in training mode needs an rng")
    keep = 1.0 - cfg.dropout
    cache = {"inputs": [], "masks": [], "pre": [], "adj": adj}
    h = x
    last = cfg.num_affine - 1
    for l in range(cfg.num_affine):
        if drop:
            mask = (rng.random(h.shape) < keep) / keep
            h_in = h * mask
        else:
            mask = None
            h_in = h
        z = h_in @ params[f"W{l}"]
        if cfg.kind == "gcn" and l == 0:
            z = adj @ z
        z = z + params[f"b{l}"]
        cache["inputs"].append(h_in)
        cache["masks"].append(mask)
        cache["pre"].append(z)
        h = z if l == last else np.maximum(z, 0.0)
    return h[:, 0], cache


def backward(cfg: ModelConfig, params: dict, cache: dict, dlogits: np.ndarray) -> dict:
    """Gradients of a scalar w.r.t. parameters, given ``d scalar / d logits``."""
    grads = {}
    delta = np.asarray(dlogits, dtype=np.float64)[:, None]
    for l in reversed(range(cfg.num_affine)):
        if l != cfg.num_affine - 1:
            delta = delta * (cache["pre"][l] > 0.0)
        grads[f"b{l}"] = delta.sum(axis=0)
        if cfg.kind == "gcn" and l == 0:
            # A_hat is symmetric, so A_hat^T delta = A_hat delta
            delta = cache["adj"] @ delta
        grads[f"W{l}"] = cache["inputs"][l].T @ delta
        if l > 0:
            delta = delta @ params[f"W{l}"].T
            if cache["masks"][l] is not None:
                delta = delta * cache["masks"][l]
    return grads


def bce_with_logits(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise ``-y log sigmoid(z) - (1-y) log(1 - sigmoid(z))``."""
    return np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def l2_penalty(cfg: ModelConfig, params: dict) -> float:
    return 0.5 * cfg.weight_decay * sum(
        float(np.sum(params[f"W{l}"] ** 2)) for l in range(cfg.num_affine))


def loss_and_grads(cfg: ModelConfig, params: dict, adj, x, truth, mask,
                   training: bool = False, rng: np.random.Generator = None):
    """Masked mean BCE plus L2 weight penalty, and its exact gradient."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("loss mask selects no nodes")
    y = np.asarray(truth, dtype=np.float64)
    logits, cache = forward(cfg, params, adj, x, training=training, rng=rng)
    m = int(mask.sum())
    loss = float(bce_with_logits(logits[mask], y[mask]).sum() / m) + l2_penalty(cfg, params)
    dlogits = np.zeros_like(logits)
    dlogits[mask] = (_sigmoid(logits[mask]) - y[mask]) / m
    grads = backward(cfg, params, cache, dlogits)
    for l in range(cfg.num_affine):
        grads[f"W{l}"] = grads[f"W{l}"] + cfg.weight_decay * params[f"W{l}"]
    return loss, grads


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params: dict, grads: dict) -> dict:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        out = {}
        for k, g in grads.items():
            m = self.beta1 * self.m.get(k, 0.0) + (1.0 - self.beta1) * g
            v = self.beta2 * self.v.get(k, 0.0) + (1.0 - self.beta2) * g * g
            self.m[k], self.v[k] = m, v
            out[k] = params[k] - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return out


# ---------------------------------------------------------------------------
# training


def check_eval_split(g: AttributedGraph, split: str) -> None:
    """Raise if ``split`` cannot support AUC, parity and equal opportunity."""
    m = g.mask(split)
    y, s = g.labels[m], g.sens[m]
    problems = []
    if not m.any():
        problems.append("it is empty")
    else:
        if y.min() == y.max():
            problems.append("it has a single class")
        if s.min() == s.max():
            problems.append("it has a single sensitive group")
        for sv in (0, 1):
            if not np.any((y == 1) & (s == sv)):
                problems.append(f"it has no positives with s={sv}")
    if problems:
        raise DegenerateGroupError(f"{split} split is degenerate: " + "; ".join(problems))


def predict(cfg: ModelConfig, params: dict, g: AttributedGraph, adj=None) -> np.ndarray:
    """Evaluation-mode logits for all nodes."""
    if cfg.kind == "gcn" and adj is None:
        adj = normalize_adjacency(g)
    logits, _ = forward(cfg, params, adj, g.features)
    return logits


def _validation_record(epoch, logits, g: AttributedGraph) -> EpochRecord:
    m = g.val
    p = PredictionSet(logits[m], g.labels[m], g.sens[m])
    loss = float(bce_with_logits(p.scores, p.truth).mean())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        f1 = binary_f1(p)
    return EpochRecord(epoch, accuracy(p), roc_auc(p), f1, delta_sp(p), delta_eo(p), loss)


def fit(cfg: ModelConfig, g: AttributedGraph, adj=None, keep_snapshots: bool = True):
    """Train on ``g.train`` for ``cfg.epochs`` full-batch Adam steps.

    After every step the model is evaluated (dropout off) on the validation
    split and an :class:`EpochRecord` is appended to the log; epochs are
    numbered from 1.  Returns ``(final_params, log)``; ``log.snapshots``
    holds the parameters after each epoch when ``keep_snapshots`` is true.
    """
    if not g.train.any():
        raise ValueError("graph has no training nodes")
    check_eval_split(g, "val")
    if cfg.kind == "gcn" and adj is None:
        adj = normalize_adjacency(g)
    params = init_params(cfg, g.d)
    log = EpochLog()
    opt = Adam(cfg.lr)
    drop_rng = rngmod.stream(cfg.seed, rngmod.DROPOUT)
    for epoch in range(1, cfg.epochs + 1):
        _, grads = loss_and_grads(cfg, params, adj, g.features, g.labels, g.train,
                                  training=True, rng=drop_rng)
        params = opt.step(params, grads)
        logits, _ = forward(cfg, params, adj, g.features)
        log.records.append(_validation_record(epoch, logits, g))
        if keep_snapshots:
            log.snapshots.append(params)
    return params, log
