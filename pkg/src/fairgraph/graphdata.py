"""Attributed graph model, (s, y) group / edge-type taxonomy and bundle I/O.

Nodes fall into four groups by the cross of the binary sensitive attribute
``s`` and the binary label ``y``.  An undirected edge is typed by the
unordered pair of its endpoint groups, which gives ten edge types::

    E1  S0Y0-S0Y0    E5  S0Y0-S1Y0    E9   S0Y1-S1Y0
    E2  S0Y1-S0Y1    E6  S0Y1-S1Y1    E10  S0Y0-S1Y1
    E3  S1Y0-S1Y0    E7  S0Y0-S0Y1
    E4  S1Y1-S1Y1    E8  S1Y0-S1Y1

E1-E6 join nodes with equal labels, E7-E10 join nodes with different labels.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "GroupId",
    "EdgeType",
    "AttributedGraph",
    "GraphStats",
    "InvalidEdgeError",
    "BundleError",
    "group_of",
    "edge_type_of_groups",
    "classify_edge_type",
    "edge_types",
    "compute_stats",
    "save_bundle",
    "load_bundle",
]

SPLITS = ("train", "val", "test")


class InvalidEdgeError(ValueError):
    """Self-loop, duplicate or out-of-range edge."""


class BundleError(ValueError):
    """Malformed or inconsistent dataset bundle."""


class GroupId(enum.IntEnum):
    """(s, y) group; the integer value is ``2*s + y``."""

    S0Y0 = 0
    S0Y1 = 1
    S1Y0 = 2
    S1Y1 = 3

    @classmethod
    def of(cls, s: int, y: int) -> "GroupId":
        return cls(2 * int(s) + int(y))

    @property
    def s(self) -> int:
        return self.value >> 1

    @property
    def y(self) -> int:
        return self.value & 1


class EdgeType(enum.IntEnum):
    E1 = 1
    E2 = 2
    E3 = 3
    E4 = 4
    E5 = 5
    E6 = 6
    E7 = 7
    E8 = 8
    E9 = 9
    E10 = 10

    @property
    def groups(self) -> tuple[GroupId, GroupId]:
        a, b = _TYPE_GROUPS[self.value]
        return GroupId(a), GroupId(b)

    @property
    def same_group(self) -> bool:
        a, b = _TYPE_GROUPS[self.value]
        return a == b

    @property
    def intra_label(self) -> bool:
        a, b = self.groups
        return a.y == b.y

    @classmethod
    def parse(cls, key) -> "EdgeType":
        """Accept ``EdgeType``, ``7``, ``"7"``, ``"E7"`` or ``"e7"``."""
        if isinstance(key, EdgeType):
            return key
        if isinstance(key, (int, np.integer)):
            return cls(int(key))
        text = str(key).strip().upper()
        if text.startswith("E"):
            text = text[1:]
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"unknown edge type {key!r}") from None


_TYPE_GROUPS = {
    1: (0, 0),
    2: (1, 1),
    3: (2, 2),
    4: (3, 3),
    5: (0, 2),
    6: (1, 3),
    7: (0, 1),
    8: (2, 3),
    9: (1, 2),
    10: (0, 3),
}

# symmetric 4x4 lookup, group x group -> edge type id
_TYPE_TABLE = np.zeros((4, 4), dtype=np.int64)
for _t, (_a, _b) in _TYPE_GROUPS.items():
    _TYPE_TABLE[_a, _b] = _TYPE_TABLE[_b, _a] = _t
_TYPE_TABLE.setflags(write=False)


def edge_type_of_groups(a, b) -> EdgeType:
    return EdgeType(int(_TYPE_TABLE[int(a), int(b)]))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def canonical_edges(edges, n: int) -> np.ndarray:
    """Return edges as a sorted ``(m, 2)`` int64 array with ``u < v``.

    Raises
    ------
    InvalidEdgeError
        On self-loops, out-of-range endpoints or duplicate pairs.
    """
    e = np.asarray(edges, dtype=np.int64)
    if e.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if e.ndim != 2 or e.shape[1] != 2:
        raise InvalidEdgeError(f"edges must have shape (m, 2), got {e.shape}")
    loops = e[:, 0] == e[:, 1]
    if loops.any():
        u = int(e[loops][0, 0])
        raise InvalidEdgeError(f"self-loop ({u}, {u})")
    bad = (e < 0) | (e >= n)
    if bad.any():
        row = e[bad.any(axis=1)][0]
        raise InvalidEdgeError(f"edge ({row[0]}, {row[1]}) out of range for n={n}")
    e = np.sort(e, axis=1)
    keys = e[:, 0] * n + e[:, 1]
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    dup = np.flatnonzero(keys[1:] == keys[:-1])
    if dup.size:
        u, v = e[order[dup[0]]]
        raise InvalidEdgeError(f"duplicate edge ({u}, {v})")
    return e[order]


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Undirected simple graph with node features, labels, sensitive attribute
    and train/val/test masks.

    Arrays are validated, canonicalized (edges sorted with ``u < v``) and made
    read-only on construction.  Masks default to all-False.
    """

    features: np.ndarray
    labels: np.ndarray
    sens: np.ndarray
    edges: np.ndarray
    train: np.ndarray = None
    val: np.ndarray = None
    test: np.ndarray = None
    name: str = "graph"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {x.shape}")
        n = x.shape[0]
        y = np.asarray(self.labels).astype(np.int64, copy=True)
        s = np.asarray(self.sens).astype(np.int64, copy=True)
        for what, arr in (("labels", y), ("sens", s)):
            if arr.shape != (n,):
                raise ValueError(f"{what} has shape {arr.shape}, expected ({n},)")
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError(f"{what} must be binary 0/1")
        masks = {}
        for split in SPLITS:
            m = getattr(self, split)
            m = np.zeros(n, dtype=bool) if m is None else np.asarray(m, dtype=bool)
            if m.shape != (n,):
                raise ValueError(f"{split} mask has shape {m.shape}, expected ({n},)")
            masks[split] = m
        overlap = (masks["train"].astype(int) + masks["val"] + masks["test"]) > 1
        if overlap.any():
            raise ValueError(f"split masks overlap at node {int(np.argmax(overlap))}")
        set_ = object.__setattr__
        set_(self, "features", _frozen(x))
        set_(self, "labels", _frozen(y))
        set_(self, "sens", _frozen(s))
        set_(self, "edges", _frozen(canonical_edges(self.edges, n)))
        for split, m in masks.items():
            set_(self, split, _frozen(m.copy()))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def groups(self) -> np.ndarray:
        """Per-node group index ``2*s + y``."""
        return 2 * self.sens + self.labels

    def mask(self, split: str) -> np.ndarray:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return getattr(self, split)

    def with_edges(self, edges) -> "AttributedGraph":
        """Copy sharing node data, with a new edge set."""
        return AttributedGraph(
            self.features, self.labels, self.sens, edges,
            self.train, self.val, self.test, name=self.name, meta=dict(self.meta),
        )

    def with_splits(self, train, val, test) -> "AttributedGraph":
        return AttributedGraph(
            self.features, self.labels, self.sens, self.edges,
            train, val, test, name=self.name, meta=dict(self.meta),
        )

    def same_as(self, other: "AttributedGraph") -> bool:
        """Structural identity: node data, edges and splits all equal."""
        return (
            self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.sens, other.sens)
            and np.array_equal(self.edges, other.edges)
            and all(np.array_equal(self.mask(s), other.mask(s)) for s in SPLITS)
        )


def group_of(g: AttributedGraph, u: int) -> GroupId:
    return GroupId.of(g.sens[u], g.labels[u])


def classify_edge_type(g: AttributedGraph, u: int, v: int) -> EdgeType:
    """Edge type of the unordered node pair ``(u, v)``."""
    u, v = int(u), int(v)
    if u == v:
        raise InvalidEdgeError(f"self-loop ({u}, {v})")
    for w in (u, v):
        if not 0 <= w < g.n:
            raise InvalidEdgeError(f"node {w} out of range for n={g.n}")
    grp = g.groups
    return EdgeType(int(_TYPE_TABLE[grp[u], grp[v]]))


def edge_types(g: AttributedGraph, edges=None) -> np.ndarray:
    """Vectorized edge type ids (1..10) for ``edges`` (default: all edges)."""
    e = g.edges if edges is None else np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    grp = g.groups
    return _TYPE_TABLE[grp[e[:, 0]], grp[e[:, 1]]]


@dataclass(frozen=True)
class GraphStats:
    group_sizes: dict
    edge_type_counts: dict
    edge_type_proportions: dict
    average_degree: float
    num_nodes: int
    num_edges: int
    no_edges: bool

    def bucket(self, *types) -> int:
        return sum(self.edge_type_counts[EdgeType.parse(t)] for t in types)

    def to_dict(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "num_edges": self.num_edges,
            "average_degree": self.average_degree,
            "no_edges": self.no_edges,
            "group_sizes": {g.name: c for g, c in self.group_sizes.items()},
            "edge_type_counts": {t.name: c for t, c in self.edge_type_counts.items()},
            "edge_type_proportions": {
                t.name: p for t, p in self.edge_type_proportions.items()
            },
        }

    def format_table(self) -> str:
        lines = [
            f"nodes           {self.num_nodes}",
            f"edges           {self.num_edges}",
            f"average degree  {self.average_degree:.2f}",
            "",
            "group   count",
        ]
        lines += [f"{g.name}    {c}" for g, c in self.group_sizes.items()]
        lines += ["", "type  count     proportion"]
        for t, c in self.edge_type_counts.items():
            lines.append(f"{t.name:<5} {c:<9} {self.edge_type_proportions[t]:.3f}")
        if self.no_edges:
            lines.append("(no edges; proportions reported as zero)")
        return "\n".join(lines)


def compute_stats(g: AttributedGraph) -> GraphStats:
    sizes = np.bincount(g.groups, minlength=4)
    counts = np.bincount(edge_types(g), minlength=11)[1:]
    m = g.num_edges
    props = counts / m if m else np.zeros(10)
    return GraphStats(
        group_sizes={GroupId(i): int(sizes[i]) for i in range(4)},
        edge_type_counts={EdgeType(i + 1): int(counts[i]) for i in range(10)},
        edge_type_proportions={EdgeType(i + 1): float(props[i]) for i in range(10)},
        average_degree=2.0 * m / g.n if g.n else 0.0,
        num_nodes=g.n,
        num_edges=m,
        no_edges=m == 0,
    )


# ---------------------------------------------------------------------------
# bundle I/O
#
# meta.json      {"name", "n", "d", "seed", "generator"}
# nodes.csv      id,y,s,split   (split in train/val/test/none), sorted by id
# features.csv   n rows of d floats, shortest round-trip repr, no header
# edges.csv      u,v with u < v, sorted lexicographically


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def save_bundle(g: AttributedGraph, directory) -> Path:
    """Write ``g`` as a bundle directory.  Output is canonical, so a
    save -> load -> save cycle reproduces identical bytes."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "name": g.name,
        "n": g.n,
        "d": g.d,
        "seed": g.meta.get("seed"),
        "generator": g.meta.get("generator"),
    }
    _write_text(out / "meta.json", json.dumps(meta, indent=2) + "\n")

    split = np.full(g.n, "none", dtype=object)
    for name in SPLITS:
        split[g.mask(name)] = name
    buf = io.StringIO()
    buf.write("id,y,s,split\n")
    for i in range(g.n):
        buf.write(f"{i},{g.labels[i]},{g.sens[i]},{split[i]}\n")
    _write_text(out / "nodes.csv", buf.getvalue())

    buf = io.StringIO()
    for row in g.features.tolist():
        buf.write(",".join(map(repr, row)))
        buf.write("\n")
    _write_text(out / "features.csv", buf.getvalue())

    buf = io.StringIO()
    buf.write("u,v\n")
    for u, v in g.edges.tolist():
        buf.write(f"{u},{v}\n")
    _write_text(out / "edges.csv", buf.getvalue())
    return out


def _open(path: Path):
    if not path.is_file():
        raise BundleError(f"{path}: missing bundle file")
    return open(path, newline="", encoding="utf-8")


def _int(text: str, path: Path, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise BundleError(f"{path}:{line}: malformed integer {text!r}") from None


def load_bundle(directory) -> AttributedGraph:
    """Read a bundle written by :func:`save_bundle` (or by hand).

    Raises
    ------
    BundleError
        Missing files, bad headers, malformed numbers or row-count mismatches,
        with the offending file and line in the message.
    InvalidEdgeError
        Self-loops, duplicates or out-of-range endpoints in ``edges.csv``.
    """
    root = Path(directory)
    meta_path = root / "meta.json"
    with _open(meta_path) as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BundleError(f"{meta_path}:{exc.lineno}: {exc.msg}") from None
    for key in ("n", "d"):
        if not isinstance(meta.get(key), int) or meta[key] < 0:
            raise BundleError(f"{meta_path}: field {key!r} must be a non-negative int")
    n, d = meta["n"], meta["d"]

    nodes_path = root / "nodes.csv"
    y = np.zeros(n, dtype=np.int64)
    s = np.zeros(n, dtype=np.int64)
    masks = {k: np.zeros(n, dtype=bool) for k in SPLITS}
    with _open(nodes_path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "y", "s", "split"]:
            raise BundleError(f"{nodes_path}:1: expected header id,y,s,split")
        count = 0
        for row in reader:
            line = reader.line_num
            if len(row) != 4:
                raise BundleError(f"{nodes_path}:{line}: expected 4 fields, got {len(row)}")
            i = _int(row[0], nodes_path, line)
            if i != count:
                raise BundleError(f"{nodes_path}:{line}: expected id {count}, got {i}")
            if count >= n:
                raise BundleError(f"{nodes_path}:{line}: more than n={n} rows")
            yi, si = _int(row[1], nodes_path, line), _int(row[2], nodes_path, line)
            if yi not in (0, 1) or si not in (0, 1):
                raise BundleError(f"{nodes_path}:{line}: y and s must be 0 or 1")
            y[i], s[i] = yi, si
            if row[3] in masks:
                masks[row[3]][i] = True
            elif row[3] != "none":
                raise BundleError(f"{nodes_path}:{line}: unknown split {row[3]!r}")
            count += 1
    if count != n:
        raise BundleError(f"{nodes_path}: row count mismatch, {count} rows for n={n}")

    feat_path = root / "features.csv"
    x = np.zeros((n, d), dtype=np.float64)
    with _open(feat_path) as fh:
        count = 0
        for line, text in enumerate(fh, start=1):
            text = text.rstrip("\r\n")
            if not text and d != 0:
                continue
            if count >= n:
                raise BundleError(f"{feat_path}:{line}: more than n={n} rows")
            parts = text.split(",") if d else []
            if len(parts) != d:
                raise BundleError(f"{feat_path}:{line}: expected {d} values, got {len(parts)}")
            try:
                x[count] = [float(p) for p in parts]
            except ValueError:
                raise BundleError(f"{feat_path}:{line}: malformed float") from None
            count += 1
    if count != n:
        raise BundleError(f"{feat_path}: row count mismatch, {count} rows for n={n}")

    edges_path = root / "edges.csv"
    pairs = []
    with _open(edges_path) as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["u", "v"]:
            raise BundleError(f"{edges_path}:1: expected header u,v")
        for row in reader:
            line = reader.line_num
            if len(row) != 2:
                raise BundleError(f"{edges_path}:{line}: expected 2 fields, got {len(row)}")
            u, v = _int(row[0], edges_path, line), _int(row[1], edges_path, line)
            if u == v:
                raise InvalidEdgeError(f"{edges_path}:{line}: self-loop ({u}, {v})")
            pairs.append((u, v))

    extra = {k: meta.get(k) for k in ("seed", "generator")}
    return AttributedGraph(
        x, y, s, np.array(pairs, dtype=np.int64).reshape(-1, 2),
        masks["train"], masks["val"], masks["test"],
        name=meta.get("name", os.path.basename(os.path.normpath(root))),
        meta=extra,
    )
