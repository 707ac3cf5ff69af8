"""Edge-type surgery: remove or add a fixed number of edges of given types.

Removals pick uniformly among the existing edges of a type; additions pick
uniformly among that type's absent pairs.  All removals run before all
additions, types in order E1..E10.  Node data and splits are untouched.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as rngmod
from ._pairs import PairSpace
from .graphdata import AttributedGraph, EdgeType, edge_types

__all__ = [
    "RebalanceSpec",
    "InfeasibleRebalanceError",
    "apply_rebalance",
    "builtin_recipes",
    "get_recipe",
]

# below this many candidate pairs, additions enumerate the absent pairs
ENUMERATION_LIMIT = 1_000_000


class InfeasibleRebalanceError(ValueError):
    pass


@dataclass(frozen=True)
class RebalanceSpec:
    """Signed per-type edge deltas (negative removes, positive adds)."""

    deltas: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.deltas).items():
            if int(v) != v:
                raise ValueError(f"delta for {k} must be an integer")
            if int(v):
                clean[EdgeType.parse(k)] = int(v)
        object.__setattr__(self, "deltas", dict(sorted(clean.items())))

    def delta(self, t) -> int:
        return self.deltas.get(EdgeType.parse(t), 0)

    @property
    def total_delta(self) -> int:
        return sum(self.deltas.values())

    def to_dict(self) -> dict:
        return {"deltas": {t.name: v for t, v in self.deltas.items()}, "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict) -> "RebalanceSpec":
        return cls(deltas=data.get("deltas", {}), seed=int(data.get("seed", 0)))

    @classmethod
    def load(cls, path) -> "RebalanceSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


_RECIPES = {
    "new-german": {"E7": -4000, "E1": 500, "E3": 1000, "E4": 1000},
    "new-bail": {"E5": -40000, "E2": 15000, "E3": 20000, "E4": 4000},
    "new-credit": {"E7": -30000},
}


def builtin_recipes(seed: int = 0) -> dict:
    """The reference New German / New Bail / New Credit edge adjustments."""
    return {name: RebalanceSpec(d, seed) for name, d in _RECIPES.items()}


def get_recipe(name: str, seed: int = 0):
    """Named recipe, or ``None`` if the name is unknown."""
    return builtin_recipes(seed).get(name)


def _sample_absent(space: PairSpace, existing_ranks: np.ndarray, k: int,
                   rng: np.random.Generator) -> np.ndarray:
    """``k`` distinct ranks drawn uniformly from pairs not in ``existing_ranks``."""
    existing = np.unique(existing_ranks)
    absent = space.size - len(existing)
    if space.size <= ENUMERATION_LIMIT or absent <= 2 * k:
        pool = np.setdiff1d(np.arange(space.size, dtype=np.int64), existing, assume_unique=True)
        return rng.choice(pool, size=k, replace=False)
    # rejection sampling: sequential uniform draws, discarding existing pairs
    # and repeats, give a uniform k-subset of the absent pairs
    chosen = np.zeros(0, dtype=np.int64)
    while len(chosen) < k:
        need = k - len(chosen)
        batch = rng.integers(0, space.size, size=int(need * 1.2) + 16)
        batch = batch[~np.isin(batch, existing)]
        batch = np.concatenate([chosen, batch])
        _, first = np.unique(batch, return_index=True)
        chosen = batch[np.sort(first)]
    return chosen[:k]


def apply_rebalance(g: AttributedGraph, spec: RebalanceSpec) -> AttributedGraph:
    """Return a copy of ``g`` whose edge-type counts change by ``spec.deltas``.

    Raises
    ------
    InfeasibleRebalanceError
        If a removal exceeds the existing count of its type or an addition
        exceeds the number of absent pairs of its type.
    """
    types = edge_types(g)
    groups = g.groups
    spaces = {}
    for t, d in spec.deltas.items():
        have = int(np.sum(types == t))
        if d < 0 and -d > have:
            raise InfeasibleRebalanceError(
                f"cannot remove {-d} {t.name} edges: only {have} present")
        if d > 0:
            spaces[t] = PairSpace(groups, t)
            room = spaces[t].size - have
            if d > room:
                raise InfeasibleRebalanceError(
                    f"cannot add {d} {t.name} edges: only {room} absent pairs")
    if not spec.deltas:
        return g

    rng = rngmod.stream(spec.seed, rngmod.REBALANCE)
    keep = np.ones(g.num_edges, dtype=bool)
    for t, d in spec.deltas.items():
        if d < 0:
            idx = np.flatnonzero(types == t)
            keep[rng.choice(idx, size=-d, replace=False)] = False
    added = []
    for t, d in spec.deltas.items():
        if d > 0:
            space = spaces[t]
            ranks = _sample_absent(space, space.rank(g.edges[types == t]), d, rng)
            added.append(space.unrank(ranks))
    edges = np.concatenate([g.edges[keep]] + added) if added else g.edges[keep]
    return g.with_edges(edges)
