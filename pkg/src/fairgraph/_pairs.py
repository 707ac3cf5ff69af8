"""Integer indexing of the node pairs belonging to one edge type.

Pairs of a same-group type with ``m`` members are ranked in lexicographic
order of member positions ``(i, j), i < j`` (``C(m, 2)`` pairs); pairs of a
cross-group type with sizes ``a`` and ``b`` are ranked row-major
(``a * b`` pairs).  This lets samplers draw pair indices uniformly without
materializing the quadratic pair list.
"""
from __future__ import annotations

import numpy as np

from .graphdata import EdgeType


def _row_offset(i, m):
    return i * (m - 1) - i * (i - 1) // 2


def unrank_triangle(k, m: int):
    """Map ranks ``k`` in ``[0, C(m,2))`` to position pairs ``(i, j)``, i < j."""
    k = np.asarray(k, dtype=np.int64)
    disc = (2 * m - 1) ** 2 - 8 * k.astype(np.float64)
    i = np.floor(((2 * m - 1) - np.sqrt(np.maximum(disc, 0.0))) / 2).astype(np.int64)
    i = np.clip(i, 0, max(m - 2, 0))
    # float sqrt can be off by one near row boundaries
    for _ in range(3):
        up = (i + 1 <= m - 2) & (_row_offset(i + 1, m) <= k)
        down = _row_offset(i, m) > k
        if not (up.any() or down.any()):
            break
        i = i + up - down
    j = k - _row_offset(i, m) + i + 1
    return i, j


def rank_triangle(i, j, m: int):
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return _row_offset(i, m) + (j - i - 1)


class PairSpace:
    """Pair index space of one edge type over a fixed node grouping.

    Parameters
    ----------
    groups : ndarray of int
        Per-node group index ``2*s + y``.
    edge_type : EdgeType
    """

    def __init__(self, groups: np.ndarray, edge_type: EdgeType):
        self.edge_type = EdgeType.parse(edge_type)
        ga, gb = self.edge_type.groups
        self.members_a = np.flatnonzero(groups == ga)
        self.members_b = np.flatnonzero(groups == gb)
        self.same = ga == gb
        self.n = len(groups)
        pos = np.full(len(groups), -1, dtype=np.int64)
        pos[self.members_a] = np.arange(len(self.members_a))
        pos[self.members_b] = np.arange(len(self.members_b))
        self._pos = pos
        self._ga, self._gb = int(ga), int(gb)
        self._groups = groups
        a, b = len(self.members_a), len(self.members_b)
        self.size = a * (a - 1) // 2 if self.same else a * b

    def unrank(self, k) -> np.ndarray:
        """Node pairs ``(u, v)``, ``u < v``, for ranks ``k``; shape ``(len(k), 2)``."""
        k = np.asarray(k, dtype=np.int64)
        if self.same:
            i, j = unrank_triangle(k, len(self.members_a))
            u, v = self.members_a[i], self.members_a[j]
        else:
            b = len(self.members_b)
            u, v = self.members_a[k // b], self.members_b[k % b]
        return np.sort(np.stack([u, v], axis=1), axis=1)

    def rank(self, pairs) -> np.ndarray:
        """Inverse of :meth:`unrank` for pairs already known to be of this type."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        u, v = pairs[:, 0], pairs[:, 1]
        if self.same:
            i, j = self._pos[u], self._pos[v]
            return rank_triangle(np.minimum(i, j), np.maximum(i, j), len(self.members_a))
        # orient each pair so the first endpoint is in group a
        flip = self._groups[u] != self._ga
        a_node = np.where(flip, v, u)
        b_node = np.where(flip, u, v)
        return self._pos[a_node] * len(self.members_b) + self._pos[b_node]
