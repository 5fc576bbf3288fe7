"""Weighted undirected movement networks and attribute similarity."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import sparse

from .errors import UnknownNode
from .features import AttributeTable


@dataclass(frozen=True)
class AttributedNetwork:
    """One timestep's movement graph with node attributes.

    Edges are stored once per unordered pair as index arrays ``src < dst``
    into ``node_ids``; ``weights`` are positive visit counts.
    """

    node_ids: tuple
    src: np.ndarray
    dst: np.ndarray
    weights: np.ndarray
    attributes: AttributeTable
    timestep: int = 0

    def __post_init__(self):
        if tuple(self.attributes.node_ids) != tuple(self.node_ids):
            raise ValueError("attribute rows are not aligned with node ids")
        if np.any(self.src >= self.dst):
            raise ValueError("edges must be stored with src < dst and no self-loops")
        if np.any(self.weights <= 0):
            raise ValueError("edge weights must be positive")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def edges(self):
        """Iterate ``(node_i, node_j, weight)`` triples."""
        for i, j, w in zip(self.src, self.dst, self.weights):
            yield self.node_ids[i], self.node_ids[j], float(w)

    def adjacency(self) -> sparse.csr_matrix:
        n = self.n_nodes
        rows = np.concatenate([self.src, self.dst])
        cols = np.concatenate([self.dst, self.src])
        data = np.concatenate([self.weights, self.weights]).astype(float)
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    def with_attributes(self, attributes: AttributeTable) -> "AttributedNetwork":
        return AttributedNetwork(self.node_ids, self.src, self.dst, self.weights, attributes, self.timestep)


def build_network(
    edge_records: Iterable[tuple], attributes: AttributeTable, timestep: int | None = None
) -> AttributedNetwork:
    """Aggregate ``(src, dst, count)`` records into an undirected network.

    Records for the same unordered pair are summed and self-loops dropped.
    Node order follows ``attributes.node_ids``.
    """
    totals: dict[tuple[int, int], float] = defaultdict(float)
    for src, dst, count in edge_records:
        try:
            i, j = attributes.index_of(src), attributes.index_of(dst)
        except KeyError as exc:
            raise UnknownNode(f"edge endpoint {exc.args[0]!r} is not in the attribute table") from None
        if i == j:
            continue
        key = (i, j) if i < j else (j, i)
        totals[key] += float(count)
    keys = sorted(k for k, w in totals.items() if w > 0)
    src = np.array([k[0] for k in keys], dtype=np.int64)
    dst = np.array([k[1] for k in keys], dtype=np.int64)
    weights = np.array([totals[k] for k in keys], dtype=float)
    ts = attributes.timestep if timestep is None else timestep
    return AttributedNetwork(attributes.node_ids, src, dst, weights, attributes, ts)


def cosine_similarity(attributes: AttributeTable | np.ndarray) -> np.ndarray:
    """Row-wise cosine similarity; zero rows get 0 off-diagonal and 1 on the diagonal."""
    x = attributes.values if isinstance(attributes, AttributeTable) else np.asarray(attributes, float)
    # divide by the row max first so tiny rows do not underflow in the norm
    peak = np.abs(x).max(axis=1) if x.shape[1] else np.zeros(x.shape[0])
    zero = peak == 0
    x = x / np.where(zero, 1.0, peak)[:, None]
    norms = np.linalg.norm(x, axis=1)
    unit = x / np.where(zero, 1.0, norms)[:, None]
    s = unit @ unit.T
    s = 0.5 * (s + s.T)
    np.clip(s, -1.0, 1.0, out=s)
    np.fill_diagonal(s, 1.0)
    return s
