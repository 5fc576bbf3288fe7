"""Cluster-count and clustering-method selection.

Cluster count is chosen by the week-averaged silhouette; the clustering
method by leave-one-column-out stability (APN, AD, ADM, FOM), all of which
are to be minimized. The Dunn validity index is provided alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import cluster as _cluster
from .embed import EmbeddingMatrix, SolverConfig, embed
from .errors import SingleCluster, ZeroDiameter
from .graph import AttributedNetwork

STABILITY_MEASURES = ("APN", "AD", "ADM", "FOM")


def _as_array(points):
    x = points.values if isinstance(points, EmbeddingMatrix) else np.asarray(points, dtype=float)
    return x.reshape(-1, 1) if x.ndim == 1 else x


def silhouette(points, labels):
    """Per-point silhouette values and their mean.

    Singleton clusters score 0. Euclidean distance throughout.
    """
    x = _as_array(points)
    labels = np.asarray(labels)
    clusters = np.unique(labels)
    if len(clusters) < 2:
        raise SingleCluster("silhouette is undefined for a single cluster")
    dist = cdist(x, x)
    onehot = (labels[:, None] == clusters[None, :]).astype(float)
    sizes = onehot.sum(axis=0)
    sums = dist @ onehot
    own = np.searchsorted(clusters, labels)
    idx = np.arange(len(labels))
    own_size = sizes[own]
    a = np.where(own_size > 1, sums[idx, own] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes[None, :]
    means[idx, own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own_size > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return s, float(s.mean())


def dunn_index(points, labels) -> float:
    """Smallest between-cluster point distance over the largest cluster diameter."""
    x = _as_array(points)
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 2:
        raise SingleCluster("Dunn index needs at least two clusters")
    dist = cdist(x, x)
    same = labels[:, None] == labels[None, :]
    diameter = dist[same].max()
    if diameter == 0:
        raise ZeroDiameter("every cluster has zero diameter")
    return float(dist[~same].min() / diameter)


@dataclass
class SilhouetteReport:
    """Silhouette sweep over cluster counts and methods.

    ``per_timestep[(k, method)]`` holds one average silhouette per timestep;
    ``table[(k, method)]`` is their mean.
    """

    k_values: list
    methods: list
    per_timestep: dict
    assignments: dict = field(default_factory=dict, repr=False)

    @property
    def table(self) -> dict:
        return {key: float(np.mean(v)) for key, v in self.per_timestep.items()}

    def rows(self):
        """One row per K: ``(K, score_method_1, score_method_2, ...)``."""
        tab = self.table
        return [(k, *[tab[(k, m)] for m in self.methods]) for k in self.k_values]

    def best_k(self, method: str | None = None) -> int:
        tab = self.table
        methods = [method] if method else self.methods
        scored = [(tab[(k, m)], -k) for k in self.k_values for m in methods]
        return -max(scored)[1]

    def ranking(self, method: str | None = None) -> list:
        """K values ordered by decreasing silhouette (best method per K unless given)."""
        tab = self.table
        methods = [method] if method else self.methods
        best = {k: max(tab[(k, m)] for m in methods) for k in self.k_values}
        return sorted(self.k_values, key=lambda k: (-best[k], k))


def select_k(
    embeddings: Sequence,
    k_range: Sequence[int],
    methods: Sequence[str] = _cluster.METHODS,
    seed: int = 0,
    assignments: dict | None = None,
) -> SilhouetteReport:
    """Fit every (timestep, K, method) and average the silhouettes over timesteps.

    ``assignments`` may supply precomputed fits keyed by ``(timestep, k, method)``.
    """
    k_values = sorted(set(int(k) for k in k_range))
    if not k_values:
        raise ValueError("empty k_range")
    assignments = dict(assignments or {})
    per_timestep = {}
    for k in k_values:
        for m in methods:
            scores = []
            for t, emb in enumerate(embeddings):
                key = (t, k, m)
                if key not in assignments:
                    assignments[key] = _cluster.fit(emb, k, m, seed=seed, timestep=t)
                labels = assignments[key].labels
                if len(np.unique(labels)) < 2:
                    scores.append(0.0)
                    continue
                scores.append(silhouette(emb, labels)[1])
            per_timestep[(k, m)] = scores
    return SilhouetteReport(k_values, list(methods), per_timestep, assignments)


def _cluster_index(labels):
    return [np.flatnonzero(labels == c) for c in np.unique(labels)]


def stability_measures(reference, full_labels, reduced_labels, heldout):
    """APN, AD, ADM and FOM for one clustering method.

    Parameters
    ----------
    reference : (n, d) array
        Points used for distances and cluster means (the full-data embedding).
    full_labels : (n,) labels from the full data.
    reduced_labels : list of (n,) labels, one per deleted column.
    heldout : list of (n,) arrays, the deleted column values, same order.

    Returns
    -------
    dict mapping measure name to its average over points and deleted columns.
    """
    x = _as_array(reference)
    full = np.asarray(full_labels)
    n = len(full)
    dist = cdist(x, x)
    full_groups = {c: idx for c, idx in zip(np.unique(full), _cluster_index(full))}
    apn = ad = adm = fom = 0.0
    for red, col in zip(reduced_labels, heldout):
        red = np.asarray(red)
        col = np.asarray(col, dtype=float)
        red_groups = {c: idx for c, idx in zip(np.unique(red), _cluster_index(red))}
        # every point in the same (full, reduced) cluster pair shares the same terms
        pairs, counts = np.unique(np.column_stack([full, red]), axis=0, return_counts=True)
        for (cf, cr), cnt in zip(pairs, counts):
            g0, gl = full_groups[cf], red_groups[cr]
            overlap = np.intersect1d(g0, gl, assume_unique=True).size
            apn += cnt * (1.0 - overlap / g0.size)
            ad += cnt * dist[np.ix_(g0, gl)].mean()
            adm += cnt * np.linalg.norm(x[gl].mean(axis=0) - x[g0].mean(axis=0))
        sq = 0.0
        for idx in red_groups.values():
            sq += ((col[idx] - col[idx].mean()) ** 2).sum()
        fom += np.sqrt(sq / n)
    m = len(reduced_labels)
    return {"APN": apn / (m * n), "AD": ad / (m * n), "ADM": adm / (m * n), "FOM": fom / m}


@dataclass
class StabilityReport:
    """Averaged stability measures per clustering method (lower is better)."""

    measures: dict
    per_timestep: dict = field(default_factory=dict)

    @property
    def methods(self):
        return list(self.measures)

    def rows(self):
        return [(m, *[self.measures[m][k] for k in STABILITY_MEASURES]) for m in self.measures]

    def ranking(self) -> dict:
        """For each measure, methods ordered best (smallest) first."""
        return {
            name: sorted(self.measures, key=lambda m: (self.measures[m][name], self.methods.index(m)))
            for name in STABILITY_MEASURES
        }

    def best_method(self) -> str:
        """Method winning the most measures; ties go to the earlier method."""
        wins = {m: 0 for m in self.measures}
        for order in self.ranking().values():
            wins[order[0]] += 1
        return max(self.methods, key=lambda m: (wins[m], -self.methods.index(m)))


def leave_one_column_out(
    network: AttributedNetwork,
    config: SolverConfig,
    k: int,
    methods: Sequence[str] = _cluster.METHODS,
    seed: int = 0,
    full_embedding: EmbeddingMatrix | None = None,
    full_assignments: dict | None = None,
) -> dict:
    """Raw measures for one network: ``{method: {measure: value}}``.

    Each attribute column is deleted before the similarity matrix is built;
    the deleted network is re-embedded and re-clustered.
    """
    attrs = network.attributes
    if len(attrs.columns) < 2:
        raise ValueError("stability needs at least two attribute columns")
    if full_embedding is None:
        full_embedding, _ = embed(network, config)
    full_assignments = dict(full_assignments or {})
    for m in methods:
        if m not in full_assignments:
            full_assignments[m] = _cluster.fit(full_embedding, k, m, seed=seed, timestep=network.timestep)
    reduced = {m: [] for m in methods}
    heldout = []
    for j in range(len(attrs.columns)):
        net_j = network.with_attributes(attrs.drop_column(j))
        emb_j, _ = embed(net_j, config)
        heldout.append(attrs.values[:, j])
        for m in methods:
            reduced[m].append(_cluster.fit(emb_j, k, m, seed=seed, timestep=network.timestep).labels)
    return {
        m: stability_measures(full_embedding.values, full_assignments[m].labels, reduced[m], heldout)
        for m in methods
    }


def stability(
    networks,
    config: SolverConfig,
    k: int,
    methods: Sequence[str] = _cluster.METHODS,
    seed: int = 0,
) -> StabilityReport:
    """Average the leave-one-column-out measures over one or more timesteps."""
    if isinstance(networks, AttributedNetwork):
        networks = [networks]
    per_timestep = {}
    for net in networks:
        per_timestep[net.timestep] = leave_one_column_out(net, config, k, methods, seed)
    return aggregate_stability(per_timestep, methods)


def aggregate_stability(per_timestep: dict, methods: Sequence[str]) -> StabilityReport:
    measures = {
        m: {
            name: float(np.mean([per_timestep[t][m][name] for t in sorted(per_timestep)]))
            for name in STABILITY_MEASURES
        }
        for m in methods
    }
    return StabilityReport(measures, per_timestep)
