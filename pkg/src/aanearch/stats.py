"""Kruskal-Wallis omnibus test and Dunn's rank-based post hoc comparisons."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as _st

from .errors import InsufficientData

logger = logging.getLogger(__name__)

CORRECTIONS = ("holm", "bonferroni", "none")


def _pool(groups):
    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(groups) < 2:
        raise InsufficientData("need at least two groups")
    if any(g.size == 0 for g in groups):
        raise InsufficientData("every group must be non-empty")
    if any(np.isnan(g).any() for g in groups):
        raise InsufficientData("groups contain NaN")
    pooled = np.concatenate(groups)
    if pooled.size < 3:
        raise InsufficientData("need at least three observations in total")
    ranks = _st.rankdata(pooled)
    sizes = np.array([g.size for g in groups])
    _, ties = np.unique(pooled, return_counts=True)
    tie_sum = float((ties**3 - ties).sum())
    return ranks, sizes, tie_sum


def kruskal_wallis(groups: Sequence[Sequence[float]]):
    """Tie-corrected Kruskal-Wallis H and its chi-square p-value.

    Returns ``(H, p)``. When every observation is tied the statistic is
    reported as ``H = 0, p = 1``.
    """
    ranks, sizes, tie_sum = _pool(groups)
    n = ranks.size
    bounds = np.cumsum(sizes)[:-1]
    rank_sums = np.array([r.sum() for r in np.split(ranks, bounds)])
    # single fraction avoids cancellation: 12/(N(N+1)) sum R^2/n - 3(N+1)
    h = (12.0 * float((rank_sums**2 / sizes).sum()) - 3.0 * n * (n + 1) ** 2) / (n * (n + 1))
    correction = 1.0 - tie_sum / (n**3 - n)
    if correction <= 0:
        return 0.0, 1.0
    h = max(h / correction, 0.0)
    return h, float(_st.chi2.sf(h, len(sizes) - 1))


def adjust_pvalues(p, method: str = "holm") -> np.ndarray:
    """Family-wise multiplicity adjustment; output is clipped to [0, 1]."""
    p = np.asarray(p, dtype=float)
    m = p.size
    if method == "none":
        return p.copy()
    if method == "bonferroni":
        return np.minimum(p * m, 1.0)
    if method == "holm":
        order = np.argsort(p, kind="stable")
        stepped = np.maximum.accumulate((m - np.arange(m)) * p[order])
        out = np.empty(m)
        out[order] = np.minimum(stepped, 1.0)
        return out
    raise ValueError(f"unknown correction {method!r}; choose from {CORRECTIONS}")


@dataclass(frozen=True)
class PairwiseResult:
    group_a: object
    group_b: object
    z: float
    p_raw: float
    p_adjusted: float
    significant: bool


def dunn_posthoc(groups, alpha: float = 0.05, correction: str = "holm", names=None):
    """Dunn's pairwise z tests on pooled mean ranks.

    Returns one :class:`PairwiseResult` per unordered pair of groups, in
    lexicographic pair order.
    """
    ranks, sizes, tie_sum = _pool(groups)
    n = ranks.size
    names = list(range(len(sizes))) if names is None else list(names)
    bounds = np.cumsum(sizes)[:-1]
    mean_ranks = np.array([r.mean() for r in np.split(ranks, bounds)])
    variance = n * (n + 1) / 12.0 - tie_sum / (12.0 * (n - 1))
    pairs = list(itertools.combinations(range(len(sizes)), 2))
    z = np.zeros(len(pairs))
    for k, (i, j) in enumerate(pairs):
        se = np.sqrt(max(variance, 0.0) * (1.0 / sizes[i] + 1.0 / sizes[j]))
        if se > 0:
            z[k] = (mean_ranks[i] - mean_ranks[j]) / se
    p = np.minimum(2.0 * _st.norm.sf(np.abs(z)), 1.0)
    p_adj = adjust_pvalues(p, correction)
    return [
        PairwiseResult(names[i], names[j], float(z[k]), float(p[k]), float(p_adj[k]), bool(p_adj[k] < alpha))
        for k, (i, j) in enumerate(pairs)
    ]


@dataclass
class FeatureTestReport:
    """Kruskal-Wallis results per (timestep, feature) plus Dunn post hoc pairs.

    ``omnibus`` rows: ``(timestep, feature, H, df, p, significant)``.
    ``posthoc`` rows: ``(timestep, feature, archetype_a, archetype_b, z, p_raw, p_adjusted, significant)``.
    """

    alpha: float
    omnibus: list = field(default_factory=list)
    posthoc: list = field(default_factory=list)

    def nonsignificant(self):
        """``(timestep, feature, H, p)`` for features with similar distribution across archetypes."""
        return [(t, f, h, p) for t, f, h, _, p, sig in self.omnibus if not sig]

    def significant_features(self, timestep) -> list:
        return [f for t, f, _, _, _, sig in self.omnibus if t == timestep and sig]

    def distinguishing_summary(self):
        """Per feature: timesteps tested, timesteps significant, mean share of
        significant pairs, and timesteps where every archetype pair differs."""
        features = list(dict.fromkeys(f for _, f, *_ in self.omnibus))
        out = []
        for f in features:
            rows = [r for r in self.omnibus if r[1] == f]
            tested = len(rows)
            sig = sum(r[5] for r in rows)
            shares, all_pairs = [], 0
            for t, *_ in rows:
                pairs = [r for r in self.posthoc if r[0] == t and r[1] == f]
                share = float(np.mean([r[7] for r in pairs])) if pairs else 0.0
                shares.append(share)
                all_pairs += bool(pairs) and all(r[7] for r in pairs)
            out.append((f, tested, sig, float(np.mean(shares)) if shares else 0.0, all_pairs))
        return out


def feature_difference_scan(tables, archetypes, alpha: float = 0.05, correction: str = "holm"):
    """Test every feature at every timestep for differences across archetypes.

    Parameters
    ----------
    tables : sequence of AttributeTable, one per timestep
    archetypes : ArchetypeTable; only retained archetypes form groups
    alpha : significance level for both the omnibus and post hoc flags
    correction : multiplicity correction for the post hoc p-values
    """
    report = FeatureTestReport(alpha)
    groups_ids = [(a.archetype_id, a.members) for a in archetypes.archetypes]
    if len(groups_ids) < 2:
        logger.warning("fewer than two retained archetypes; nothing to compare")
        return report
    for table in tables:
        table = table.impute_median()
        idx = [[table.index_of(n) for n in members] for _, members in groups_ids]
        names = [aid for aid, _ in groups_ids]
        for j, feature in enumerate(table.columns):
            col = table.values[:, j]
            groups = [col[i] for i in idx]
            h, p = kruskal_wallis(groups)
            sig = bool(p < alpha)
            report.omnibus.append((table.timestep, feature, h, len(groups) - 1, p, sig))
            if sig:
                for r in dunn_posthoc(groups, alpha, correction, names):
                    report.posthoc.append(
                        (table.timestep, feature, r.group_a, r.group_b, r.z, r.p_raw, r.p_adjusted, r.significant)
                    )
    return report
