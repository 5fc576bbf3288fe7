"""Planted-partition synthetic datasets in the pipeline's input layout."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import hadamard

from .errors import ConfigError
from .features import AttributeTable
from .io import write_attributes, write_edges, write_rows

FEATURE_NAMES = ("pop_density", "gdp", "poi_visits", "sdi", "venables", "r0", "sip", "cmi")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator settings.

    ``switch_nodes`` nodes of block 0 move to block 1 from timestep
    ``switch_at`` (default ``T // 2``) onward, so label trajectories differ.
    """

    blocks: int = 4
    nodes: int = 200
    timesteps: int = 17
    p_in: float = 0.3
    p_out: float = 0.02
    shift: float = 3.0
    n_features: int = 6
    switch_nodes: int = 20
    switch_at: int | None = None
    mean_visits: float = 5.0
    seed: int = 0

    def validate(self):
        if self.blocks < 2:
            raise ConfigError("need at least two blocks")
        null_model = self.p_in == self.p_out and self.shift == 0
        if not (self.p_in > self.p_out >= 0 or null_model):
            raise ConfigError("need p_in > p_out >= 0 (p_in == p_out only for a shift-0 null model)")
        if not (0 <= self.p_out <= 1 and 0 <= self.p_in <= 1):
            raise ConfigError("edge probabilities must lie in [0, 1]")
        if self.nodes < 2 * self.blocks:
            raise ConfigError("need at least two nodes per block")
        if self.timesteps < 1:
            raise ConfigError("need at least one timestep")
        if self.n_features < 2:
            raise ConfigError("need at least two features")
        if self.switch_nodes > self.nodes // self.blocks:
            raise ConfigError("switch_nodes exceeds block 0's size")


@dataclass
class SyntheticDataset:
    node_ids: tuple
    tables: list
    edges: list
    truth: np.ndarray  # (T, n) block labels


def block_centers(blocks: int, n_features: int, shift: float) -> np.ndarray:
    """Block mean vectors with entries ``+-shift/2``.

    Signs come from rows of a Sylvester-Hadamard matrix (constant column
    removed, remaining columns cycled to ``n_features``), so two blocks that
    differ on a feature differ by exactly ``shift`` there.
    """
    order = max(2, 1 << (blocks - 1).bit_length())
    h = hadamard(order)[:blocks, 1:]
    cols = [j % h.shape[1] for j in range(n_features)]
    return 0.5 * shift * h[:, cols].astype(float)


def make_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> SyntheticDataset:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, b, m, T = spec.nodes, spec.blocks, spec.n_features, spec.timesteps
    width = len(str(n - 1))
    ids = tuple(f"node_{i:0{width}d}" for i in range(n))
    base = np.repeat(np.arange(b), int(np.ceil(n / b)))[:n]
    switch_at = T // 2 if spec.switch_at is None else spec.switch_at
    movers = np.flatnonzero(base == 0)[: spec.switch_nodes]
    names = [FEATURE_NAMES[j] if j < len(FEATURE_NAMES) else f"feature_{j}" for j in range(m)]
    centers = block_centers(b, m, spec.shift)
    iu, ju = np.triu_indices(n, k=1)
    tables, edges, truth = [], [], []
    for t in range(T):
        member = base.copy()
        if t >= switch_at:
            member[movers] = 1
        truth.append(member)
        x = centers[member] + rng.normal(size=(n, m))
        tables.append(AttributeTable(ids, names, x, t))
        same = member[iu] == member[ju]
        p = np.where(same, spec.p_in, spec.p_out)
        hit = rng.random(iu.size) < p
        counts = 1 + rng.poisson(spec.mean_visits, size=hit.sum())
        # orientation of each record is random; the network is undirected
        flip = rng.random(hit.sum()) < 0.5
        src = np.where(flip, ju[hit], iu[hit])
        dst = np.where(flip, iu[hit], ju[hit])
        edges.append([(ids[s], ids[d], int(c)) for s, d, c in zip(src, dst, counts)])
    return SyntheticDataset(ids, tables, edges, np.array(truth))


def generate_synthetic(out_dir, spec: SyntheticSpec = SyntheticSpec()) -> Path:
    """Write ``week_<k>/edges.csv``, ``week_<k>/attributes.csv`` and ``truth.csv``."""
    data = make_synthetic(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for t, (table, recs) in enumerate(zip(data.tables, data.edges)):
        write_attributes(out / f"week_{t}" / "attributes.csv", table)
        write_edges(out / f"week_{t}" / "edges.csv", recs)
    rows = ((n, t, int(data.truth[t, i])) for t in range(len(data.tables)) for i, n in enumerate(data.node_ids))
    write_rows(out / "truth.csv", ["node_id", "timestep", "block"], rows)
    return out
