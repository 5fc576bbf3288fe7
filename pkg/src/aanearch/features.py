"""Derived node features and attribute-table preparation.

Raw inputs (activity grids, case series, pairwise index matrices) are turned
into per-node scalar features; the per-timestep attribute table is then
median-imputed and z-standardized before it feeds the similarity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AsymmetricMatrix, DegenerateGrid, ZeroBaseline, ZeroCases

SERIAL_INTERVAL_DAYS = 5.1


@dataclass(frozen=True)
class ActivityGrid:
    """Cells with planar positions (meters) and nonnegative activity intensities."""

    positions: np.ndarray
    intensities: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        inten = np.asarray(self.intensities, dtype=float).ravel()
        if pos.shape[0] != inten.shape[0]:
            raise ValueError("positions and intensities differ in length")
        if np.any(inten < 0):
            raise ValueError("activity intensities must be nonnegative")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "intensities", inten)


@dataclass(frozen=True)
class CaseSeries:
    """Cumulative confirmed case counts sampled every ``step`` days."""

    counts: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float).ravel()
        if np.any(counts < 0):
            raise ValueError("case counts must be nonnegative")
        if np.any(np.diff(counts) < 0):
            raise ValueError("cumulative case counts must be non-decreasing")
        if self.step <= 0:
            raise ValueError("step must be positive")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class PairwiseIndexMatrix:
    values: np.ndarray
    node_ids: tuple = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError("pairwise matrix must be square")
        object.__setattr__(self, "values", vals)
        if not self.node_ids:
            object.__setattr__(self, "node_ids", tuple(str(i) for i in range(vals.shape[0])))
        else:
            object.__setattr__(self, "node_ids", tuple(self.node_ids))
        if len(self.node_ids) != vals.shape[0]:
            raise ValueError("node_ids length does not match matrix size")


@dataclass(frozen=True)
class AttributeTable:
    """Node-by-feature table for one timestep.

    ``values`` has one row per entry of ``node_ids`` and one column per entry
    of ``columns``. NaN marks a missing value until :meth:`impute_median`.
    """

    node_ids: tuple
    columns: tuple
    values: np.ndarray
    timestep: int = 0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        object.__setattr__(self, "node_ids", tuple(str(n) for n in self.node_ids))
        object.__setattr__(self, "columns", tuple(str(c) for c in self.columns))
        if vals.shape != (len(self.node_ids), len(self.columns)):
            raise ValueError(
                f"values shape {vals.shape} does not match "
                f"{len(self.node_ids)} nodes x {len(self.columns)} columns"
            )
        if len(set(self.node_ids)) != len(self.node_ids):
            raise ValueError("duplicate node ids in attribute table")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.node_ids)})

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def index_of(self, node_id) -> int:
        return self._index[str(node_id)]

    def __contains__(self, node_id) -> bool:
        return str(node_id) in self._index

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def drop_column(self, name_or_index) -> "AttributeTable":
        j = name_or_index if isinstance(name_or_index, int) else self.columns.index(name_or_index)
        keep = [k for k in range(len(self.columns)) if k != j]
        return AttributeTable(
            self.node_ids, tuple(self.columns[k] for k in keep), self.values[:, keep], self.timestep
        )

    def with_values(self, values) -> "AttributeTable":
        return AttributeTable(self.node_ids, self.columns, values, self.timestep)

    def impute_median(self) -> "AttributeTable":
        """Fill NaNs with the column median (0 for an all-missing column)."""
        vals = np.array(self.values)
        missing = np.isnan(vals)
        if not missing.any():
            return self
        for j in np.flatnonzero(missing.any(axis=0)):
            col = vals[:, j]
            fill = np.median(col[~np.isnan(col)]) if (~np.isnan(col)).any() else 0.0
            col[np.isnan(col)] = fill
        return self.with_values(vals)


def venables_distance(grid: ActivityGrid) -> float:
    """Intensity-weighted mean pairwise distance between activity cells."""
    s = grid.intensities
    active = s > 0
    if np.count_nonzero(active) < 2:
        raise DegenerateGrid("Venables distance needs at least 2 cells with positive intensity")
    s = s[active]
    pos = grid.positions[active]
    # rescaling by the max keeps the products well inside float range
    s = s / s.max()
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt((diff**2).sum(axis=-1))
    w = np.outer(s, s)
    iu = np.triu_indices(len(s), k=1)
    return float((w[iu] * d[iu]).sum() / w[iu].sum())


def reproduction_number(
    series: CaseSeries, window: tuple[int, int] | None = None, tau: float = SERIAL_INTERVAL_DAYS
) -> float:
    """Exponential-growth estimate ``exp(K * tau)`` over an index window.

    ``K = (ln i(t) - ln i(0)) / t`` where ``t`` is the window length in days.
    """
    counts = series.counts
    start, end = (0, len(counts) - 1) if window is None else window
    if not 0 <= start < end < len(counts):
        raise ValueError(f"invalid window {window!r} for series of length {len(counts)}")
    i0, it = counts[start], counts[end]
    if i0 <= 0 or it <= 0:
        raise ZeroCases(f"case count is zero at window endpoint ({i0:g}, {it:g})")
    t = (end - start) * series.step
    # (i(t)/i(0))^(tau/t) equals exp(K tau); this form is exact for whole-fold growth over tau
    return float((it / i0) ** (tau / t))


def weighted_degree_centrality(m: PairwiseIndexMatrix, rtol: float = 1e-12) -> np.ndarray:
    vals = m.values
    scale = max(np.abs(vals).max(), np.finfo(float).tiny)
    if np.abs(vals - vals.T).max() > rtol * scale:
        raise AsymmetricMatrix("pairwise index matrix is not symmetric")
    return vals.sum(axis=1) - np.diag(vals)


def percent_change_from_baseline(series: Sequence[float], baseline_index: int = 0) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    base = x[baseline_index]
    if base == 0:
        raise ZeroBaseline(f"baseline value at index {baseline_index} is zero")
    out = (x - base) / base
    out[baseline_index] = 0.0
    return out


def standardize(table: AttributeTable) -> AttributeTable:
    """Median-impute then z-score every column with population variance.

    Constant columns become all-zero so cosine similarity stays defined.
    """
    table = table.impute_median()
    vals = np.array(table.values)
    mean = vals.mean(axis=0)
    std = vals.std(axis=0)
    centered = vals - mean
    # a column is constant when its spread is at rounding level of its magnitude
    scale = np.maximum(np.abs(mean), 1.0)
    constant = std <= 1e-12 * scale
    std[constant] = 1.0
    out = centered / std
    out[:, constant] = 0.0
    return table.with_values(out)
