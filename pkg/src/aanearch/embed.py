"""Attributed network embedding by alternating-direction updates.

The solver factorizes the attribute cosine-similarity matrix ``S ~ Q Z^T``
while pulling connected nodes together through a weighted, non-squared
distance penalty, with the consensus constraint ``Q = Z`` enforced through
scaled duals ``U``:

    sum_i ||S_i - q_i Z^T||^2 + lam * sum_{i~j} w_ij ||q_i - z_j||
        + rho/2 * sum_i (||q_i - z_i + u_i||^2 - ||u_i||^2)

Each half-step is a batch of independent ``d x d`` solves, one per node,
against a frozen copy of the opposite block.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import DimensionTooLarge, NonFinite
from .graph import AttributedNetwork, cosine_similarity

logger = logging.getLogger(__name__)

DISTANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``seed`` is carried for provenance; the spectral initialization makes the
    solver itself deterministic without drawing random numbers.
    """

    dimension: int = 256
    lam: float = 0.05
    rho: float = 5.0
    max_iterations: int = 50
    primal_tolerance: float = 1e-4
    seed: int = 0
    burn_in: int = 5

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.primal_tolerance <= 0:
            raise ValueError("primal_tolerance must be positive")


@dataclass(frozen=True)
class EmbeddingMatrix:
    values: np.ndarray
    node_ids: tuple

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != len(self.node_ids):
            raise ValueError("embedding rows must match node ids")
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return self.values.shape[1]


@dataclass
class SolverTrace:
    objective: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    residual_monotone: bool = True

    @property
    def initial_objective(self) -> float:
        return self.objective[0]

    @property
    def final_objective(self) -> float:
        return self.objective[-1]

    def rows(self):
        """``(iteration, objective, residual)`` rows, iteration 0 being the initial iterate."""
        return [(k, o, r) for k, (o, r) in enumerate(zip(self.objective, self.residual))]


def spectral_init(s: np.ndarray, d: int) -> np.ndarray:
    """Top-``d`` eigenpairs of ``S`` scaled as ``V sqrt(max(L, 0))``.

    Row order follows ``S`` so a node permutation permutes the rows. Column
    signs are fixed by making the largest-magnitude entry positive.
    """
    n = s.shape[0]
    evals, evecs = np.linalg.eigh(s)
    order = np.argsort(evals)[::-1][:d]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    pivot = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[pivot, np.arange(evecs.shape[1])])
    signs[signs == 0] = 1.0
    q = evecs * signs * np.sqrt(evals)
    if q.shape[1] < d:
        q = np.hstack([q, np.zeros((n, d - q.shape[1]))])
    return q


def normalized_edge_matrix(network: AttributedNetwork) -> sparse.csr_matrix:
    """Symmetric adjacency with weights divided by the timestep's maximum weight."""
    adj = network.adjacency()
    if adj.nnz:
        adj = adj / adj.data.max()
    return sparse.csr_matrix(adj)


def _edge_distances(x: np.ndarray, y: np.ndarray, w: sparse.csr_matrix) -> np.ndarray:
    rows = np.repeat(np.arange(w.shape[0]), np.diff(w.indptr))
    return np.linalg.norm(x[rows] - y[w.indices], axis=1)


def objective(s, q, z, u, w, lam, rho) -> float:
    fidelity = np.sum((s - q @ z.T) ** 2)
    penalty = lam * float(w.data @ _edge_distances(q, z, w)) if w.nnz else 0.0
    prox = 0.5 * rho * (np.sum((q - z + u) ** 2) - np.sum(u**2))
    return float(fidelity + penalty + prox)


def _half_step(s, own, other, target, w, lam, rho):
    """Solve every row of ``own`` against the frozen ``other`` block.

    Row ``i`` solves ``x (2 Y^T Y + (c_i + rho) I) = 2 S_i Y + sum_j C_ij y_j + rho t_i``
    where ``C_ij = lam w_ij / ||own_i - y_j||``.
    """
    d = own.shape[1]
    gram = 2.0 * other.T @ other + rho * np.eye(d)
    evals, evecs = np.linalg.eigh(gram)
    rhs = 2.0 * (s @ other) + rho * target
    if lam > 0 and w.nnz:
        dist = np.maximum(_edge_distances(own, other, w), DISTANCE_FLOOR)
        coef = sparse.csr_matrix((lam * w.data / dist, w.indices, w.indptr), shape=w.shape)
        rhs = rhs + coef @ other
        shift = np.asarray(coef.sum(axis=1)).ravel()
    else:
        shift = np.zeros(own.shape[0])
    return ((rhs @ evecs) / (evals[None, :] + shift[:, None])) @ evecs.T


def embed(network: AttributedNetwork, config: SolverConfig = SolverConfig(), similarity=None):
    """Embed ``network`` into ``config.dimension`` dimensions.

    Parameters
    ----------
    network : AttributedNetwork
        Graph plus standardized attributes.
    config : SolverConfig
    similarity : ndarray, optional
        Precomputed attribute similarity; defaults to the cosine similarity
        of ``network.attributes``.

    Returns
    -------
    (EmbeddingMatrix, SolverTrace)
    """
    n = network.n_nodes
    d = config.dimension
    if d > n:
        raise DimensionTooLarge(f"embedding dimension {d} exceeds node count {n}")
    s = cosine_similarity(network.attributes) if similarity is None else np.asarray(similarity, float)
    w = normalized_edge_matrix(network)
    lam, rho = config.lam, config.rho

    q = spectral_init(s, d)
    z = q.copy()
    u = np.zeros_like(q)
    trace = SolverTrace()
    trace.objective.append(objective(s, q, z, u, w, lam, rho))
    trace.residual.append(float(np.linalg.norm(q - z)))

    for it in range(1, config.max_iterations + 1):
        q = _half_step(s, q, z, z - u, w, lam, rho)
        z = _half_step(s, z, q, q + u, w, lam, rho)
        u = u + q - z
        if not (np.isfinite(q).all() and np.isfinite(z).all() and np.isfinite(u).all()):
            raise NonFinite(f"non-finite iterate at iteration {it}; check lam/rho")
        res = float(np.linalg.norm(q - z))
        trace.objective.append(objective(s, q, z, u, w, lam, rho))
        trace.residual.append(res)
        trace.iterations = it
        if it > config.burn_in + 1 and res > trace.residual[-2] * (1 + 1e-9) + 1e-15:
            trace.residual_monotone = False
        if res < config.primal_tolerance:
            trace.converged = True
            break

    if not trace.converged:
        logger.warning(
            "embedding at timestep %s stopped after %d iterations with residual %.3g",
            network.timestep, trace.iterations, trace.residual[-1],
        )
    elif not trace.residual_monotone:
        logger.info("primal residual oscillated after burn-in at timestep %s", network.timestep)
    return EmbeddingMatrix(q, network.node_ids), trace


def edge_penalty(emb: EmbeddingMatrix | np.ndarray, network: AttributedNetwork) -> float:
    """``sum_{(i,j) in E} w_ij ||q_i - q_j||`` over stored (unordered) edges, raw weights."""
    q = emb.values if isinstance(emb, EmbeddingMatrix) else np.asarray(emb)
    if network.n_edges == 0:
        return 0.0
    dist = np.linalg.norm(q[network.src] - q[network.dst], axis=1)
    return float(network.weights @ dist)


def project_2d(emb: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    """Coordinates on the top two principal axes of the centered embedding."""
    x = emb.values if isinstance(emb, EmbeddingMatrix) else np.asarray(emb, float)
    if x.shape[1] < 2:
        raise ValueError("projection needs at least 2 embedding dimensions")
    xc = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(xc, full_matrices=False)
    axes = vt[:2].copy()
    for k in range(2):
        j = np.argmax(np.abs(axes[k]))
        if axes[k, j] < 0:
            axes[k] = -axes[k]
    return xc @ axes.T
