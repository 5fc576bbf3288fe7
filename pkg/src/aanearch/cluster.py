"""K-means and Gaussian-mixture clustering of embeddings.

Both fits are deterministic for a given seed and return canonical labels:
clusters are renumbered by descending size, ties broken by the smallest
node index they contain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import SingularCovariance, TooManyClusters

METHODS = ("kmeans", "gmm")


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int
    method: str
    score: float
    timestep: int = 0
    node_ids: tuple = ()

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError("labels must lie in [0, K)")
        object.__setattr__(self, "labels", labels)
        if not self.node_ids:
            object.__setattr__(self, "node_ids", tuple(str(i) for i in range(labels.size)))
        else:
            object.__setattr__(self, "node_ids", tuple(self.node_ids))

    def relabel(self, labels) -> "ClusterAssignment":
        return ClusterAssignment(labels, self.k, self.method, self.score, self.timestep, self.node_ids)


@dataclass
class GmmModel:
    means: np.ndarray
    covariances: np.ndarray
    weights: np.ndarray
    log_likelihood: list = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.weights)


def canonical_labels(labels) -> np.ndarray:
    """Renumber clusters by descending size, ties by smallest member index."""
    labels = np.asarray(labels)
    uniq, first, counts = np.unique(labels, return_index=True, return_counts=True)
    order = sorted(range(len(uniq)), key=lambda c: (-counts[c], first[c]))
    mapping = {uniq[c]: new for new, c in enumerate(order)}
    return np.array([mapping[v] for v in labels], dtype=np.int64)


def _sq_dists(x, centers):
    d2 = (x**2).sum(1)[:, None] - 2.0 * x @ centers.T + (centers**2).sum(1)[None, :]
    return np.maximum(d2, 0.0)


def _plusplus_seeds(x, k, rng, n_trials=None):
    """Greedy k-means++ seeding: sample candidates by D^2, keep the best."""
    n = x.shape[0]
    n_trials = n_trials or 2 + int(np.log(k))
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dists(x, centers[:1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            cand = rng.integers(n, size=n_trials)
        else:
            cand = np.searchsorted(np.cumsum(closest), rng.random(n_trials) * total)
            cand = np.minimum(cand, n - 1)
        cand_d = np.minimum(closest[None, :], _sq_dists(x, x[cand]).T)
        best = int(np.argmin(cand_d.sum(axis=1)))
        centers[c] = x[cand[best]]
        closest = cand_d[best]
    return centers


def _lloyd(x, centers, max_iter):
    k = centers.shape[0]
    history = []
    labels = None
    for _ in range(max_iter):
        d2 = _sq_dists(x, centers)
        new = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(x)), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
        for j in np.flatnonzero(np.bincount(labels, minlength=k) == 0):
            # reseed an emptied cluster with the point worst served by its centroid
            resid = ((x - centers[labels]) ** 2).sum(1)
            far = int(np.argmax(resid))
            labels[far] = j
            centers[j] = x[far]
    d2 = _sq_dists(x, centers)
    labels = np.argmin(d2, axis=1)
    return labels, centers, history


def kmeans(emb, k: int, seed: int = 0, max_iter: int = 300, n_init: int = 10, timestep: int = 0):
    """Lloyd's algorithm from ``n_init`` greedy k-means++ starts; best inertia wins.

    Returns a :class:`KMeansResult`; its assignment's ``score`` is the
    within-cluster sum of squares and ``inertia_history`` traces the winning run.
    """
    x, node_ids = _points(emb)
    n = x.shape[0]
    if k < 1 or k > n:
        raise TooManyClusters(f"cannot form {k} clusters from {n} points")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        centers = _plusplus_seeds(x, k, rng)
        labels, centers, history = _lloyd(x, centers, max_iter)
        inertia = float(((x - centers[labels]) ** 2).sum())
        if best is None or inertia < best[0] - 1e-12 * max(1.0, abs(best[0])):
            best = (inertia, labels, centers, history)
    inertia, labels, centers, history = best
    canon = canonical_labels(labels)
    out = ClusterAssignment(canon, k, "kmeans", inertia, timestep, node_ids)
    return KMeansResult(out, _reorder_centers(centers, labels, canon, k), history)


@dataclass(frozen=True)
class KMeansResult:
    assignment: ClusterAssignment
    centers: np.ndarray
    inertia_history: list


def _reorder_centers(centers, raw, canon, k):
    out = np.array(centers)
    for old, new in set(zip(raw.tolist(), canon.tolist())):
        out[new] = centers[old]
    return out


def _points(emb):
    if hasattr(emb, "values") and hasattr(emb, "node_ids"):
        return np.asarray(emb.values, dtype=float), tuple(emb.node_ids)
    x = np.asarray(emb, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x, ()


def _regularize(cov, covariance_type):
    d = cov.shape[-1]
    eps = 1e-6 * np.trace(cov) / d + 1e-10
    if covariance_type == "diag":
        cov = np.diag(np.diag(cov))
    return cov + eps * np.eye(d)


def _log_gauss(x, mean, cov):
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularCovariance("covariance is not positive definite after regularization") from None
    diff = np.linalg.solve(chol, (x - mean).T)
    maha = (diff**2).sum(axis=0)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (x.shape[1] * np.log(2 * np.pi) + logdet + maha)


def _m_step(x, resp, covariance_type):
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    weights = nk / nk.sum()
    means = (resp.T @ x) / nk[:, None]
    covs = np.empty((len(nk), x.shape[1], x.shape[1]))
    for j in range(len(nk)):
        diff = x - means[j]
        covs[j] = _regularize((resp[:, j, None] * diff).T @ diff / nk[j], covariance_type)
    return weights, means, covs


def _e_step(x, weights, means, covs):
    logp = np.column_stack(
        [np.log(weights[j]) + _log_gauss(x, means[j], covs[j]) for j in range(len(weights))]
    )
    norm = logsumexp(logp, axis=1)
    return float(norm.sum()), np.exp(logp - norm[:, None])


def gmm_fit(
    emb,
    k: int,
    seed: int = 0,
    max_iter: int = 200,
    tol: float = 1e-6,
    covariance_type: str = "full",
    timestep: int = 0,
):
    """Expectation-maximization for a K-component Gaussian mixture.

    Initialized from a seeded K-means partition. ``tol`` bounds the change in
    mean per-point log-likelihood between iterations.
    """
    if covariance_type not in ("full", "diag"):
        raise ValueError(f"unknown covariance_type {covariance_type!r}")
    x, node_ids = _points(emb)
    n = x.shape[0]
    if k < 1 or k > n:
        raise TooManyClusters(f"cannot form {k} components from {n} points")
    init = kmeans(x, k, seed=seed).assignment.labels
    resp = np.eye(k)[init]
    weights, means, covs = _m_step(x, resp, covariance_type)
    history = []
    for _ in range(max_iter):
        ll, resp = _e_step(x, weights, means, covs)
        history.append(ll)
        if len(history) > 1 and abs(history[-1] - history[-2]) < tol * n:
            break
        weights, means, covs = _m_step(x, resp, covariance_type)
    model = GmmModel(means, covs, weights, history)
    raw = np.argmax(resp, axis=1)
    canon = canonical_labels(raw)
    perm = {}
    for old, new in zip(raw.tolist(), canon.tolist()):
        perm[old] = new
    # components that win no point keep their relative order after the used ones
    unused = [j for j in range(k) if j not in perm]
    for offset, j in enumerate(unused):
        perm[j] = len(set(canon.tolist())) + offset
    order = np.argsort([perm[j] for j in range(k)])
    model = GmmModel(means[order], covs[order], weights[order], history)
    return model, ClusterAssignment(canon, k, "gmm", history[-1], timestep, node_ids)


def fit(emb, k: int, method: str, seed: int = 0, timestep: int = 0, **kwargs) -> ClusterAssignment:
    """Dispatch to the named clustering method and return the assignment."""
    if method == "kmeans":
        return kmeans(emb, k, seed=seed, timestep=timestep, **kwargs).assignment
    if method == "gmm":
        return gmm_fit(emb, k, seed=seed, timestep=timestep, **kwargs)[1]
    raise ValueError(f"unknown clustering method {method!r}")
