import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import special_ortho_group

import oracles
from aanearch.cluster import canonical_labels, fit, gmm_fit, kmeans
from aanearch.errors import TooManyClusters


def sse(x, labels):
    return sum(((x[labels == c] - x[labels == c].mean(axis=0)) ** 2).sum() for c in np.unique(labels))


def blobs(seed, n=60, k=3, d=4, spread=0.5):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=4.0, size=(k, d))
    lab = rng.integers(0, k, n)
    return centers[lab] + spread * rng.normal(size=(n, d))


def test_kmeans_four_points_exhaustive():
    x = np.array([[0.0], [1.0], [10.0], [11.0]])
    best = min(oracles.all_partitions(4, 2), key=lambda p: sse(x, np.array(p)))
    res = kmeans(x, 2, seed=0)
    assert oracles.same_partition(res.assignment.labels, best)
    np.testing.assert_allclose(sorted(res.centers.ravel()), [0.5, 10.5])


def test_kmeans_k_equals_n():
    x = np.random.default_rng(0).normal(size=(7, 3))
    res = kmeans(x, 7)
    assert res.assignment.score == pytest.approx(0.0, abs=1e-20)
    assert len(set(res.assignment.labels)) == 7


def test_kmeans_duplicated_data_same_centers():
    x = blobs(1, n=30)
    a = kmeans(x, 3, seed=2).centers
    b = kmeans(np.vstack([x, x]), 3, seed=2).centers
    np.testing.assert_allclose(np.sort(a, axis=0), np.sort(b, axis=0), atol=1e-10)


def test_too_many_clusters():
    with pytest.raises(TooManyClusters):
        kmeans(np.zeros((3, 2)), 4)
    with pytest.raises(TooManyClusters):
        gmm_fit(np.zeros((3, 2)), 4)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_kmeans_inertia_monotone_and_fixed_point(seed, k):
    x = blobs(seed)
    res = kmeans(x, k, seed=seed)
    h = res.inertia_history
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(h, h[1:]))
    d2 = ((x[:, None] - res.centers[None]) ** 2).sum(-1)
    lab = res.assignment.labels
    assert np.all(d2[np.arange(len(x)), lab] <= d2.min(axis=1) + 1e-9)
    assert res.assignment.score == pytest.approx(sse(x, lab), rel=1e-9)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_kmeans_rotation_invariant(seed):
    x = blobs(seed, d=3)
    rot = special_ortho_group.rvs(3, random_state=seed % 2**31)
    a = kmeans(x, 3, seed=0).assignment.labels
    b = kmeans(x @ rot.T + 5.0, 3, seed=0).assignment.labels
    assert oracles.same_partition(a, b)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=40))
def test_canonical_labels(labels):
    out = canonical_labels(labels)
    assert oracles.same_partition(out, labels)
    sizes = np.bincount(out)
    assert np.all(np.diff(sizes) <= 0)
    firsts = [np.flatnonzero(out == c)[0] for c in range(len(sizes))]
    for c in range(len(sizes) - 1):
        if sizes[c] == sizes[c + 1]:
            assert firsts[c] < firsts[c + 1]


@pytest.mark.parametrize("method", ["kmeans", "gmm"])
def test_methods_deterministic(method):
    x = blobs(5)
    a, b = fit(x, 3, method, seed=11), fit(x, 3, method, seed=11)
    assert np.array_equal(a.labels, b.labels) and a.score == b.score


# gaussian mixtures

def test_gmm_two_point_masses():
    x = np.repeat([0.0, 10.0], 50)[:, None]
    model, assign = gmm_fit(x, 2, seed=0)
    np.testing.assert_allclose(sorted(model.means.ravel()), [0.0, 10.0], atol=0.1)
    np.testing.assert_allclose(model.weights, [0.5, 0.5], atol=0.05)
    assert oracles.same_partition(assign.labels, np.repeat([0, 1], 50))


def test_gmm_single_component_closed_form():
    x = blobs(2, n=80, k=2, d=3, spread=1.0)
    model, _ = gmm_fit(x, 1)
    np.testing.assert_allclose(model.means[0], x.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(model.covariances[0], np.cov(x.T, bias=True), rtol=1e-5, atol=1e-8)
    assert model.weights[0] == pytest.approx(1.0)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.sampled_from(["full", "diag"]))
def test_gmm_invariants(seed, k, cov):
    x = blobs(seed, n=50, d=3)
    model, assign = gmm_fit(x, k, seed=seed, covariance_type=cov)
    assert abs(model.weights.sum() - 1.0) < 1e-9
    ll = model.log_likelihood
    for a, b in zip(ll, ll[1:]):
        assert b >= a - 1e-8 * max(1.0, abs(a))
    for c in model.covariances:
        np.testing.assert_allclose(c, c.T)
        assert np.linalg.eigvalsh(c).min() > 0
    assert assign.labels.max() < k
