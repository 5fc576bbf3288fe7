import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import special_ortho_group

import oracles
from conftest import random_network
from aanearch.embed import EmbeddingMatrix, SolverConfig, embed
from aanearch.errors import SingleCluster, ZeroDiameter
from aanearch.features import AttributeTable
from aanearch.graph import build_network, cosine_similarity
from aanearch.validate import (
    STABILITY_MEASURES,
    StabilityReport,
    dunn_index,
    leave_one_column_out,
    select_k,
    silhouette,
    stability,
    stability_measures,
)


def random_labeling(rng, n, k):
    labels = rng.integers(0, k, n)
    labels[:k] = np.arange(k)  # every cluster non-empty
    return rng.permutation(labels)


# silhouette

def test_silhouette_well_separated_pairs():
    vals, avg = silhouette([0.0, 0.1, 10.0, 10.1], [0, 0, 1, 1])
    assert avg >= 0.97
    assert vals[0] == pytest.approx((10.05 - 0.1) / 10.05, rel=1e-12)


def test_silhouette_equidistant_point_scores_zero():
    # point at 0: own-cluster mean distance 2 (to 2), other-cluster mean distance 2 (to -2)
    vals, _ = silhouette([0.0, 2.0, -2.0, -2.0], [0, 0, 1, 1])
    assert vals[0] == 0.0


def test_silhouette_singleton_is_zero():
    vals, _ = silhouette([0.0, 5.0, 5.2, 9.0], [0, 1, 1, 2])
    assert vals[0] == 0.0 and vals[3] == 0.0


def test_silhouette_single_cluster():
    with pytest.raises(SingleCluster):
        silhouette(np.zeros((3, 2)), [1, 1, 1])


@pytest.mark.parametrize("case", range(100))
def test_silhouette_and_dunn_match_brute_force(case):
    rng = np.random.default_rng(1000 + case)
    n = int(rng.integers(4, 41))
    k = int(rng.integers(2, min(6, n) + 1))
    x = rng.normal(size=(n, int(rng.integers(1, 5))))
    lab = random_labeling(rng, n, k)
    vals, avg = silhouette(x, lab)
    ref = oracles.silhouette(x, lab)
    np.testing.assert_allclose(vals, ref, rtol=0, atol=1e-12)
    assert avg == pytest.approx(np.mean(ref), abs=1e-12)
    if len(set(lab.tolist())) == n:
        with pytest.raises(ZeroDiameter):
            dunn_index(x, lab)
    else:
        assert dunn_index(x, lab) == pytest.approx(oracles.dunn(x, lab), rel=1e-12)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_silhouette_isometry_and_relabel_invariant(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(25, 3))
    lab = random_labeling(rng, 25, 3)
    rot = special_ortho_group.rvs(3, random_state=seed % 2**31)
    perm = rng.permutation(3)
    a, _ = silhouette(x, lab)
    b, _ = silhouette(x @ rot.T + rng.normal(size=3), perm[lab])
    np.testing.assert_allclose(a, b, atol=1e-10)
    assert np.all(np.abs(a) <= 1)


# dunn index

def test_dunn_index_example():
    assert dunn_index([0.0, 1.0, 5.0, 6.0], [0, 0, 1, 1]) == pytest.approx(4.0)


def test_dunn_index_zero_diameter():
    with pytest.raises(ZeroDiameter):
        dunn_index([[0.0, 0.0], [0.0, 0.0], [3.0, 3.0], [3.0, 3.0]], [0, 0, 1, 1])
    with pytest.raises(ZeroDiameter):
        dunn_index([0.0, 1.0, 2.0], [0, 1, 2])


# stability measures

@pytest.mark.parametrize("case", range(50))
def test_stability_measures_match_brute_force(case):
    rng = np.random.default_rng(5000 + case)
    n = int(rng.integers(3, 31))
    m = int(rng.integers(1, 7))
    k = int(rng.integers(2, min(5, n) + 1))
    x = rng.normal(size=(n, 3))
    full = random_labeling(rng, n, k)
    reduced = [random_labeling(rng, n, int(rng.integers(2, min(5, n) + 1))) for _ in range(m)]
    held = [rng.normal(size=n) for _ in range(m)]
    got = stability_measures(x, full, reduced, held)
    ref = oracles.stability(x, full, reduced, held)
    for name in STABILITY_MEASURES:
        assert got[name] == pytest.approx(ref[name], rel=0, abs=1e-10), name


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_stability_measure_bounds_and_label_invariance(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(20, 2))
    full = random_labeling(rng, 20, 3)
    reduced = [random_labeling(rng, 20, 3) for _ in range(3)]
    held = [rng.normal(size=20) for _ in range(3)]
    a = stability_measures(x, full, reduced, held)
    assert 0 <= a["APN"] <= 1
    assert min(a["AD"], a["ADM"], a["FOM"]) >= 0
    p = rng.permutation(3)
    b = stability_measures(x, p[full], [p[r] for r in reduced], held)
    for name in STABILITY_MEASURES:
        assert b[name] == pytest.approx(a[name], abs=1e-12)
    same = stability_measures(x, full, [full, full], held[:2])
    assert same["APN"] == 0.0 and same["ADM"] == 0.0


def duplicated_column_network(n=30, copies=4, seed=0):
    """Every attribute column is the same standardized feature."""
    rng = np.random.default_rng(seed)
    f = rng.normal(size=n)
    f = (f - f.mean()) / f.std()
    ids = [f"v{i}" for i in range(n)]
    attrs = AttributeTable(ids, [f"copy{j}" for j in range(copies)], np.tile(f[:, None], copies))
    base = random_network(n=n, n_features=2, p=0.15, seed=seed)
    recs = [(ids[int(a[1:])], ids[int(b[1:])], w) for a, b, w in base.edges()]
    return build_network(recs, attrs)


def test_duplicated_columns_similarity_unchanged():
    net = duplicated_column_network()
    s = cosine_similarity(net.attributes)
    for j in range(len(net.attributes.columns)):
        np.testing.assert_allclose(cosine_similarity(net.attributes.drop_column(j)), s, atol=1e-15)


def test_duplicated_columns_give_zero_apn_adm():
    net = duplicated_column_network()
    res = leave_one_column_out(net, SolverConfig(dimension=4), k=2, methods=("kmeans", "gmm"))
    for m in ("kmeans", "gmm"):
        assert res[m]["APN"] == 0.0
        assert res[m]["ADM"] == 0.0


def test_stability_report_ranking_and_best():
    rep = StabilityReport({
        "kmeans": {"APN": 0.1, "AD": 2.0, "ADM": 0.3, "FOM": 0.9},
        "gmm": {"APN": 0.2, "AD": 1.0, "ADM": 0.4, "FOM": 0.8},
    })
    rank = rep.ranking()
    assert set(rank) == set(STABILITY_MEASURES)
    assert rank["APN"] == ["kmeans", "gmm"] and rank["AD"] == ["gmm", "kmeans"]
    assert rep.best_method() == "kmeans"  # 2-2 tie goes to the first listed
    assert [r[0] for r in rep.rows()] == ["kmeans", "gmm"]


def test_stability_end_to_end_small(small_network):
    rep = stability([small_network], SolverConfig(dimension=4), k=3)
    assert rep.methods == ["kmeans", "gmm"]
    for vals in rep.measures.values():
        assert 0 <= vals["APN"] <= 1 and min(vals["AD"], vals["ADM"], vals["FOM"]) >= 0


# silhouette sweep

def _embeddings(t=2):
    out = []
    for s in range(t):
        rng = np.random.default_rng(s)
        x = np.vstack([rng.normal(c, 0.3, size=(15, 2)) for c in ((0, 0), (5, 0), (0, 5))])
        out.append(EmbeddingMatrix(x, tuple(f"v{i}" for i in range(45))))
    return out


def test_select_k_shape_and_argmax():
    rep = select_k(_embeddings(), [2, 3, 4, 5], ("kmeans", "gmm"))
    rows = rep.rows()
    assert [r[0] for r in rows] == [2, 3, 4, 5]
    assert all(len(r) == 3 for r in rows)
    assert rep.best_k() == 3
    assert rep.ranking()[0] == 3
    for scores in rep.per_timestep.values():
        assert len(scores) == 2 and all(-1 <= v <= 1 for v in scores)
    for (k, m), v in rep.table.items():
        assert v == pytest.approx(np.mean(rep.per_timestep[(k, m)]))


def test_select_k_single_value():
    rep = select_k(_embeddings(1), [4], ("kmeans",))
    assert len(rep.rows()) == 1 and rep.best_k() == 4
