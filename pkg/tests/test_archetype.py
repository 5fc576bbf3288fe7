import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from aanearch.archetype import (
    Archetype,
    ArchetypeTable,
    LabelTrajectory,
    align_labels,
    fuse_similar,
    merge_archetypes,
    trajectories,
)
from aanearch.cluster import ClusterAssignment
from aanearch.errors import MismatchedNodes


def assign(labels, k, t=0, ids=None):
    return ClusterAssignment(labels, k, "kmeans", 0.0, t, ids or ())


def overlap(a, b):
    return int(np.sum(np.asarray(a) == np.asarray(b)))


def test_permuted_names_become_identical():
    a = assign([0, 0, 1, 1, 2], 3)
    b = assign([2, 2, 0, 0, 1], 3, 1)
    out = align_labels([a, b])
    np.testing.assert_array_equal(out[1].labels, a.labels)


def test_anti_aligned_flip():
    out = align_labels([assign([0, 1, 0, 1], 2), assign([1, 0, 1, 0], 2, 1)])
    np.testing.assert_array_equal(out[1].labels, [0, 1, 0, 1])


def test_one_node_differs():
    a = [0, 0, 0, 1, 1, 1, 2, 2, 2]
    b = [1, 1, 1, 2, 2, 0, 0, 0, 0]  # node 5 moved
    out = align_labels([assign(a, 3), assign(b, 3, 1)])
    diff = np.flatnonzero(out[1].labels != np.array(a))
    assert diff.tolist() == [5]


def test_mismatched_nodes():
    with pytest.raises(MismatchedNodes):
        align_labels([assign([0, 1], 2, 0, ["a", "b"]), assign([0, 1], 2, 1, ["a", "c"])])
    with pytest.raises(MismatchedNodes):
        align_labels([assign([0, 1], 2), assign([0, 1], 3, 1)])


@pytest.mark.parametrize("case", range(100))
def test_alignment_preserves_partitions_and_is_optimal(case):
    rng = np.random.default_rng(case)
    k = int(rng.integers(2, 5))
    n = int(rng.integers(k, 25))
    steps = int(rng.integers(2, 6))
    seq = []
    for t in range(steps):
        lab = rng.integers(0, k, n)
        lab[:k] = rng.permutation(k)
        seq.append(assign(lab, k, t))
    out = align_labels(seq)
    np.testing.assert_array_equal(out[0].labels, seq[0].labels)
    for t in range(steps):
        assert oracles.same_partition(out[t].labels, seq[t].labels)
    for t in range(1, steps):
        # exhaustive oracle over all K! renamings of the raw labels
        best = max(overlap(np.array(p)[seq[t].labels], out[t - 1].labels)
                   for p in itertools.permutations(range(k)))
        assert overlap(out[t].labels, out[t - 1].labels) == best


def test_trajectories_columns():
    seq = [assign([0, 1, 1], 2, 0, ["x", "y", "z"]), assign([1, 1, 0], 2, 1, ["x", "y", "z"])]
    tr = trajectories(seq)
    assert [t.node_id for t in tr] == ["x", "y", "z"]
    assert [t.labels for t in tr] == [(0, 1), (1, 1), (1, 0)]
    assert tr[0].signature() == "0-1"


# merging

def trajs(rows):
    return [LabelTrajectory(f"v{i:03d}", tuple(r)) for i, r in enumerate(rows)]


def test_merge_small_example():
    tab = merge_archetypes(trajs([[0, 1], [0, 1], [1, 1]]), min_size=1)
    assert [a.size for a in tab.archetypes] == [2, 1]
    assert tab.archetypes[0].signature == (0, 1)


def test_merge_all_identical():
    tab = merge_archetypes(trajs([[2, 2, 0]] * 30), min_size=20)
    assert len(tab.archetypes) == 1 and tab.archetypes[0].size == 30 and not tab.dropped


def test_min_size_fixture():
    # groups of 45, 20, 19 and 3 nodes: exactly the 19- and 3-node groups fall below 20
    rows = [[0, 0, 1]] * 45 + [[1, 1, 1]] * 20 + [[0, 1, 1]] * 19 + [[2, 2, 2]] * 3
    tab = merge_archetypes(trajs(rows), min_size=20)
    assert [a.size for a in tab.archetypes] == [45, 20]
    assert [a.archetype_id for a in tab.archetypes] == [0, 1]
    assert sorted(d.size for d in tab.dropped) == [3, 19]
    assert {d.signature for d in tab.dropped} == {(0, 1, 1), (2, 2, 2)}
    assert all(a.size >= 20 for a in tab.archetypes)


def test_merge_nineteen_dropped():
    tab = merge_archetypes(trajs([[1, 0]] * 19))
    assert tab.archetypes == [] and tab.dropped[0].size == 19


def test_single_timestep():
    tab = merge_archetypes(trajs([[0]] * 25 + [[1]] * 21), min_size=20)
    assert [a.signature for a in tab.archetypes] == [(0,), (1,)]


@given(st.lists(st.lists(st.integers(0, 2), min_size=3, max_size=3), min_size=1, max_size=60),
       st.integers(1, 8), st.randoms(use_true_random=False))
def test_merge_partition_and_order_invariance(rows, min_size, rnd):
    items = trajs(rows)
    tab = merge_archetypes(items, min_size)
    kept = [m for a in tab.archetypes for m in a.members]
    dropped = [m for a in tab.dropped for m in a.members]
    assert len(kept) + len(dropped) == len(items)
    assert set(kept) | set(dropped) == {t.node_id for t in items}
    assert len({a.signature for a in tab.archetypes}) == len(tab.archetypes)
    assert all(a.size >= min_size for a in tab.archetypes)
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert merge_archetypes(shuffled, min_size) == tab


# fusing

def table(specs):
    """``specs``: list of (signature, size) in id order."""
    archs, start = [], 0
    for i, (sig, size) in enumerate(specs):
        archs.append(Archetype(i, tuple(sig), tuple(f"v{j:03d}" for j in range(start, start + size))))
        start += size
    return ArchetypeTable(archs, 1, [])


def fuse_oracle(specs, threshold):
    """Pairwise rule: each archetype, largest first, absorbs every smaller
    unabsorbed archetype within ``threshold`` of its own signature."""
    alive = {i: set(range(i, i + 1)) for i in range(len(specs))}
    order = sorted(range(len(specs)), key=lambda i: (-specs[i][1], i))
    gone = set()
    for pos, i in enumerate(order):
        if i in gone:
            continue
        for j in order[pos + 1:]:
            if j not in gone and sum(a != b for a, b in zip(specs[i][0], specs[j][0])) <= threshold:
                gone.add(j)
                alive[i] |= alive[j]
    return {i: alive[i] for i in alive if i not in gone}


def test_fuse_threshold_zero_identity():
    t = table([([0, 1, 1], 30), ([0, 1, 2], 25)])
    assert fuse_similar(t, 0) == t


def test_fuse_pair():
    out = fuse_similar(table([([0, 1, 1], 30), ([0, 1, 2], 25)]), 1)
    assert len(out.archetypes) == 1
    assert out.archetypes[0].archetype_id == 0 and out.archetypes[0].size == 55
    assert out.archetypes[0].signature == (0, 1, 1)


def test_fuse_chain():
    specs = [([0, 0, 0], 30), ([0, 0, 1], 25), ([0, 1, 1], 20)]
    out = fuse_similar(table(specs), 1)
    # the largest absorbs its neighbour; the far end of the chain survives
    assert [(a.archetype_id, a.size) for a in out.archetypes] == [(0, 55), (2, 20)]


@given(st.lists(st.tuples(st.lists(st.integers(0, 2), min_size=4, max_size=4), st.integers(1, 40)),
                min_size=1, max_size=7, unique_by=lambda s: tuple(s[0])),
       st.integers(0, 4))
def test_fuse_matches_oracle(specs, threshold):
    out = fuse_similar(table(specs), threshold)
    groups = fuse_oracle(specs, threshold)
    assert sorted(a.archetype_id for a in out.archetypes) == sorted(groups)
    for a in out.archetypes:
        assert a.size == sum(specs[j][1] for j in groups[a.archetype_id])
        assert a.signature == tuple(specs[a.archetype_id][0])
    assert sum(a.size for a in out.archetypes) == sum(s for _, s in specs)


def test_fuse_negative_threshold():
    with pytest.raises(ValueError):
        fuse_similar(table([([0], 1)]), -1)
