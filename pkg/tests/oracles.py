"""Slow, loop-based reference implementations used only by the tests.

None of these call into the package; they recompute each quantity from its
textbook definition.
"""

import itertools
import math

import numpy as np


def euclid(a, b):
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(np.atleast_1d(a), np.atleast_1d(b))))


def venables(positions, intensities):
    num = den = 0.0
    for i in range(len(intensities)):
        for j in range(i + 1, len(intensities)):
            w = intensities[i] * intensities[j]
            num += w * euclid(positions[i], positions[j])
            den += w
    return num / den


def silhouette(points, labels):
    n = len(labels)
    out = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            out.append(0.0)
            continue
        a = sum(euclid(points[i], points[j]) for j in own) / len(own)
        b = math.inf
        for c in set(labels):
            if c == labels[i]:
                continue
            mem = [j for j in range(n) if labels[j] == c]
            b = min(b, sum(euclid(points[i], points[j]) for j in mem) / len(mem))
        out.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return out


def dunn(points, labels):
    n = len(labels)
    inter, diam = math.inf, 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = euclid(points[i], points[j])
            if labels[i] == labels[j]:
                diam = max(diam, d)
            else:
                inter = min(inter, d)
    return inter / diam


def stability(points, full, reduced, heldout):
    """APN, AD, ADM, FOM straight from their per-point, per-column sums."""
    n, m = len(full), len(reduced)
    apn = ad = adm = fom = 0.0
    for col_labels, col in zip(reduced, heldout):
        for i in range(n):
            c0 = [a for a in range(n) if full[a] == full[i]]
            cl = [b for b in range(n) if col_labels[b] == col_labels[i]]
            apn += 1.0 - len(set(c0) & set(cl)) / len(c0)
            ad += sum(euclid(points[a], points[b]) for a in c0 for b in cl) / (len(c0) * len(cl))
            mean0 = np.mean([points[a] for a in c0], axis=0)
            meanl = np.mean([points[b] for b in cl], axis=0)
            adm += euclid(mean0, meanl)
        sq = 0.0
        for c in set(col_labels):
            mem = [i for i in range(n) if col_labels[i] == c]
            mu = sum(col[i] for i in mem) / len(mem)
            sq += sum((col[i] - mu) ** 2 for i in mem)
        fom += math.sqrt(sq / n)
    return {"APN": apn / (m * n), "AD": ad / (m * n), "ADM": adm / (m * n), "FOM": fom / m}


def midranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def kruskal_h(groups):
    """Tie-corrected H from pooled midranks."""
    pooled = [v for g in groups for v in g]
    r = midranks(pooled)
    n = len(pooled)
    pos, total = 0, 0.0
    for g in groups:
        rs = sum(r[pos:pos + len(g)])
        total += rs * rs / len(g)
        pos += len(g)
    h = 12.0 / (n * (n + 1)) * total - 3 * (n + 1)
    ties = {}
    for v in pooled:
        ties[v] = ties.get(v, 0) + 1
    c = 1 - sum(t**3 - t for t in ties.values()) / (n**3 - n)
    return 0.0 if c == 0 else h / c


def exact_kruskal_p(groups):
    """Permutation p-value P(H >= h_obs) by enumerating all group relabelings."""
    pooled = [v for g in groups for v in g]
    sizes = [len(g) for g in groups]
    h_obs = kruskal_h(groups)
    n = len(pooled)
    hits = total = 0
    idx = list(range(n))

    def splits(remaining, sizes):
        if len(sizes) == 1:
            yield [remaining]
            return
        for first in itertools.combinations(remaining, sizes[0]):
            rest = [i for i in remaining if i not in first]
            for tail in splits(rest, sizes[1:]):
                yield [list(first)] + tail

    for parts in splits(idx, sizes):
        h = kruskal_h([[pooled[i] for i in p] for p in parts])
        total += 1
        hits += h >= h_obs - 1e-9
    return hits / total


def all_partitions(n, k):
    """Every labeling of ``n`` items into exactly ``k`` non-empty groups (canonical first-occurrence order)."""
    def rec(i, labels, used):
        if i == n:
            if used == k:
                yield list(labels)
            return
        for c in range(min(used + 1, k)):
            labels.append(c)
            yield from rec(i + 1, labels, max(used, c + 1))
            labels.pop()
    yield from rec(0, [], 0)


def same_partition(a, b):
    """True when two labelings induce the same partition."""
    fwd, bwd = {}, {}
    for x, y in zip(a, b):
        if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
            return False
    return True
