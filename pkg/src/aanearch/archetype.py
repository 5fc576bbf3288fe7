"""Label alignment across timesteps and trajectory archetypes."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cluster import ClusterAssignment
from .errors import MismatchedNodes

DEFAULT_MIN_SIZE = 20


@dataclass(frozen=True)
class LabelTrajectory:
    node_id: str
    labels: tuple

    def signature(self) -> str:
        return signature_string(self.labels)


@dataclass(frozen=True)
class Archetype:
    archetype_id: int | None
    signature: tuple
    members: tuple

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class ArchetypeTable:
    archetypes: list
    min_size: int
    dropped: list = field(default_factory=list)

    def by_id(self, archetype_id) -> Archetype:
        for a in self.archetypes:
            if a.archetype_id == archetype_id:
                return a
        raise KeyError(archetype_id)

    def membership(self) -> dict:
        return {n: a.archetype_id for a in self.archetypes for n in a.members}


def signature_string(labels) -> str:
    return "-".join(str(int(v)) for v in labels)


def align_labels(assignments: Sequence[ClusterAssignment]) -> list:
    """Rename each timestep's labels to best overlap the previous (aligned) timestep.

    Timestep 0 keeps its labels. Only names change; the partition at every
    timestep is untouched.
    """
    assignments = list(assignments)
    if not assignments:
        return []
    first = assignments[0]
    for a in assignments[1:]:
        if tuple(a.node_ids) != tuple(first.node_ids):
            raise MismatchedNodes(f"timestep {a.timestep} has a different node set")
        if a.k != first.k:
            raise MismatchedNodes(f"timestep {a.timestep} uses K={a.k}, expected {first.k}")
    k = first.k
    out = [first]
    prev = first.labels
    for a in assignments[1:]:
        overlap = np.zeros((k, k))
        np.add.at(overlap, (a.labels, prev), 1)
        rows, cols = linear_sum_assignment(overlap, maximize=True)
        mapping = np.empty(k, dtype=np.int64)
        mapping[rows] = cols
        aligned = a.relabel(mapping[a.labels])
        out.append(aligned)
        prev = aligned.labels
    return out


def trajectories(assignments: Sequence[ClusterAssignment]) -> list:
    """Per-node label sequences over the given (already aligned) timesteps."""
    assignments = list(assignments)
    if not assignments:
        return []
    labels = np.column_stack([a.labels for a in assignments])
    return [LabelTrajectory(n, tuple(int(v) for v in row)) for n, row in zip(assignments[0].node_ids, labels)]


def merge_archetypes(trajs: Sequence[LabelTrajectory], min_size: int = DEFAULT_MIN_SIZE) -> ArchetypeTable:
    """Group nodes with identical trajectories and drop groups below ``min_size``.

    Retained archetypes are numbered 0.. by descending size, ties by signature.
    """
    lengths = {len(t.labels) for t in trajs}
    if len(lengths) > 1:
        raise ValueError("trajectories differ in length")
    groups = defaultdict(list)
    for t in trajs:
        groups[tuple(t.labels)].append(str(t.node_id))
    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    kept, dropped = [], []
    for sig, members in ordered:
        members = tuple(sorted(members))
        if len(members) >= min_size:
            kept.append(Archetype(len(kept), sig, members))
        else:
            dropped.append(Archetype(None, sig, members))
    return ArchetypeTable(kept, min_size, dropped)


def hamming(a, b) -> int:
    return int(sum(x != y for x, y in zip(a, b)))


def fuse_similar(table: ArchetypeTable, hamming_threshold: int = 0) -> ArchetypeTable:
    """Absorb archetypes whose signatures differ in at most ``hamming_threshold`` timesteps.

    Archetypes are visited largest first; each surviving archetype absorbs
    every smaller survivor within the threshold of its own signature and
    keeps its id and signature.
    """
    if hamming_threshold < 0:
        raise ValueError("hamming_threshold must be nonnegative")
    if hamming_threshold == 0:
        return table
    order = sorted(table.archetypes, key=lambda a: (-a.size, a.archetype_id))
    absorbed = set()
    merged = []
    for i, a in enumerate(order):
        if a.archetype_id in absorbed:
            continue
        members = list(a.members)
        for b in order[i + 1:]:
            if b.archetype_id not in absorbed and hamming(a.signature, b.signature) <= hamming_threshold:
                absorbed.add(b.archetype_id)
                members.extend(b.members)
        merged.append(Archetype(a.archetype_id, a.signature, tuple(sorted(members))))
    merged.sort(key=lambda a: a.archetype_id)
    return ArchetypeTable(merged, table.min_size, list(table.dropped))
