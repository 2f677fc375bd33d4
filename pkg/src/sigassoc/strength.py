"""Strength-based split.

Members of a cluster are linked by a tie strength that compares how many
edges each sends into every neighbouring cluster; the resulting weighted
graph is partitioned by Louvain modularity maximisation and every community
becomes a subcluster.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .association import AssociationGraph, split_cluster

logger = logging.getLogger(__name__)

# row-block size for the pairwise min-sum; keeps temporaries ~ 8 MB per thread
_BLOCK = 256


@dataclass(eq=False)
class TieGraph:
    """Weighted graph over a cluster's members.

    ``weights`` is a dense symmetric matrix with zero diagonal; entry (i, j)
    is the tie strength of ``members[i]`` and ``members[j]``, 0 meaning no tie.
    """

    members: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_edges(cls, members: Sequence[int], edges: Mapping[tuple[int, int], float]) -> "TieGraph":
        members = np.asarray(members, dtype=np.int64)
        pos = {int(u): i for i, u in enumerate(members)}
        w = np.zeros((len(members), len(members)))
        for (u, v), x in edges.items():
            if u == v:
                raise ValueError("tie graphs have no self-ties")
            w[pos[u], pos[v]] = w[pos[v], pos[u]] = x
        return cls(members, w)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum()) / 2

    def is_empty(self) -> bool:
        return not np.any(self.weights)

    def edges(self) -> dict[tuple[int, int], float]:
        iu, iv = np.nonzero(np.triu(self.weights, 1))
        return {(int(self.members[i]), int(self.members[j])): float(self.weights[i, j]) for i, j in zip(iu, iv)}


def phi_matrix(ag: AssociationGraph, cid: int, neighbors: Sequence[int]) -> np.ndarray:
    """Edge counts from each member of ``cid`` (rows) into each cluster in ``neighbors`` (columns)."""
    c = ag.clusters[cid]
    col = {nb: j for j, nb in enumerate(neighbors)}
    out = np.zeros((c.size, len(neighbors)), dtype=np.int64)
    if not neighbors:
        return out
    src, dst = ag.graph.incident_edges(c.members)
    lut = np.full(ag.assignment.max() + 1, -1, dtype=np.int64)
    for nb, j in col.items():
        lut[nb] = j
    cols = lut[ag.assignment[dst]]
    keep = cols >= 0
    rows = np.searchsorted(c.members, src[keep])
    np.add.at(out, (rows, cols[keep]), 1)
    return out


def phi(u: int, cp: int, ag: AssociationGraph) -> int:
    """Number of edges between node u and the members of cluster ``cp``."""
    nb = ag.graph.neighbor_array(u)
    return int(np.count_nonzero(ag.assignment[nb] == cp))


def tie_strength(u: int, v: int, c: int, ag: AssociationGraph) -> float:
    """sum over neighbour clusters of min(phi) / sum of max(phi); 0 if both send no edges."""
    lo = hi = 0
    for cp in ag.neighbor_clusters(c):
        pu, pv = phi(u, cp, ag), phi(v, cp, ag)
        lo += min(pu, pv)
        hi += max(pu, pv)
    return lo / hi if hi else 0.0


def _min_sum_rows(profile: np.ndarray, rows: slice) -> np.ndarray:
    block = profile[rows]
    acc = np.zeros((block.shape[0], profile.shape[0]), dtype=np.int64)
    for j in range(profile.shape[1]):
        col = profile[:, j]
        nz = np.flatnonzero(col)
        if len(nz) == 0:
            continue
        bcol = block[:, j]
        bnz = np.flatnonzero(bcol)
        if len(bnz) == 0:
            continue
        if len(nz) * 2 < len(col):
            acc[np.ix_(bnz, nz)] += np.minimum.outer(bcol[bnz], col[nz])
        else:
            acc[bnz] += np.minimum(bcol[bnz, None], col[None, :])
    return acc


def tie_weights(profile: np.ndarray, threads: int = 1) -> np.ndarray:
    """Pairwise min/max ratio of the rows of a (members x clusters) count matrix."""
    n = profile.shape[0]
    blocks = [slice(s, min(s + _BLOCK, n)) for s in range(0, n, _BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda b: _min_sum_rows(profile, b), blocks))
    else:
        parts = [_min_sum_rows(profile, b) for b in blocks]
    lo = np.concatenate(parts) if parts else np.zeros((0, 0), dtype=np.int64)
    deg = profile.sum(axis=1)
    hi = deg[:, None] + deg[None, :] - lo
    w = np.zeros((n, n))
    np.divide(lo, hi, out=w, where=lo > 0)
    np.fill_diagonal(w, 0.0)
    return w


def build_tie_graph(cid: int, ag: AssociationGraph) -> TieGraph:
    c = ag.clusters[cid]
    neighbors = ag.neighbor_clusters(cid)
    if c.size < 2 or not neighbors:
        return TieGraph(c.members.copy(), np.zeros((c.size, c.size)))
    return TieGraph(c.members.copy(), tie_weights(phi_matrix(ag, cid, neighbors), ag.threads))


def _labels(tg: TieGraph, partition) -> np.ndarray:
    items = list(partition)
    if all(isinstance(x, (int, np.integer)) for x in items):
        labels = np.asarray(items, dtype=np.int64)
        if labels.shape != (tg.size,):
            raise ValueError("partition labels must cover every member")
        return labels
    pos = {int(u): i for i, u in enumerate(tg.members)}
    labels = np.full(tg.size, -1, dtype=np.int64)
    for k, group in enumerate(items):
        for u in group:
            if labels[pos[int(u)]] != -1:
                raise ValueError(f"node {u} appears in two communities")
            labels[pos[int(u)]] = k
    if np.any(labels < 0):
        raise ValueError("partition does not cover every member")
    return labels


def _modularity_dense(w: np.ndarray, labels: np.ndarray) -> float:
    two_m = w.sum()
    if two_m == 0:
        return 0.0
    _, inv = np.unique(labels, return_inverse=True)
    k = len(_)
    onehot = np.zeros((len(labels), k))
    onehot[np.arange(len(labels)), inv] = 1.0
    inner = np.einsum("ic,ij,jc->c", onehot, w, onehot)
    tot = onehot.T @ w.sum(axis=1)
    return float(np.sum(inner / two_m - (tot / two_m) ** 2))


def modularity(tg: TieGraph, partition) -> float:
    """Weighted modularity of a partition given as community sets or a label per member."""
    return _modularity_dense(tg.weights, _labels(tg, partition))


def _one_level(w: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    n = w.shape[0]
    k = w.sum(axis=1)
    two_m = k.sum()
    comm = np.arange(n)
    tot = k.copy()
    diag = np.diagonal(w).copy()
    moved_any = False
    while True:
        moved = False
        for i in rng.permutation(n):
            ci = comm[i]
            links = np.bincount(comm, weights=w[i], minlength=n)
            links[ci] -= diag[i]
            tot[ci] -= k[i]
            gains = links - tot * k[i] / two_m
            gains[links <= 0] = -np.inf
            stay = links[ci] - tot[ci] * k[i] / two_m
            best = int(np.argmax(gains))
            if gains[best] > stay + 1e-12 * two_m and best != ci:
                comm[i] = best
                moved = True
            tot[comm[i]] += k[i]
        if not moved:
            break
        moved_any = True
    return comm, moved_any


def louvain_partition(tg: TieGraph, seed: int | Sequence[int] = 0) -> np.ndarray:
    """Community label per member (0..k-1, numbered by first appearance) maximising modularity.

    Local moves in a seeded random order until no move improves modularity,
    then communities are collapsed into super-nodes and the process repeats.
    """
    rng = np.random.default_rng(seed)
    w = tg.weights
    labels = np.arange(tg.size)
    if tg.size == 0 or w.sum() == 0:
        return labels
    while True:
        comm, moved = _one_level(w, rng)
        if not moved:
            break
        _, comm = np.unique(comm, return_inverse=True)
        k = comm.max() + 1
        onehot = np.zeros((len(comm), k))
        onehot[np.arange(len(comm)), comm] = 1.0
        w = onehot.T @ w @ onehot
        labels = comm[labels]
        if k == 1:
            break
    # renumber by first appearance in member order
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return remap[np.searchsorted(np.unique(labels), labels)]


def _nonsignificant_count(ag: AssociationGraph, cid: int) -> int:
    """Incident associations that are neither pruned nor yet significant, towards clusters above the size floor."""
    log_alpha = math.log(ag.params.alpha)
    return sum(
        1 for a in ag.incident(cid)
        if not a.pruned and a.log_pvalue >= log_alpha and ag.is_large(a.other(cid))
    )


def _has_ties(ag: AssociationGraph, cid: int) -> bool:
    """True when two members send edges into a common non-pruned neighbour cluster."""
    neighbors = ag.neighbor_clusters(cid)
    if not neighbors:
        return False
    profile = phi_matrix(ag, cid, neighbors)
    return bool(np.any(np.count_nonzero(profile, axis=0) >= 2))


def find_cluster_for_strength_split(ag: AssociationGraph) -> int | None:
    """Large cluster with the most non-significant incident associations (ties: larger, then older)."""
    ranked = []
    for cid, c in ag.clusters.items():
        if cid in ag.strength_terminal or c.size < 2 or not ag.is_large(cid):
            continue
        count = _nonsignificant_count(ag, cid)
        if count:
            ranked.append((-count, -c.size, cid))
    for _, _, cid in sorted(ranked):
        if _has_ties(ag, cid):
            return cid
    return None


def strength_split(ag: AssociationGraph, cid: int) -> bool:
    """Split ``cid`` along its Louvain communities; returns False (and marks it terminal) if it stays whole."""
    tg = build_tie_graph(cid, ag)
    labels = louvain_partition(tg, seed=(ag.seed, cid))
    tied = tg.weights.any(axis=1)
    parts = [tg.members[(labels == k) & tied] for k in np.unique(labels[tied])]
    residual = tg.members[~tied]
    if len(residual):
        parts.append(residual)
    entry = {
        "iteration": ag.iterations + 1,
        "phase": "strength",
        "cluster": cid,
        "modularity": _modularity_dense(tg.weights, labels),
        "sizes": [len(p) for p in parts],
    }
    if len(parts) < 2:
        ag.strength_terminal.add(cid)
        entry["children"] = []
        ag.log.append(entry)
        return False
    entry["children"] = split_cluster(ag, cid, parts)
    ag.log.append(entry)
    return True
