"""Similarity-based split: two-way split of a cluster on one attribute."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .association import AssociationGraph, Cluster, Mark, signature, split_cluster
from .significance import log_tail_product, psi_from_log

logger = logging.getLogger(__name__)


def select_split_attribute(c: Cluster, marginals: Sequence[float], alpha: float = 0.01,
                           sig: Sequence[Mark] | None = None) -> int | None:
    """Non-uniform, non-wildcard attribute whose in-cluster frequency is closest to its marginal."""
    if sig is None:
        sig = signature(c, marginals, alpha)
    best, best_dev = None, None
    for i, (k, p) in enumerate(zip(c.ones.tolist(), marginals)):
        if k == 0 or k == c.size or sig[i] is Mark.WILDCARD:
            continue
        dev = abs(k / c.size - p)
        # deviations within rounding of each other count as a tie
        if best_dev is None or dev < best_dev - 1e-12:
            best, best_dev = i, dev
    return best


def candidate_split(attrs: np.ndarray, c: Cluster, i: int) -> tuple[np.ndarray, np.ndarray]:
    """(members with attribute i = 1, members with attribute i = 0)."""
    values = attrs[c.members, i]
    ones, zeros = c.members[values == 1], c.members[values == 0]
    if len(ones) == 0 or len(zeros) == 0:
        raise ValueError(f"attribute {i} is uniform in cluster {c.id}")
    return ones, zeros


@dataclass(frozen=True)
class SplitCandidate:
    cluster: int
    attribute: int
    # max over the two parts of log(1 - Psi); smaller is better
    worst_log_tail: float
    sizes: tuple[int, int]

    @property
    def min_psi(self) -> float:
        return psi_from_log(self.worst_log_tail)


def _score(ag: AssociationGraph, cid: int) -> SplitCandidate | None:
    c = ag.clusters[cid]
    if not ag.is_large(cid):
        return None
    i = select_split_attribute(c, ag.marginals, ag.params.alpha, ag.signature(cid))
    if i is None:
        return None
    ones, zeros = candidate_split(ag.graph.attrs, c, i)
    if len(ones) < ag.min_size and len(zeros) < ag.min_size:
        return None
    attrs = ag.graph.attrs
    worst = max(
        log_tail_product(attrs[part].sum(axis=0, dtype=np.int64), len(part), ag.marginals)
        for part in (ones, zeros)
    )
    return SplitCandidate(cid, i, worst, (len(ones), len(zeros)))


def find_cluster_for_similarity_split(ag: AssociationGraph) -> tuple[int, int] | None:
    """(cluster, attribute) whose split maximises the smaller subcluster significance."""
    cache = ag.similarity_cache
    todo = [cid for cid in sorted(ag.clusters) if cid not in cache]
    if ag.threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(ag.threads) as pool:
            scored = list(pool.map(lambda cid: _score(ag, cid), todo))
    else:
        scored = [_score(ag, cid) for cid in todo]
    cache.update(zip(todo, scored))
    best: SplitCandidate | None = None
    for cid in sorted(ag.clusters):
        cand = cache[cid]
        if cand is not None and (best is None or cand.worst_log_tail < best.worst_log_tail):
            best = cand
    if best is None:
        return None
    return best.cluster, best.attribute


def similarity_split(ag: AssociationGraph, cid: int, attribute: int) -> list[int]:
    c = ag.clusters[cid]
    ones, zeros = candidate_split(ag.graph.attrs, c, attribute)
    new_ids = split_cluster(ag, cid, [ones, zeros])
    cand = ag.similarity_cache.get(cid)
    ag.log.append({
        "iteration": ag.iterations + 1,
        "phase": "similarity",
        "cluster": cid,
        "attribute": ag.graph.attribute_names[attribute],
        "children": new_ids,
        "sizes": [len(ones), len(zeros)],
        "min_psi": cand.min_psi if cand is not None else None,
    })
    return new_ids
