"""Link prediction with association-aware scores and ROC evaluation.

Unconnected pairs are scored by ``tau * J(u, v) + (1 - tau) * S(u, v)`` where
J is the Jaccard coefficient of the neighbourhoods and S comes either from
the association p-value between the pair's clusters or from the normalised
frequency of the pair's exact attribute association.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .association import AssociationGraph
from .frequent import ExactAssociation
from .graph import AttributedGraph
from .significance import binom_tail

MODES = ("significant", "frequent", "jaccard")


@dataclass(frozen=True)
class Sample:
    u: int
    v: int
    label: bool


def jaccard(g: AttributedGraph, u: int, v: int) -> float:
    a, b = g.neighbor_array(u), g.neighbor_array(v)
    union = len(np.union1d(a, b))
    if union == 0:
        return 0.0
    return len(np.intersect1d(a, b, assume_unique=True)) / union


def significance_score(ag: AssociationGraph, u: int, v: int) -> float:
    """1 - p-value of the association joining the clusters of u and v; 0 without one.

    For u and v in the same cluster the intra-cluster edge count is tested
    against the |c|(|c|-1)/2 possible pairs.
    """
    n = ag.graph.node_count
    if not (0 <= u < n and 0 <= v < n):
        raise KeyError(f"node not found: {u if not 0 <= u < n else v}")
    cu, cv = int(ag.assignment[u]), int(ag.assignment[v])
    if cu == cv:
        c = ag.clusters[cu]
        pairs = c.size * (c.size - 1) // 2
        if c.intra_edges == 0 or pairs == 0:
            return 0.0
        return 1.0 - binom_tail(c.intra_edges, pairs, ag.delta)
    assoc = ag.association(cu, cv)
    if assoc is None or assoc.pruned:
        return 0.0
    return -math.expm1(assoc.log_pvalue)


def frequency_score(freqs: dict[ExactAssociation, int], g: AttributedGraph, u: int, v: int,
                    max_freq: int | None = None) -> float:
    """Frequency of the pair's exact association over the largest frequency."""
    if not freqs:
        return 0.0
    if max_freq is None:
        max_freq = max(freqs.values())
    key = ExactAssociation.of(np.flatnonzero(g.attrs[u]).tolist(), np.flatnonzero(g.attrs[v]).tolist())
    return freqs.get(key, 0) / max_freq


def pred(j: float, s: float, tau: float) -> float:
    return tau * j + (1.0 - tau) * s


def negative_sampling(candidates: Sequence[tuple[int, int]] | np.ndarray, positives_count: int,
                      seed: int = 0, ratio: int = 5) -> list[Sample]:
    """``ratio`` negatives per positive, drawn uniformly without replacement."""
    want = ratio * positives_count
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    if want > len(cand):
        raise ValueError(f"need {want} negative candidates, only {len(cand)} available")
    if want == 0:
        return []
    idx = np.sort(np.random.default_rng(seed).choice(len(cand), size=want, replace=False))
    return [Sample(int(u), int(v), False) for u, v in cand[idx]]


def _pair_codes(edges: np.ndarray, n: int) -> np.ndarray:
    e = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
    return np.unique(e[:, 0] * n + e[:, 1])


def snapshot_samples(base: AttributedGraph, future_edges: np.ndarray, seed: int = 0,
                     ratio: int = 5) -> list[Sample]:
    """Positives: future edges absent from ``base``.  Negatives: pairs linked in neither snapshot."""
    n = base.node_count
    base_codes = _pair_codes(base.edges, n)
    future_codes = _pair_codes(future_edges, n)
    pos_codes = np.setdiff1d(future_codes, base_codes, assume_unique=True)
    positives = [Sample(int(c // n), int(c % n), True) for c in pos_codes]
    iu, iv = np.triu_indices(n, 1)
    all_codes = iu.astype(np.int64) * n + iv
    linked = np.union1d(base_codes, future_codes)
    free = all_codes[~np.isin(all_codes, linked, assume_unique=True)]
    candidates = np.stack([free // n, free % n], axis=1)
    return positives + negative_sampling(candidates, len(positives), seed, ratio)


class RocResult(NamedTuple):
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc(scores: Sequence[float], labels: Sequence[bool]) -> RocResult:
    """ROC curve swept over distinct score thresholds (ties form one step) and its trapezoid AUC."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    pos, neg = int(labels.sum()), int((~labels).sum())
    if pos == 0 or neg == 0:
        raise ValueError("ROC needs at least one positive and one negative sample")
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    last = np.r_[np.flatnonzero(np.diff(s)), len(s) - 1]
    tp = np.cumsum(y)[last]
    fp = np.cumsum(~y)[last]
    tpr = np.r_[0.0, tp / pos]
    fpr = np.r_[0.0, fp / neg]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocResult(fpr, tpr, auc)


def score_samples(samples: Sequence[Sample], g: AttributedGraph, mode: str, tau: float = 0.5,
                  ag: AssociationGraph | None = None,
                  freqs: dict[ExactAssociation, int] | None = None) -> np.ndarray:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    out = np.empty(len(samples))
    max_freq = max(freqs.values()) if freqs else None
    for i, smp in enumerate(samples):
        j = jaccard(g, smp.u, smp.v)
        if mode == "jaccard":
            out[i] = j
            continue
        if mode == "significant":
            assert ag is not None
            s = significance_score(ag, smp.u, smp.v)
        else:
            assert freqs is not None
            s = frequency_score(freqs, g, smp.u, smp.v, max_freq)
        out[i] = pred(j, s, tau)
    return out
