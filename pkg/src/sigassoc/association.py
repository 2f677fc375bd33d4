"""The Association Graph: a partition of the input nodes into clusters plus
the weighted associations between them.

The graph starts as a single cluster holding every node and is refined by
:func:`transform`, which alternates a similarity-based split and a
strength-based split until neither phase finds an eligible cluster.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import AttributedGraph, attribute_marginals
from .significance import (
    SignificanceParams,
    binom_tail,
    log_association_pvalue,
    prune_threshold,
)

logger = logging.getLogger(__name__)


class Mark(enum.Enum):
    ONE = "1"
    WILDCARD = "*"
    ABSENT = "0"


Signature = tuple[Mark, ...]


@dataclass(eq=False)
class Cluster:
    id: int
    members: np.ndarray  # sorted node ids
    ones: np.ndarray  # per-attribute count of members holding a 1
    intra_edges: int = 0
    parent: int | None = None

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(eq=False)
class Association:
    a: int  # lower cluster id
    b: int
    strength: int
    log_pvalue: float
    pruned: bool = False

    @property
    def pvalue(self) -> float:
        return math.exp(self.log_pvalue)

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)

    def other(self, cid: int) -> int:
        return self.b if cid == self.a else self.a


@dataclass(frozen=True)
class SignificantAssociation:
    cluster_a: int
    cluster_b: int
    sig_a: Signature
    sig_b: Signature
    size_a: int
    size_b: int
    strength: int
    pvalue: float
    log_pvalue: float


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def signature(c: Cluster, marginals: Sequence[float], alpha: float) -> Signature:
    """Per-attribute mark: unanimous ONE, significantly enriched WILDCARD, otherwise ABSENT."""
    marks = []
    for k, p in zip(c.ones.tolist(), marginals):
        if k == c.size:
            marks.append(Mark.ONE)
        elif k == 0:
            marks.append(Mark.ABSENT)
        elif binom_tail(k, c.size, float(p)) < alpha:
            marks.append(Mark.WILDCARD)
        else:
            marks.append(Mark.ABSENT)
    return tuple(marks)


def signature_names(sig: Signature, names: Sequence[str]) -> list[str]:
    """Attribute names present in a signature; wildcards carry a ``(*)`` suffix."""
    out = []
    for mark, name in zip(sig, names):
        if mark is Mark.ONE:
            out.append(name)
        elif mark is Mark.WILDCARD:
            out.append(f"{name}(*)")
    return out


@dataclass(eq=False)
class AssociationGraph:
    graph: AttributedGraph
    params: SignificanceParams
    seed: int = 0
    threads: int = 1
    track_history: bool = False
    clusters: dict[int, Cluster] = field(default_factory=dict)
    associations: dict[tuple[int, int], Association] = field(default_factory=dict)
    assignment: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    parents: dict[int, int] = field(default_factory=dict)
    strength_terminal: set[int] = field(default_factory=set)
    # every association strength ever created, keyed by cluster pair
    history: dict[tuple[int, int], int] = field(default_factory=dict)
    log: list[dict] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=lambda: {"similarity": 0.0, "strength": 0.0})
    iterations: int = 0

    def __post_init__(self) -> None:
        g = self.graph
        self.delta = g.density
        self.marginals = attribute_marginals(g)
        self.min_size = self.params.size_support * g.node_count
        self._incident: dict[int, set[int]] = {}
        self._next_id = 0
        self._signatures: dict[int, Signature] = {}
        # similarity candidates per cluster id; valid forever since clusters never change
        self.similarity_cache: dict[int, object] = {}

    # ------------------------------------------------------------------ state

    def new_cluster(self, members: np.ndarray, parent: int | None = None) -> Cluster:
        members = np.sort(np.asarray(members, dtype=np.int64))
        ones = self.graph.attrs[members].sum(axis=0, dtype=np.int64)
        c = Cluster(self._next_id, members, ones, parent=parent)
        self._next_id += 1
        self.clusters[c.id] = c
        self._incident[c.id] = set()
        self.assignment[members] = c.id
        if parent is not None:
            self.parents[c.id] = parent
        return c

    def incident(self, cid: int) -> list[Association]:
        return [self.associations[_pair(cid, o)] for o in sorted(self._incident[cid])]

    def neighbor_clusters(self, cid: int, include_pruned: bool = False) -> list[int]:
        out = []
        for o in sorted(self._incident[cid]):
            if include_pruned or not self.associations[_pair(cid, o)].pruned:
                out.append(o)
        return out

    def association(self, a: int, b: int) -> Association | None:
        return self.associations.get(_pair(a, b))

    def signature(self, cid: int) -> Signature:
        sig = self._signatures.get(cid)
        if sig is None:
            sig = signature(self.clusters[cid], self.marginals, self.params.alpha)
            self._signatures[cid] = sig
        return sig

    def is_large(self, cid: int) -> bool:
        return self.clusters[cid].size >= self.min_size

    def _add_association(self, a: int, b: int, strength: int) -> None:
        ca, cb = self.clusters[a], self.clusters[b]
        n = ca.size * cb.size
        logp = log_association_pvalue(ca.size, cb.size, strength, self.delta)
        pruned = False
        if self.is_large(a) and self.is_large(b) and 0.0 < self.delta < 1.0:
            thr = prune_threshold(n, self.delta, self.params.alpha)
            pruned = not thr.vacuous and strength < thr.value
        key = _pair(a, b)
        self.associations[key] = Association(key[0], key[1], strength, logp, pruned)
        self._incident[a].add(b)
        self._incident[b].add(a)
        if self.track_history:
            self.history[key] = strength

    def _drop_cluster(self, cid: int) -> None:
        for o in self._incident.pop(cid):
            del self.associations[_pair(cid, o)]
            self._incident[o].discard(cid)
        del self.clusters[cid]
        self._signatures.pop(cid, None)

    def check_partition(self) -> None:
        """Raise AssertionError unless the clusters are disjoint and cover V."""
        n = self.graph.node_count
        seen = np.zeros(n, dtype=np.int64)
        for cid, c in self.clusters.items():
            assert c.size > 0, f"cluster {cid} is empty"
            seen[c.members] += 1
            assert np.all(self.assignment[c.members] == cid)
        assert np.all(seen == 1), "clusters do not partition V"

    def ancestors(self, cid: int) -> list[int]:
        """cid followed by its parent chain up to the root cluster."""
        out = [cid]
        while out[-1] in self.parents:
            out.append(self.parents[out[-1]])
        return out


def init(g: AttributedGraph, params: SignificanceParams | None = None, seed: int = 0,
         threads: int = 1, track_history: bool = False) -> AssociationGraph:
    """Association Graph with one cluster holding every node and no associations."""
    if g.attribute_count == 0:
        raise ValueError("graph has no attributes: nothing to mine")
    if g.node_count < 2:
        raise ValueError("graph needs at least two nodes")
    ag = AssociationGraph(g, params or SignificanceParams(), seed=seed, threads=threads,
                          track_history=track_history)
    ag.assignment = np.full(g.node_count, -1, dtype=np.int64)
    root = ag.new_cluster(np.arange(g.node_count))
    root.intra_edges = g.edge_count
    return ag


def split_cluster(ag: AssociationGraph, cid: int, parts: Sequence[Iterable[int]]) -> list[int]:
    """Replace cluster ``cid`` by one cluster per part and rewire its associations exactly.

    Strengths to every neighbouring cluster, between the new parts, and inside
    each part are recounted from the original edges; zero-strength pairs carry
    no association.  New associations get fresh p-values and pruning verdicts.
    """
    c = ag.clusters[cid]
    arrays = [np.asarray(sorted(set(int(x) for x in p)), dtype=np.int64) for p in parts]
    if not arrays or any(len(p) == 0 for p in arrays):
        raise ValueError("partition parts must be non-empty")
    joined = np.concatenate(arrays)
    if len(joined) != c.size or not np.array_equal(np.sort(joined), c.members):
        raise ValueError("parts must be disjoint and cover the cluster's members exactly")

    ag._drop_cluster(cid)
    new_ids = [ag.new_cluster(p, parent=cid).id for p in arrays]
    new_set = set(new_ids)

    g = ag.graph
    src, dst = g.incident_edges(c.members)
    width = ag._next_id
    codes, counts = np.unique(ag.assignment[src] * width + ag.assignment[dst], return_counts=True)

    new_strength: dict[tuple[int, int], int] = {}
    for code, k in zip(codes.tolist(), counts.tolist()):
        x, y = divmod(code, width)
        if x == y:
            # both endpoints are members, so each edge was gathered twice
            ag.clusters[x].intra_edges = k // 2
        elif x in new_set and (y not in new_set or x < y):
            # edges between two new parts show up once under each orientation
            new_strength[(x, y)] = k
    for (x, y), k in sorted(new_strength.items()):
        ag._add_association(x, y, k)
    return new_ids


def significant_associations(ag: AssociationGraph) -> list[SignificantAssociation]:
    """Non-pruned associations with p < alpha between clusters of at least lambda |V| nodes."""
    log_alpha = math.log(ag.params.alpha)
    out = []
    for (a, b), assoc in ag.associations.items():
        if assoc.pruned or not assoc.log_pvalue < log_alpha:
            continue
        if not (ag.is_large(a) and ag.is_large(b)):
            continue
        ca, cb = ag.clusters[a], ag.clusters[b]
        out.append(SignificantAssociation(
            a, b, ag.signature(a), ag.signature(b), ca.size, cb.size,
            assoc.strength, assoc.pvalue, assoc.log_pvalue,
        ))
    out.sort(key=lambda s: (s.log_pvalue, -s.strength, s.cluster_a, s.cluster_b))
    return out


IterationHook = Callable[[AssociationGraph], None]


def transform(ag: AssociationGraph, on_iteration: IterationHook | None = None,
              max_iterations: int | None = None) -> AssociationGraph:
    """Alternate similarity and strength splits until no cluster is eligible for either."""
    from . import similarity, strength

    while max_iterations is None or ag.iterations < max_iterations:
        t0 = time.perf_counter()
        choice = similarity.find_cluster_for_similarity_split(ag)
        if choice is not None:
            similarity.similarity_split(ag, *choice)
        t1 = time.perf_counter()
        target = strength.find_cluster_for_strength_split(ag)
        committed = False
        if target is not None:
            committed = strength.strength_split(ag, target)
        t2 = time.perf_counter()
        ag.timings["similarity"] += t1 - t0
        ag.timings["strength"] += t2 - t1
        if choice is None and target is None:
            break
        ag.iterations += 1
        if on_iteration is not None:
            on_iteration(ag)
        logger.debug("iteration %d: similarity=%s strength=%s committed=%s",
                     ag.iterations, choice, target, committed)
    return ag


def mine(g: AttributedGraph, params: SignificanceParams | None = None, seed: int = 0,
         threads: int = 1) -> AssociationGraph:
    """Initialise and fully transform an Association Graph for ``g``."""
    return transform(init(g, params, seed=seed, threads=threads))
