"""Frequent attribute associations and the significant-minus-frequent report.

An exact association is the pair of 1-attribute sets of an edge's two
endpoints; its frequency is the number of edges carrying it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .association import Mark, Signature
from .graph import AttributedGraph


@dataclass(frozen=True, order=True)
class ExactAssociation:
    """Pair of attribute-index sets, stored with ``a <= b`` so both edge orientations share a key."""

    a: tuple[int, ...]
    b: tuple[int, ...]

    @classmethod
    def of(cls, s1: Iterable[int], s2: Iterable[int]) -> "ExactAssociation":
        x, y = tuple(sorted(s1)), tuple(sorted(s2))
        return cls(x, y) if x <= y else cls(y, x)

    def names(self, attribute_names: Sequence[str]) -> tuple[list[str], list[str]]:
        return [attribute_names[i] for i in self.a], [attribute_names[i] for i in self.b]


def enumerate_associations(g: AttributedGraph) -> dict[ExactAssociation, int]:
    """Frequency of every exact association; values sum to |E|."""
    if g.edge_count == 0:
        return {}
    patterns, inverse = np.unique(g.attrs, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    pu, pv = inverse[g.edges[:, 0]], inverse[g.edges[:, 1]]
    lo, hi = np.minimum(pu, pv), np.maximum(pu, pv)
    width = len(patterns)
    codes, counts = np.unique(lo * width + hi, return_counts=True)
    sets = [tuple(np.flatnonzero(row).tolist()) for row in patterns]
    out: dict[ExactAssociation, int] = {}
    for code, k in zip(codes.tolist(), counts.tolist()):
        x, y = divmod(code, width)
        out[ExactAssociation.of(sets[x], sets[y])] = k
    return out


def frequent_associations(freqs: dict[ExactAssociation, int], sigma: float, edge_count: int,
                          top_k: int | None = None) -> list[tuple[ExactAssociation, int]]:
    """Associations with frequency >= sigma * |E|, most frequent first."""
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    floor = sigma * edge_count
    out = sorted(((a, f) for a, f in freqs.items() if f >= floor), key=lambda t: (-t[1], t[0]))
    return out if top_k is None else out[:top_k]


def _endpoint_matches(sig: Signature, present: frozenset[int]) -> bool:
    for i, mark in enumerate(sig):
        if mark is Mark.WILDCARD:
            continue
        if (i in present) != (mark is Mark.ONE):
            return False
    # attributes beyond the signature cannot be required by the exact set
    return all(i < len(sig) for i in present)


def wildcard_match(sig_pair: tuple[Signature, Signature], exact: ExactAssociation) -> bool:
    """True if, in one of the two orientations, each signature endpoint admits the exact endpoint."""
    s1, s2 = sig_pair
    a, b = frozenset(exact.a), frozenset(exact.b)
    return (_endpoint_matches(s1, a) and _endpoint_matches(s2, b)) or (
        _endpoint_matches(s1, b) and _endpoint_matches(s2, a)
    )


def match_against(sig_pair: tuple[Signature, Signature],
                  frequent: Sequence[ExactAssociation]) -> ExactAssociation | None:
    for exact in frequent:
        if wildcard_match(sig_pair, exact):
            return exact
    return None


def set_difference(significant: Sequence, frequent: Sequence[ExactAssociation]) -> list:
    """Significant associations (anything with ``sig_a``/``sig_b``) that match no frequent association."""
    return [s for s in significant if match_against((s.sig_a, s.sig_b), frequent) is None]
