import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sigassoc.association import init, split_cluster
from sigassoc.frequent import ExactAssociation, enumerate_associations
from sigassoc.linkpred import (
    Sample,
    frequency_score,
    jaccard,
    negative_sampling,
    pred,
    roc,
    score_samples,
    significance_score,
    snapshot_samples,
)
from sigassoc.significance import SignificanceParams

from conftest import make_graph


def pair_counting_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def test_jaccard_cases():
    g = make_graph([(0, 2), (0, 3), (1, 3), (1, 4), (5, 2), (5, 3)], np.zeros((6, 1)))
    assert jaccard(g, 0, 1) == pytest.approx(1 / 3)
    assert jaccard(g, 0, 5) == 1.0
    assert jaccard(g, 2, 4) == 0.0
    iso = make_graph([(0, 1)], np.zeros((4, 1)))
    assert jaccard(iso, 2, 3) == 0.0


def _two_cluster_state():
    edges = [(0, 3), (1, 3), (1, 4), (2, 5), (0, 1), (6, 7)]
    g = make_graph(edges, np.zeros((8, 1)))
    ag = init(g, SignificanceParams(size_support=0.01))
    a, b, c = split_cluster(ag, 0, [[0, 1, 2], [3, 4, 5], [6, 7]])
    return ag, a, b, c


def test_significance_score_from_pvalue():
    ag, a, b, c = _two_cluster_state()
    assoc = ag.association(a, b)
    assert significance_score(ag, 0, 4) == pytest.approx(1 - assoc.pvalue)
    # no association between {0,1,2} and {6,7}
    assert significance_score(ag, 0, 6) == 0.0


def test_significance_score_pruned_is_zero():
    ag, a, b, c = _two_cluster_state()
    assoc = ag.association(a, b)
    ag.associations[assoc.key] = type(assoc)(assoc.a, assoc.b, assoc.strength, math.log(0.001), True)
    assert significance_score(ag, 0, 4) == 0.0
    ag.associations[assoc.key] = type(assoc)(assoc.a, assoc.b, assoc.strength, math.log(0.001), False)
    assert significance_score(ag, 0, 4) == pytest.approx(0.999)


def test_frequency_score():
    g = make_graph([(0, 1), (2, 3), (0, 2)], [[1, 0], [0, 1], [1, 0], [0, 1]])
    freqs = enumerate_associations(g)
    assert frequency_score(freqs, g, 0, 3) == 1.0
    assert frequency_score(freqs, g, 1, 3) == 0.0
    fake = {ExactAssociation((0,), (1,)): 5, ExactAssociation((), ()): 20}
    assert frequency_score(fake, g, 0, 1) == 0.25


def test_pred():
    assert pred(0.5, 0.3, 0.4) == pytest.approx(0.38)
    assert pred(0.7, 0.2, 1.0) == 0.7
    assert pred(0.7, 0.2, 0.0) == 0.2


def test_negative_sampling():
    cand = [(i, i + 1) for i in range(100)]
    neg = negative_sampling(cand, 10, seed=3)
    assert len(neg) == 50 and not any(s.label for s in neg)
    assert len({(s.u, s.v) for s in neg}) == 50
    assert neg == negative_sampling(cand, 10, seed=3)
    assert negative_sampling(cand, 0, seed=3) == []
    with pytest.raises(ValueError):
        negative_sampling(cand[:4], 1)


def test_roc_hand_cases():
    assert roc([0.9, 0.1], [True, False]).auc == 1.0
    assert roc([0.5] * 6, [True, False] * 3).auc == pytest.approx(0.5)
    # one of the two positives outranks the single negative
    assert roc([0.9, 0.8, 0.1], [True, False, True]).auc == pytest.approx(0.5)
    assert roc([0.9, 0.1, 0.8], [True, False, True]).auc == pytest.approx(1.0)
    assert roc([0.9, 0.5, 0.5], [True, False, True]).auc == pytest.approx(0.75)
    with pytest.raises(ValueError):
        roc([0.1, 0.2], [True, True])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=40))
def test_roc_equals_pair_counting(pairs):
    scores = [s / 6 for s, _ in pairs]
    labels = [y for _, y in pairs]
    if all(labels) or not any(labels):
        return
    r = roc(scores, labels)
    assert r.auc == pytest.approx(pair_counting_auc(scores, labels), abs=1e-9)
    assert r.fpr[0] == 0 and r.tpr[0] == 0 and r.fpr[-1] == 1 and r.tpr[-1] == 1
    assert np.all(np.diff(r.fpr) >= 0) and np.all(np.diff(r.tpr) >= 0)


def test_snapshot_samples():
    base = make_graph([(0, 1), (1, 2)], np.zeros((8, 1)))
    future = np.array([[0, 1], [1, 2], [0, 2], [3, 4]])
    samples = snapshot_samples(base, future, seed=1, ratio=5)
    pos = [(s.u, s.v) for s in samples if s.label]
    neg = [(s.u, s.v) for s in samples if not s.label]
    assert pos == [(0, 2), (3, 4)]
    assert len(neg) == 10
    linked = {(0, 1), (1, 2), (0, 2), (3, 4)}
    assert not linked & set(neg)


def test_tau_one_is_jaccard():
    ag, a, b, c = _two_cluster_state()
    samples = [Sample(u, v, bool((u + v) % 2)) for u in range(8) for v in range(u + 1, 8)]
    j = score_samples(samples, ag.graph, "jaccard")
    s = score_samples(samples, ag.graph, "significant", tau=1.0, ag=ag)
    assert np.array_equal(j, s)


def test_score_samples_validates():
    g = make_graph([(0, 1)], np.zeros((3, 1)))
    with pytest.raises(ValueError):
        score_samples([], g, "bogus")
    with pytest.raises(ValueError):
        score_samples([], g, "jaccard", tau=1.5)
