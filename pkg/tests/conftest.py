import numpy as np
import pytest

from sigassoc.association import init, split_cluster
from sigassoc.graph import AttributedGraph
from sigassoc.significance import SignificanceParams


def make_graph(edges, attrs, names=None):
    attrs = np.asarray(attrs, dtype=np.uint8)
    if attrs.ndim == 1:
        attrs = attrs[:, None]
    return AttributedGraph.from_edges(np.asarray(edges, dtype=np.int64).reshape(-1, 2), attrs, names)


def split_pair_state():
    """c1 = {a,b,c,d} = {0..3}; a,b only link to c2 = {4..7}, c,d only to c3 = {8..11}.

    Returns the association graph and the ids of c1, c2, c3.
    """
    edges = [(u, w) for u in (0, 1) for w in range(4, 8)]
    edges += [(u, w) for u in (2, 3) for w in range(8, 12)]
    attrs = np.zeros((12, 2), dtype=np.uint8)
    attrs[4:8, 0] = 1
    attrs[8:12, 1] = 1
    g = make_graph(edges, attrs)
    ag = init(g, SignificanceParams(alpha=0.01, size_support=0.01))
    c1, c2, c3 = split_cluster(ag, 0, [range(0, 4), range(4, 8), range(8, 12)])
    return ag, c1, c2, c3


def planted_two_groups(size=100, cross_p=0.3, within_p=0.01, seed=0):
    """Groups A (pattern 10) and B (pattern 01) with dense A-B edges and sparse edges elsewhere."""
    rng = np.random.default_rng(seed)
    n = 2 * size
    attrs = np.zeros((n, 2), dtype=np.uint8)
    attrs[:size, 0] = 1
    attrs[size:, 1] = 1
    iu, iv = np.triu_indices(n, 1)
    cross = (iu < size) & (iv >= size)
    prob = np.where(cross, cross_p, within_p)
    keep = rng.random(len(iu)) < prob
    return make_graph(np.stack([iu[keep], iv[keep]], axis=1), attrs, ("attr0", "attr1"))


@pytest.fixture
def path3():
    return make_graph([(0, 1), (1, 2)], [[1, 0], [0, 1], [1, 1]])


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
