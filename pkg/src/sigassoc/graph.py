"""Node-attributed undirected graphs and their TSV file formats.

Edge file: one ``<u>\\t<v>`` pair per line, ``#`` lines ignored.
Attribute file: header ``node\\t<name_1>\\t...\\t<name_l>`` followed by one
``<node_id>\\t<0|1>...`` row per node.  Node identifiers are arbitrary strings;
they are mapped to dense integer ids in attribute-file order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised for malformed or inconsistent graph input."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


def density_of(node_count: int, edge_count: int) -> float:
    """|E| / (1/2 |V| (|V|-1))."""
    if node_count < 2:
        raise ValueError(f"density undefined for {node_count} node(s)")
    return edge_count / (0.5 * node_count * (node_count - 1))


@dataclass(eq=False)
class AttributedGraph:
    """Immutable undirected graph with one binary attribute vector per node.

    ``edges`` is an (m, 2) int array with ``u < v`` in every row, sorted
    lexicographically; ``attrs`` is an (n, l) uint8 array.
    """

    edges: np.ndarray
    attrs: np.ndarray
    attribute_names: tuple[str, ...]
    node_labels: tuple[str, ...]
    duplicate_edges: int = 0
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = self.attrs.shape[0]
        if self.attrs.ndim != 2 or self.attrs.shape[1] != len(self.attribute_names):
            raise GraphFormatError("attribute table does not match attribute names")
        if len(self.node_labels) != n:
            raise GraphFormatError("node label count does not match attribute rows")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise GraphFormatError("edge endpoint outside [0, |V|)")
        if self.edges.size and np.any(self.edges[:, 0] >= self.edges[:, 1]):
            raise GraphFormatError("edges must be stored with u < v and no self-loops")
        # CSR adjacency, neighbours sorted ascending
        both = np.concatenate([self.edges, self.edges[:, ::-1]]) if self.edges.size else np.empty((0, 2), np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.indptr, both[:, 0] + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = both[:, 1].astype(np.int64)
        self.attrs.setflags(write=False)
        self.edges.setflags(write=False)
        self.indices.setflags(write=False)
        self.indptr.setflags(write=False)
        self._density = density_of(n, len(self.edges)) if n >= 2 else None

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        attrs: Sequence[Sequence[int]] | np.ndarray,
        attribute_names: Sequence[str] | None = None,
        node_labels: Sequence[str] | None = None,
    ) -> "AttributedGraph":
        """Build a graph from integer edge pairs, deduplicating and rejecting self-loops."""
        attrs = np.asarray(attrs, dtype=np.uint8)
        if attrs.ndim == 1:
            attrs = attrs.reshape(-1, 1) if attrs.size else attrs.reshape(0, 0)
        if np.any(attrs > 1):
            raise GraphFormatError("attribute values must be 0 or 1")
        n, l = attrs.shape
        if attribute_names is None:
            attribute_names = [f"a{i}" for i in range(l)]
        if node_labels is None:
            node_labels = [str(i) for i in range(n)]
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphFormatError("self-loop in edge list")
        arr = np.sort(arr, axis=1)
        uniq = np.unique(arr, axis=0) if len(arr) else arr
        return cls(
            edges=uniq,
            attrs=attrs.copy(),
            attribute_names=tuple(attribute_names),
            node_labels=tuple(str(x) for x in node_labels),
            duplicate_edges=len(arr) - len(uniq),
        )

    @property
    def node_count(self) -> int:
        return self.attrs.shape[0]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def attribute_count(self) -> int:
        return self.attrs.shape[1]

    @property
    def density(self) -> float:
        if self._density is None:
            raise ValueError(f"density undefined for {self.node_count} node(s)")
        return self._density

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbor_array(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def neighbors(self, u: int) -> set[int]:
        if not 0 <= u < self.node_count:
            raise KeyError(f"unknown node id {u}")
        return set(self.neighbor_array(u).tolist())

    def incident_edges(self, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(source, target) arrays of every adjacency entry leaving ``nodes``."""
        nodes = np.asarray(nodes, dtype=np.int64)
        starts = self.indptr[nodes]
        deg = self.indptr[nodes + 1] - starts
        total = int(deg.sum())
        if total == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        shift = np.repeat(starts - (np.cumsum(deg) - deg), deg)
        return np.repeat(nodes, deg), self.indices[shift + np.arange(total)]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbor_array(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def label_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.node_labels)}


def density(g: AttributedGraph) -> float:
    return g.density


def attribute_marginals(g: AttributedGraph) -> np.ndarray:
    """Fraction of nodes carrying a 1 on each attribute."""
    if g.node_count < 1:
        raise ValueError("marginals undefined for an empty graph")
    return g.attrs.sum(axis=0, dtype=np.int64) / g.node_count


def neighbors(g: AttributedGraph, u: int) -> set[int]:
    return g.neighbors(u)


def _data_lines(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line


def read_attributes(path: str | Path) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    """Parse an attribute file into (attribute names, node labels, 0/1 table)."""
    path = Path(path)
    lines = _data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphFormatError("missing header", path) from None
    cols = header.split("\t")
    if len(cols) < 1 or cols[0] != "node":
        raise GraphFormatError("header must start with 'node'", path, lineno)
    names = tuple(cols[1:])
    l = len(names)
    labels: list[str] = []
    rows: list[list[int]] = []
    seen: set[str] = set()
    for lineno, line in lines:
        parts = line.split("\t")
        if len(parts) != l + 1:
            raise GraphFormatError(
                f"attribute vector length {len(parts) - 1} does not match header length {l}", path, lineno
            )
        label = parts[0]
        if label in seen:
            raise GraphFormatError(f"duplicate node {label!r}", path, lineno)
        values = parts[1:]
        if any(v not in ("0", "1") for v in values):
            raise GraphFormatError("attribute values must be 0 or 1", path, lineno)
        seen.add(label)
        labels.append(label)
        rows.append([int(v) for v in values])
    attrs = np.array(rows, dtype=np.uint8).reshape(len(rows), l)
    return names, tuple(labels), attrs


def read_edges(path: str | Path, index: dict[str, int]) -> np.ndarray:
    """Parse an edge file against a label -> id mapping. Returns raw (possibly duplicated) pairs."""
    path = Path(path)
    pairs: list[tuple[int, int]] = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise GraphFormatError("expected '<u>\\t<v>'", path, lineno)
        u, v = parts
        if u == v:
            raise GraphFormatError(f"self-loop on node {u!r}", path, lineno)
        try:
            pairs.append((index[u], index[v]))
        except KeyError as exc:
            raise GraphFormatError(f"node {exc.args[0]!r} missing from attribute file", path, lineno) from None
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def load_graph(edges_path: str | Path, attrs_path: str | Path) -> AttributedGraph:
    names, labels, attrs = read_attributes(attrs_path)
    pairs = read_edges(edges_path, {label: i for i, label in enumerate(labels)})
    g = AttributedGraph.from_edges(pairs, attrs, names, labels)
    if g.duplicate_edges:
        logger.warning("%s: collapsed %d duplicate edge(s)", edges_path, g.duplicate_edges)
    return g


def write_edges(path: str | Path, node_labels: Sequence[str], edges: np.ndarray, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(header)
        for u, v in edges:
            fh.write(f"{node_labels[u]}\t{node_labels[v]}\n")


def write_attributes(path: str | Path, g: AttributedGraph, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(header)
        fh.write("\t".join(("node",) + g.attribute_names) + "\n")
        for label, row in zip(g.node_labels, g.attrs):
            fh.write(label + "\t" + "\t".join("1" if x else "0" for x in row) + "\n")


def write_graph(g: AttributedGraph, edges_path: str | Path, attrs_path: str | Path, header: str | None = None) -> None:
    write_edges(edges_path, g.node_labels, g.edges, header)
    write_attributes(attrs_path, g, header)
