"""Simplified multiplicative attribute graph (MAG) generator.

Every node draws attribute i from Bernoulli(mu_i); an unordered pair (u, v)
is linked with probability ``min(1, scale * prod_i theta_i[a_u^i][a_v^i])``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .graph import AttributedGraph

logger = logging.getLogger(__name__)

# rows of the pair-probability matrix sampled per RNG stream
ROW_BLOCK = 512

DEFAULT_THETA = ((0.9, 0.5), (0.5, 0.7))


@dataclass
class MagConfig:
    n: int
    l: int
    mu: Sequence[float]
    theta: Sequence[Sequence[Sequence[float]]]
    scale: float = 1.0
    seed: int = 0
    attribute_names: Sequence[str] | None = field(default=None)

    def __post_init__(self) -> None:
        self.mu = [float(x) for x in self.mu]
        self.theta = [[[float(x) for x in row] for row in t] for t in self.theta]
        if self.n < 0 or self.l < 1:
            raise ValueError("need n >= 0 and l >= 1")
        if len(self.mu) != self.l or len(self.theta) != self.l:
            raise ValueError("mu and theta need one entry per attribute")
        if any(not 0.0 < m < 1.0 for m in self.mu):
            raise ValueError("mu entries must lie in (0, 1)")
        for t in self.theta:
            if np.shape(t) != (2, 2) or np.any(np.asarray(t) < 0) or np.any(np.asarray(t) > 1):
                raise ValueError("each affinity matrix must be 2x2 with entries in [0, 1]")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def uniform(cls, n: int, l: int, mu: float, theta=DEFAULT_THETA, scale: float = 1.0, seed: int = 0) -> "MagConfig":
        return cls(n, l, [mu] * l, [theta] * l, scale, seed)

    def names(self) -> list[str]:
        return list(self.attribute_names) if self.attribute_names else [f"attr{i}" for i in range(self.l)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["attribute_names"] = self.names()
        return d


def expected_affinity(cfg: MagConfig) -> float:
    """E[prod_i theta_i[a_u^i][a_v^i]] for two independent nodes (factorised over attributes)."""
    total = 1.0
    for m, t in zip(cfg.mu, cfg.theta):
        w = np.array([1.0 - m, m])
        total *= float(w @ np.asarray(t) @ w)
    return total


def expected_affinity_enumerated(cfg: MagConfig) -> float:
    """Same expectation summed over all 2^l x 2^l attribute-pattern pairs."""
    total = 0.0
    patterns = list(itertools.product((0, 1), repeat=cfg.l))
    for pu in patterns:
        wu = np.prod([m if a else 1.0 - m for m, a in zip(cfg.mu, pu)])
        for pv in patterns:
            wv = np.prod([m if a else 1.0 - m for m, a in zip(cfg.mu, pv)])
            aff = np.prod([t[a][b] for t, a, b in zip(cfg.theta, pu, pv)])
            total += wu * wv * aff
    return float(total)


def max_affinity(cfg: MagConfig) -> float:
    return float(np.prod([np.max(t) for t in cfg.theta]))


def calibrate_scale(cfg: MagConfig, target_density: float) -> float:
    """Scale that makes the analytic expected density equal ``target_density``.

    Raises ValueError when the target needs pair probabilities above 1.
    """
    if not 0.0 < target_density < 1.0:
        raise ValueError("target density must lie in (0, 1)")
    mean = expected_affinity(cfg)
    if mean <= 0:
        raise ValueError("affinity matrices give zero expected density")
    scale = target_density / mean
    if scale * max_affinity(cfg) > 1.0 + 1e-12:
        reachable = mean / max_affinity(cfg)
        raise ValueError(
            f"target density {target_density} needs clamped probabilities; max achievable is {reachable:.6g}"
        )
    return scale


def _pair_probabilities(cfg: MagConfig, patterns: np.ndarray) -> np.ndarray:
    """(P, P) link probabilities between attribute patterns, clamped at 1."""
    prob = np.full((len(patterns), len(patterns)), cfg.scale)
    for i, t in enumerate(cfg.theta):
        t = np.asarray(t)
        prob *= t[patterns[:, i][:, None], patterns[:, i][None, :]]
    return prob


def generate(cfg: MagConfig) -> AttributedGraph:
    root = np.random.SeedSequence(cfg.seed)
    attr_seq, edge_seq = root.spawn(2)
    rng = np.random.default_rng(attr_seq)
    attrs = (rng.random((cfg.n, cfg.l)) < np.asarray(cfg.mu)).astype(np.uint8)

    patterns, pid = np.unique(attrs, axis=0, return_inverse=True) if cfg.n else (np.zeros((0, cfg.l), np.uint8), np.zeros(0, np.int64))
    pid = pid.reshape(-1)
    prob = _pair_probabilities(cfg, patterns.astype(np.int64))
    clamped = int(np.count_nonzero(prob > 1.0))
    if clamped:
        logger.warning("%d pattern pair probabilities clamped to 1", clamped)
    prob = np.minimum(prob, 1.0)

    chunks = []
    blocks = range(0, cfg.n, ROW_BLOCK)
    for b, start in zip(edge_seq.spawn(len(blocks)), blocks):
        stop = min(start + ROW_BLOCK, cfg.n)
        brng = np.random.default_rng(b)
        p = prob[pid[start:stop][:, None], pid[None, :]]
        hit = brng.random(p.shape) < p
        rows, cols = np.nonzero(hit)
        rows += start
        keep = cols > rows
        chunks.append(np.stack([rows[keep], cols[keep]], axis=1))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), np.int64)
    return AttributedGraph(
        edges=edges.astype(np.int64),
        attrs=attrs,
        attribute_names=tuple(cfg.names()),
        node_labels=tuple(str(i) for i in range(cfg.n)),
    )
