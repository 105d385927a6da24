"""Sampling of bags of shortest paths.

Every sample owns an independent random stream derived from
``(master seed, sample index)``; the stream is consumed in a fixed order
(Rademacher signs, node pair, paths) so a sample can be regenerated alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ParameterError

DEFAULT_BAG_CAP = 65536


class SampleStream:
    """Random stream for one sample, shared by the numba kernels."""

    def __init__(self, seed, index):
        self.seed = int(seed)
        self.index = int(index)
        self.state = np.zeros(1, dtype=np.uint64)
        K.stream_init(np.uint64(self.seed & (2**64 - 1)), self.index,
                      self.state)

    def random(self):
        return K.next_double(self.state)


@dataclass
class SpDag:
    """Shortest-path DAG between ``s`` and ``t`` found by the bidirectional
    BFS. ``dist`` is ``None`` when ``t`` is unreachable."""

    graph: object
    s: int
    t: int
    dist: int | None
    sigma_st: float
    dist_s: np.ndarray
    dist_t: np.ndarray
    sigma_s: np.ndarray
    sigma_t: np.ndarray
    meeting: np.ndarray

    @property
    def reachable(self):
        return self.dist is not None


@dataclass
class PathBag:
    s: int
    t: int
    paths: np.ndarray  # (bag_size, dist - 1) internal nodes

    @property
    def bag_size(self):
        return len(self.paths)


def sample_pair(g, rng):
    """Uniform ordered pair ``(s, t)`` with ``s != t``."""
    if g.n < 2:
        raise ParameterError("sampling a pair needs at least two nodes")
    s, t = K.draw_pair(rng.state, g.n)
    return int(s), int(t)


def rademacher_column(rng, c):
    out = np.empty(c)
    K.draw_signs(rng.state, c, out)
    return out


def bidirectional_bfs(g, s, t):
    if s == t:
        raise ParameterError("source and target must differ")
    n = g.n
    dist_s = np.full(n, -1, dtype=np.int64)
    dist_t = np.full(n, -1, dtype=np.int64)
    sig_s = np.zeros(n)
    sig_t = np.zeros(n)
    vis_s = np.empty(n, dtype=np.int64)
    vis_t = np.empty(n, dtype=np.int64)
    meet = np.empty(n, dtype=np.int64)
    d, sigma, n_meet, _, _ = K.bidir_bfs(*g.csr, s, t, dist_s, dist_t,
                                         sig_s, sig_t, vis_s, vis_t, meet)
    return SpDag(g, s, t, None if d < 0 else int(d), float(sigma),
                 dist_s, dist_t, sig_s, sig_t, meet[:n_meet].copy())


def sample_bag(dag, alpha, bag_cap=DEFAULT_BAG_CAP, rng=None):
    """Draw ``min(ceil(alpha * sigma_st), bag_cap)`` shortest paths uniformly
    with replacement. Unreachable pairs yield an empty bag."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not dag.reachable:
        return PathBag(dag.s, dag.t, np.empty((0, 0), dtype=np.int64))
    size = K.bag_size(dag.sigma_st, alpha, bag_cap)
    paths = K.sample_bag_paths(*dag.graph.csr, dag.dist, dag.dist_s,
                               dag.dist_t, dag.sigma_s, dag.sigma_t,
                               dag.meeting, len(dag.meeting), size, rng.state)
    return PathBag(dag.s, dag.t, paths)


def alpha_from_lambda(lam):
    if not 0 < lam < 1:
        raise ParameterError(f"lambda must be in (0, 1), got {lam}")
    return math.log(1.0 / lam)


def draw_sample(g, seed, index, alpha, bag_cap, c):
    """Regenerate sample ``index`` exactly as the batched engine draws it.

    Returns ``(bag, signs)``.
    """
    rng = SampleStream(seed, index)
    signs = rademacher_column(rng, c)
    s, t = sample_pair(g, rng)
    dag = bidirectional_bfs(g, s, t)
    return sample_bag(dag, alpha, bag_cap, rng), signs
