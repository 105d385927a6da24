"""Running sums for betweenness estimates, Monte-Carlo Rademacher trials and
wimpy variances, plus the variance-based partition of the nodes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import IntegrityError, ParameterError


class EstimatorState:
    """Accumulators over ``m`` ingested bags.

    ``b_sum[v]``   sum of f_v(tau)
    ``w_sum[v]``   sum of f_v(tau)**2
    ``r_sum[v,x]`` sum of sigma_x * f_v(tau) for Monte-Carlo trial x
    ``hits[v]``    number of bags in which v is internal to some path
    ``x_sum``/``x_sq`` first two moments of sum_v f_v(tau)
    """

    def __init__(self, n, c):
        self.n = n
        self.c = c
        self.m = 0
        self.b_sum = np.zeros(n)
        self.w_sum = np.zeros(n)
        self.r_sum = np.zeros((n, c))
        self.hits = np.zeros(n, dtype=np.int64)
        self.moments = np.zeros(2)

    def ingest(self, bag, signs):
        signs = np.asarray(signs, dtype=np.float64)
        if signs.shape != (self.c,) or not np.all(np.abs(signs) == 1.0):
            raise ParameterError(f"expected {self.c} signs in {{-1, +1}}")
        self.m += 1
        if bag.bag_size == 0 or bag.paths.shape[1] == 0:
            return self
        flat = bag.paths.ravel()
        if np.any(flat == bag.s) or np.any(flat == bag.t):
            raise IntegrityError("bag endpoint appears as an internal node")
        nodes, counts = np.unique(flat, return_counts=True)
        f = counts / bag.bag_size
        self.b_sum[nodes] += f
        self.w_sum[nodes] += f * f
        self.r_sum[nodes] += f[:, None] * signs[None, :]
        self.hits[nodes] += 1
        x = 0.0
        for v in f:
            x += v
        self.moments[0] += x
        self.moments[1] += x * x
        return self

    def merge_shards(self, b_sum, w_sum, r_sum, hits, moments, count):
        """Fold per-shard accumulators (leading axis = shard) in order."""
        for k in range(b_sum.shape[0]):
            self.b_sum += b_sum[k]
            self.w_sum += w_sum[k]
            self.r_sum += r_sum[k]
            self.hits += hits[k]
            self.moments += moments[k]
        self.m += count

    @property
    def x_sum(self):
        return float(self.moments[0])

    @property
    def x_sq(self):
        return float(self.moments[1])

    @property
    def estimates(self):
        return self.b_sum / max(self.m, 1)

    @property
    def wimpy(self):
        return self.w_sum / max(self.m, 1)

    @property
    def rho_tilde(self):
        return self.x_sum / max(self.m, 1)

    @property
    def lam(self):
        """Unbiased sample variance of sum_v f_v(tau) (streaming form)."""
        return streaming_lambda(self.m, self.x_sum, self.x_sq)

    def snapshot(self):
        return (self.m, self.b_sum.copy(), self.w_sum.copy(),
                self.r_sum.copy(), self.hits.copy(), self.moments.copy())


def streaming_lambda(m, x_sum, x_sq):
    if m < 2:
        raise ParameterError("variance estimate needs m >= 2")
    return max(0.0, (m * x_sq - x_sum * x_sum) / (m * (m - 1)))


def pairwise_lambda(xs):
    """O(m^2) definition; reference for the streaming form."""
    xs = np.asarray(xs, dtype=np.float64)
    m = len(xs)
    if m < 2:
        raise ParameterError("variance estimate needs m >= 2")
    total = 0.0
    for i in range(m - 1):
        total += float(np.sum((xs[i] - xs[i + 1:]) ** 2))
    return total / (m * (m - 1))


class Sampler:
    """Fills an :class:`EstimatorState` with samples ``m..m+count`` of a
    fixed seeded sequence, split over ``shards`` workers."""

    def __init__(self, g, seed, alpha, bag_cap, c, shards=1):
        self.g = g
        self.seed = int(seed)
        self.alpha = float(alpha)
        self.bag_cap = int(bag_cap)
        self.c = int(c)
        self.shards = max(1, int(shards))

    def fill(self, state, start, count):
        n, c, k = self.g.n, self.c, self.shards
        if k == 1:
            # in place: identical arithmetic to one-by-one ingest()
            K._run_range(*self.g.csr, n, self.seed, start, start + count,
                         self.alpha, self.bag_cap, c, state.b_sum,
                         state.w_sum, state.r_sum, state.hits, state.moments)
            state.m += count
            return state
        b_sum = np.zeros((k, n))
        w_sum = np.zeros((k, n))
        r_sum = np.zeros((k, n, c))
        hits = np.zeros((k, n), dtype=np.int64)
        moments = np.zeros((k, 2))
        K.run_sharded(*self.g.csr, n, self.seed, start, start + count,
                      self.alpha, self.bag_cap, c, b_sum, w_sum, r_sum,
                      hits, moments)
        state.merge_shards(b_sum, w_sum, r_sum, hits, moments, count)
        return state


@dataclass
class Partition:
    class_of: np.ndarray  # raw class index per node
    classes: np.ndarray   # sorted nonempty class indices
    a: float

    @property
    def t(self):
        return len(self.classes)

    def members(self):
        return [np.flatnonzero(self.class_of == j) for j in self.classes]


def build_partition(phase1, a=2.0):
    """Class ``ceil(log_a(min(1 / w_v, |S'|)))`` per node from the phase-1
    wimpy variances; ``w_v = 0`` maps to ``ceil(log_a |S'|)``."""
    if not a > 1:
        raise ParameterError(f"peeling base must exceed 1, got {a}")
    m = phase1.m
    if m < 1:
        raise ParameterError("phase-1 sample is empty")
    w = phase1.w_sum / m
    arg = np.full(len(w), float(m))
    pos = w > 0
    arg[pos] = np.minimum(1.0 / w[pos], m)
    j = np.ceil(np.log(arg) / math.log(a) - 1e-12).astype(np.int64)
    j = np.maximum(j, 0)
    return Partition(j, np.unique(j), float(a))


def mcera(state, partition):
    """Per-class c-trial Monte-Carlo Rademacher average (unclamped)."""
    out = np.empty(partition.t)
    for i, idx in enumerate(partition.members()):
        out[i] = np.mean(state.r_sum[idx].max(axis=0)) / state.m
    return out


def wimpy_per_class(state, partition):
    w = state.w_sum / state.m
    return np.array([w[idx].max() for idx in partition.members()])


# sample log: JSON lines {"s", "t", "paths", "signs"}

def write_sample_log(fh, records):
    for bag, signs in records:
        fh.write(json.dumps({"s": bag.s, "t": bag.t,
                             "paths": bag.paths.tolist(),
                             "signs": [int(x) for x in signs]}) + "\n")


def read_sample_log(fh):
    from .sampler import PathBag

    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        paths = np.array(rec["paths"], dtype=np.int64)
        if paths.ndim != 2:
            paths = paths.reshape(len(rec["paths"]), -1)
        yield PathBag(rec["s"], rec["t"], paths), np.array(rec["signs"],
                                                             dtype=float)
