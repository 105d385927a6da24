"""Progressive sampling for a relative approximation of the k most central
nodes."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds as B
from .engine import PHASE1_OFFSET, RunConfig, class_bounds
from .errors import ParameterError
from .estimator import EstimatorState, Sampler, build_partition

log = logging.getLogger(__name__)


@dataclass
class TopKEntry:
    node: int
    estimate: float
    lower: float
    upper: float


@dataclass
class TopKResult:
    entries: list
    k: int
    eta: float
    delta: float
    threshold: float
    m_final: int
    m_prime: int
    iterations: int
    stop_reason: str
    guaranteed: bool
    wall_time_s: float
    eps_history: list = field(default_factory=list)

    @property
    def nodes(self):
        return [e.node for e in self.entries]

    def to_json(self, labels=None, include_time=True):
        def lab(v):
            return int(labels[v]) if labels is not None else int(v)

        out = {
            "k": self.k, "eta": self.eta, "delta": self.delta,
            "threshold": self.threshold,
            "entries": [{"node": lab(e.node), "estimate": e.estimate,
                         "lower": e.lower, "upper": e.upper}
                        for e in self.entries],
            "m_prime": self.m_prime,
            "m_final": self.m_final, "iterations": self.iterations,
            "stop_reason": self.stop_reason, "guaranteed": self.guaranteed,
        }
        if include_time:
            out["wall_time_s"] = self.wall_time_s
        return out


def kth_lower_bound(lower, k):
    """k-th largest value of ``lower``."""
    lower = np.asarray(lower)
    if len(lower) < k or k < 1:
        raise ParameterError(f"need at least k={k} values")
    return float(np.partition(lower, len(lower) - k)[len(lower) - k])


def candidates(est, lower, upper, k):
    """Nodes whose upper bound reaches the k-th largest lower bound."""
    thr = kth_lower_bound(lower, k)
    return np.flatnonzero(upper >= thr), thr


def relative_ok(est, lower, upper, eta):
    """Empirical half of the acceptance check for every given node."""
    return (est / (1.0 + eta) <= lower) & (upper <= est / (1.0 - eta))


def run_topk(g, k, eta, delta=None, cfg=None, kappa=5, max_samples=None):
    """Relative ``eta`` approximation of the top-k set with probability at
    least ``1 - delta``.

    Phase 1 samples until ``k`` nodes have each been internal to paths of at
    least ``kappa`` distinct samples; phase 2 starts at twice that size and
    grows geometrically until every candidate's interval is tight enough.
    """
    cfg = cfg or RunConfig()
    if delta is not None:
        cfg = RunConfig(**{**cfg.__dict__, "delta": delta})
    cfg.validate()
    delta = cfg.delta
    if not 1 <= k < g.n:
        raise ParameterError(f"k must be in [1, n), got {k} with n={g.n}")
    if not 0 < eta < 1:
        raise ParameterError(f"eta must be in (0, 1), got {eta}")
    t0 = time.monotonic()

    def out_of_time():
        return (cfg.max_seconds is not None
                and time.monotonic() - t0 > cfg.max_seconds)

    # phase 1: grow S' until k nodes were seen kappa times
    s1 = EstimatorState(g.n, 1)
    sampler1 = Sampler(g, cfg.seed + PHASE1_OFFSET, cfg.alpha, cfg.bag_cap,
                       1, cfg.threads)
    batch = 64
    exhausted = False
    while np.count_nonzero(s1.hits >= kappa) < k:
        sampler1.fill(s1, s1.m, batch)
        batch = min(2 * batch, 1 << 16)
        if out_of_time() or (max_samples and s1.m >= max_samples):
            exhausted = True
            break
    partition = build_partition(s1, cfg.a)
    t = partition.t
    m_prime = s1.m
    log.info("phase 1: m'=%d t=%d", m_prime, t)

    sampler = Sampler(g, cfg.seed, cfg.alpha, cfg.bag_cap, cfg.c, cfg.threads)
    state = EstimatorState(g.n, cfg.c)
    target = 2 * m_prime
    m_i = 0
    i = 0
    history = []
    stop = "budget_exceeded" if exhausted else None
    prev_thr = None
    prev_lower = None
    while True:
        i += 1
        sampler.fill(state, m_i, target - m_i)
        m_i = target
        lt = B.schedule_log_term(delta, t, i, "topk")
        _, _, _, eps_j = class_bounds(state, partition, lt, cfg.c)
        history.append(eps_j.tolist())
        eps_v = np.empty(g.n)
        for j, idx in enumerate(partition.members()):
            eps_v[idx] = eps_j[j]
        est = state.estimates
        lower = np.maximum(0.0, est - eps_v)
        upper = np.minimum(1.0, est + eps_v)
        cand, thr = candidates(est, lower, upper, k)
        if prev_lower is not None and np.all(lower >= prev_lower) \
                and thr < prev_thr:
            log.warning("threshold decreased although no lower bound did")
        prev_lower, prev_thr = lower, thr
        if stop is None and np.all(relative_ok(est[cand], lower[cand],
                                               upper[cand], eta)):
            stop = "converged"
        if stop is None and (out_of_time()
                             or (max_samples and m_i >= max_samples)):
            stop = "budget_exceeded"
        if stop is not None:
            break
        target = max(math.ceil(cfg.ratio * m_i), m_i + 1)

    order = cand[np.argsort(-est[cand], kind="stable")]
    entries = [TopKEntry(int(v), float(est[v]), float(lower[v]),
                         float(upper[v])) for v in order]
    return TopKResult(entries, k, eta, delta, thr, m_i, m_prime, i, stop,
                      stop == "converged", time.monotonic() - t0, history)
