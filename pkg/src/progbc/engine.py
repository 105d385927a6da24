"""Two-phase progressive sampling for an additive approximation of every
node's betweenness."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds as B
from .errors import DegenerateGraphError, ParameterError
from .estimator import (EstimatorState, Sampler, build_partition, mcera,
                        wimpy_per_class)
from .graph import vertex_diameter_upper_bound
from .sampler import DEFAULT_BAG_CAP, alpha_from_lambda

log = logging.getLogger(__name__)

# phase-1 seeds are offset so S' and S never share a sample stream
PHASE1_OFFSET = 1 << 62


@dataclass
class RunConfig:
    epsilon: float = 0.01
    delta: float = 0.05
    c: int = 25
    lam: float = 0.1
    a: float = 2.0
    ratio: float = 1.2
    bag_cap: int = DEFAULT_BAG_CAP
    seed: int = 0
    threads: int = 1
    diameter: int | None = None
    max_seconds: float | None = None

    def validate(self):
        if not 0 < self.epsilon < 1:
            raise ParameterError(f"epsilon must be in (0, 1): {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ParameterError(f"delta must be in (0, 1): {self.delta}")
        if self.c < 1:
            raise ParameterError("need at least one Monte-Carlo trial")
        if not self.ratio > 1:
            raise ParameterError("schedule ratio must exceed 1")
        if self.bag_cap < 1:
            raise ParameterError("bag cap must be positive")
        if not 0 <= self.seed < 2 ** 62:
            raise ParameterError("seed must be in [0, 2**62)")
        alpha_from_lambda(self.lam)
        return self

    @property
    def alpha(self):
        return alpha_from_lambda(self.lam)


@dataclass
class Iteration:
    i: int
    m_i: int
    mcera: list
    wimpy: list
    nu: list
    eps: list


@dataclass
class RunReport:
    estimates: np.ndarray
    eps_per_class: list
    m_final: int
    m_hat: int
    m_prime: int
    m_1: int
    rho: float
    nu_hat: float
    diameter: int
    t: int
    stop_reason: str
    guaranteed: bool
    wall_time_s: float
    iterations: list = field(default_factory=list)
    config: RunConfig | None = None

    def to_json(self, graph_stats=None, estimates_path=None,
                include_time=True):
        out = {
            "config": asdict(self.config) if self.config else None,
            "graph_stats": graph_stats,
            "m_prime": self.m_prime,
            "m_hat": self.m_hat,
            "m_1": self.m_1,
            "m_final": self.m_final,
            "rho": self.rho,
            "nu_hat": self.nu_hat,
            "diameter": self.diameter,
            "t": self.t,
            "eps_per_class": self.eps_per_class,
            "iterations": [
                {"i": it.i, "m_i": it.m_i,
                 "per_class": {"mcera": it.mcera, "wimpy": it.wimpy,
                               "nu": it.nu, "eps": it.eps}}
                for it in self.iterations],
            "estimates_path": estimates_path,
            "stop_reason": self.stop_reason,
            "guaranteed": self.guaranteed,
        }
        if include_time:
            out["wall_time_s"] = self.wall_time_s
        return out


def phase1_deltas(delta):
    """Failure budgets of the phase-1 estimates: rho, nu_hat and the
    sample-size bound share delta / 2 equally."""
    share = delta / 6.0
    return share, share, share


def schedule_start(epsilon, nu_hat, log_term, hi=2 ** 40):
    """Smallest m with ``eps_bound(0, nu_hat, m, log_term) <= epsilon``."""
    lo = 1
    if B.eps_bound(0.0, nu_hat, lo, log_term) <= epsilon:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if B.eps_bound(0.0, nu_hat, mid, log_term) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def next_m(m_prev, ratio, m_hat):
    if not ratio > 1:
        raise ParameterError("schedule ratio must exceed 1")
    return min(max(math.ceil(ratio * m_prev), m_prev + 1), m_hat)


def class_bounds(state, partition, log_term, c):
    """Per-class (mcera, wimpy, nu, eps) at the current sample."""
    m = state.m
    mc = mcera(state, partition)
    wv = wimpy_per_class(state, partition)
    nu = np.empty_like(wv)
    eps = np.empty_like(wv)
    for j in range(partition.t):
        nu[j] = B.var_upper_bound(wv[j], m, log_term)
        era = B.era_upper_bound(mc[j], wv[j], c, m, log_term)
        eps[j] = B.eps_bound(era, nu[j], m, log_term)
    return mc, wv, nu, eps


def phase1_stats(state, D, delta):
    """Upper bounds on rho and on the maximum variance from S'."""
    d_rho, d_nu, _ = phase1_deltas(delta)
    m = state.m
    rho_t = min(state.rho_tilde, D)
    if m >= 2:
        rho = B.rho_bound_empirical_bernstein(rho_t, state.lam, D, m, d_rho)
    else:
        rho = D
    rho = min(rho, float(D))
    w = float(state.wimpy.max()) if state.n else 0.0
    nu = B.var_upper_bound(w, m, math.log(1.0 / d_nu))
    return rho, min(nu, 0.25)


def run(g, cfg=None):
    """Approximate all betweenness values within ``cfg.epsilon`` with
    probability at least ``1 - cfg.delta``."""
    cfg = (cfg or RunConfig()).validate()
    if g.n < 2:
        raise DegenerateGraphError(f"need at least 2 nodes, got {g.n}")
    t0 = time.monotonic()
    eps, delta = cfg.epsilon, cfg.delta
    D = vertex_diameter_upper_bound(g, rng=cfg.seed, override=cfg.diameter)
    D = max(D, 2)

    # phase 1
    m_prime = math.ceil(math.log(1.0 / delta) / eps)
    sampler1 = Sampler(g, cfg.seed + PHASE1_OFFSET, cfg.alpha, cfg.bag_cap,
                       1, cfg.threads)
    s1 = sampler1.fill(EstimatorState(g.n, 1), 0, m_prime)
    partition = build_partition(s1, cfg.a)
    rho, nu_hat = phase1_stats(s1, D, delta)
    m_hat = B.sufficient_samples(eps, phase1_deltas(delta)[2], nu_hat, rho)
    t = partition.t
    m1 = min(schedule_start(eps, nu_hat,
                            B.schedule_log_term(delta, t, 1, "main")), m_hat)
    log.info("phase 1: m'=%d t=%d rho=%.4g nu=%.4g m_hat=%d m_1=%d",
             m_prime, t, rho, nu_hat, m_hat, m1)

    # phase 2
    sampler = Sampler(g, cfg.seed, cfg.alpha, cfg.bag_cap, cfg.c, cfg.threads)
    state = EstimatorState(g.n, cfg.c)
    iterations = []
    eps_j = np.ones(t)
    i = 0
    m_i = 0
    target = m1
    stop = None
    guaranteed = True
    while True:
        i += 1
        sampler.fill(state, m_i, target - m_i)
        m_i = target
        lt = B.schedule_log_term(delta, t, i, "main")
        mc, wv, nu, eps_j = class_bounds(state, partition, lt, cfg.c)
        iterations.append(Iteration(i, m_i, mc.tolist(), wv.tolist(),
                                    nu.tolist(), eps_j.tolist()))
        log.debug("iter %d m=%d max eps=%.4g", i, m_i, eps_j.max())
        if np.all(eps_j <= eps):
            stop = "eps_met"
            break
        if m_i >= m_hat:
            stop = "mhat_reached"
            break
        if cfg.max_seconds is not None and \
                time.monotonic() - t0 > cfg.max_seconds:
            stop = "budget_exceeded"
            guaranteed = False
            break
        target = next_m(m_i, cfg.ratio, m_hat)

    return RunReport(
        estimates=state.estimates, eps_per_class=eps_j.tolist(),
        m_final=m_i, m_hat=m_hat, m_prime=m_prime, m_1=m1, rho=rho,
        nu_hat=nu_hat, diameter=D, t=t, stop_reason=stop,
        guaranteed=guaranteed, wall_time_s=time.monotonic() - t0,
        iterations=iterations, config=cfg)
