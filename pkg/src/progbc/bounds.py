"""Probabilistic bounds used to stop sampling and to size samples.

All functions are pure. ``log_term`` arguments are natural logarithms of
the (already adjusted) inverse confidence, e.g. ``ln(4 t / delta)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import IntegrityError, ParameterError


def g(x):
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"g is defined on [0, 1], got {x}")
    return x * (1.0 - x)


def h(x):
    if x < 0:
        raise ParameterError(f"h is defined for x >= 0, got {x}")
    return (1.0 + x) * math.log1p(x) - x


def h1(x):
    if x < 0:
        raise ParameterError(f"h1 is defined for x >= 0, got {x}")
    return 1.0 + x - math.sqrt(1.0 + 2.0 * x)


def era_upper_bound(mcera, wimpy, c, m, log_term):
    """Monte-Carlo Rademacher average plus its hypercube concentration
    slack. Negative trial averages are clamped to zero first."""
    return max(mcera, 0.0) + math.sqrt(4.0 * wimpy * log_term / (c * m))


def era_radius(era, m, log_term):
    q = log_term / m
    return era + q + math.sqrt(q * q + 2.0 * q * era)


def eps_bound(era, nu, m, log_term):
    """Supremum-deviation bound for one class given the ERA bound ``era``
    and variance bound ``nu``."""
    r = era_radius(era, m, log_term)
    return (2.0 * r + math.sqrt(2.0 * log_term * (nu + 4.0 * r) / m)
            + log_term / (3.0 * m))


def var_upper_bound(wimpy, m, log_term):
    """Upper bound on the largest variance in a class from its empirical
    wimpy variance."""
    q = log_term / m
    return wimpy + q + math.sqrt(q * q + 2.0 * wimpy * q)


def schedule_log_term(delta, t, i, mode="main"):
    """``ln(2**(i+1) * 5 t / delta)`` (main) or ``ln(2**i * 5 t / delta)``
    (topk), evaluated in log space."""
    if i < 1:
        raise ParameterError(f"iteration index starts at 1, got {i}")
    if mode == "main":
        e = i + 1
    elif mode == "topk":
        e = i
    else:
        raise ParameterError(f"unknown schedule mode {mode!r}")
    return e * math.log(2.0) + math.log(5.0 * t / delta)


def schedule_budget(delta, iterations, mode="main"):
    """Total failure probability spent by the first ``iterations`` rounds:
    round i spends ``delta / 2**(i+1)`` (main) or ``delta / 2**i`` (topk)."""
    shift = {"main": 1, "topk": 0}.get(mode)
    if shift is None:
        raise ParameterError(f"unknown schedule mode {mode!r}")
    return sum(delta / 2.0 ** (i + shift) for i in range(1, iterations + 1))


# ---------------------------------------------------------------------------
# sample-size bound

def _phi(x, eps):
    gx = x * (1.0 - x)
    return gx * h(eps / gx)


def x_hat(eps, nu_hat, tol=1e-12):
    """Upper end of the supremum domain: ``min(x1, x2)``."""
    lo = 0.5 - math.sqrt(eps / 3.0 - eps * eps / 9.0)
    hi = 0.5
    target = 2.0 * eps * eps
    if _phi(lo, eps) <= target:
        x1 = lo
    else:
        # phi decreases on (0, 1/2): find the left end of {phi <= target}
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if _phi(mid, eps) <= target:
                b = mid
            else:
                a = mid
        x1 = b
    x2 = 0.5 - math.sqrt(0.25 - nu_hat)
    return min(x1, x2)


def _ratio(x, eps, rho, delta):
    return math.log(2.0 * rho / (x * delta)) / _phi(x, eps)


def sufficient_samples(eps, delta, nu_hat, rho, grid=10_000, margin=1e-3):
    """Number of samples after which every estimate is within ``eps`` with
    probability ``1 - delta``, for maximum variance ``nu_hat`` and
    ``sum_v b(v) <= rho``."""
    if not 0 < eps < 1:
        raise ParameterError(f"epsilon must be in (0, 1), got {eps}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    if not 0 < nu_hat <= 0.25:
        raise ParameterError(f"nu_hat must be in (0, 1/4], got {nu_hat}")
    if not rho > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    xh = x_hat(eps, nu_hat)
    xs = np.geomspace(xh * 1e-9, xh, grid)
    vals = np.array([_ratio(x, eps, rho, delta) for x in xs])
    k = int(np.argmax(vals))
    best = vals[k]
    # ternary refinement between the grid neighbours of the argmax
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, grid - 1)]
    for _ in range(100):
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if _ratio(m1, eps, rho, delta) < _ratio(m2, eps, rho, delta):
            a = m1
        else:
            b = m2
    best = max(best, _ratio(0.5 * (a + b), eps, rho, delta))
    return max(1, math.ceil(best * (1.0 + margin)))


def sufficient_samples_approx(eps, delta, nu_hat, rho):
    """Closed-form approximation of :func:`sufficient_samples`."""
    return ((2.0 * nu_hat + 2.0 * eps / 3.0) / eps ** 2
            * (math.log(2.0 * rho / nu_hat) + math.log(1.0 / delta)))


# ---------------------------------------------------------------------------
# relative deviations

def relative_deviation(b, m, delta, nu_hat, rho, n):
    if not 0.0 <= b <= 1.0:
        raise ParameterError(f"b must be in [0, 1], got {b}")
    cap = n if b == 0 else min(rho / b, n)
    lt = math.log(4.0 / delta * cap)
    var = min(g(b), nu_hat)
    return math.sqrt(2.0 * var * lt / m) + lt / (3.0 * m)


def invert_ci(b_tilde, m, delta, nu_hat, rho, n, iters=200):
    """Confidence interval for b given its estimate, by two bisections."""
    if not 0.0 <= b_tilde <= 1.0:
        raise ParameterError(f"b_tilde must be in [0, 1], got {b_tilde}")
    tol = 1e-10

    def d(x):
        return relative_deviation(x, m, delta, nu_hat, rho, n)

    if b_tilde <= d(0.0):
        lower = 0.0
    else:
        a, b = 0.0, b_tilde  # invariant: fails at a, holds at b
        for _ in range(iters):
            mid = 0.5 * (a + b)
            if b_tilde <= mid + d(mid):
                b = mid
            else:
                a = mid
        lower = max(0.0, b - tol)

    if 1.0 <= b_tilde + d(1.0):
        upper = 1.0
    else:
        a, b = b_tilde, 1.0  # invariant: holds at a, fails at b
        for _ in range(iters):
            mid = 0.5 * (a + b)
            if mid <= b_tilde + d(mid):
                a = mid
            else:
                b = mid
        upper = min(1.0, a + tol)
    return lower, upper


# ---------------------------------------------------------------------------
# average shortest-path length

def fixed_point(u, v, y):
    """Fixed point of ``x -> u + sqrt(v + y x)``."""
    return u + y / 2.0 + math.sqrt(y * y / 4.0 + u * y + v)


def rho_bound_bernstein(rho_tilde, D, m, delta):
    if rho_tilde > D:
        raise IntegrityError(f"average {rho_tilde} exceeds diameter {D}")
    q = D * math.log(1.0 / delta) / m
    return rho_tilde + math.sqrt(5.0 / 3.0 * q * q + 2.0 * rho_tilde * q) \
        + 4.0 * q / 3.0


def rho_bound_empirical_bernstein(rho_tilde, lam, D, m, delta):
    if m < 2:
        raise ParameterError("empirical Bernstein bound needs m >= 2")
    lt = math.log(2.0 / delta)
    return rho_tilde + math.sqrt(2.0 * lam * lt / m) + 7.0 * D * lt / (3.0 * m)
