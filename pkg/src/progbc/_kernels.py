"""Numba kernels for the hot loops: BFS variants, path sampling, ingestion.

Graphs are passed as CSR pairs ``(fptr, fidx)`` for out-neighbors and
``(bptr, bidx)`` for in-neighbors. For undirected graphs both pairs are the
same arrays.
"""

import numba
import numpy as np
from numba import njit, prange

# skip the TBB probe, which warns on older TBB builds
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

# splitmix64 constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

UNREACHABLE = -1


# ---------------------------------------------------------------------------
# per-sample random streams


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


@njit(cache=True)
def stream_init(seed, index, state):
    """Seed ``state[0]`` from (master seed, sample index)."""
    state[0] = mix64(np.uint64(seed) ^ mix64(np.uint64(index) + _GOLDEN))


@njit(cache=True)
def next_u64(state):
    state[0] = state[0] + _GOLDEN
    return mix64(state[0])


@njit(cache=True)
def next_double(state):
    return np.float64(next_u64(state) >> _S11) * _INV53


@njit(cache=True)
def next_below(state, n):
    k = np.int64(next_double(state) * n)
    if k >= n:
        k = n - 1
    return k


@njit(cache=True)
def draw_signs(state, c, out):
    word = np.uint64(0)
    for x in range(c):
        if x % 64 == 0:
            word = next_u64(state)
        if (word >> np.uint64(x % 64)) & np.uint64(1):
            out[x] = 1.0
        else:
            out[x] = -1.0


@njit(cache=True)
def draw_pair(state, n):
    s = next_below(state, n)
    t = next_below(state, n - 1)
    if t >= s:
        t += 1
    return s, t


# ---------------------------------------------------------------------------
# balanced bidirectional BFS


@njit(cache=True)
def bidir_bfs(fptr, fidx, bptr, bidx, s, t,
              dist_s, dist_t, sig_s, sig_t, vis_s, vis_t, meet):
    """Balanced bidirectional BFS between ``s`` and ``t``.

    Workspace arrays must hold -1 in ``dist_*`` and 0 in ``sig_*`` on entry.
    Visited nodes are listed in ``vis_s[:ns]``/``vis_t[:nt]`` so the caller
    can reset them. Returns ``(dist, sigma, n_meet, ns, nt)``; ``dist`` is
    -1 when t is unreachable.
    """
    dist_s[s] = 0
    sig_s[s] = 1.0
    vis_s[0] = s
    ns = 1
    fs_lo = 0
    fs_hi = 1
    ds = 0
    deg_s = fptr[s + 1] - fptr[s]

    dist_t[t] = 0
    sig_t[t] = 1.0
    vis_t[0] = t
    nt = 1
    ft_lo = 0
    ft_hi = 1
    dt = 0
    deg_t = bptr[t + 1] - bptr[t]

    while fs_lo < fs_hi and ft_lo < ft_hi:
        n_meet = 0
        sigma = 0.0
        if deg_s <= deg_t:
            for i in range(fs_lo, fs_hi):
                u = vis_s[i]
                for e in range(fptr[u], fptr[u + 1]):
                    w = fidx[e]
                    if dist_s[w] < 0:
                        dist_s[w] = ds + 1
                        vis_s[ns] = w
                        ns += 1
                    if dist_s[w] == ds + 1:
                        sig_s[w] += sig_s[u]
            ds += 1
            fs_lo = fs_hi
            fs_hi = ns
            deg_s = 0
            for i in range(fs_lo, fs_hi):
                w = vis_s[i]
                deg_s += fptr[w + 1] - fptr[w]
                if dist_t[w] >= 0:
                    meet[n_meet] = w
                    n_meet += 1
                    sigma += sig_s[w] * sig_t[w]
        else:
            for i in range(ft_lo, ft_hi):
                u = vis_t[i]
                for e in range(bptr[u], bptr[u + 1]):
                    w = bidx[e]
                    if dist_t[w] < 0:
                        dist_t[w] = dt + 1
                        vis_t[nt] = w
                        nt += 1
                    if dist_t[w] == dt + 1:
                        sig_t[w] += sig_t[u]
            dt += 1
            ft_lo = ft_hi
            ft_hi = nt
            deg_t = 0
            for i in range(ft_lo, ft_hi):
                w = vis_t[i]
                deg_t += bptr[w + 1] - bptr[w]
                if dist_s[w] >= 0:
                    meet[n_meet] = w
                    n_meet += 1
                    sigma += sig_s[w] * sig_t[w]
        if n_meet > 0:
            return ds + dt, sigma, n_meet, ns, nt
    return UNREACHABLE, 0.0, 0, ns, nt


@njit(cache=True)
def reset_workspace(dist_s, dist_t, sig_s, sig_t, vis_s, vis_t, ns, nt):
    for i in range(ns):
        v = vis_s[i]
        dist_s[v] = -1
        sig_s[v] = 0.0
    for i in range(nt):
        v = vis_t[i]
        dist_t[v] = -1
        sig_t[v] = 0.0


# ---------------------------------------------------------------------------
# uniform path sampling over the shortest-path DAG


@njit(cache=True)
def meet_cumulative(meet, n_meet, sig_s, sig_t, cum):
    acc = 0.0
    for i in range(n_meet):
        w = meet[i]
        acc += sig_s[w] * sig_t[w]
        cum[i] = acc
    return acc


@njit(cache=True)
def _pick_cum(cum, n, total, state):
    r = next_double(state) * total
    for i in range(n):
        if r < cum[i]:
            return i
    return n - 1


@njit(cache=True)
def draw_path(fptr, fidx, bptr, bidx, d, dist_s, dist_t, sig_s, sig_t,
              meet, n_meet, cum, total, state, path):
    """Draw one shortest path uniformly; writes nodes 0..d into ``path``."""
    w = meet[_pick_cum(cum, n_meet, total, state)]
    k = dist_s[w]
    path[k] = w
    x = w
    # back to s: predecessors weighted by forward path counts
    while k > 0:
        r = next_double(state) * sig_s[x]
        acc = 0.0
        chosen = -1
        last = -1
        for e in range(bptr[x], bptr[x + 1]):
            p = bidx[e]
            if dist_s[p] == k - 1:
                last = p
                acc += sig_s[p]
                if r < acc:
                    chosen = p
                    break
        if chosen < 0:
            chosen = last
        k -= 1
        path[k] = chosen
        x = chosen
    # forward to t: successors weighted by backward path counts
    k = dist_s[w]
    x = w
    while k < d:
        r = next_double(state) * sig_t[x]
        acc = 0.0
        chosen = -1
        last = -1
        want = dist_t[x] - 1
        for e in range(fptr[x], fptr[x + 1]):
            q = fidx[e]
            if dist_t[q] == want:
                last = q
                acc += sig_t[q]
                if r < acc:
                    chosen = q
                    break
        if chosen < 0:
            chosen = last
        k += 1
        path[k] = chosen
        x = chosen


@njit(cache=True)
def bag_size(sigma, alpha, cap):
    if sigma <= 0.0:
        return 0
    k = np.ceil(alpha * sigma)
    if k > cap:
        return cap
    if k < 1.0:
        return 1
    return np.int64(k)


@njit(cache=True)
def sample_bag_paths(fptr, fidx, bptr, bidx, d, dist_s, dist_t, sig_s, sig_t,
                     meet, n_meet, size, state):
    """Return a (size, d - 1) array of internal-node sequences."""
    out = np.empty((size, max(d - 1, 0)), dtype=np.int64)
    path = np.empty(d + 1, dtype=np.int64)
    cum = np.empty(n_meet, dtype=np.float64)
    total = meet_cumulative(meet, n_meet, sig_s, sig_t, cum)
    for j in range(size):
        draw_path(fptr, fidx, bptr, bidx, d, dist_s, dist_t, sig_s, sig_t,
                  meet, n_meet, cum, total, state, path)
        for i in range(1, d):
            out[j, i - 1] = path[i]
    return out


# ---------------------------------------------------------------------------
# fused sampler + accumulator


@njit(cache=True)
def _run_range(fptr, fidx, bptr, bidx, n, seed, start, stop, alpha, cap, c,
               b_sum, w_sum, r_sum, hits, moments):
    dist_s = np.full(n, -1, dtype=np.int64)
    dist_t = np.full(n, -1, dtype=np.int64)
    sig_s = np.zeros(n, dtype=np.float64)
    sig_t = np.zeros(n, dtype=np.float64)
    vis_s = np.empty(n, dtype=np.int64)
    vis_t = np.empty(n, dtype=np.int64)
    meet = np.empty(n, dtype=np.int64)
    cum = np.empty(n, dtype=np.float64)
    cnt = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    signs = np.empty(c, dtype=np.float64)
    state = np.zeros(1, dtype=np.uint64)
    for idx in range(start, stop):
        stream_init(seed, idx, state)
        draw_signs(state, c, signs)
        s, t = draw_pair(state, n)
        d, sigma, n_meet, ns, nt = bidir_bfs(fptr, fidx, bptr, bidx, s, t,
                                             dist_s, dist_t, sig_s, sig_t,
                                             vis_s, vis_t, meet)
        x_i = 0.0
        if d > 1:
            size = bag_size(sigma, alpha, cap)
            total = meet_cumulative(meet, n_meet, sig_s, sig_t, cum)
            n_touched = 0
            for j in range(size):
                draw_path(fptr, fidx, bptr, bidx, d, dist_s, dist_t, sig_s,
                          sig_t, meet, n_meet, cum, total, state, path)
                for i in range(1, d):
                    v = path[i]
                    if cnt[v] == 0:
                        touched[n_touched] = v
                        n_touched += 1
                    cnt[v] += 1
            for i in range(n_touched):
                v = touched[i]
                f = cnt[v] / size
                cnt[v] = 0
                b_sum[v] += f
                w_sum[v] += f * f
                hits[v] += 1
                for x in range(c):
                    r_sum[v, x] += signs[x] * f
                x_i += f
        moments[0] += x_i
        moments[1] += x_i * x_i
        reset_workspace(dist_s, dist_t, sig_s, sig_t, vis_s, vis_t, ns, nt)


@njit(cache=True, parallel=True)
def run_sharded(fptr, fidx, bptr, bidx, n, seed, start, stop, alpha, cap, c,
                b_sum, w_sum, r_sum, hits, moments):
    """Draw and ingest samples ``start..stop`` split over the leading shard
    axis of the accumulators; shard k owns one contiguous index range."""
    shards = b_sum.shape[0]
    total = stop - start
    for k in prange(shards):
        lo = start + (total * k) // shards
        hi = start + (total * (k + 1)) // shards
        _run_range(fptr, fidx, bptr, bidx, n, seed, lo, hi, alpha, cap, c,
                   b_sum[k], w_sum[k], r_sum[k], hits[k], moments[k])


# ---------------------------------------------------------------------------
# exact computations


@njit(cache=True)
def _brandes_block(fptr, fidx, bptr, bidx, n, src_lo, src_hi, bc):
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n, dtype=np.float64)
    delta = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for s in range(src_lo, src_hi):
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = order[head]
            head += 1
            du = dist[u]
            for e in range(fptr[u], fptr[u + 1]):
                w = fidx[e]
                if dist[w] < 0:
                    dist[w] = du + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == du + 1:
                    sigma[w] += sigma[u]
        for i in range(tail - 1, 0, -1):
            w = order[i]
            dw = dist[w]
            coeff = (1.0 + delta[w]) / sigma[w]
            for e in range(bptr[w], bptr[w + 1]):
                v = bidx[e]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
        for i in range(tail):
            v = order[i]
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0


@njit(cache=True, parallel=True)
def brandes_blocks(fptr, fidx, bptr, bidx, n, src_lo, src_hi, acc):
    """Unnormalized dependency sums for sources in [src_lo, src_hi).

    ``acc`` has one row per block and block k owns the global source range
    [n k / B, n (k + 1) / B). The layout depends only on ``n`` and the number
    of rows, so neither thread count nor chunking changes the result.
    """
    blocks = acc.shape[0]
    for k in prange(blocks):
        lo = max(src_lo, (n * k) // blocks)
        hi = min(src_hi, (n * (k + 1)) // blocks)
        if lo < hi:
            _brandes_block(fptr, fidx, bptr, bidx, n, lo, hi, acc[k])


@njit(cache=True)
def bfs_depths(ptr, idx, n, src, dist, order):
    """Plain BFS; fills ``dist`` (must be -1 on entry for unvisited) and
    returns (number reached, eccentricity, last node reached)."""
    dist[src] = 0
    order[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = order[head]
        head += 1
        for e in range(ptr[u], ptr[u + 1]):
            w = idx[e]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                order[tail] = w
                tail += 1
    last = order[tail - 1]
    return tail, dist[last], last


@njit(cache=True)
def bfs_count(ptr, idx, n, src, dist, sigma, order):
    """BFS from ``src`` recording hop distances and path counts."""
    for i in range(n):
        dist[i] = -1
        sigma[i] = 0.0
    dist[src] = 0
    sigma[src] = 1.0
    order[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = order[head]
        head += 1
        for e in range(ptr[u], ptr[u + 1]):
            w = idx[e]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                order[tail] = w
                tail += 1
            if dist[w] == dist[u] + 1:
                sigma[w] += sigma[u]
    return tail


@njit(cache=True, parallel=True)
def max_hops_all_pairs(ptr, idx, n):
    """Largest finite BFS distance over all ordered pairs."""
    best = np.zeros(n, dtype=np.int64)
    for s in prange(n):
        dist = np.full(n, -1, dtype=np.int64)
        order = np.empty(n, dtype=np.int64)
        reached, ecc, last = bfs_depths(ptr, idx, n, s, dist, order)
        best[s] = ecc
    return best.max()
