"""Hot lattice kernels, numba-compiled.

Every kernel is a plain function of a 64-bit seed plus integer lattice
coordinates; the edge-weight field is realized lazily through a keyed
integer hash (see ``noise`` for the documented bit layout), so no lattice
state is ever stored.  ``_kernels_numpy`` implements the same contract
with vectorized numpy; outputs agree bit for bit.
"""

import numpy as np
from numba import njit

# splitmix64 finalizer constants
GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_A = np.uint64(0xBF58476D1CE4E5B9)
MIX_B = np.uint64(0x94D049BB133111EB)
R30 = np.uint64(30)
R27 = np.uint64(27)
R31 = np.uint64(31)
R11 = np.uint64(11)
ONE = np.uint64(1)
INV53 = 1.0 / 9007199254740992.0  # 2**-53

MASK24 = np.int64(0xFFFFFF)

# hash channels; keep in sync with noise.CHANNELS
CH_EDGE = np.int64(0)
CH_ARROW = np.int64(1)
CH_BRANCH = np.int64(2)
CH_FLIP = np.int64(3)
CH_DYNINIT = np.int64(4)
CH_DYNHOLD = np.int64(5)

SQRT2 = np.sqrt(2.0)


@njit(cache=True, inline="always")
def _mix64(z):
    z = z ^ (z >> R30)
    z = z * MIX_A
    z = z ^ (z >> R27)
    z = z * MIX_B
    return z ^ (z >> R31)


@njit(cache=True, inline="always")
def _key(x, t, dirbit, channel):
    k = (channel << np.int64(56)) | (dirbit << np.int64(48))
    k = k | ((t & MASK24) << np.int64(24)) | (x & MASK24)
    return np.uint64(k)


@njit(cache=True, inline="always")
def _base(seed, key):
    return _mix64(seed ^ _mix64(key))


@njit(cache=True, inline="always")
def _unit_at(seed, key, ctr):
    v = _mix64(_base(seed, key) + (np.uint64(ctr) + ONE) * GAMMA)
    return np.float64(v >> R11) * INV53


@njit(cache=True, inline="always")
def _edge_u(seed, x, t, dirbit):
    return _unit_at(seed, _key(x, t, dirbit, CH_EDGE), 0)


@njit(cache=True)
def spawn(seed, index):
    """Derive an independent child seed for replicate ``index``."""
    return _mix64(np.uint64(seed) ^ _mix64((np.uint64(index) + ONE) * GAMMA))


@njit(cache=True)
def edge_weights(seed, xs, ts, dirbits):
    n = xs.size
    out = np.empty(n, np.float64)
    s = np.uint64(seed)
    for i in range(n):
        out[i] = _edge_u(s, xs[i], ts[i], dirbits[i])
    return out


@njit(cache=True)
def rho_trace(seed, p, x0, t0, n_steps, window):
    """Rightmost reachable position, layer by layer.

    Source is every even-parity site in [x0-window, x0] x {t0}.  Sites
    left of x0-window are not tracked; the boundary flag is raised as
    soon as the recorded rightmost position enters the forward light
    cone of the cut (position <= x0-window+n at layer n), which is
    exactly when untracked sites could have mattered.

    Returns (positions, boundary_contact, died_at); died_at = -1 means
    the reachable set stayed nonempty, otherwise positions[died_at:] are
    meaningless.
    """
    s = np.uint64(seed)
    width = window + n_steps + 1
    left = x0 - window  # index i <-> position left + i
    occ = np.zeros(width, np.uint8)
    nxt = np.zeros(width, np.uint8)
    for i in range(window + 1):
        if ((left + i + t0) & 1) == 0:
            occ[i] = 1
    positions = np.empty(n_steps + 1, np.int64)
    positions[0] = x0
    boundary = False
    died_at = np.int64(-1)
    lo = 0
    hi = window
    for n in range(1, n_steps + 1):
        t = t0 + n - 1
        nlo = lo - 1 if lo > 0 else 0
        nhi = hi + 1 if hi < width - 1 else width - 1
        for i in range(nlo, nhi + 1):
            v = np.uint8(0)
            if i >= 1 and occ[i - 1] == 1:
                if _edge_u(s, left + i - 1, t, np.int64(1)) < p:
                    v = np.uint8(1)
            if v == 0 and i < width - 1 and occ[i + 1] == 1:
                if _edge_u(s, left + i + 1, t, np.int64(0)) < p:
                    v = np.uint8(1)
            nxt[i] = v
        new_lo = -1
        new_hi = -1
        for i in range(nlo, nhi + 1):
            if nxt[i] == 1:
                if new_lo < 0:
                    new_lo = i
                new_hi = i
        for i in range(nlo, nhi + 1):
            occ[i] = nxt[i]
            nxt[i] = 0
        if new_hi < 0:
            died_at = np.int64(n)
            for m in range(n, n_steps + 1):
                positions[m] = np.int64(-(1 << 60))
            return positions, boundary, died_at
        lo = new_lo
        hi = new_hi
        positions[n] = left + hi
        if positions[n] <= left + n:
            boundary = True
    return positions, boundary, died_at


@njit(cache=True)
def site_percolates(seed, p, x, t, horizon):
    """True iff (x, t) has an open directed path reaching time t+horizon."""
    s = np.uint64(seed)
    width = 2 * horizon + 1
    occ = np.zeros(width, np.uint8)
    nxt = np.zeros(width, np.uint8)
    occ[horizon] = 1  # index i <-> position x - horizon + i
    lo = horizon
    hi = horizon
    for k in range(1, horizon + 1):
        tt = t + k - 1
        nlo = lo - 1
        nhi = hi + 1
        any_alive = False
        for i in range(nlo, nhi + 1):
            v = np.uint8(0)
            if i >= 1 and occ[i - 1] == 1:
                if _edge_u(s, x - horizon + i - 1, tt, np.int64(1)) < p:
                    v = np.uint8(1)
            if v == 0 and i < width - 1 and occ[i + 1] == 1:
                if _edge_u(s, x - horizon + i + 1, tt, np.int64(0)) < p:
                    v = np.uint8(1)
            nxt[i] = v
            if v == 1:
                any_alive = True
        if not any_alive:
            return False
        new_lo = nlo
        while nxt[new_lo] == 0:
            new_lo += 1
        new_hi = nhi
        while nxt[new_hi] == 0:
            new_hi -= 1
        for i in range(nlo, nhi + 1):
            occ[i] = nxt[i]
            nxt[i] = 0
        lo = new_lo
        hi = new_hi
    return True


@njit(cache=True)
def max_depth_reached(seed, p, x, t, horizon):
    """Deepest level k <= horizon reachable from the single site (x, t)."""
    s = np.uint64(seed)
    width = 2 * horizon + 1
    occ = np.zeros(width, np.uint8)
    nxt = np.zeros(width, np.uint8)
    occ[horizon] = 1
    lo = horizon
    hi = horizon
    for k in range(1, horizon + 1):
        tt = t + k - 1
        nlo = lo - 1
        nhi = hi + 1
        any_alive = False
        for i in range(nlo, nhi + 1):
            v = np.uint8(0)
            if i >= 1 and occ[i - 1] == 1:
                if _edge_u(s, x - horizon + i - 1, tt, np.int64(1)) < p:
                    v = np.uint8(1)
            if v == 0 and i < width - 1 and occ[i + 1] == 1:
                if _edge_u(s, x - horizon + i + 1, tt, np.int64(0)) < p:
                    v = np.uint8(1)
            nxt[i] = v
            if v == 1:
                any_alive = True
        if not any_alive:
            return k - 1
        new_lo = nlo
        while nxt[new_lo] == 0:
            new_lo += 1
        new_hi = nhi
        while nxt[new_hi] == 0:
            new_hi -= 1
        for i in range(nlo, nhi + 1):
            occ[i] = nxt[i]
            nxt[i] = 0
        lo = new_lo
        hi = new_hi
    return horizon


@njit(cache=True)
def break_mask(seed, p, positions, t0, horizon):
    """mask[n] = 1 iff (positions[n], t0+n) percolates to depth horizon."""
    n = positions.size
    out = np.zeros(n, np.uint8)
    for k in range(1, n):
        if site_percolates(seed, p, positions[k], t0 + k, horizon):
            out[k] = 1
    return out


@njit(cache=True)
def gamma_trace(seed, p, x0, t0, depth):
    """Rightmost open +-1 path from (x0, t0) reaching depth levels down.

    Depth-first, right branch first, with dead-site memoization; returns
    (path, found).  When found is False no open path reaches the target
    depth and path contents are meaningless.
    """
    s = np.uint64(seed)
    path = np.empty(depth + 1, np.int64)
    path[0] = x0
    trystate = np.zeros(depth + 1, np.uint8)
    dead = np.zeros((depth + 1, 2 * depth + 1), np.uint8)
    level = 0
    while True:
        if level == depth:
            return path, True
        y = path[level]
        t = t0 + level
        moved = False
        while trystate[level] < 2:
            if trystate[level] == 0:
                d = np.int64(1)
                dirbit = np.int64(1)
            else:
                d = np.int64(-1)
                dirbit = np.int64(0)
            trystate[level] += 1
            ny = y + d
            if _edge_u(s, y, t, dirbit) < p:
                if dead[level + 1, ny - x0 + level + 1] == 0:
                    path[level + 1] = ny
                    trystate[level + 1] = 0
                    level += 1
                    moved = True
                    break
        if not moved:
            dead[level, y - x0 + level] = 1
            if level == 0:
                return path, False
            level -= 1


@njit(cache=True)
def gap_walk_final(seed, b, w0, h, n_steps, n_rep):
    """Terminal values of the sticky birth-death chain on h*Z>=0.

    Interior steps +-h with upward bias sqrt(2)*b*h; from 0 the chain
    escapes to h with probability sqrt(2)*b*h and holds otherwise.  Each
    step advances model time by h*h.
    """
    out = np.empty(n_rep, np.float64)
    p_escape = SQRT2 * b * h
    p_up = 0.5 * (1.0 + SQRT2 * b * h)
    k0 = np.int64(np.rint(w0 / h))
    for r in range(n_rep):
        state = spawn(seed, r)
        k = k0
        for _ in range(n_steps):
            state = state + GAMMA
            u = np.float64(_mix64(state) >> R11) * INV53
            if k == 0:
                if u < p_escape:
                    k = 1
            else:
                if u < p_up:
                    k += 1
                else:
                    k -= 1
        out[r] = k * h
    return out


@njit(cache=True)
def web_paths(seed, eps, x0s, t0, n_steps, mode):
    """Paths in the arrow field; mode 0 = single-arrow walk, 1 = leftmost,
    2 = rightmost in the eps-branching field."""
    s = np.uint64(seed)
    n_rep = x0s.size
    out = np.empty((n_rep, n_steps + 1), np.int64)
    for r in range(n_rep):
        x = x0s[r]
        out[r, 0] = x
        for k in range(n_steps):
            t = t0 + k
            a = np.int64(1) if _unit_at(s, _key(x, t, np.int64(0), CH_ARROW), 0) < 0.5 else np.int64(-1)
            if mode == 0:
                d = a
            else:
                if _unit_at(s, _key(x, t, np.int64(0), CH_BRANCH), 0) < eps:
                    d = np.int64(1) if mode == 2 else np.int64(-1)
                else:
                    d = a
            x = x + d
            out[r, k + 1] = x
    return out


@njit(cache=True, inline="always")
def _flip_count(seed, x, t, rate, s_time):
    key = _key(x, t, np.int64(0), CH_FLIP)
    acc = 0.0
    c = np.int64(0)
    ctr = 0
    while True:
        u = _unit_at(seed, key, ctr)
        ctr += 1
        acc += -np.log(1.0 - u) / rate
        if acc > s_time:
            return c
        c += 1


@njit(cache=True)
def dyn_flip_counts(seed, xs, ts, rate, s_time):
    s = np.uint64(seed)
    n = xs.size
    out = np.empty(n, np.int64)
    for i in range(n):
        out[i] = _flip_count(s, xs[i], ts[i], rate, s_time)
    return out


@njit(cache=True)
def dyn_web_paths(seed, rate, s_time, x0s, t0, n_steps):
    """Walks in the arrow field after Poisson(rate) flips up to time s_time."""
    s = np.uint64(seed)
    n_rep = x0s.size
    out = np.empty((n_rep, n_steps + 1), np.int64)
    for r in range(n_rep):
        x = x0s[r]
        out[r, 0] = x
        for k in range(n_steps):
            t = t0 + k
            a = np.int64(1) if _unit_at(s, _key(x, t, np.int64(0), CH_ARROW), 0) < 0.5 else np.int64(-1)
            if _flip_count(s, x, t, rate, s_time) % 2 == 1:
                a = -a
            x = x + a
            out[r, k + 1] = x
    return out


@njit(cache=True)
def dyn_edge_states(seed, p, rate, xs, ts, dirbits, s_values):
    """Two-state edge chains sampled at the (sorted) times s_values.

    Initial state is Bernoulli(p); holding times are exponential with
    rate*(1-p) in state 1 and rate*p in state 0, so the stationary law
    stays Bernoulli(p) for every s.
    """
    s = np.uint64(seed)
    n = xs.size
    n_s = s_values.size
    out = np.empty((n, n_s), np.uint8)
    for e in range(n):
        kinit = _key(xs[e], ts[e], dirbits[e], CH_EDGE)
        khold = _key(xs[e], ts[e], dirbits[e], CH_DYNHOLD)
        state = np.uint8(1) if _unit_at(s, kinit, 0) < p else np.uint8(0)
        acc = 0.0
        ctr = 0
        si = 0
        while si < n_s:
            r = rate * (1.0 - p) if state == 1 else rate * p
            u = _unit_at(s, khold, ctr)
            ctr += 1
            acc += -np.log(1.0 - u) / r
            while si < n_s and s_values[si] < acc:
                out[e, si] = state
                si += 1
            state = np.uint8(1) - state
    return out
