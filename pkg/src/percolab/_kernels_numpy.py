"""Pure-numpy fallback kernels.

Same contract and same outputs as ``_kernels_numba``: every function
here re-derives edge weights from the identical keyed hash, so the two
backends are interchangeable.  Vectorized where the access pattern
allows it; the depth-first path search is plain Python.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_A = np.uint64(0xBF58476D1CE4E5B9)
MIX_B = np.uint64(0x94D049BB133111EB)
R30 = np.uint64(30)
R27 = np.uint64(27)
R31 = np.uint64(31)
R11 = np.uint64(11)
ONE = np.uint64(1)
INV53 = 1.0 / 9007199254740992.0  # 2**-53

CH_EDGE = 0
CH_ARROW = 1
CH_BRANCH = 2
CH_FLIP = 3
CH_DYNINIT = 4
CH_DYNHOLD = 5

SQRT2 = np.sqrt(2.0)

_M64 = (1 << 64) - 1


def _mix64(z):
    # uint64 multiplies are meant to wrap; silence numpy's scalar-overflow
    # warning so 0-d inputs behave like arrays
    with np.errstate(over="ignore"):
        z = z ^ (z >> R30)
        z = z * MIX_A
        z = z ^ (z >> R27)
        z = z * MIX_B
        return z ^ (z >> R31)


def _key(x, t, dirbit, channel):
    x = np.asarray(x, np.int64)
    t = np.asarray(t, np.int64)
    dirbit = np.asarray(dirbit, np.int64)
    k = (np.int64(channel) << np.int64(56)) | (dirbit << np.int64(48))
    k = k | ((t & np.int64(0xFFFFFF)) << np.int64(24)) | (x & np.int64(0xFFFFFF))
    return k.astype(np.uint64)


def _unit_at(seed, key, ctr):
    with np.errstate(over="ignore"):
        base = _mix64(np.uint64(seed) ^ _mix64(key))
        v = _mix64(base + (np.uint64(ctr) + ONE) * GAMMA)
    return (v >> R11).astype(np.float64) * INV53


def _edge_u(seed, x, t, dirbit):
    return _unit_at(seed, _key(x, t, dirbit, CH_EDGE), 0)


# scalar (python-int) hash twins, used by the sequential path search
def _pmix(z):
    z &= _M64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _M64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _punit(seed, key, ctr):
    base = _pmix(seed ^ _pmix(key))
    v = _pmix((base + (ctr + 1) * 0x9E3779B97F4A7C15) & _M64)
    return (v >> 11) * INV53


def _pedge(seed, x, t, dirbit):
    k = (CH_EDGE << 56) | (dirbit << 48) | ((t & 0xFFFFFF) << 24) | (x & 0xFFFFFF)
    return _punit(seed, k, 0)


def spawn(seed, index):
    """Derive an independent child seed for replicate ``index``."""
    idx = np.asarray(index, np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(seed) ^ _mix64((idx + ONE) * GAMMA))


def edge_weights(seed, xs, ts, dirbits):
    return _edge_u(np.uint64(seed), xs, ts, dirbits)


def _open_masks(seed, p, left, width, t):
    xs = left + np.arange(width, dtype=np.int64)
    open_p = _edge_u(seed, xs, t, 1) < p
    open_m = _edge_u(seed, xs, t, 0) < p
    return open_p, open_m


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
    left = x0 - window
    idx = np.arange(width, dtype=np.int64)
    occ = np.zeros(width, bool)
    occ[: window + 1] = ((left + idx[: window + 1] + t0) & 1) == 0
    positions = np.empty(n_steps + 1, np.int64)
    positions[0] = x0
    boundary = False
    died_at = np.int64(-1)
    for n in range(1, n_steps + 1):
        open_p, open_m = _open_masks(s, p, left, width, t0 + n - 1)
        nxt = np.zeros(width, bool)
        nxt[1:] = occ[:-1] & open_p[:-1]
        nxt[:-1] |= occ[1:] & open_m[1:]
        occ = nxt
        live = np.nonzero(occ)[0]
        if live.size == 0:
            died_at = np.int64(n)
            positions[n:] = np.int64(-(1 << 60))
            return positions, boundary, died_at
        positions[n] = left + live[-1]
        if positions[n] <= left + n:
            boundary = True
    return positions, boundary, died_at


def _single_site_depth(seed, p, x, t, horizon):
    s = np.uint64(seed)
    width = 2 * horizon + 1
    occ = np.zeros(width, bool)
    occ[horizon] = True
    left = x - horizon
    for k in range(1, horizon + 1):
        open_p, open_m = _open_masks(s, p, left, width, t + k - 1)
        nxt = np.zeros(width, bool)
        nxt[1:] = occ[:-1] & open_p[:-1]
        nxt[:-1] |= occ[1:] & open_m[1:]
        occ = nxt
        if not occ.any():
            return k - 1
    return horizon


def site_percolates(seed, p, x, t, horizon):
    """True iff (x, t) has an open directed path reaching time t+horizon."""
    return _single_site_depth(seed, p, x, t, horizon) == horizon


def max_depth_reached(seed, p, x, t, horizon):
    """Deepest level k <= horizon reachable from the single site (x, t)."""
    return _single_site_depth(seed, p, x, t, horizon)


def break_mask(seed, p, positions, t0, horizon):
    """mask[n] = 1 iff (positions[n], t0+n) percolates to depth horizon."""
    n = positions.size
    out = np.zeros(n, np.uint8)
    for k in range(1, n):
        if site_percolates(seed, p, int(positions[k]), t0 + k, horizon):
            out[k] = 1
    return out


def gamma_trace(seed, p, x0, t0, depth):
    """Rightmost open +-1 path from (x0, t0) reaching depth levels down.

    Depth-first, right branch first, with dead-site memoization; returns
    (path, found).  When found is False no open path reaches the target
    depth and path contents are meaningless.
    """
    s = int(np.uint64(seed))
    path = np.empty(depth + 1, np.int64)
    path[0] = x0
    trystate = np.zeros(depth + 1, np.uint8)
    dead = np.zeros((depth + 1, 2 * depth + 1), np.uint8)
    level = 0
    while True:
        if level == depth:
            return path, True
        y = int(path[level])
        t = t0 + level
        moved = False
        while trystate[level] < 2:
            if trystate[level] == 0:
                d, dirbit = 1, 1
            else:
                d, dirbit = -1, 0
            trystate[level] += 1
            ny = y + d
            if _pedge(s, y, t, dirbit) < p:
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


def gap_walk_final(seed, b, w0, h, n_steps, n_rep):
    """Terminal values of the sticky birth-death chain on h*Z>=0.

    Interior steps +-h with upward bias sqrt(2)*b*h; from 0 the chain
    escapes to h with probability sqrt(2)*b*h and holds otherwise.  Each
    step advances model time by h*h.
    """
    p_escape = SQRT2 * b * h
    p_up = 0.5 * (1.0 + SQRT2 * b * h)
    k0 = np.int64(np.rint(w0 / h))
    state = spawn(seed, np.arange(n_rep, dtype=np.uint64))
    k = np.full(n_rep, k0, np.int64)
    with np.errstate(over="ignore"):
        for _ in range(n_steps):
            state = state + GAMMA
            u = (_mix64(state) >> R11).astype(np.float64) * INV53
            at0 = k == 0
            k = np.where(
                at0,
                np.where(u < p_escape, np.int64(1), np.int64(0)),
                np.where(u < p_up, k + 1, k - 1),
            )
    return k.astype(np.float64) * h


def web_paths(seed, eps, x0s, t0, n_steps, mode):
    """Paths in the arrow field; mode 0 = single-arrow walk, 1 = leftmost,
    2 = rightmost in the eps-branching field."""
    s = np.uint64(seed)
    n_rep = x0s.size
    out = np.empty((n_rep, n_steps + 1), np.int64)
    x = x0s.astype(np.int64).copy()
    out[:, 0] = x
    for k in range(n_steps):
        t = t0 + k
        a = np.where(_unit_at(s, _key(x, t, 0, CH_ARROW), 0) < 0.5, np.int64(1), np.int64(-1))
        if mode == 0:
            d = a
        else:
            extra = _unit_at(s, _key(x, t, 0, CH_BRANCH), 0) < eps
            forced = np.int64(1) if mode == 2 else np.int64(-1)
            d = np.where(extra, forced, a)
        x = x + d
        out[:, k + 1] = x
    return out


def _flip_counts_keys(seed, keys, rate, s_time):
    n = keys.size
    acc = np.zeros(n)
    cnt = np.zeros(n, np.int64)
    alive = np.arange(n)
    ctr = 0
    while alive.size:
        u = _unit_at(seed, keys[alive], ctr)
        ctr += 1
        acc[alive] += -np.log(1.0 - u) / rate
        survive = acc[alive] <= s_time
        cnt[alive[survive]] += 1
        alive = alive[survive]
    return cnt


def dyn_flip_counts(seed, xs, ts, rate, s_time):
    s = np.uint64(seed)
    return _flip_counts_keys(s, _key(xs, ts, 0, CH_FLIP), rate, s_time)


def dyn_web_paths(seed, rate, s_time, x0s, t0, n_steps):
    """Walks in the arrow field after Poisson(rate) flips up to time s_time."""
    s = np.uint64(seed)
    n_rep = x0s.size
    out = np.empty((n_rep, n_steps + 1), np.int64)
    x = x0s.astype(np.int64).copy()
    out[:, 0] = x
    for k in range(n_steps):
        t = t0 + k
        a = np.where(_unit_at(s, _key(x, t, 0, CH_ARROW), 0) < 0.5, np.int64(1), np.int64(-1))
        fc = _flip_counts_keys(s, _key(x, t, 0, CH_FLIP), rate, s_time)
        a = np.where(fc % 2 == 1, -a, a)
        x = x + a
        out[:, k + 1] = x
    return out


def dyn_edge_states(seed, p, rate, xs, ts, dirbits, s_values):
    """Two-state edge chains sampled at the (sorted) times s_values.

    Initial state is Bernoulli(p); holding times are exponential with
    rate*(1-p) in state 1 and rate*p in state 0, so the stationary law
    stays Bernoulli(p) for every s.
    """
    s = np.uint64(seed)
    n = xs.size
    n_s = s_values.size
    kinit = _key(xs, ts, dirbits, CH_EDGE)
    khold = _key(xs, ts, dirbits, CH_DYNHOLD)
    state = (_unit_at(s, kinit, 0) < p).astype(np.uint8)
    out = np.empty((n, n_s), np.uint8)
    acc = np.zeros(n)
    notyet = np.ones((n, n_s), bool)
    alive = np.arange(n)
    ctr = 0
    while alive.size:
        r = np.where(state[alive] == 1, rate * (1.0 - p), rate * p)
        u = _unit_at(s, khold[alive], ctr)
        ctr += 1
        acc[alive] += -np.log(1.0 - u) / r
        newly = notyet[alive] & (s_values[None, :] < acc[alive, None])
        rows, cols = np.nonzero(newly)
        out[alive[rows], cols] = state[alive[rows]]
        notyet[alive[rows], cols] = False
        state[alive] ^= 1
        alive = alive[notyet[alive].any(axis=1)]
    return out
