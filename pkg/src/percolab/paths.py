"""Rightmost-path tracing, regeneration structure, and moment estimators.

Two kinds of rightmost object live here:

* ``trace_rho``: the rightmost position reachable at each level by open
  paths from a half-line source (truncated to ``window`` sites, with a
  boundary-contact flag that invalidates a replicate instead of
  silently biasing it);
* ``trace_gamma``: the rightmost genuine +-1-step open path from a
  single site that survives ``horizon`` extra levels (right-greedy
  depth-first search with backtracking).

Break points of a rho path are the levels whose site percolates
``horizon`` further levels; the path increments between consecutive
break points are i.i.d. from the second one on, which is what the
moment estimators consume.

Moment collection draws a *fixed number of increments per replicate*
(extending the trace until enough break points exist).  Collecting all
increments inside a fixed time window instead would length-bias the
sample near the window end (long increments straddle the cut more
often) and was measured to shift the velocity estimate by ~1e-3 at
p = 0.8, several standard errors at the sample sizes used here.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np

from ._backend import kernels
from .noise import ExplicitConfig, PercConfig, Site, spawn_seed
from .stats import batch_statistic, fit_line

_DEATH_SENTINEL = -(1 << 60)


class InsufficientSampleError(RuntimeError):
    """Fewer valid increments than requested."""


class DecayFitError(RuntimeError):
    """Too few usable points for the log-linear decay fit."""


@dataclasses.dataclass
class LatticePath:
    """A rho path: rightmost reachable position per level.

    ``positions[k]`` is the value at time ``start.t + k``; downward
    jumps of any size are allowed, upward steps are at most +1.  When
    the reachable set died at level ``died_at``, positions are
    truncated to the levels before death.
    """

    start: Site
    positions: np.ndarray
    boundary_contact: bool = False
    died_at: int | None = None
    p: float | None = None
    seed: int | None = None

    def __len__(self):
        return len(self.positions)

    @property
    def times(self) -> np.ndarray:
        return self.start.t + np.arange(len(self.positions))

    def check_invariants(self):
        pos = self.positions
        if pos[0] != self.start.x:
            raise AssertionError("positions[0] must equal start.x")
        if np.any(np.diff(pos) > 1):
            raise AssertionError("upward steps above +1")
        if np.any((pos + self.times) % 2 != 0):
            raise AssertionError("lattice parity violated")


@dataclasses.dataclass
class GammaPath:
    """A genuine +-1-step open path."""

    start: Site
    positions: np.ndarray

    def __len__(self):
        return len(self.positions)

    @property
    def times(self) -> np.ndarray:
        return self.start.t + np.arange(len(self.positions))

    def check_invariants(self):
        if self.positions[0] != self.start.x:
            raise AssertionError("positions[0] must equal start.x")
        if np.any(np.abs(np.diff(self.positions)) != 1):
            raise AssertionError("gamma steps must be +-1")


@dataclasses.dataclass
class RegenSequence:
    """Break times and the increments between them.

    ``break_times[i]`` is T_{i+1} (T_0 = 0 is implicit); increment i
    has horizontal displacement ``X[i]`` over duration ``tau[i]``.  The
    first increment has a different law from the rest and is discarded
    by the moment estimators.
    """

    break_times: np.ndarray
    X: np.ndarray
    tau: np.ndarray

    def __len__(self):
        return len(self.X)

    def check_invariants(self):
        if np.any(self.tau < 1):
            raise AssertionError("tau >= 1 violated")
        if np.any(np.abs(self.X) > self.tau):
            raise AssertionError("|X| <= tau violated")
        if np.any((self.X - self.tau) % 2 != 0):
            raise AssertionError("X and tau must have equal parity")
        if not np.array_equal(np.cumsum(self.tau), self.break_times):
            raise AssertionError("break times must be the cumulative tau sums")


def _as_estimate(pair):
    return (float(pair[0]), float(pair[1]))


@dataclasses.dataclass
class MomentEstimates:
    """Plug-in increment-moment estimates at one parameter value."""

    p: float
    f_ij: dict
    alpha: tuple
    sigma2: tuple
    n_samples: int
    alpha_prime: tuple | None = None
    n_replicates: int = 0
    n_invalid: int = 0
    seed: int | None = None
    horizon: int | None = None


@dataclasses.dataclass
class AlphaPrimeEstimate:
    """Velocity derivative by central difference, cross-checked by the
    coupled-increment estimator."""

    estimate: float
    stderr: float
    coupled: float
    coupled_stderr: float
    h: float
    eps: float
    n_samples: int

    @property
    def discrepancy_sigmas(self) -> float:
        return abs(self.estimate - self.coupled) / np.hypot(self.stderr, self.coupled_stderr)


@dataclasses.dataclass
class DecayEstimate:
    """Log-linear fit of the defect probability q(n) = P(reach level n
    but not level n_max + horizon)."""

    c1: float
    c2: float
    r_squared: float
    slope_se: float
    n_points: int
    levels: np.ndarray
    counts: np.ndarray
    replicates: int
    no_events: bool = False
    message: str = ""


# ---------------------------------------------------------------------------
# tracing


def trace_rho(cfg, z: Site, n_steps: int, window: int) -> LatticePath:
    """Rightmost reachable positions from the half-line (-inf, z.x] x {z.t},
    truncated to the ``window`` sites [z.x - window, z.x].

    The boundary-contact flag reports that the rightmost position
    entered the forward light cone of the truncation cut, the only way
    the cut can influence the result; unflagged output is exactly the
    truncated-source answer.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if window <= n_steps:
        raise ValueError(f"window must exceed n_steps (got window={window}, n_steps={n_steps})")
    if isinstance(cfg, PercConfig):
        pos, boundary, died = kernels.rho_trace(cfg.seed, cfg.p, z.x, z.t, n_steps, window)
        pos = np.asarray(pos, np.int64)
        died_at = int(died) if died >= 0 else None
        if died_at is not None:
            pos = pos[:died_at]
        return LatticePath(z, pos, bool(boundary), died_at, p=cfg.p, seed=int(cfg.seed))
    return _trace_rho_explicit(cfg, z, n_steps, window)


def _trace_rho_explicit(cfg, z: Site, n_steps: int, window: int) -> LatticePath:
    left = z.x - window
    occ = {x for x in range(left, z.x + 1) if (x + z.t) % 2 == 0}
    positions = [z.x]
    boundary = False
    died_at = None
    for n in range(1, n_steps + 1):
        t = z.t + n - 1
        nxt = set()
        for y in occ:
            for d in (1, -1):
                if y + d >= left and cfg.is_open_xtd(y, t, d):
                    nxt.add(y + d)
        if not nxt:
            died_at = n
            break
        positions.append(max(nxt))
        if positions[-1] <= left + n:
            boundary = True
        occ = nxt
    return LatticePath(z, np.array(positions, np.int64), boundary, died_at, p=getattr(cfg, "p", None))


def trace_gamma(cfg, z: Site, n_steps: int, horizon: int):
    """Rightmost +-1-step open path from ``z`` reaching depth
    ``n_steps + horizon``, truncated to ``n_steps`` steps.

    Returns None when no open path survives that deep (``z`` is not a
    percolation point as far as the horizon can tell).
    """
    if n_steps < 1 or horizon < 1:
        raise ValueError("n_steps and horizon must be >= 1")
    depth = n_steps + horizon
    if isinstance(cfg, PercConfig):
        path, found = kernels.gamma_trace(cfg.seed, cfg.p, z.x, z.t, depth)
        if not found:
            return None
        return GammaPath(z, np.asarray(path[: n_steps + 1], np.int64))
    return _trace_gamma_explicit(cfg, z, n_steps, depth)


def _trace_gamma_explicit(cfg, z: Site, n_steps: int, depth: int):
    path = [z.x] * (depth + 1)
    trystate = [0] * (depth + 1)
    dead = set()
    level = 0
    while True:
        if level == depth:
            return GammaPath(z, np.array(path[: n_steps + 1], np.int64))
        y = path[level]
        t = z.t + level
        moved = False
        while trystate[level] < 2:
            d = 1 if trystate[level] == 0 else -1
            trystate[level] += 1
            if cfg.is_open_xtd(y, t, d) and (level + 1, y + d) not in dead:
                path[level + 1] = y + d
                trystate[level + 1] = 0
                level += 1
                moved = True
                break
        if not moved:
            dead.add((level, y))
            if level == 0:
                return None
            level -= 1


def _site_percolates_explicit(cfg, x: int, t: int, horizon: int) -> bool:
    occ = {x}
    for k in range(horizon):
        tt = t + k
        occ = {y + d for y in occ for d in (1, -1) if cfg.is_open_xtd(y, tt, d)}
        if not occ:
            return False
    return True


def find_break_points(cfg, rho: LatticePath, horizon: int) -> RegenSequence:
    """Break times of ``rho``: levels n >= 1 whose site (rho(n), n)
    percolates ``horizon`` further levels, plus the increments between
    consecutive break times (T_0 = 0)."""
    if rho.boundary_contact:
        raise ValueError("rho path touched the truncation boundary; replicate invalid")
    if rho.died_at is not None:
        raise ValueError("rho path died under truncation; replicate invalid")
    pos = np.asarray(rho.positions, np.int64)
    if isinstance(cfg, PercConfig):
        mask = np.asarray(kernels.break_mask(cfg.seed, cfg.p, pos, rho.start.t, horizon), bool)
    else:
        mask = np.zeros(pos.size, bool)
        for n in range(1, pos.size):
            mask[n] = _site_percolates_explicit(cfg, int(pos[n]), rho.start.t + n, horizon)
    bts = np.nonzero(mask)[0].astype(np.int64)
    X = np.diff(pos[bts], prepend=pos[0]).astype(np.int64)
    tau = np.diff(bts, prepend=np.int64(0))
    return RegenSequence(bts, X, tau)


# ---------------------------------------------------------------------------
# increment collection and moment estimation


def _collect_increments(params, n_increments, horizon, window, seed, inc_per_replicate=64, max_steps=1 << 14):
    """Fixed-count increment collection at each parameter, on shared noise.

    For every replicate sub-seed and every parameter, the rho trace is
    extended (doubling n_steps) until ``inc_per_replicate + 1`` break
    points exist; the first increment is discarded and the next
    ``inc_per_replicate`` are kept.  Returns, per parameter, arrays
    (X, tau, replicate_id) plus the invalid-replicate count.
    """
    k = inc_per_replicate
    need_reps = -(-n_increments // k)
    attempts = need_reps + max(2, need_reps // 50)
    out = {q: ([], [], []) for q in params}
    invalid = {q: 0 for q in params}
    n0 = int(2.4 * (k + 1)) + 32
    for r in range(attempts):
        sd = spawn_seed(seed, r)
        for q in params:
            xs, ts, ids = out[q]
            if len(ids) >= need_reps:
                continue
            n_steps = n0
            got = None
            while n_steps <= max_steps:
                pos, boundary, died = kernels.rho_trace(sd, q, 0, 0, n_steps, n_steps + 16)
                if boundary or died >= 0:
                    break
                mask = np.asarray(kernels.break_mask(sd, q, np.asarray(pos, np.int64), 0, horizon), bool)
                bts = np.nonzero(mask)[0]
                if bts.size >= k + 1:
                    got = (np.asarray(pos, np.int64), bts[: k + 1])
                    break
                n_steps *= 2
            if got is None:
                invalid[q] += 1
                continue
            pos, bts = got
            X = np.diff(pos[bts])  # increments 2 .. k+1
            tau = np.diff(bts)
            xs.append(X)
            ts.append(tau)
            ids.append(r)
    result = {}
    for q in params:
        xs, ts, ids = out[q]
        if sum(x.size for x in xs) < n_increments:
            raise InsufficientSampleError(
                f"collected {sum(x.size for x in xs)} increments at p={q}, needed {n_increments} "
                f"({invalid[q]} invalid replicates of {attempts})"
            )
        X = np.concatenate(xs).astype(float)
        tau = np.concatenate(ts).astype(float)
        rid = np.repeat(np.asarray(ids), [x.size for x in xs])
        result[q] = (X, tau, rid, invalid[q])
    return result


def _alpha_fn(X, tau):
    return X.mean() / tau.mean()


def _sigma2_fn(X, tau):
    mx, mt = X.mean(), tau.mean()
    return np.mean((X * mt - tau * mx) ** 2) / mt**3


def estimate_moments(
    p,
    eps_list=(),
    i_max=2,
    j_max=2,
    n_increments=100_000,
    horizon=60,
    window=None,
    seed=0,
    inc_per_replicate=64,
):
    """Increment-moment estimates f_ij, alpha, sigma2 at ``p`` and at
    ``p +- eps`` for every eps in ``eps_list``, on common noise.

    Returns a dict parameter -> MomentEstimates.  Increments with index
    1 are discarded (only increments from the second break on are
    identically distributed); standard errors come from 32
    nonoverlapping batches of whole replicates.
    """
    if n_increments < 100:
        raise ValueError("n_increments must be >= 100")
    del window  # the trace window follows the adaptive n_steps; kept for API symmetry
    params = {float(p)}
    for e in eps_list:
        if not 0 < e <= min(p, 1.0 - p):
            raise ValueError(f"eps={e} outside (0, min(p, 1-p)]")
        params |= {float(p - e), float(p + e)}
    data = _collect_increments(sorted(params), n_increments, horizon, None, seed, inc_per_replicate)
    out = {}
    for q, (X, tau, rid, inval) in data.items():
        f_ij = {}
        for i in range(i_max + 1):
            for j in range(j_max + 1):
                if i + j == 0:
                    continue
                est, se, _ = batch_statistic(lambda x, t, i=i, j=j: np.mean(x**i * t**j), rid, 32, X, tau)
                f_ij[(i, j)] = (est, se)
        a_est, a_se, n = batch_statistic(_alpha_fn, rid, 32, X, tau)
        s_est, s_se, _ = batch_statistic(_sigma2_fn, rid, 32, X, tau)
        out[q] = MomentEstimates(
            p=q,
            f_ij=f_ij,
            alpha=(a_est, a_se),
            sigma2=(s_est, s_se),
            n_samples=n,
            n_replicates=int(np.unique(rid).size),
            n_invalid=inval,
            seed=int(seed),
            horizon=horizon,
        )
    return out


def central_difference(f, p, h):
    """Plain central finite difference (f(p+h) - f(p-h)) / (2h)."""
    return (f(p + h) - f(p - h)) / (2.0 * h)


def estimate_alpha_prime(
    p,
    h=0.02,
    eps=None,
    n_increments=100_000,
    horizon=60,
    seed=0,
    inc_per_replicate=64,
) -> AlphaPrimeEstimate:
    """Velocity derivative at ``p``.

    Primary estimate: central difference of the velocity at p +- h on
    common noise (the same replicate sub-seeds feed both parameters, so
    most of the Monte Carlo noise cancels in the difference).
    Cross-check: the coupled-increment estimator
    mean(X+ - alpha*tau+) / (E[tau2] * eps) over the increments of the
    p + eps path, which targets the same derivative up to O(eps).
    A warning is emitted when the two disagree by more than 3 combined
    standard errors.
    """
    if eps is None:
        eps = h
    el = sorted({float(h)} | {float(eps)})
    data = _collect_increments(
        sorted({float(p)} | {float(p - e) for e in el} | {float(p + e) for e in el}),
        n_increments,
        horizon,
        None,
        seed,
        inc_per_replicate,
    )
    X0, tau0, rid0, _ = data[float(p)]
    Xp, taup, ridp, _ = data[float(p + h)]
    Xm, taum, ridm, _ = data[float(p - h)]
    alpha0 = _alpha_fn(X0, tau0)
    e_tau = tau0.mean()

    # joint batches so the common-noise correlation benefits the SE
    nb = 32
    lo = min(rid0.min(), ridp.min(), ridm.min())
    hi = max(rid0.max(), ridp.max(), ridm.max()) + 1
    edges = np.linspace(lo, hi, nb + 1)

    def per_batch(rid, X, tau, fn):
        vals = []
        for i in range(nb):
            m = (rid >= edges[i]) & (rid < edges[i + 1])
            vals.append(fn(X[m], tau[m]) if m.any() else np.nan)
        return np.array(vals)

    a_plus = per_batch(ridp, Xp, taup, _alpha_fn)
    a_minus = per_batch(ridm, Xm, taum, _alpha_fn)
    fd_batches = (a_plus - a_minus) / (2.0 * h)
    fd_batches = fd_batches[np.isfinite(fd_batches)]
    central = (_alpha_fn(Xp, taup) - _alpha_fn(Xm, taum)) / (2.0 * h)
    central_se = float(fd_batches.std(ddof=1) / np.sqrt(fd_batches.size))

    Xe, taue, ride, _ = data[float(p + eps)]
    coupled = float(np.mean(Xe - alpha0 * taue) / (e_tau * eps))
    cp_batches = per_batch(ride, Xe, taue, lambda x, t: np.mean(x - alpha0 * t) / (e_tau * eps))
    cp_batches = cp_batches[np.isfinite(cp_batches)]
    coupled_se = float(cp_batches.std(ddof=1) / np.sqrt(cp_batches.size))

    result = AlphaPrimeEstimate(
        estimate=float(central),
        stderr=central_se,
        coupled=coupled,
        coupled_stderr=coupled_se,
        h=float(h),
        eps=float(eps),
        n_samples=int(X0.size),
    )
    if result.discrepancy_sigmas > 3.0:
        warnings.warn(
            f"velocity-derivative estimators disagree: central {central:.4f} (+-{central_se:.4f}) "
            f"vs coupled {coupled:.4f} (+-{coupled_se:.4f}), {result.discrepancy_sigmas:.1f} sigma",
            stacklevel=2,
        )
    return result


def estimate_decay(p, n_max=30, replicates=100_000, horizon=60, seed=0, n_min=1) -> DecayEstimate:
    """Exponential-decay fit of the defect probability.

    q(n) = P(the origin reaches level n but not level n_max + horizon),
    estimated from single-site clusters; the log of q is fit linearly
    over the levels in [n_min, n_max] whose event count exceeds 10.
    """
    n_total = n_max + horizon
    depths = np.empty(replicates, np.int64)
    for r in range(replicates):
        depths[r] = kernels.max_depth_reached(spawn_seed(seed, r), p, 0, 0, n_total)
    defect = depths < n_total
    levels = np.arange(1, n_max + 1)
    counts = np.array([(defect & (depths >= n)).sum() for n in levels])
    if counts.sum() == 0:
        return DecayEstimate(
            c1=float("nan"),
            c2=float("nan"),
            r_squared=float("nan"),
            slope_se=float("nan"),
            n_points=0,
            levels=levels,
            counts=counts,
            replicates=replicates,
            no_events=True,
            message="no decay events",
        )
    use = (counts > 10) & (levels >= n_min)
    if use.sum() < 4:
        raise DecayFitError(f"only {int(use.sum())} usable levels (counts > 10 within [{n_min}, {n_max}])")
    q = counts[use] / replicates
    fit = fit_line(levels[use], np.log(q))
    return DecayEstimate(
        c1=float(np.exp(fit.intercept)),
        c2=float(-fit.slope),
        r_squared=fit.r_squared,
        slope_se=fit.slope_se,
        n_points=fit.n_points,
        levels=levels,
        counts=counts,
        replicates=replicates,
    )
