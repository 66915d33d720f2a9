"""Continuum sticky-pair samplers and reflection primitives.

The left-right pair (l, r) evolves as two independent Brownian motions
with drifts -b and +b while apart; once they first touch (or cross, on
a grid) they restart from the common point and follow the exact
construction:

    r(t) = B'(t - C(t)) + Z(C(t)),   l(t) = B'(t - C(t)) - Z(C(t)),

where Z is the Skorohod reflection at 0 of A(s) = B(s) + 2bs, the
inverse time change is explicit,

    C^{-1}(s) = 2s - (1/b) * min(0, inf_{u<=s} A(u)),

and B, B' are independent Brownian motions.  C^{-1} is simulated on a
fine s-grid and inverted by monotone linear interpolation; B' is then
sampled exactly on the (nonuniform, strictly increasing) time grid
t - C(t).  The half-gap Z(C(t)) is nonnegative by construction, so the
ordering l <= r after the meeting holds on every grid point.

An independent cross-check for gap laws lives in ``gap_walk_oracle``:
a birth-death chain on h*Z>=0 whose interior steps carry the drift bias
and whose escape probability from 0 is proportional to h, reproducing
the sticky boundary behavior as h -> 0.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._backend import kernels
from .noise import spawn_seed


@dataclasses.dataclass
class ContinuumPath:
    """A real-valued path sampled on the uniform grid t0 + k*dt."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        self.values = np.asarray(self.values, float)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    def value_at(self, t):
        """Linear interpolation between grid points."""
        return np.interp(t, self.times, self.values)

    def __len__(self):
        return self.values.size


@dataclasses.dataclass
class TimeChange:
    """The time change C of the sticky construction, tabulated via its
    explicit inverse on an s-grid."""

    s_grid: np.ndarray
    cinv_values: np.ndarray

    def check_invariants(self):
        d = np.diff(self.cinv_values)
        if not np.all(d > 0):
            raise AssertionError("C^{-1} must be strictly increasing")

    def c(self, t):
        return np.interp(t, self.cinv_values, self.s_grid)

    def cinv(self, s):
        return np.interp(s, self.s_grid, self.cinv_values)


@dataclasses.dataclass
class StickyPairSample:
    """A sampled left-right pair with meeting time ``tau`` (None when the
    paths never met within the horizon)."""

    l: ContinuumPath
    r: ContinuumPath
    tau: float | None
    b: float
    time_change: TimeChange | None = None

    @property
    def gap(self) -> np.ndarray:
        return self.r.values - self.l.values


def skorohod_reflect(f):
    """Skorohod reflection at 0: g = f - min(0, running-min f).

    Accepts a ContinuumPath or a plain array (f[0] >= 0 required);
    returns (reflected, regulator) of the same kind.  The regulator is
    nondecreasing and increases only where g sits at 0 (up to grid
    resolution).
    """
    path = isinstance(f, ContinuumPath)
    vals = f.values if path else np.asarray(f, float)
    if vals[0] < 0:
        raise ValueError("Skorohod reflection needs f(t0) >= 0")
    run_min = np.minimum.accumulate(vals)
    reg = np.maximum(0.0, -run_min)
    g = vals + reg
    if path:
        return ContinuumPath(f.t0, f.dt, g), ContinuumPath(f.t0, f.dt, reg)
    return g, reg


def _phase2(rng, b, x_meet, theta, ds):
    """Exact post-meeting pair evaluated at offsets ``theta`` (theta[0] = 0)
    after the meeting, from meeting point x_meet.

    The driving reflected path lives on the internal s-grid of spacing
    ``ds``; ds should be well below the theta spacing, since evaluating
    the half-gap between s-nodes at fractional phase loses a variance
    fraction of order ds per output step (and correspondingly biases
    the cross-variation of the output increments upward).

    Returns (l, r, time_change) arrays of length len(theta).
    """
    m_steps = int(math.ceil(theta[-1] / (2.0 * ds))) + 2
    s_grid = ds * np.arange(m_steps + 1)
    B = np.concatenate(([0.0], math.sqrt(ds) * np.cumsum(rng.standard_normal(m_steps))))
    A = B + 2.0 * b * s_grid
    run_min = np.minimum(0.0, np.minimum.accumulate(A))
    Z = A - run_min
    cinv = 2.0 * s_grid - run_min / b
    s_star = np.interp(theta, cinv, s_grid)
    half_gap = np.interp(theta, cinv, Z)
    u = theta - s_star
    du = np.diff(u)
    bp = np.concatenate(([0.0], np.cumsum(np.sqrt(du) * rng.standard_normal(du.size))))
    r = x_meet + bp + half_gap
    l = x_meet + bp - half_gap
    return l, r, TimeChange(s_grid, cinv)


def sample_sticky_pair_exact(b, z_minus, z_plus, T, dt, seed, refine=16) -> StickyPairSample:
    """One exact draw of the left-right pair on the grid k*dt, k <= T/dt.

    ``z_minus`` starts the left path (drift -b), ``z_plus`` the right
    path (drift +b); either initial ordering is allowed.  While the
    sign of l - r has not changed, the paths are independent drifted
    Brownian motions; from the first time (on the internal grid
    dt/refine) where the initial sign is lost, both restart at the
    midpoint and follow the exact sticky construction.

    ``refine`` sets the internal resolution: meeting detection runs on
    the dt/refine grid, and the post-meeting reflected path uses an
    s-grid of spacing dt/(2*refine).  The returned paths are reported
    on the dt-grid; ``tau`` keeps the internal-grid meeting time.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    if refine < 1:
        raise ValueError("refine must be >= 1")
    rng = np.random.default_rng(int(seed))
    n = int(round(T / dt))
    if n < 1:
        raise ValueError("T/dt must be at least 1")
    out_times = dt * np.arange(n + 1)
    ds = dt / (2.0 * refine)
    l0, r0 = float(z_minus), float(z_plus)
    if l0 == r0:
        l2, r2, tc = _phase2(rng, b, l0, out_times, ds)
        return StickyPairSample(
            ContinuumPath(0.0, dt, l2), ContinuumPath(0.0, dt, r2), 0.0, b, tc
        )
    dt_f = dt / refine
    n_f = n * refine
    s0 = 1.0 if l0 > r0 else -1.0
    sq = math.sqrt(dt_f)
    l_f = np.concatenate(([l0], l0 + np.cumsum(-b * dt_f + sq * rng.standard_normal(n_f))))
    r_f = np.concatenate(([r0], r0 + np.cumsum(b * dt_f + sq * rng.standard_normal(n_f))))
    crossed = np.nonzero((l_f - r_f) * s0 <= 0.0)[0]
    if crossed.size == 0:
        return StickyPairSample(
            ContinuumPath(0.0, dt, l_f[::refine].copy()),
            ContinuumPath(0.0, dt, r_f[::refine].copy()),
            None, b, None,
        )
    k_f = int(crossed[0])
    tau = k_f * dt_f
    x_meet = 0.5 * (l_f[k_f] + r_f[k_f])
    n_pre = int(np.searchsorted(out_times, tau, side="left"))
    theta = out_times[n_pre:] - tau
    if theta.size == 0 or theta[0] > 0:
        theta = np.concatenate(([0.0], theta))
        drop_first = True
    else:
        drop_first = False
    l2, r2, tc = _phase2(rng, b, x_meet, theta, ds)
    if drop_first:
        l2, r2 = l2[1:], r2[1:]
    return StickyPairSample(
        ContinuumPath(0.0, dt, np.concatenate((l_f[: n_pre * refine : refine], l2))),
        ContinuumPath(0.0, dt, np.concatenate((r_f[: n_pre * refine : refine], r2))),
        tau, b, tc,
    )


def sample_sticky_gap(b, w0, T, dt, seed, refine=16) -> ContinuumPath:
    """The sticky nonnegative gap process w with drift sqrt(2)*b.

    Sampled as (r - l)/sqrt(2) from an exact pair started at distance
    sqrt(2) * w0 (w0 >= 0); its law solves
    dw = sqrt(2) b dt + 1_{w != 0} dB with sticky reflection at 0.
    """
    if w0 < 0:
        raise ValueError("w0 must be nonnegative")
    pair = sample_sticky_pair_exact(b, 0.0, math.sqrt(2.0) * w0, T, dt, seed, refine=refine)
    w = (pair.r.values - pair.l.values) / math.sqrt(2.0)
    return ContinuumPath(0.0, pair.l.dt, w)


def sample_sticky_pair_em(b, threshold, z_minus, z_plus, T, dt, seed) -> StickyPairSample:
    """Euler scheme for the pair SDE; a qualitative cross-check only.

    Within ``threshold`` of each other the two paths consume one shared
    noise increment (their moves then differ by exactly 2*b*dt); apart,
    they consume independent increments.
    """
    if b <= 0 or dt <= 0 or T <= 0 or threshold < 0:
        raise ValueError("b, dt, T must be positive and threshold nonnegative")
    rng = np.random.default_rng(int(seed))
    n = int(round(T / dt))
    l = np.empty(n + 1)
    r = np.empty(n + 1)
    l[0], r[0] = float(z_minus), float(z_plus)
    sq = math.sqrt(dt)
    zl = rng.standard_normal(n)
    zr = rng.standard_normal(n)
    tau = None
    sign0 = np.sign(l[0] - r[0])
    for k in range(n):
        together = abs(r[k] - l[k]) <= threshold
        if together:
            shared = sq * zl[k]
            l[k + 1] = l[k] - b * dt + shared
            r[k + 1] = r[k] + b * dt + shared
        else:
            l[k + 1] = l[k] - b * dt + sq * zl[k]
            r[k + 1] = r[k] + b * dt + sq * zr[k]
        if tau is None and (l[k + 1] - r[k + 1]) * sign0 <= 0:
            tau = (k + 1) * dt
    if sign0 == 0:
        tau = 0.0
    return StickyPairSample(ContinuumPath(0.0, dt, l), ContinuumPath(0.0, dt, r), tau, b)


def gap_walk_oracle(b, w0, t, h, n_rep, seed) -> np.ndarray:
    """Terminal values of the sticky birth-death oracle for the gap law.

    Independent brute-force check: a chain on h*Z>=0 stepping every h^2
    of model time, with interior up-probability (1 + sqrt(2) b h)/2 and
    escape probability sqrt(2) b h from 0 (holding otherwise).  Its
    terminal law converges to the sticky gap law as h -> 0.
    """
    if b <= 0 or h <= 0:
        raise ValueError("b and h must be positive")
    if math.sqrt(2.0) * b * h >= 1.0:
        raise ValueError("sqrt(2)*b*h must be < 1 for valid step probabilities")
    n_steps = int(round(t / (h * h)))
    return np.asarray(kernels.gap_walk_final(np.uint64(seed), float(b), float(w0), float(h), n_steps, int(n_rep)))


def sticky_gap_ensemble(b, w0, T, dt, seed, n_rep, refine=16) -> np.ndarray:
    """Terminal w-values (gap / sqrt(2) at time T) of n_rep exact draws.

    Same observable as ``gap_walk_oracle``, so the two ensembles can be
    compared directly.
    """
    out = np.empty(n_rep)
    for i in range(n_rep):
        w = sample_sticky_gap(b, w0, T, dt, int(spawn_seed(seed, i)), refine=refine)
        out[i] = w.values[-1]
    return out
