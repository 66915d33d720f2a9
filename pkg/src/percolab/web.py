"""Coalescing arrow walks, branching extremal paths, and dynamical variants.

Every even site (x, t) carries an arrow pointing to (x+1, t+1) or
(x-1, t+1), chosen by a fair coin from the site-keyed hash stream.  A
walk follows the arrows; two walks occupying the same site follow the
same arrow forever after, so walks coalesce on meeting and never cross.

The eps-branching field adds, independently per site with probability
eps, a second outgoing arrow in the direction opposite the base arrow.
The rightmost (leftmost) path through the branching field takes the
forced +1 (-1) step wherever the extra arrow exists and the base arrow
otherwise, giving a +-1 path with per-step drift +eps (-eps).

Dynamical variants re-randomize in a second time direction s:

* ``DynamicalArrowField`` flips each site's arrow at the jumps of an
  independent per-site Poisson clock, so the arrow at chain time s is
  the base arrow composed with the parity of a Poisson(rate * s) count.
* ``evolve_dynamical_percolation`` runs an independent two-state Markov
  chain per directed edge with stationary law Bernoulli(p): holding
  rates are rate*(1-p) when open and rate*p when closed, and the
  initial state is the static p-configuration of the same noise field,
  so the chain-time-0 slice coincides bitwise with ``PercConfig``.

All randomness is a pure function of (seed, site/edge, channel), so
walks, extremal paths, and chain trajectories are reproducible and two
paths in the same field share every arrow they both visit.
"""

from __future__ import annotations

import dataclasses
from typing import Mapping, Sequence

import numpy as np

from ._backend import kernels
from .continuum import ContinuumPath
from .coupling import RescaledPair, pair_functionals
from .noise import CHANNELS, EdgeRef, NoiseField, PercConfig, Site, spawn_seed, stream_uniform
from .paths import GammaPath, LatticePath

_MODES = {"walk": 0, "left": 1, "right": 2}


@dataclasses.dataclass(frozen=True)
class ArrowField:
    """Hash-keyed arrow field with optional eps-branching.

    ``arrow`` is the base +-1 arrow at a site; ``branch_extra`` is the
    extra opposite-direction arrow (None when absent).  ``eps`` is the
    per-site probability of the extra arrow; eps = 0 is the plain
    coalescing-walk field.
    """

    seed: int
    eps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(np.uint64(self.seed)))
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"eps must be in [0, 1], got {self.eps}")

    def arrow(self, site: Site) -> int:
        u = stream_uniform(self.seed, site.x, site.t, 0, CHANNELS["arrow"])
        return 1 if u < 0.5 else -1

    def branch_extra(self, site: Site) -> int | None:
        if self.eps == 0.0:
            return None
        u = stream_uniform(self.seed, site.x, site.t, 0, CHANNELS["branch"])
        if u < self.eps:
            return -self.arrow(site)
        return None

    def out_directions(self, site: Site) -> tuple[int, ...]:
        """Sorted tuple of outgoing directions (one or two entries)."""
        dirs = {self.arrow(site)}
        extra = self.branch_extra(site)
        if extra is not None:
            dirs.add(extra)
        return tuple(sorted(dirs))

    def spawn(self, index: int) -> "ArrowField":
        return ArrowField(int(spawn_seed(self.seed, index)), self.eps)


@dataclasses.dataclass
class ForcedArrowField:
    """Explicit arrow assignment for tests; duck-compatible with ArrowField.

    ``arrows`` maps (x, t) to the base arrow; missing sites get
    ``default``.  ``extras`` maps (x, t) to a forced extra direction.
    """

    arrows: Mapping[tuple[int, int], int]
    default: int = 1
    extras: Mapping[tuple[int, int], int] = dataclasses.field(default_factory=dict)

    def arrow(self, site: Site) -> int:
        d = int(self.arrows.get((site.x, site.t), self.default))
        if d not in (-1, 1):
            raise ValueError(f"arrow must be -1 or +1, got {d}")
        return d

    def branch_extra(self, site: Site) -> int | None:
        e = self.extras.get((site.x, site.t))
        return None if e is None else int(e)


def _python_trace(field, z: Site, n_steps: int, mode: int) -> np.ndarray:
    pos = np.empty(n_steps + 1, np.int64)
    x = z.x
    pos[0] = x
    for k in range(n_steps):
        site = Site(x, z.t + k)
        d = field.arrow(site)
        if mode != 0:
            extra = field.branch_extra(site)
            if extra is not None:
                d = 1 if mode == 2 else -1
        x += d
        pos[k + 1] = x
    return pos


def trace_walk(field, z: Site, n_steps: int) -> GammaPath:
    """The coalescing walk started at z, following base arrows only."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if isinstance(field, ArrowField):
        out = kernels.web_paths(np.uint64(field.seed), 0.0, np.array([z.x], np.int64), z.t, n_steps, 0)
        pos = np.asarray(out[0])
    else:
        pos = _python_trace(field, z, n_steps, 0)
    return GammaPath(start=z, positions=pos)


def trace_extremal(field, z: Site, n_steps: int, side: str) -> GammaPath:
    """Rightmost or leftmost path through the branching field.

    ``side`` is "right" or "left".  With eps = 0 this equals
    ``trace_walk``.
    """
    if side not in ("left", "right"):
        raise ValueError(f'side must be "left" or "right", got {side!r}')
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    mode = 2 if side == "right" else 1
    if isinstance(field, ArrowField):
        out = kernels.web_paths(
            np.uint64(field.seed), float(field.eps), np.array([z.x], np.int64), z.t, n_steps, mode
        )
        pos = np.asarray(out[0])
    else:
        pos = _python_trace(field, z, n_steps, mode)
    return GammaPath(start=z, positions=pos)


def extremal_pair(field, z: Site, n_steps: int) -> tuple[GammaPath, GammaPath]:
    """(leftmost, rightmost) pair from a common start; left <= right always."""
    left = trace_extremal(field, z, n_steps, "left")
    right = trace_extremal(field, z, n_steps, "right")
    if np.any(right.positions < left.positions):
        raise AssertionError("extremal ordering violated")
    return left, right


def walk_ensemble(field: ArrowField, x0s, t0: int, n_steps: int, mode: str = "walk") -> np.ndarray:
    """Positions array (n_walks, n_steps + 1) for many starts at level t0."""
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {sorted(_MODES)}, got {mode!r}")
    x0s = np.asarray(x0s, np.int64)
    if np.any((x0s + t0) % 2 != 0):
        raise ValueError("start sites must satisfy (x + t) even")
    out = kernels.web_paths(np.uint64(field.seed), float(field.eps), x0s, int(t0), int(n_steps), _MODES[mode])
    return np.asarray(out)


def extremal_pair_ensemble(
    seed, eps: float, n_steps: int, n_rep: int, delta=(0.05,), report_time=None, gap_quantum=None
):
    """Functionals of rescaled extremal pairs, one record per sub-seed.

    Each replicate traces the (leftmost, rightmost) pair from (0, 0) in
    its own eps-branching field and rescales by x -> eps*x,
    t -> eps^2*t.  The extremal drifts -+eps per step become -+1 after
    rescaling, so the comparable sticky pair has unit drift parameter.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    records = []
    dt = eps * eps
    t_grid = dt * np.arange(n_steps + 1)
    for i in range(n_rep):
        field = ArrowField(int(spawn_seed(seed, i)), eps)
        left, right = extremal_pair(field, Site(0, 0), n_steps)
        rp = RescaledPair(
            l=ContinuumPath(t0=0.0, dt=dt, values=eps * left.positions),
            r=ContinuumPath(t0=0.0, dt=dt, values=eps * right.positions),
            meeting_time=0.0,
        )
        records.append(pair_functionals(rp, delta, t_grid, report_time=report_time, gap_quantum=gap_quantum))
    return records


# ---------------------------------------------------------------------------
# dynamical arrow field


@dataclasses.dataclass(frozen=True)
class DynamicalArrowField:
    """Arrow field whose arrows flip at per-site Poisson(rate) times."""

    base: ArrowField
    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError(f"rate must be > 0, got {self.rate}")

    def flip_count(self, site: Site, s: float) -> int:
        """Number of flips of this site's arrow in chain time [0, s]."""
        if s < 0.0:
            raise ValueError("chain time s must be >= 0")
        out = kernels.dyn_flip_counts(
            np.uint64(self.base.seed), np.array([site.x], np.int64), np.array([site.t], np.int64), self.rate, float(s)
        )
        return int(out[0])

    def arrow_at(self, site: Site, s: float) -> int:
        a = self.base.arrow(site)
        return -a if self.flip_count(site, s) % 2 == 1 else a

    def at(self, s: float) -> "_DynSnapshot":
        """Frozen chain-time-s slice, duck-compatible with ArrowField."""
        return _DynSnapshot(self, float(s))


@dataclasses.dataclass(frozen=True)
class _DynSnapshot:
    field: DynamicalArrowField
    s: float

    def arrow(self, site: Site) -> int:
        return self.field.arrow_at(site, self.s)

    def branch_extra(self, site: Site) -> None:
        return None


@dataclasses.dataclass(frozen=True)
class DynamicalWebEvolution:
    """Walks from common starts re-traced at each chain time.

    ``positions[i, j]`` is the path (length n_steps + 1) of start j in
    the slice at chain time ``s_values[i]``.
    """

    s_values: np.ndarray
    starts: tuple[Site, ...]
    positions: np.ndarray

    def path(self, i_s: int, i_start: int) -> GammaPath:
        return GammaPath(start=self.starts[i_start], positions=self.positions[i_s, i_start].copy())

    def together_fraction(self, i: int, j: int) -> float:
        """Fraction of (start, level) pairs where slices i and j agree."""
        return float(np.mean(self.positions[i] == self.positions[j]))


def evolve_dynamical(
    field: DynamicalArrowField, s_list: Sequence[float], starts: Sequence[Site] | None = None, n_steps: int = 100
) -> DynamicalWebEvolution:
    """Trace walks from ``starts`` in every chain-time slice in s_list.

    All starts must sit on a common level; s_list must be nondecreasing
    and nonnegative.  Slice s = 0 reproduces the static walks.
    """
    s_values = np.asarray(list(s_list), float)
    if s_values.size == 0:
        raise ValueError("s_list must be nonempty")
    if np.any(s_values < 0.0) or np.any(np.diff(s_values) < 0.0):
        raise ValueError("s_list must be nondecreasing and nonnegative")
    if starts is None:
        starts = (Site(0, 0),)
    starts = tuple(starts)
    t0 = starts[0].t
    if any(z.t != t0 for z in starts):
        raise ValueError("all starts must share one level")
    x0s = np.array([z.x for z in starts], np.int64)
    pos = np.empty((s_values.size, len(starts), n_steps + 1), np.int64)
    for i, s in enumerate(s_values):
        pos[i] = np.asarray(kernels.dyn_web_paths(np.uint64(field.base.seed), field.rate, float(s), x0s, t0, n_steps))
    return DynamicalWebEvolution(s_values=s_values, starts=starts, positions=pos)


# ---------------------------------------------------------------------------
# dynamical percolation


def expected_edge_autocov(p: float, rate: float, s) -> np.ndarray:
    """Stationary autocovariance p(1-p)exp(-rate*s) of one edge chain."""
    return p * (1.0 - p) * np.exp(-rate * np.asarray(s, float))


class DynamicalPercolation:
    """Per-edge two-state chains over a static noise field.

    Edge states are queried in batch at the construction-time chain
    times ``s_values`` (sorted, nonnegative).  The s = 0 slice equals
    the static configuration ``PercConfig(noise, p)`` bit for bit.
    """

    def __init__(self, noise: NoiseField, p: float, rate: float, s_values):
        if not 0.0 < p < 1.0:
            raise ValueError(f"p must be in (0, 1), got {p}")
        if not rate > 0.0:
            raise ValueError(f"rate must be > 0, got {rate}")
        s_values = np.asarray(list(s_values), float)
        if s_values.size == 0:
            raise ValueError("s_values must be nonempty")
        if np.any(s_values < 0.0) or np.any(np.diff(s_values) < 0.0):
            raise ValueError("s_values must be nondecreasing and nonnegative")
        self.noise = noise
        self.p = float(p)
        self.rate = float(rate)
        self.s_values = s_values

    def static(self) -> PercConfig:
        return PercConfig(self.noise, self.p)

    def edge_states(self, xs, ts, dirs, s_values=None) -> np.ndarray:
        """uint8 array (n_edges, n_s): state of each edge at each chain time."""
        xs = np.asarray(xs, np.int64)
        ts = np.asarray(ts, np.int64)
        dirbits = (np.asarray(dirs, np.int64) > 0).astype(np.int64)
        sv = self.s_values if s_values is None else np.asarray(list(s_values), float)
        out = kernels.dyn_edge_states(np.uint64(self.noise.seed), self.p, self.rate, xs, ts, dirbits, sv)
        return np.asarray(out)

    def is_open(self, e: EdgeRef, s: float) -> bool:
        st = self.edge_states(
            np.array([e.site.x]), np.array([e.site.t]), np.array([e.dir]), np.array([float(s)])
        )
        return bool(st[0, 0])

    def autocov_estimate(self, xs, ts, dirs) -> tuple[np.ndarray, np.ndarray]:
        """Estimated cov(state at s_values[0], state at each s) and its SE.

        Distinct edges carry independent chains, so the given edges act
        as i.i.d. replicates; covariance is taken against the exact
        stationary mean p.
        """
        states = self.edge_states(xs, ts, dirs).astype(float)
        ref = states[:, 0] - self.p
        prods = ref[:, None] * (states - self.p)
        est = prods.mean(axis=0)
        se = prods.std(axis=0, ddof=1) / np.sqrt(states.shape[0])
        return est, se

    def trace_rho_at(self, z: Site, n_steps: int, window: int, s: float) -> LatticePath:
        """Rightmost reachable position in the chain-time-s configuration.

        Same semantics as the static tracer: source is every even site
        in [z.x - window, z.x] x {z.t}; the boundary flag is raised when
        the recorded position enters the light cone of the cut.
        """
        if window <= n_steps:
            raise ValueError("window must exceed n_steps")
        width = window + n_steps + 1
        left = z.x - window
        xs_line = left + np.arange(width, dtype=np.int64)
        xs = np.tile(xs_line, 2 * n_steps)
        ts = np.repeat(z.t + np.arange(n_steps, dtype=np.int64), 2 * width)
        dirs = np.tile(np.repeat(np.array([1, -1], np.int64), width), n_steps)
        states = self.edge_states(xs, ts, dirs, np.array([float(s)]))[:, 0]
        states = states.reshape(n_steps, 2, width).astype(bool)

        idx = np.arange(width, dtype=np.int64)
        occ = np.zeros(width, bool)
        occ[: window + 1] = ((left + idx[: window + 1] + z.t) & 1) == 0
        positions = np.empty(n_steps + 1, np.int64)
        positions[0] = z.x
        boundary = False
        died_at = None
        for n in range(1, n_steps + 1):
            open_p, open_m = states[n - 1, 0], states[n - 1, 1]
            nxt = np.zeros(width, bool)
            nxt[1:] = occ[:-1] & open_p[:-1]
            nxt[:-1] |= occ[1:] & open_m[1:]
            occ = nxt
            live = np.nonzero(occ)[0]
            if live.size == 0:
                died_at = n
                positions = positions[:n]
                break
            positions[n] = left + live[-1]
            if positions[n] <= left + n:
                boundary = True
        return LatticePath(
            start=z,
            positions=positions,
            boundary_contact=boundary,
            died_at=died_at,
            p=self.p,
            seed=int(self.noise.seed),
        )


def evolve_dynamical_percolation(noise: NoiseField, p: float, eps: float, s_list) -> DynamicalPercolation:
    """Dynamical percolation over ``noise`` with per-edge flip rate eps."""
    return DynamicalPercolation(noise, p, eps, s_list)
