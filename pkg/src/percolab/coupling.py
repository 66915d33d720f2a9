"""Coupled rightmost-path pairs, diffusive rescaling, and pair functionals.

A pair drives two rightmost-path traces off one shared noise field: the
minus path in the sparser configuration (p - eps) and the plus path in
the denser one (p + eps).  Because the open edge sets are nested, a
plus path that catches up with a minus path stays weakly above it
forever; the first common time where that holds is the meeting index.

Rescaling sends lattice space-time (x, t) to (((eps/b)(x - a t)),
eps^2 t) with a the centering velocity and b the diffusive scale.  The
functionals extracted from a rescaled pair (together-time occupation,
split cross-variation, terminal gap, meeting time, ordering-violation
count) are the observables the continuum left-right pair pins down.

Conventions chosen here and used consistently for both the lattice and
continuum ensembles:

- A grid increment counts as "together" only when the gap is within
  delta at both endpoints, "apart" only when outside delta at both;
  mixed increments (regime boundaries) belong to neither class.  A
  one-endpoint rule would book every separation step as a together
  increment with anticorrelated moves - a classification artifact that
  poisons the together-correlation no matter how sticky the paths are.
- The together-time occupation fraction is measured over grid points in
  [tau, min(tau + 1, end)].  With ``gap_quantum`` set, gaps are rounded
  to that quantum before the delta test, so a continuum ensemble is
  classified on the same discrete gap cells as a lattice ensemble.
- Meeting times are reported on the evaluation grid; a continuum pair
  simulated on a finer internal grid has its meeting time rounded to
  the nearest evaluation-grid point.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .continuum import ContinuumPath, sample_sticky_pair_exact
from .noise import NoiseField, Site, coupled_configs, spawn_seed
from .paths import LatticePath, trace_rho
from .stats import snap_to_grid


@dataclasses.dataclass(frozen=True)
class ScalingMap:
    """The affine space-time rescaling (x, t) -> ((eps/b)(x - a t), eps^2 t)."""

    a: float
    b: float
    eps: float

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("b must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def apply(self, x, t):
        return (self.eps / self.b) * (np.asarray(x, float) - self.a * np.asarray(t, float)), \
            self.eps ** 2 * np.asarray(t, float)

    def unapply(self, xi, s):
        t = np.asarray(s, float) / self.eps ** 2
        x = np.asarray(xi, float) * (self.b / self.eps) + self.a * t
        return x, t


def apply_scaling(path: LatticePath, m: ScalingMap) -> ContinuumPath:
    """Pointwise image of a lattice path's graph; dt becomes eps^2."""
    t_lat = path.start.t + np.arange(path.positions.size)
    xi, s = m.apply(path.positions, t_lat)
    return ContinuumPath(float(s[0]) if s.size else m.eps ** 2 * path.start.t, m.eps ** 2, xi)


@dataclasses.dataclass
class PairSample:
    """Two rightmost paths on one noise seed; ``meeting_index`` is the first
    common lattice time with plus >= minus (None if never within range)."""

    minus: LatticePath
    plus: LatticePath
    start_minus: Site
    start_plus: Site
    meeting_index: int | None

    @property
    def valid(self) -> bool:
        return not (
            self.minus.boundary_contact
            or self.plus.boundary_contact
            or self.minus.died_at is not None
            or self.plus.died_at is not None
        )

    def common_range(self):
        """Absolute lattice times both paths cover."""
        lo = max(self.start_minus.t, self.start_plus.t)
        hi = min(
            self.start_minus.t + self.minus.positions.size - 1,
            self.start_plus.t + self.plus.positions.size - 1,
        )
        return lo, hi

    def check_invariants(self):
        if self.minus.seed != self.plus.seed:
            raise AssertionError("pair paths must share one noise seed")
        if self.meeting_index is not None:
            lo, hi = self.common_range()
            if not lo <= self.meeting_index <= hi:
                raise AssertionError("meeting_index outside the common range")
            m = self.meeting_index
            pm = self.minus.positions[m - self.start_minus.t : hi + 1 - self.start_minus.t]
            pp = self.plus.positions[m - self.start_plus.t : hi + 1 - self.start_plus.t]
            if np.any(pp < pm):
                raise AssertionError("ordering violated after the meeting index")


def trace_pair(noise: NoiseField, p, eps, z_minus: Site, z_plus: Site, n_steps, window) -> PairSample:
    """Trace the coupled pair; ``n_steps`` counts steps after the later start.

    The earlier-started path is traced alone over the start offset and
    then alongside the other until both reach the common final time.
    """
    cfg_minus, cfg_plus = coupled_configs(noise, p, eps)
    t_common = max(z_minus.t, z_plus.t)
    t_end = t_common + n_steps
    pm = trace_rho(cfg_minus, z_minus, t_end - z_minus.t, window)
    pp = trace_rho(cfg_plus, z_plus, t_end - z_plus.t, window)
    pair = PairSample(pm, pp, z_minus, z_plus, None)
    lo, hi = pair.common_range()
    if hi >= lo:
        a = pm.positions[lo - z_minus.t : hi + 1 - z_minus.t]
        b = pp.positions[lo - z_plus.t : hi + 1 - z_plus.t]
        met = np.nonzero(b >= a)[0]
        if met.size:
            pair.meeting_index = lo + int(met[0])
    return pair


@dataclasses.dataclass
class RescaledPair:
    """A left-right pair on a common uniform rescaled-time grid."""

    l: ContinuumPath
    r: ContinuumPath
    meeting_time: float | None

    def check_invariants(self):
        if len(self.l) != len(self.r) or self.l.t0 != self.r.t0 or self.l.dt != self.r.dt:
            raise AssertionError("pair grids must coincide")
        if not (np.all(np.isfinite(self.l.values)) and np.all(np.isfinite(self.r.values))):
            raise AssertionError("pair values must be finite")


def rescale_pair(pair: PairSample, m: ScalingMap) -> RescaledPair:
    """Rescale both paths and align them on the grid from the later start."""
    lo, hi = pair.common_range()
    t_lat = np.arange(lo, hi + 1)
    lvals = pair.minus.positions[lo - pair.start_minus.t : hi + 1 - pair.start_minus.t]
    rvals = pair.plus.positions[lo - pair.start_plus.t : hi + 1 - pair.start_plus.t]
    xi_l, s = m.apply(lvals, t_lat)
    xi_r, _ = m.apply(rvals, t_lat)
    tau = None if pair.meeting_index is None else m.eps ** 2 * pair.meeting_index
    return RescaledPair(
        ContinuumPath(float(s[0]), m.eps ** 2, xi_l),
        ContinuumPath(float(s[0]), m.eps ** 2, xi_r),
        tau,
    )


@dataclasses.dataclass
class PairFunctionals:
    """Per-replicate pair observables.

    ``together_stats`` holds (n, sum dl, sum dr, sum dl^2, sum dr^2,
    sum dl*dr) over together-classified increments so ensemble-pooled
    correlations can be formed without keeping the increments.
    """

    meeting_time: float | None
    terminal_gap: float
    together_fraction: dict
    violations: int
    apart_cov_sum: float
    apart_steps: int
    together_stats: tuple
    boundary_steps: int
    grid_dt: float
    window_points: int

    @property
    def apart_cov_rate(self) -> float:
        """Apart-time covariation per unit time (0 when no apart steps)."""
        if self.apart_steps == 0:
            return 0.0
        return self.apart_cov_sum / (self.apart_steps * self.grid_dt)


def _pair_meeting_time(pair):
    if hasattr(pair, "meeting_time"):
        return pair.meeting_time
    return pair.tau


def pair_functionals(pair, delta, t_grid, report_time=None, gap_quantum=None) -> PairFunctionals:
    """Evaluate the pair observables on ``t_grid`` (uniform, increasing).

    ``delta`` may be a single width or a sequence of widths for the
    together-time occupation; cross-variation splitting always uses the
    first width.  ``report_time`` defaults to the end of the grid.
    """
    deltas = tuple(np.atleast_1d(np.asarray(delta, float)))
    t_grid = np.asarray(t_grid, float)
    if t_grid.size < 2:
        raise ValueError("t_grid needs at least two points")
    steps = np.diff(t_grid)
    dt = float(steps[0])
    if not np.allclose(steps, dt):
        raise ValueError("t_grid must be uniform")
    if report_time is None:
        report_time = float(t_grid[-1])
    if report_time > t_grid[-1] + 1e-12:
        raise ValueError("report_time beyond the grid")
    l = pair.l.value_at(t_grid)
    r = pair.r.value_at(t_grid)
    gap = r - l
    gap_cls = snap_to_grid(gap, gap_quantum) if gap_quantum else gap
    tau = _pair_meeting_time(pair)
    frac = {}
    violations = 0
    window_points = 0
    if tau is None:
        for d in deltas:
            frac[float(d)] = 0.0
    else:
        win = (t_grid >= tau - 1e-12) & (t_grid <= min(tau + 1.0, t_grid[-1]) + 1e-12)
        window_points = int(win.sum())
        after = t_grid >= tau - 1e-12
        violations = int(np.sum(gap[after] < 0))
        for d in deltas:
            frac[float(d)] = float(np.mean(np.abs(gap_cls[win]) <= d + 1e-12))
    dl = np.diff(l)
    dr = np.diff(r)
    d0 = deltas[0]
    tog = np.abs(gap) <= d0 + 1e-12
    both_t = tog[:-1] & tog[1:]
    both_a = ~tog[:-1] & ~tog[1:]
    mixed = int(dl.size - both_t.sum() - both_a.sum())
    tl, tr = dl[both_t], dr[both_t]
    together_stats = (
        int(tl.size),
        float(tl.sum()),
        float(tr.sum()),
        float(np.sum(tl * tl)),
        float(np.sum(tr * tr)),
        float(np.sum(tl * tr)),
    )
    terminal_gap = float(np.interp(report_time, t_grid, gap))
    return PairFunctionals(
        meeting_time=None if tau is None else float(tau),
        terminal_gap=terminal_gap,
        together_fraction=frac,
        violations=violations,
        apart_cov_sum=float(np.sum(dl[both_a] * dr[both_a])),
        apart_steps=int(both_a.sum()),
        together_stats=together_stats,
        boundary_steps=mixed,
        grid_dt=dt,
        window_points=window_points,
    )


def pooled_together_correlation(records) -> float:
    """Pearson correlation of together increments pooled over an ensemble."""
    n = sl = sr = sll = srr = slr = 0.0
    for rec in records:
        cn, cl, cr, cll, crr, clr = rec.together_stats
        n += cn; sl += cl; sr += cr; sll += cll; srr += crr; slr += clr
    if n < 2:
        return float("nan")
    cov = slr / n - (sl / n) * (sr / n)
    vl = sll / n - (sl / n) ** 2
    vr = srr / n - (sr / n) ** 2
    if vl <= 0 or vr <= 0:
        return float("nan")
    return cov / math.sqrt(vl * vr)


def lattice_pair_ensemble(
    p, eps, z_minus: Site, z_plus: Site, n_steps, window, n_rep, seed,
    scaling: ScalingMap, delta, report_time=None, gap_quantum=None,
):
    """Functionals of n_rep coupled pairs on spawned seeds.

    Returns (records, n_invalid); invalid replicates (boundary contact,
    path death, or no meeting within range) produce no record.
    """
    records = []
    n_invalid = 0
    for i in range(n_rep):
        noise = NoiseField(spawn_seed(seed, i))
        pair = trace_pair(noise, p, eps, z_minus, z_plus, n_steps, window)
        if not pair.valid or pair.meeting_index is None:
            n_invalid += 1
            continue
        rp = rescale_pair(pair, scaling)
        t_grid = rp.l.times
        records.append(
            pair_functionals(rp, delta, t_grid, report_time=report_time, gap_quantum=gap_quantum)
        )
    return records, n_invalid


def continuum_pair_ensemble(
    b, z_minus, z_plus, T, dt, n_rep, seed, delta,
    report_time=None, gap_quantum=None, refine=32,
):
    """Functionals of n_rep exact continuum pairs on the dt-grid.

    Each pair is simulated with internal resolution dt/refine (meeting
    detection and reflection construction), then every observable is
    read on the dt-grid — the same grid a rescaled lattice ensemble
    uses — with the meeting time rounded to it.  Returns
    (records, n_never_met).
    """
    records = []
    n_invalid = 0
    n_coarse = int(round(T / dt))
    coarse_grid = dt * np.arange(n_coarse + 1)
    for i in range(n_rep):
        smp = sample_sticky_pair_exact(
            b, z_minus, z_plus, T, dt, int(spawn_seed(seed, i)), refine=refine
        )
        if smp.tau is None:
            n_invalid += 1
            continue
        tau_snapped = min(round(smp.tau / dt) * dt, coarse_grid[-1])
        view = RescaledPair(smp.l, smp.r, tau_snapped)
        rec = pair_functionals(
            view, delta, coarse_grid, report_time=report_time, gap_quantum=gap_quantum
        )
        # Rounding tau down can move grid points from before the true
        # meeting into the after-tau window; count order violations from
        # the first grid point at or past the true meeting instead.
        i0 = min(int(math.ceil(smp.tau / dt - 1e-12)), n_coarse)
        rec.violations = int(np.sum(smp.r.values[i0:] < smp.l.values[i0:]))
        records.append(rec)
    return records, n_invalid
