"""Coupled pair tracing, diffusive rescaling, and pair functionals."""

import numpy as np
import pytest

from percolab.continuum import ContinuumPath, sample_sticky_pair_exact
from percolab.coupling import (
    PairFunctionals,
    RescaledPair,
    ScalingMap,
    apply_scaling,
    continuum_pair_ensemble,
    lattice_pair_ensemble,
    pair_functionals,
    pooled_together_correlation,
    rescale_pair,
    trace_pair,
)
from percolab.noise import NoiseField, Site, spawn_seed
from percolab.paths import LatticePath


# ---------------------------------------------------------------------------
# scaling map


def test_scaling_roundtrip():
    m = ScalingMap(a=0.6, b=0.9, eps=0.05)
    xi, s = m.apply(123.0, 400.0)
    x, t = m.unapply(xi, s)
    assert x == pytest.approx(123.0)
    assert t == pytest.approx(400.0)
    assert s == pytest.approx(0.05 ** 2 * 400.0)
    assert xi == pytest.approx((0.05 / 0.9) * (123.0 - 0.6 * 400.0))


def test_scaling_validation():
    with pytest.raises(ValueError):
        ScalingMap(a=0.5, b=0.0, eps=0.05)
    with pytest.raises(ValueError):
        ScalingMap(a=0.5, b=1.0, eps=0.0)


def test_apply_scaling_on_lattice_path():
    m = ScalingMap(a=1.0, b=2.0, eps=0.1)
    path = LatticePath(Site(0, 0), np.arange(5))  # x = t exactly
    cp = apply_scaling(path, m)
    assert cp.dt == pytest.approx(0.01)
    np.testing.assert_allclose(cp.values, 0.0, atol=1e-14)
    path2 = LatticePath(Site(2, 4), np.array([2, 3, 4]))
    cp2 = apply_scaling(path2, m)
    assert cp2.t0 == pytest.approx(0.01 * 4)
    np.testing.assert_allclose(cp2.values, (0.1 / 2.0) * (path2.positions - 1.0 * np.array([4, 5, 6])))


# ---------------------------------------------------------------------------
# pair tracing


def test_trace_pair_meeting_and_ordering():
    n_checked = 0
    for i in range(40):
        noise = NoiseField(spawn_seed(2024, i))
        pair = trace_pair(noise, 0.8, 0.05, Site(8, 0), Site(0, 0), 160, 200)
        if not pair.valid:
            continue
        pair.check_invariants()
        if pair.meeting_index is None:
            continue
        lo, hi = pair.common_range()
        a = pair.minus.positions[lo:]
        b = pair.plus.positions[lo:]
        first = int(np.nonzero(b >= a)[0][0]) + lo
        assert first == pair.meeting_index
        n_checked += 1
    assert n_checked > 20


def test_trace_pair_eps_zero_identical():
    noise = NoiseField(7)
    pair = trace_pair(noise, 0.8, 0.0, Site(0, 0), Site(0, 0), 60, 100)
    np.testing.assert_array_equal(pair.minus.positions, pair.plus.positions)
    assert pair.meeting_index == 0


def test_trace_pair_start_offset():
    noise = NoiseField(11)
    pair = trace_pair(noise, 0.8, 0.05, Site(-2, 2), Site(0, 0), 50, 120)
    lo, hi = pair.common_range()
    assert lo == 2
    assert hi == 52
    # the later start bounds the step budget; both paths end at t = 52
    assert pair.minus.start.t + len(pair.minus.positions) - 1 <= 52
    assert pair.plus.start.t + len(pair.plus.positions) - 1 <= 52


def test_rescale_pair_alignment():
    m = ScalingMap(a=0.5, b=1.0, eps=0.1)
    noise = NoiseField(23)
    pair = trace_pair(noise, 0.8, 0.05, Site(-2, 2), Site(0, 0), 40, 120)
    if not pair.valid:
        pytest.skip("unlucky noise draw")
    rp = rescale_pair(pair, m)
    rp.check_invariants()
    assert len(rp.l) == len(rp.r)
    lo, hi = pair.common_range()
    assert rp.l.t0 == pytest.approx(m.eps ** 2 * lo)
    if pair.meeting_index is not None:
        assert rp.meeting_time == pytest.approx(m.eps ** 2 * pair.meeting_index)
    # values match a direct application of the map on the common range
    xi, _ = m.apply(pair.plus.positions[lo - 0 : hi + 1], np.arange(lo, hi + 1))
    np.testing.assert_allclose(rp.r.values, xi)


# ---------------------------------------------------------------------------
# pair functionals on handcrafted paths


def _pair_from_arrays(l_vals, r_vals, dt, tau):
    return RescaledPair(
        ContinuumPath(0.0, dt, np.asarray(l_vals, float)),
        ContinuumPath(0.0, dt, np.asarray(r_vals, float)),
        tau,
    )


def test_functionals_handcrafted():
    l = np.zeros(11)
    r = np.array([4.0, 4.0, 3.0, 2.0, 1.0, 0.0, 0.0, 0.0, -0.5, 0.0, 2.0])
    pair = _pair_from_arrays(l, r, dt=1.0, tau=4.0)
    rec = pair_functionals(pair, (0.1, 0.6), pair.l.times)
    assert rec.meeting_time == pytest.approx(4.0)
    # occupation window is [tau, tau + 1]: grid points t = 4, 5
    assert rec.window_points == 2
    assert rec.together_fraction[0.1] == pytest.approx(0.5)
    assert rec.together_fraction[0.6] == pytest.approx(0.5)
    # one negative gap after tau
    assert rec.violations == 1
    # both-endpoint split: increments 5-6, 6-7 together; 0-1 .. 3-4 apart
    assert rec.together_stats[0] == 2
    assert rec.apart_steps == 4
    assert rec.apart_cov_sum == pytest.approx(0.0)
    assert rec.boundary_steps == 4
    assert rec.terminal_gap == pytest.approx(2.0)
    assert rec.grid_dt == pytest.approx(1.0)


def test_functionals_report_time_and_quantum():
    l = np.zeros(5)
    r = np.array([1.0, 0.8, 0.6, 0.4, 0.2])
    pair = _pair_from_arrays(l, r, dt=0.5, tau=None)
    rec = pair_functionals(pair, 0.25, pair.l.times, report_time=1.0, gap_quantum=0.5)
    # never met: zero occupation, no violations, no window
    assert rec.meeting_time is None
    assert rec.together_fraction[0.25] == 0.0
    assert rec.violations == 0
    assert rec.window_points == 0
    # terminal gap is read at report_time by interpolation, unsnapped
    assert rec.terminal_gap == pytest.approx(0.6)


def test_functionals_quantum_changes_classification():
    l = np.zeros(4)
    r = np.array([0.3, 0.3, 0.3, 0.3])
    pair = _pair_from_arrays(l, r, dt=1.0, tau=0.0)
    loose = pair_functionals(pair, 0.1, pair.l.times, gap_quantum=1.0)
    tight = pair_functionals(pair, 0.1, pair.l.times)
    # snapping 0.3 to the unit grid lands on 0, flipping the class
    assert loose.together_fraction[0.1] == pytest.approx(1.0)
    assert tight.together_fraction[0.1] == pytest.approx(0.0)


def test_functionals_grid_validation():
    pair = _pair_from_arrays(np.zeros(3), np.ones(3), dt=1.0, tau=None)
    with pytest.raises(ValueError):
        pair_functionals(pair, 0.1, np.array([0.0]))
    with pytest.raises(ValueError):
        pair_functionals(pair, 0.1, np.array([0.0, 1.0, 3.0]))
    with pytest.raises(ValueError):
        pair_functionals(pair, 0.1, pair.l.times, report_time=9.0)


def test_apart_cov_rate_property():
    rec = PairFunctionals(
        meeting_time=None, terminal_gap=0.0, together_fraction={},
        violations=0, apart_cov_sum=1.2, apart_steps=6,
        together_stats=(0, 0.0, 0.0, 0.0, 0.0, 0.0),
        boundary_steps=0, grid_dt=0.5, window_points=0,
    )
    assert rec.apart_cov_rate == pytest.approx(1.2 / 3.0)
    rec_empty = PairFunctionals(
        meeting_time=None, terminal_gap=0.0, together_fraction={},
        violations=0, apart_cov_sum=0.0, apart_steps=0,
        together_stats=(0, 0.0, 0.0, 0.0, 0.0, 0.0),
        boundary_steps=0, grid_dt=0.5, window_points=0,
    )
    assert rec_empty.apart_cov_rate == 0.0


def test_pooled_together_correlation():
    perfect = PairFunctionals(
        meeting_time=0.0, terminal_gap=0.0, together_fraction={},
        violations=0, apart_cov_sum=0.0, apart_steps=0,
        together_stats=(3, 6.0, 6.0, 14.0, 14.0, 14.0),  # dl = dr = (1, 2, 3)
        boundary_steps=0, grid_dt=1.0, window_points=0,
    )
    assert pooled_together_correlation([perfect]) == pytest.approx(1.0)
    empty = PairFunctionals(
        meeting_time=None, terminal_gap=0.0, together_fraction={},
        violations=0, apart_cov_sum=0.0, apart_steps=0,
        together_stats=(1, 1.0, 1.0, 1.0, 1.0, 1.0),
        boundary_steps=0, grid_dt=1.0, window_points=0,
    )
    assert np.isnan(pooled_together_correlation([empty]))


# ---------------------------------------------------------------------------
# ensembles


def test_lattice_ensemble_censors_unmet_pairs():
    m = ScalingMap(a=0.58, b=0.87, eps=0.05)
    records, n_invalid = lattice_pair_ensemble(
        0.8, 0.05, Site(60, 0), Site(0, 0), 12, 80, 10, 99, m, (0.05,)
    )
    # a 60-site head start cannot close within 12 steps
    assert records == []
    assert n_invalid == 10


def test_lattice_ensemble_basic_records():
    m = ScalingMap(a=0.58, b=0.87, eps=0.05)
    records, n_invalid = lattice_pair_ensemble(
        0.8, 0.05, Site(4, 0), Site(0, 0), 100, 200, 30, 123, m,
        (0.05,), report_time=None, gap_quantum=2 * 0.05 / 0.87,
    )
    assert len(records) + n_invalid == 30
    assert len(records) > 20
    for rec in records:
        assert rec.violations == 0
        assert rec.meeting_time is not None
        assert 0.0 <= rec.together_fraction[0.05] <= 1.0


def test_continuum_ensemble_censors_unmet_pairs():
    records, n_never = continuum_pair_ensemble(
        1.0, 20.0, 0.0, T=0.25, dt=0.05, n_rep=8, seed=7, delta=(0.05,)
    )
    assert records == []
    assert n_never == 8


def test_continuum_ensemble_counts_and_violations():
    records, n_never = continuum_pair_ensemble(
        1.0, 0.5, 0.0, T=1.0, dt=0.02, n_rep=40, seed=15, delta=(0.05,),
        gap_quantum=0.1,
    )
    assert len(records) + n_never == 40
    for rec in records:
        # exact construction: no ordering violations past the true meeting
        assert rec.violations == 0
        k = rec.meeting_time / 0.02
        assert abs(k - round(k)) < 1e-9
