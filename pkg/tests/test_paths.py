"""Lattice path tracing, break points, and moment estimation."""

import numpy as np
import pytest

from percolab import (
    ExplicitConfig,
    NoiseField,
    PercConfig,
    Site,
    estimate_decay,
    estimate_moments,
    find_break_points,
    spawn_seed,
    trace_gamma,
    trace_rho,
)
from percolab.paths import DecayFitError

from oracles import bfs_rightmost, enumerate_rightmost_gamma, explicit_mirror, site_reaches_depth


def test_rho_matches_bfs_oracle_sample():
    for r in range(60):
        cfg = PercConfig(NoiseField(spawn_seed(4242, r)), 0.8)
        path = trace_rho(cfg, Site(0, 0), 30, 60)
        pos, boundary, died = bfs_rightmost(cfg, 0, 0, 30, 60)
        assert list(path.positions) == pos
        assert path.boundary_contact == boundary
        assert path.died_at == died


def test_rho_p1_is_straight_line():
    cfg = PercConfig(NoiseField(7), 1.0)
    path = trace_rho(cfg, Site(0, 0), 40, 50)
    assert np.array_equal(path.positions, np.arange(41))
    assert not path.boundary_contact and path.died_at is None


def test_rho_p0_dies_immediately():
    cfg = PercConfig(NoiseField(7), 0.0)
    path = trace_rho(cfg, Site(0, 0), 10, 20)
    assert path.died_at == 1
    assert len(path.positions) == 1


def test_rho_invariants_and_window_validation():
    cfg = PercConfig(NoiseField(3), 0.8)
    path = trace_rho(cfg, Site(0, 0), 25, 40)
    path.check_invariants()
    with pytest.raises(ValueError):
        trace_rho(cfg, Site(0, 0), 40, 40)


def test_rho_explicit_config_exact():
    # one open +1 chain from 0 plus a dead-end branch
    cfg = ExplicitConfig({(0, 0, 1), (1, 1, 1), (2, 2, -1), (0, 0, -1), (-1, 1, -1)})
    path = trace_rho(cfg, Site(0, 0), 3, 10)
    assert list(path.positions) == [0, 1, 2, 1]


def test_gamma_matches_enumeration_oracle():
    hits = 0
    for r in range(200):
        cfg = PercConfig(NoiseField(spawn_seed(777, r)), 0.8)
        gp = trace_gamma(cfg, Site(0, 0), 8, 4)
        ecfg = ExplicitConfig(explicit_mirror(cfg, -13, 13, 0, 12))
        ref = enumerate_rightmost_gamma(ecfg, 0, 0, 12)
        if gp is None:
            assert ref is None
        else:
            hits += 1
            gp.check_invariants()
            assert list(gp.positions) == ref[:9]
    assert hits > 100  # p = 0.8 percolates often


def test_gamma_below_rho():
    for r in range(40):
        cfg = PercConfig(NoiseField(spawn_seed(55, r)), 0.85)
        rho = trace_rho(cfg, Site(0, 0), 20, 40)
        gp = trace_gamma(cfg, Site(0, 0), 20, 20)
        if gp is None or rho.died_at is not None or rho.boundary_contact:
            continue
        assert np.all(gp.positions <= rho.positions)


def test_break_points_match_reachability_oracle():
    for r in range(25):
        cfg = PercConfig(NoiseField(spawn_seed(99, r)), 0.8)
        rho = trace_rho(cfg, Site(0, 0), 25, 60)
        if rho.boundary_contact or rho.died_at is not None:
            continue
        seq = find_break_points(cfg, rho, horizon=30)
        seq.check_invariants()
        ecfg = ExplicitConfig(explicit_mirror(cfg, -60, 58, 0, 56))
        expect = [
            n for n in range(1, 26)
            if site_reaches_depth(ecfg, int(rho.positions[n]), n, 30)
        ]
        assert list(seq.break_times) == expect


def test_break_points_reject_invalid_paths():
    cfg = PercConfig(NoiseField(1), 0.0)
    rho = trace_rho(cfg, Site(0, 0), 5, 10)
    with pytest.raises(ValueError):
        find_break_points(cfg, rho, horizon=5)


def test_break_increments_at_p1():
    cfg = PercConfig(NoiseField(11), 1.0)
    rho = trace_rho(cfg, Site(0, 0), 30, 40)
    seq = find_break_points(cfg, rho, horizon=10)
    assert np.array_equal(seq.break_times, np.arange(1, 31))
    assert np.all(seq.X == 1) and np.all(seq.tau == 1)


def test_estimate_moments_p1_exact():
    res = estimate_moments(1.0, (), n_increments=1000, horizon=10, seed=3)
    m = res[1.0]
    assert m.alpha[0] == pytest.approx(1.0, abs=0)
    assert m.sigma2[0] == pytest.approx(0.0, abs=0)
    assert m.f_ij[(0, 1)][0] == pytest.approx(1.0, abs=0)


def test_estimate_moments_values_and_coupling():
    res = estimate_moments(0.8, (0.05,), n_increments=4000, horizon=40, seed=8)
    m = res[0.8]
    assert 0.5 < m.alpha[0] < 0.65
    assert m.alpha[1] < 0.02
    assert 0.5 < m.sigma2[0] < 1.1
    assert res[0.8 - 0.05].alpha[0] < m.alpha[0] < res[0.8 + 0.05].alpha[0]


def test_estimate_moments_validates_inputs():
    with pytest.raises(ValueError):
        estimate_moments(0.8, (), n_increments=50)
    with pytest.raises(ValueError):
        estimate_moments(0.8, (0.5,), n_increments=1000)


def test_estimate_decay_fit():
    est = estimate_decay(0.8, n_max=12, replicates=20000, horizon=30, seed=5, n_min=2)
    assert est.c2 > 0
    assert est.r_squared > 0.9
    assert est.n_points >= 4


def test_estimate_decay_no_events():
    est = estimate_decay(0.999, n_max=10, replicates=200, horizon=20, seed=5)
    assert est.no_events


def test_estimate_decay_insufficient_levels():
    with pytest.raises(DecayFitError):
        estimate_decay(0.8, n_max=10, replicates=300, horizon=20, seed=5)
