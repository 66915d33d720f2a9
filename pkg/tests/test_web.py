"""Arrow-walk web: coalescence, branching extremal paths, and the
dynamical (chain-time) variants."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from oracles import autocov_expm
from percolab.noise import EdgeRef, NoiseField, Site
from percolab.web import (
    ArrowField,
    DynamicalArrowField,
    DynamicalPercolation,
    ForcedArrowField,
    _python_trace,
    evolve_dynamical,
    evolve_dynamical_percolation,
    expected_edge_autocov,
    extremal_pair,
    extremal_pair_ensemble,
    trace_extremal,
    trace_walk,
    walk_ensemble,
)
from percolab.paths import trace_rho
from percolab.stats import ks_one_sample


# ---------------------------------------------------------------------------
# static field basics


def test_arrow_field_deterministic_and_valued():
    f = ArrowField(42)
    g = ArrowField(42)
    sites = [Site(x, t) for t in range(6) for x in range(-6 + t % 2, 7, 2) if (x + t) % 2 == 0]
    for z in sites:
        a = f.arrow(z)
        assert a in (-1, 1)
        assert g.arrow(z) == a
        assert f.branch_extra(z) is None  # eps = 0
        assert f.out_directions(z) == (a,)


def test_arrow_field_validation_and_spawn():
    with pytest.raises(ValueError):
        ArrowField(1, eps=-0.1)
    with pytest.raises(ValueError):
        ArrowField(1, eps=1.5)
    f = ArrowField(7, eps=0.3)
    assert f.spawn(0).seed != f.spawn(1).seed
    assert f.spawn(2).eps == 0.3


def test_branch_extra_opposite_and_frequency():
    f = ArrowField(99, eps=0.25)
    n = extra = 0
    for t in range(40):
        for x in range(-40 + (t % 2), 41, 2):
            if (x + t) % 2 != 0:
                continue
            z = Site(x, t)
            e = f.branch_extra(z)
            n += 1
            if e is not None:
                extra += 1
                assert e == -f.arrow(z)
                assert f.out_directions(z) == (-1, 1)
    frac = extra / n
    assert abs(frac - 0.25) < 4 * math.sqrt(0.25 * 0.75 / n)


def test_trace_walk_kernel_matches_python():
    f = ArrowField(5, eps=0.0)
    for x0 in (-4, 0, 2):
        got = trace_walk(f, Site(x0, 0), 50).positions
        ref = _python_trace(f, Site(x0, 0), 50, 0)
        np.testing.assert_array_equal(got, ref)
    fb = ArrowField(6, eps=0.2)
    for side, mode in (("left", 1), ("right", 2)):
        got = trace_extremal(fb, Site(0, 0), 50, side).positions
        ref = _python_trace(fb, Site(0, 0), 50, mode)
        np.testing.assert_array_equal(got, ref)


def test_forced_field_exact_paths():
    arrows = {(0, 0): 1, (1, 1): 1, (2, 2): -1, (1, 3): -1}
    f = ForcedArrowField(arrows, default=1)
    path = trace_walk(f, Site(0, 0), 4)
    np.testing.assert_array_equal(path.positions, [0, 1, 2, 1, 0])
    # a forced extra arrow bends the rightmost path but not the base walk
    f2 = ForcedArrowField({(0, 0): -1}, default=-1, extras={(0, 0): 1})
    assert trace_walk(f2, Site(0, 0), 1).positions[1] == -1
    assert trace_extremal(f2, Site(0, 0), 1, "right").positions[1] == 1
    assert trace_extremal(f2, Site(0, 0), 1, "left").positions[1] == -1


def test_walks_coalesce_and_never_cross():
    for i in range(25):
        f = ArrowField(1000 + i)
        pos = walk_ensemble(f, [-4, 0, 4], 0, 80)
        # ordering of starts is preserved at every level
        assert np.all(np.diff(pos, axis=0) >= 0)
        for a in range(2):
            eq = pos[a] == pos[a + 1]
            if eq.any():
                k = int(np.argmax(eq))
                assert np.all(eq[k:]), "walks must stick after meeting"


def test_walk_ensemble_validation():
    f = ArrowField(3)
    with pytest.raises(ValueError):
        walk_ensemble(f, [1], 0, 10)  # odd parity
    with pytest.raises(ValueError):
        walk_ensemble(f, [0], 0, 10, mode="sideways")
    with pytest.raises(ValueError):
        trace_walk(f, Site(0, 0), -1)
    with pytest.raises(ValueError):
        trace_extremal(f, Site(0, 0), 5, side="up")


def test_walk_is_simple_random_walk():
    # base arrows are fair coins: rescaled terminals are asymptotically
    # standard normal
    n_steps, n_rep = 200, 500
    f = ArrowField(2025)
    x0s = np.arange(n_rep, dtype=np.int64) * 4 * (n_steps + 1)
    pos = walk_ensemble(f, x0s, 0, n_steps)
    z = (pos[:, -1] - pos[:, 0]) / math.sqrt(n_steps)
    r = ks_one_sample(z, sps.norm.cdf)
    assert r.p_value > 1e-3
    steps = np.diff(pos, axis=1)
    assert set(np.unique(steps)) <= {-1, 1}


# ---------------------------------------------------------------------------
# extremal pairs


def test_extremal_pair_ordering_and_eps_zero():
    f0 = ArrowField(8, eps=0.0)
    left, right = extremal_pair(f0, Site(0, 0), 60)
    walk = trace_walk(f0, Site(0, 0), 60)
    np.testing.assert_array_equal(left.positions, walk.positions)
    np.testing.assert_array_equal(right.positions, walk.positions)
    for i in range(20):
        f = ArrowField(300 + i, eps=0.1)
        left, right = extremal_pair(f, Site(0, 0), 100)
        assert np.all(left.positions <= right.positions)
        w = trace_walk(f, Site(0, 0), 100)
        assert np.all(left.positions <= w.positions)
        assert np.all(w.positions <= right.positions)


def test_extremal_drift_is_plus_minus_eps():
    eps, n_steps, n_rep = 0.2, 100, 400
    term_r = np.empty(n_rep)
    term_l = np.empty(n_rep)
    base = ArrowField(777, eps=eps)
    for i in range(n_rep):
        f = base.spawn(i)
        left, right = extremal_pair(f, Site(0, 0), n_steps)
        term_l[i] = left.positions[-1]
        term_r[i] = right.positions[-1]
    se = math.sqrt(n_steps) / math.sqrt(n_rep)  # step variance is <= 1
    assert abs(term_r.mean() - eps * n_steps) < 4 * se
    assert abs(term_l.mean() + eps * n_steps) < 4 * se


def test_extremal_pair_ensemble_records():
    records = extremal_pair_ensemble(501, eps=0.1, n_steps=60, n_rep=30, delta=(0.05,))
    assert len(records) == 30
    for rec in records:
        assert rec.meeting_time == 0.0
        assert rec.violations == 0
        assert rec.terminal_gap >= -1e-12
    with pytest.raises(ValueError):
        extremal_pair_ensemble(501, eps=0.0, n_steps=10, n_rep=2)


# ---------------------------------------------------------------------------
# dynamical arrow field


def test_dynamical_zero_time_is_static():
    base = ArrowField(21)
    dyn = DynamicalArrowField(base, rate=1.0)
    for t in range(8):
        for x in range(-8 + t % 2, 9, 2):
            if (x + t) % 2 == 0:
                z = Site(x, t)
                assert dyn.flip_count(z, 0.0) == 0
                assert dyn.arrow_at(z, 0.0) == base.arrow(z)
    snap = dyn.at(0.0)
    np.testing.assert_array_equal(
        trace_walk(snap, Site(0, 0), 40).positions,
        trace_walk(base, Site(0, 0), 40).positions,
    )


def test_flip_counts_are_poisson():
    dyn = DynamicalArrowField(ArrowField(31), rate=0.7)
    s = 2.0
    counts = []
    for t in range(50):
        for x in range(-50 + t % 2, 51, 2):
            if (x + t) % 2 == 0:
                counts.append(dyn.flip_count(Site(x, t), s))
    counts = np.asarray(counts)
    lam = 0.7 * s
    n = counts.size
    assert abs(counts.mean() - lam) < 4 * math.sqrt(lam / n)
    assert abs(counts.var() - lam) < 5 * lam * math.sqrt(2.0 / n)


def test_dynamical_validation():
    with pytest.raises(ValueError):
        DynamicalArrowField(ArrowField(1), rate=0.0)
    dyn = DynamicalArrowField(ArrowField(1), rate=1.0)
    with pytest.raises(ValueError):
        dyn.flip_count(Site(0, 0), -1.0)
    with pytest.raises(ValueError):
        evolve_dynamical(dyn, [])
    with pytest.raises(ValueError):
        evolve_dynamical(dyn, [1.0, 0.5])
    with pytest.raises(ValueError):
        evolve_dynamical(dyn, [0.0], starts=(Site(0, 0), Site(2, 2)))


def test_evolution_decorrelates_with_chain_time():
    dyn = DynamicalArrowField(ArrowField(404), rate=1.0)
    starts = tuple(Site(4 * k, 0) for k in range(6))
    ev = evolve_dynamical(dyn, [0.0, 0.05, 5.0], starts=starts, n_steps=120)
    assert ev.positions.shape == (3, 6, 121)
    # s = 0 slice reproduces static walks
    np.testing.assert_array_equal(
        ev.positions[0, 0], trace_walk(dyn.base, starts[0], 120).positions
    )
    near = ev.together_fraction(0, 1)
    far = ev.together_fraction(0, 2)
    assert near > far
    assert ev.path(2, 3).start == starts[3]


# ---------------------------------------------------------------------------
# dynamical percolation


def test_autocov_closed_form_matches_markov_oracle():
    for p in (0.3, 0.8):
        for rate in (0.5, 2.0):
            for s in (0.0, 0.7, 3.0):
                assert expected_edge_autocov(p, rate, s) == pytest.approx(
                    autocov_expm(p, rate, s), abs=1e-12
                )


def test_dynperc_zero_time_slice_is_static():
    noise = NoiseField(606)
    dp = evolve_dynamical_percolation(noise, 0.8, 1.5, [0.0, 1.0])
    static = dp.static()
    xs = np.repeat(np.arange(0, 40, 2), 2)
    ts = np.zeros_like(xs)
    dirs = np.tile([1, -1], 20)
    states = dp.edge_states(xs, ts, dirs)
    for k in range(xs.size):
        e = EdgeRef(Site(int(xs[k]), int(ts[k])), int(dirs[k]))
        assert bool(states[k, 0]) == static.is_open(e)
        assert dp.is_open(e, 0.0) == static.is_open(e)


def test_dynperc_autocov_tracks_exact_curve():
    noise = NoiseField(707)
    s_values = [0.0, 0.5, 1.0, 2.0]
    dp = DynamicalPercolation(noise, 0.8, 1.0, s_values)
    n_e = 4000
    xs = np.repeat(np.arange(n_e // 2, dtype=np.int64) * 2, 2)
    ts = np.zeros_like(xs)
    dirs = np.tile(np.array([1, -1], np.int64), n_e // 2)
    est, se = dp.autocov_estimate(xs, ts, dirs)
    exact = expected_edge_autocov(0.8, 1.0, np.asarray(s_values))
    z = (est - exact) / np.where(se > 0, se, 1.0)
    assert np.all(np.abs(z) < 4.0)
    # marginals stay Bernoulli(p) at every chain time
    states = dp.edge_states(xs, ts, dirs).astype(float)
    dev = np.abs(states.mean(axis=0) - 0.8)
    assert np.all(dev < 4 * math.sqrt(0.8 * 0.2 / n_e))


def test_dynperc_rho_slice_matches_static_tracer():
    noise = NoiseField(808)
    dp = DynamicalPercolation(noise, 0.8, 1.0, [0.0])
    got = dp.trace_rho_at(Site(0, 0), 40, 60, 0.0)
    ref = trace_rho(dp.static(), Site(0, 0), 40, 60)
    np.testing.assert_array_equal(got.positions, ref.positions)
    assert got.boundary_contact == ref.boundary_contact
    assert got.died_at == ref.died_at


def test_dynperc_validation():
    noise = NoiseField(1)
    with pytest.raises(ValueError):
        DynamicalPercolation(noise, 0.0, 1.0, [0.0])
    with pytest.raises(ValueError):
        DynamicalPercolation(noise, 0.8, 0.0, [0.0])
    with pytest.raises(ValueError):
        DynamicalPercolation(noise, 0.8, 1.0, [])
    with pytest.raises(ValueError):
        DynamicalPercolation(noise, 0.8, 1.0, [1.0, 0.5])
    dp = DynamicalPercolation(noise, 0.8, 1.0, [0.0])
    with pytest.raises(ValueError):
        dp.trace_rho_at(Site(0, 0), 40, 30, 0.0)
