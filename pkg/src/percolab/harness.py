"""Experiment runner: configs, deterministic CSV reports, frozen calibration.

Each experiment turns one module's ensembles into distribution-level
evidence: estimates carry standard errors, comparisons carry KS
statistics with sample sizes, and every report row records the seed and
a hash of the scientific part of the config, so a report line can be
reproduced from the repo alone.

Replicate r of an experiment draws its randomness from the sub-stream
``spawn_seed(seed, r)``; results are assembled in replicate order, so
outputs are byte-identical across reruns regardless of how replicates
would be scheduled.

The frozen calibration constants below were measured once at p = 0.8
with the recorded seeds and sample sizes; pair experiments reuse them
so that scaling maps are fixed inputs rather than per-run estimates.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
import os

import numpy as np

from . import web
from .coupling import (
    ScalingMap,
    continuum_pair_ensemble,
    lattice_pair_ensemble,
    pair_functionals,
    pooled_together_correlation,
    rescale_pair,
    trace_pair,
)
from .noise import NoiseField, PercConfig, Site, spawn_seed
from .paths import estimate_alpha_prime, estimate_decay, estimate_moments, trace_rho
from .stats import ks_one_sample, ks_two_sample, snap_to_grid
from scipy.stats import norm

EXPERIMENTS = ("moments", "single-path-clt", "pair-sticky", "discrete-web", "dynamical", "decay")


@dataclasses.dataclass(frozen=True)
class Calibration:
    """Point estimates at one p, frozen from a recorded measurement run."""

    p: float
    alpha: float
    alpha_se: float
    sigma2: float
    sigma2_se: float
    e_tau: float
    alpha_prime: float        # central difference of the velocity at p +- h
    alpha_prime_se: float
    alpha_prime_h: float
    quotient_w05: float       # symmetric velocity quotient at width 0.05
    quotient_w05_se: float
    n_increments: int
    seeds: tuple

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def drift_parameter(self, eps: float) -> float:
        """Gap drift b for a coupled pair at p +- eps, rescaled by sigma.

        The prelimit pair separates at the symmetric velocity quotient
        of width eps, not at the derivative, so the matched continuum
        drift uses the quotient measured at the same width when one is
        on record and the derivative otherwise (curvature is below the
        noise floor for widths under 0.02).
        """
        if abs(eps - 0.05) < 1e-12:
            return self.quotient_w05 / self.sigma
        return self.alpha_prime / self.sigma


# Measured once at p = 0.8 with the recorded seeds: alpha/sigma2/e_tau
# from 4e6 increments (seed 55002); the width-0.05 velocity quotient
# from 1e6 increments per parameter (seed 55001); the derivative from
# the common-noise central difference at h = 0.02 (seed 55003).
FROZEN = Calibration(
    p=0.8,
    alpha=0.5783721573587128, alpha_se=0.0005128584306036213,
    sigma2=0.763977385516488, sigma2_se=0.001034922315020589,
    e_tau=1.0717805,
    alpha_prime=2.396233330229583, alpha_prime_se=0.01842668166395505, alpha_prime_h=0.02,
    quotient_w05=2.384269164408397, quotient_w05_se=0.011446414994117507,
    n_increments=4_000_000,
    seeds=(55001, 55002, 55003),
)


# Seeds fixed before the acceptance run; each criterion's test reads its
# entry here rather than choosing at runtime.
PREREGISTERED = {
    "oracle-configs": 11001,
    "decay": 33002,
    "clt": 78036,
    "alpha-prime": 56001,
    "drift": 57001,
    "pair-lattice": 424242,
    "pair-continuum": 535353,
    "gap-exact": 61001,
    "gap-oracle": 61002,
    "gap-exact-fine": 61003,
    "gap-oracle-fine": 61004,
    "skorohod": 10001,
    "web-extremal": 90003,
    "web-continuum": 91003,
    "dynamical": 42001,
}


class ConfigError(ValueError):
    pass


class InvalidationError(RuntimeError):
    """Raised when more than 1% of replicates are invalid."""


@dataclasses.dataclass
class ExperimentConfig:
    """Inputs of one experiment run.

    ``scaling_source`` is "fixed" (use ``scaling_a``/``scaling_b``,
    defaulting to the frozen calibration) or "estimated" (read alpha and
    sigma2 from ``moments_report``, the report.csv of a prior moments
    run).  The config hash covers every scientific field but not the
    output directory.
    """

    experiment: str
    p: float = 0.8
    eps: float = 0.05
    seed: int = 0
    replicates: int = 1000
    n_steps: int = 400
    window: int = 416
    horizon: int = 60
    dt: float = 0.0025
    delta: tuple = (0.05,)
    scaling_source: str = "fixed"
    scaling_a: float | None = None
    scaling_b: float | None = None
    moments_report: str | None = None
    out: str = "out"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p must be in (0, 1], got {self.p}")
        if not 0.0 <= self.eps <= 1.0:
            raise ConfigError(f"eps must be in [0, 1], got {self.eps}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.window <= self.n_steps:
            raise ConfigError("window must exceed n_steps")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.dt > 0.0:
            raise ConfigError("dt must be > 0")
        self.delta = tuple(float(d) for d in self.delta)
        if any(d <= 0 for d in self.delta):
            raise ConfigError("delta entries must be > 0")
        if self.scaling_source not in ("fixed", "estimated"):
            raise ConfigError('scaling_source must be "fixed" or "estimated"')
        if self.scaling_source == "estimated" and not self.moments_report:
            raise ConfigError("estimated scaling requires moments_report (a prior moments run)")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            raw = json.load(f)
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        scaling = raw.pop("scaling", None)
        if scaling is not None:
            raw["scaling_source"] = scaling.get("source", "fixed")
            raw["scaling_a"] = scaling.get("a")
            raw["scaling_b"] = scaling.get("b")
            raw["moments_report"] = scaling.get("moments_report")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "delta" in raw:
            raw["delta"] = tuple(raw["delta"])
        return cls(**raw)

    def canonical_json(self) -> str:
        d = dataclasses.asdict(self)
        d.pop("out")
        d["delta"] = list(d["delta"])
        return json.dumps(d, sort_keys=True)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def resolve_scaling(cfg: ExperimentConfig) -> tuple[float, float]:
    """(a, b) of the scaling map: fixed constants or a prior moments run."""
    if cfg.scaling_source == "fixed":
        a = FROZEN.alpha if cfg.scaling_a is None else float(cfg.scaling_a)
        b = FROZEN.sigma if cfg.scaling_b is None else float(cfg.scaling_b)
        return a, b
    rows = _read_report(cfg.moments_report)
    try:
        a = float(rows["alpha"])
        b = math.sqrt(float(rows["sigma2"]))
    except KeyError as e:
        raise ConfigError(f"moments report {cfg.moments_report} lacks statistic {e}") from None
    return a, b


def _read_report(path) -> dict:
    import csv

    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out[row["statistic"]] = row["value"]
    return out


# ---------------------------------------------------------------------------
# report assembly


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


class Report:
    """Collects ensemble rows and report rows, writes deterministic CSVs."""

    ENSEMBLE_HEADER = ("series", "replicate", "statistic", "value")
    REPORT_HEADER = ("experiment", "statistic", "value", "stderr", "p_value", "n", "flags", "seed", "config_hash")

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.ensemble_rows = []
        self.report_rows = []
        self.summary_lines = []
        self.extra_files = {}
        self.failed = False

    def add_sample(self, series: str, values, statistic: str):
        for i, v in enumerate(values):
            self.ensemble_rows.append((series, str(i), statistic, _fmt(v)))

    def add_row(self, statistic, value, stderr=None, p_value=None, n=None, flags=""):
        if flags == "fail":
            self.failed = True
        self.report_rows.append(
            (
                self.cfg.experiment,
                statistic,
                _fmt(value),
                _fmt(stderr),
                _fmt(p_value),
                "" if n is None else str(int(n)),
                flags,
                str(self.cfg.seed),
                self.cfg.config_hash,
            )
        )

    def add_check(self, statistic, value, passed: bool, stderr=None, p_value=None, n=None):
        self.add_row(statistic, value, stderr=stderr, p_value=p_value, n=n, flags="pass" if passed else "fail")

    def note(self, line: str):
        self.summary_lines.append(line)

    def extra_csv(self, name: str, header, rows):
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(str(c) for c in row) + "\n")
        self.extra_files[name] = buf.getvalue()

    def write(self, outdir) -> dict:
        os.makedirs(outdir, exist_ok=True)
        paths = {}

        def _write(name, text):
            path = os.path.join(outdir, name)
            with open(path, "w", newline="") as f:
                f.write(text)
            paths[name] = path

        buf = io.StringIO()
        buf.write(",".join(self.ENSEMBLE_HEADER) + "\n")
        for row in self.ensemble_rows:
            buf.write(",".join(row) + "\n")
        _write("ensemble.csv", buf.getvalue())

        buf = io.StringIO()
        buf.write(",".join(self.REPORT_HEADER) + "\n")
        for row in self.report_rows:
            buf.write(",".join(row) + "\n")
        _write("report.csv", buf.getvalue())

        head = [
            f"experiment: {self.cfg.experiment}",
            f"seed: {self.cfg.seed}   config hash: {self.cfg.config_hash}",
            f"status: {'FAIL' if self.failed else 'ok'}",
            "",
        ]
        _write("summary.txt", "\n".join(head + self.summary_lines) + "\n")
        for name, text in self.extra_files.items():
            _write(name, text)
        return paths


def _check_invalidation(n_invalid: int, n_total: int, what: str):
    if n_invalid > 0.01 * n_total:
        raise InvalidationError(
            f"{n_invalid}/{n_total} {what} replicates invalid (> 1%); "
            "increase the window or lower eps"
        )


# ---------------------------------------------------------------------------
# experiments


def _run_moments(cfg: ExperimentConfig, rpt: Report):
    eps_list = (cfg.eps,) if 0.0 < cfg.eps <= min(cfg.p, 1.0 - cfg.p) else ()
    res = estimate_moments(
        cfg.p, eps_list, n_increments=cfg.replicates, horizon=cfg.horizon, seed=cfg.seed
    )
    m = res[cfg.p]
    rpt.add_row("alpha", m.alpha[0], stderr=m.alpha[1], n=m.n_samples)
    rpt.add_row("sigma2", m.sigma2[0], stderr=m.sigma2[1], n=m.n_samples)
    rpt.add_row("e_tau", m.f_ij[(0, 1)][0], stderr=m.f_ij[(0, 1)][1], n=m.n_samples)
    for (i, j), (est, se) in sorted(m.f_ij.items()):
        rpt.add_row(f"f_{i}{j}", est, stderr=se, n=m.n_samples)
    if eps_list:
        lo, hi = res[cfg.p - cfg.eps], res[cfg.p + cfg.eps]
        quot = (hi.alpha[0] - lo.alpha[0]) / (2 * cfg.eps)
        quot_se = math.hypot(hi.alpha[1], lo.alpha[1]) / (2 * cfg.eps)
        rpt.add_row("velocity_quotient", quot, stderr=quot_se, n=m.n_samples)
    rpt.note(f"alpha = {m.alpha[0]:.6f} +- {m.alpha[1]:.6f}")
    rpt.note(f"sigma2 = {m.sigma2[0]:.6f} +- {m.sigma2[1]:.6f}")
    rpt.add_sample("moments", [m.alpha[0], m.sigma2[0], m.f_ij[(0, 1)][0]], "point")


def _clt_terminals(cfg: ExperimentConfig, a: float, b: float):
    zs = []
    n_invalid = 0
    for r in range(cfg.replicates):
        noise = NoiseField(spawn_seed(cfg.seed, r))
        path = trace_rho(PercConfig(noise, cfg.p), Site(0, 0), cfg.n_steps, cfg.window)
        if path.boundary_contact or path.died_at is not None:
            n_invalid += 1
            continue
        x = float(path.positions[-1])
        zs.append((cfg.eps / b) * (x - a * cfg.n_steps) / math.sqrt(cfg.eps * cfg.eps * cfg.n_steps))
    return np.array(zs), n_invalid


def _run_single_path_clt(cfg: ExperimentConfig, rpt: Report):
    a, b = resolve_scaling(cfg)
    zs, n_invalid = _clt_terminals(cfg, a, b)
    _check_invalidation(n_invalid, cfg.replicates, "path")
    ks = ks_one_sample(zs, norm.cdf)
    rpt.add_sample("rescaled", zs, "z")
    rpt.add_check("ks_normal", ks.statistic, ks.p_value >= 0.01, p_value=ks.p_value, n=zs.size)
    rpt.add_row("mean", zs.mean(), stderr=zs.std(ddof=1) / math.sqrt(zs.size), n=zs.size)
    rpt.add_row("variance", zs.var(ddof=1), n=zs.size)
    rpt.note(f"KS vs N(0,1): D = {ks.statistic:.4f}, p = {ks.p_value:.4f} on {zs.size} paths")
    rpt.note(f"scaling: a = {a!r}, b = {b!r} ({cfg.scaling_source})")


def _run_pair_sticky(cfg: ExperimentConfig, rpt: Report):
    a, b = resolve_scaling(cfg)
    if cfg.eps == 0.0:
        noise_scaling = ScalingMap(a=a, b=b, eps=0.05)
        recs = []
        for r in range(cfg.replicates):
            noise = NoiseField(spawn_seed(cfg.seed, r))
            pair = trace_pair(noise, cfg.p, 0.0, Site(0, 0), Site(0, 0), cfg.n_steps, cfg.window)
            rp = rescale_pair(pair, noise_scaling)
            recs.append(pair_functionals(rp, cfg.delta, rp.l.times))
        gaps = np.array([r.terminal_gap for r in recs])
        rpt.add_sample("lattice", gaps, "terminal_gap")
        rpt.add_check("terminal_gap_max_abs", float(np.max(np.abs(gaps))), bool(np.all(gaps == 0.0)), n=gaps.size)
        rpt.note("eps = 0: coupled pair is a single path; terminal gap identically 0")
        return
    gap0 = 2 * round(0.25 / (cfg.eps / b))  # nearest even lattice gap to rescaled 0.5
    scaling = ScalingMap(a=a, b=b, eps=cfg.eps)
    quantum = 2 * cfg.eps / b
    T = cfg.eps * cfg.eps * cfg.n_steps
    report_time = min(1.0, T)
    b_pair = FROZEN.drift_parameter(cfg.eps)
    lat, n_invalid = lattice_pair_ensemble(
        cfg.p, cfg.eps, Site(gap0, 0), Site(0, 0), cfg.n_steps, cfg.window,
        cfg.replicates, cfg.seed, scaling, cfg.delta,
        report_time=report_time, gap_quantum=quantum,
    )
    _check_invalidation(n_invalid, cfg.replicates, "pair")
    n_cont = (5 * cfg.replicates) // 2
    gap0_resc = gap0 * cfg.eps / b
    cont_seed = (
        PREREGISTERED["pair-continuum"]
        if cfg.seed == PREREGISTERED["pair-lattice"]
        else spawn_seed(cfg.seed, 10**6)
    )
    cont, _ = continuum_pair_ensemble(
        b_pair, gap0_resc, 0.0, T, cfg.eps * cfg.eps, n_cont,
        cont_seed, cfg.delta, report_time=report_time, gap_quantum=quantum,
    )
    _emit_pair_comparison(cfg, rpt, lat, cont, quantum, n_invalid)
    rpt.extra_csv(
        "cdf_overlay.csv",
        ("series", "value"),
        [("lattice", _fmt(r.terminal_gap)) for r in lat] + [("continuum", _fmt(r.terminal_gap)) for r in cont],
    )


def _emit_pair_comparison(cfg, rpt, lat, cont, quantum, n_invalid, check_meeting=True):
    for series, recs in (("lattice", lat), ("continuum", cont)):
        rpt.add_sample(series, [r.terminal_gap for r in recs], "terminal_gap")
        rpt.add_sample(series, [r.meeting_time for r in recs], "meeting_time")
        for d in cfg.delta:
            rpt.add_sample(series, [r.together_fraction[d] for r in recs], f"together_frac_{d}")
    lt = snap_to_grid(np.array([r.terminal_gap for r in lat]), quantum)
    ct = snap_to_grid(np.array([r.terminal_gap for r in cont]), quantum)
    ks_t = ks_two_sample(lt, ct)
    rpt.add_check("ks_terminal_gap", ks_t.statistic, ks_t.p_value >= 0.01, p_value=ks_t.p_value, n=lt.size + ct.size)
    if check_meeting:
        lm = np.array([r.meeting_time for r in lat])
        cm = np.array([r.meeting_time for r in cont])
        ks_m = ks_two_sample(lm, cm)
        rpt.add_check("ks_meeting_time", ks_m.statistic, ks_m.p_value >= 0.01, p_value=ks_m.p_value, n=lm.size + cm.size)
    d0 = cfg.delta[0]
    lf = np.array([r.together_fraction[d0] for r in lat])
    cf = np.array([r.together_fraction[d0] for r in cont])
    ks_f = ks_two_sample(lf, cf)
    rpt.add_check(f"ks_together_frac_{d0}", ks_f.statistic, ks_f.p_value >= 0.01, p_value=ks_f.p_value, n=lf.size + cf.size)
    viol = sum(r.violations for r in lat)
    rpt.add_check("lattice_violations", viol, viol == 0, n=len(lat))
    for series, recs in (("lattice", lat), ("continuum", cont)):
        rates = np.array([r.apart_cov_rate for r in recs if r.apart_steps > 0])
        rate = float(rates.mean()) if rates.size else 0.0
        rate_se = float(rates.std(ddof=1) / math.sqrt(rates.size)) if rates.size > 1 else 0.0
        corr = pooled_together_correlation(recs)
        rpt.add_check(f"apart_cov_rate_{series}", rate, abs(rate) <= 0.05, stderr=rate_se, n=rates.size)
        ok = (not math.isnan(corr)) and corr >= 0.95
        rpt.add_check(f"together_corr_{series}", corr, ok, n=len(recs))
    rpt.note(f"terminal KS D = {ks_t.statistic:.4f} p = {ks_t.p_value:.4f}")
    rpt.note(f"together-fraction KS D = {ks_f.statistic:.4f} p = {ks_f.p_value:.4f}")
    rpt.note(f"invalid replicates: {n_invalid}")


def _run_discrete_web(cfg: ExperimentConfig, rpt: Report):
    quantum = 2 * cfg.eps
    T = cfg.eps * cfg.eps * cfg.n_steps
    report_time = min(1.0, T)
    recs = web.extremal_pair_ensemble(
        cfg.seed, cfg.eps, cfg.n_steps, cfg.replicates,
        delta=cfg.delta, report_time=report_time, gap_quantum=quantum,
    )
    n_cont = (5 * cfg.replicates) // 2
    cont_seed = PREREGISTERED["web-continuum"] if cfg.seed == PREREGISTERED["web-extremal"] else spawn_seed(cfg.seed, 10**6)
    cont, _ = continuum_pair_ensemble(
        1.0, 0.0, 0.0, T, cfg.eps * cfg.eps, n_cont,
        cont_seed, cfg.delta, report_time=report_time, gap_quantum=quantum,
    )
    _emit_pair_comparison(cfg, rpt, recs, cont, quantum, 0, check_meeting=False)
    # walk terminals against N(0, 1) under drift-0, scale-1 rescaling
    field = web.ArrowField(int(spawn_seed(cfg.seed, 2 * 10**6)))
    n_walk = min(cfg.replicates, 5000)
    x0s = np.arange(n_walk, dtype=np.int64) * 4 * (cfg.n_steps + 1)  # spaced beyond interaction range
    pos = web.walk_ensemble(field, x0s, 0, cfg.n_steps, "walk")
    zw = (pos[:, -1] - pos[:, 0]) * cfg.eps / math.sqrt(cfg.eps * cfg.eps * cfg.n_steps)
    ks_w = ks_one_sample(zw, norm.cdf)
    rpt.add_sample("walk", zw, "z")
    rpt.add_check("ks_walk_normal", ks_w.statistic, ks_w.p_value >= 0.01, p_value=ks_w.p_value, n=zw.size)
    rpt.note(f"walk-CLT KS D = {ks_w.statistic:.4f} p = {ks_w.p_value:.4f} on {zw.size} walks")
    # a small bundle of coalescing walks for the paths figure
    bundle_starts = np.arange(-6, 7, 2, dtype=np.int64)
    bundle = web.walk_ensemble(field, bundle_starts, 0, min(cfg.n_steps, 60), "walk")
    rows = []
    for i, x0 in enumerate(bundle_starts):
        for t in range(bundle.shape[1]):
            rows.append((i, t, int(bundle[i, t])))
    rpt.extra_csv("paths.csv", ("walk", "t", "x"), rows)


def _run_dynamical(cfg: ExperimentConfig, rpt: Report):
    s_values = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
    rate = cfg.eps if cfg.eps > 0 else 1.0
    dp = web.evolve_dynamical_percolation(NoiseField(cfg.seed), cfg.p, rate, s_values)
    n_e = 2 * (cfg.replicates // 2)
    xs = np.repeat(np.arange(n_e // 2, dtype=np.int64) * 2, 2)
    ts = np.zeros(n_e, np.int64)
    dirs = np.tile(np.array([1, -1], np.int64), n_e // 2)
    st = dp.edge_states(xs, ts, dirs)
    static = dp.static().open_mask(xs, ts, dirs)
    match = bool(np.array_equal(st[:, 0].astype(bool), static))
    rpt.add_check("s0_matches_static", int(match), match, n=n_e)
    est, se = dp.autocov_estimate(xs, ts, dirs)
    expected = web.expected_edge_autocov(cfg.p, rate, np.asarray(s_values))
    all_ok = True
    for j, s in enumerate(s_values):
        ok = abs(est[j] - expected[j]) <= 3 * se[j]
        all_ok &= ok
        rpt.add_check(f"autocov_s_{s}", est[j], ok, stderr=se[j], n=n_e)
        rpt.add_sample("autocov", [est[j], se[j], expected[j]], f"s_{s}")
    marg = st.mean(axis=0)
    marg_se = math.sqrt(cfg.p * (1 - cfg.p) / n_e)
    ok = bool(np.all(np.abs(marg - cfg.p) <= 3 * marg_se))
    rpt.add_check("marginal_max_dev", float(np.max(np.abs(marg - cfg.p))), ok, stderr=marg_se, n=n_e)
    # snapshot tracer at s = 0 equals the static tracer
    n_rho, w_rho = min(cfg.n_steps, 100), min(cfg.n_steps, 100) + 20
    lp_dyn = dp.trace_rho_at(Site(0, 0), n_rho, w_rho, 0.0)
    lp_sta = trace_rho(dp.static(), Site(0, 0), n_rho, w_rho)
    same = bool(np.array_equal(lp_dyn.positions, lp_sta.positions))
    rpt.add_check("rho_s0_matches_static", int(same), same, n=len(lp_dyn))
    rpt.note(f"autocov max |z| = {float(np.max(np.abs((est - expected) / se))):.2f} over s = {s_values}")
    # exploration cluster of the s = 0 snapshot for the cluster figure
    rows = _cluster_rows(dp.static(), Site(0, 0), min(cfg.n_steps, 40))
    rpt.extra_csv("cluster.csv", ("x", "t", "reached"), rows)


def _cluster_rows(cfg_perc, z: Site, n_levels: int):
    width = 2 * n_levels + 1
    left = z.x - n_levels
    occ = np.zeros(width, bool)
    occ[n_levels] = True
    rows = [(z.x, z.t, 1)]
    for n in range(1, n_levels + 1):
        xs = left + np.arange(width, dtype=np.int64)
        t = z.t + n - 1
        open_p = cfg_perc.open_mask(xs, np.full(width, t), np.ones(width, np.int64))
        open_m = cfg_perc.open_mask(xs, np.full(width, t), -np.ones(width, np.int64))
        nxt = np.zeros(width, bool)
        nxt[1:] = occ[:-1] & open_p[:-1]
        nxt[:-1] |= occ[1:] & open_m[1:]
        occ = nxt
        for i in np.nonzero(occ)[0]:
            rows.append((int(left + i), z.t + n, 1))
    return rows


def _run_decay(cfg: ExperimentConfig, rpt: Report):
    est = estimate_decay(cfg.p, n_max=30, replicates=cfg.replicates, horizon=cfg.horizon, seed=cfg.seed, n_min=5)
    if est.no_events:
        rpt.add_row("no_events", 1, flags="degenerate")
        rpt.note("no decay events at this p / replicate count")
        return
    rpt.add_row("c1", est.c1, n=est.replicates)
    rpt.add_check("c2", est.c2, est.c2 > 0, stderr=est.slope_se, n=est.n_points)
    rpt.add_check("r_squared", est.r_squared, est.r_squared >= 0.98, n=est.n_points)
    for lev, cnt in zip(est.levels, est.counts):
        rpt.ensemble_rows.append(("decay", str(int(lev)), "count", str(int(cnt))))
    rpt.extra_csv(
        "decay.csv",
        ("level", "count", "q"),
        [(int(l), int(c), _fmt(c / est.replicates)) for l, c in zip(est.levels, est.counts) if c > 0],
    )
    rpt.note(f"q(n) fit: c1 = {est.c1:.4f}, c2 = {est.c2:.4f}, R^2 = {est.r_squared:.4f} on {est.n_points} levels")


_RUNNERS = {
    "moments": _run_moments,
    "single-path-clt": _run_single_path_clt,
    "pair-sticky": _run_pair_sticky,
    "discrete-web": _run_discrete_web,
    "dynamical": _run_dynamical,
    "decay": _run_decay,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment and write ensemble.csv / report.csv / summary.txt.

    Returns {"paths": file paths, "failed": any asserted check failed}.
    """
    rpt = Report(cfg)
    _RUNNERS[cfg.experiment](cfg, rpt)
    paths = rpt.write(cfg.out)
    return {"paths": paths, "failed": rpt.failed}
