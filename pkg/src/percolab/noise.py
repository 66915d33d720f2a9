"""Deterministic edge-weight field and percolation configurations.

The oriented lattice is Z^2_even = {(x, t): x + t even}; every site has
two outgoing edges, to (x-1, t+1) and (x+1, t+1).  Each directed edge
carries an i.i.d. uniform weight in [0, 1), realized lazily from a
64-bit keyed hash so the lattice needs no storage and any edge can be
queried in any order, from any process, with bit-identical results.

Hash layout (documented so other implementations can reproduce it):

* edge key, 64 bits::

      key = (channel << 56) | (dirbit << 48) | ((t & 0xFFFFFF) << 24) | (x & 0xFFFFFF)

  with ``x`` and ``t`` stored as 24-bit two's-complement fields (valid
  range -2^23 .. 2^23 - 1), ``dirbit`` = 1 for the +1 edge and 0 for
  the -1 edge, and ``channel`` selecting the independent random layer
  (see ``CHANNELS``).
* mixing: ``mix64`` is the splitmix64 finalizer
  (xor-shift 30, * 0xBF58476D1CE4E5B9, xor-shift 27,
  * 0x94D049BB133111EB, xor-shift 31).
* draw ``ctr`` of a keyed stream::

      base = mix64(seed ^ mix64(key))
      u64  = mix64(base + (ctr + 1) * 0x9E3779B97F4A7C15)
      u    = (u64 >> 11) * 2**-53          # uniform in [0, 1)

  Edge weights use channel 0, ctr 0.
* replicate sub-seeds: ``spawn_seed(seed, i) = mix64(seed ^ mix64((i + 1) * 0x9E3779B97F4A7C15))``.

An edge is p-open iff its weight is strictly below p, so open-edge sets
are nested in p for a fixed seed: this single convention provides the
monotone coupling between configurations at p - eps and p + eps.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ._backend import kernels

#: independent random layers derived from the same seed
CHANNELS = {
    "edge": 0,  # static percolation edge weights; also the initial state
    #             of dynamical edge chains, so the time-0 snapshot of a
    #             dynamical configuration equals the static one exactly
    "arrow": 1,  # coalescing-web base arrow per site
    "branch": 2,  # extra-arrow indicator per site (branching webs)
    "flip": 3,  # per-site Poisson flip stream (dynamical web)
    "reserved": 4,  # unused
    "dyn_hold": 5,  # holding-time stream of a dynamical percolation edge
}

COORD_BITS = 24
COORD_MIN = -(1 << (COORD_BITS - 1))
COORD_MAX = (1 << (COORD_BITS - 1)) - 1

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64_int(z):
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_uniform(seed, x, t, dirbit, channel, ctr=0) -> float:
    """The uniform draw ``ctr`` of the keyed stream at (x, t, dirbit, channel).

    Pure-python scalar reference for the documented hash layout; the
    vectorized kernels produce bit-identical values.
    """
    _check_coord(x, "x")
    _check_coord(t, "t")
    key = (channel << 56) | (dirbit << 48) | ((t & 0xFFFFFF) << 24) | (x & 0xFFFFFF)
    base = _mix64_int(int(seed) ^ _mix64_int(key))
    u64 = _mix64_int((base + (ctr + 1) * _GAMMA) & _MASK64)
    return (u64 >> 11) * 2.0 ** -53


def _check_coord(v, name):
    if not (COORD_MIN <= v <= COORD_MAX):
        raise ValueError(f"{name}={v} outside the 24-bit keyed range [{COORD_MIN}, {COORD_MAX}]")


@dataclasses.dataclass(frozen=True)
class Site:
    """A point of Z^2_even."""

    x: int
    t: int

    def __post_init__(self):
        if (self.x + self.t) % 2 != 0:
            raise ValueError(f"({self.x}, {self.t}) is not on the even lattice (x + t must be even)")
        _check_coord(self.x, "x")
        _check_coord(self.t, "t")


@dataclasses.dataclass(frozen=True)
class EdgeRef:
    """The directed edge from ``site`` to (x + dir, t + 1)."""

    site: Site
    dir: int

    def __post_init__(self):
        if self.dir not in (-1, 1):
            raise ValueError(f"edge dir must be -1 or +1, got {self.dir}")

    @property
    def target(self) -> Site:
        return Site(self.site.x + self.dir, self.site.t + 1)


def spawn_seed(seed, index):
    """Independent 64-bit sub-seed for replicate ``index`` of ``seed``."""
    return np.uint64(kernels.spawn(np.uint64(seed), int(index)))


class NoiseField:
    """Pure map from directed edges to i.i.d. uniform weights in [0, 1)."""

    def __init__(self, seed):
        self.seed = np.uint64(seed)

    def weight(self, e: EdgeRef) -> float:
        """Weight of a single edge (deterministic in (seed, edge))."""
        return float(self.weights(np.array([e.site.x]), np.array([e.site.t]), np.array([e.dir]))[0])

    def weights(self, xs, ts, dirs) -> np.ndarray:
        """Vector of weights; ``dirs`` entries are -1 / +1."""
        xs = np.asarray(xs, np.int64)
        ts = np.asarray(ts, np.int64)
        dirbits = (np.asarray(dirs, np.int64) > 0).astype(np.int64)
        return np.asarray(kernels.edge_weights(self.seed, xs, ts, dirbits))

    def spawn(self, index) -> "NoiseField":
        """Noise field of the ``index``-th replicate sub-stream."""
        return NoiseField(spawn_seed(self.seed, index))

    def __repr__(self):
        return f"NoiseField(seed={int(self.seed)})"


def edge_weight(noise: NoiseField, e: EdgeRef) -> float:
    """Uniform weight of edge ``e`` under ``noise``."""
    return noise.weight(e)


class PercConfig:
    """A percolation configuration: an edge is open iff weight < p."""

    def __init__(self, noise: NoiseField, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {p}")
        self.noise = noise
        self.p = float(p)

    @property
    def seed(self):
        return self.noise.seed

    def is_open(self, e: EdgeRef) -> bool:
        return self.noise.weight(e) < self.p

    def open_mask(self, xs, ts, dirs) -> np.ndarray:
        return self.noise.weights(xs, ts, dirs) < self.p

    def __repr__(self):
        return f"PercConfig(seed={int(self.noise.seed)}, p={self.p})"


def is_open(cfg: PercConfig, e: EdgeRef) -> bool:
    """p-open predicate: weight(e) < p."""
    return cfg.is_open(e)


def coupled_configs(noise: NoiseField, p: float, eps: float):
    """The monotone-coupled pair at parameters (p - eps, p + eps).

    Both configurations read the same weights, so every edge open in the
    minus configuration is open in the plus configuration.
    """
    if not 0.0 <= eps <= min(p, 1.0 - p):
        raise ValueError(f"eps={eps} outside [0, min(p, 1-p)] = [0, {min(p, 1.0 - p)}] for p={p}")
    return PercConfig(noise, p - eps), PercConfig(noise, p + eps)


class ExplicitConfig:
    """A configuration given by an explicit list of edges (test fixtures).

    Open edges are listed one per line as ``x t dir open`` with dir in
    {-1, 1} and open in {0, 1}; edges absent from the list are closed.
    """

    def __init__(self, open_edges):
        self.open_edges = frozenset(open_edges)
        self.p = None

    @classmethod
    def from_text(cls, text: str) -> "ExplicitConfig":
        opens = set()
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"line {ln}: expected 'x t dir open', got {line!r}")
            x, t, d, o = (int(v) for v in parts)
            if d not in (-1, 1) or o not in (0, 1):
                raise ValueError(f"line {ln}: dir must be -1/1 and open 0/1, got {line!r}")
            if o:
                opens.add((x, t, d))
        return cls(opens)

    @classmethod
    def from_file(cls, path) -> "ExplicitConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def to_text(self, closed_edges=()) -> str:
        rows = [(x, t, d, 1) for (x, t, d) in self.open_edges]
        rows += [(x, t, d, 0) for (x, t, d) in closed_edges]
        return "\n".join(f"{x} {t} {d} {o}" for (x, t, d, o) in sorted(rows)) + "\n"

    def is_open(self, e: EdgeRef) -> bool:
        return (e.site.x, e.site.t, e.dir) in self.open_edges

    def is_open_xtd(self, x: int, t: int, d: int) -> bool:
        return (x, t, d) in self.open_edges

    def __repr__(self):
        return f"ExplicitConfig({len(self.open_edges)} open edges)"
