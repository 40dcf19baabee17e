"""Sample paths of the driving process L(t) = b B(t) + c C(t).

B is standard Brownian motion and C a compound Poisson process with
intensity ``intensity`` and i.i.d. jump sizes.  Randomness comes from numpy's
Philox counter-based generator.  A seed is split with ``SeedSequence.spawn``
into three independent streams:

* stream 0: Brownian increments on the uniform grid,
* stream 1: jump count, jump times, jump sizes (and collision resamples),
* stream 2: Brownian-bridge draws used to split grid increments at jump times.

Keeping the Brownian stream separate means the base-grid increments for a
seed do not depend on the jump settings, and vice versa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "NoiseConfig",
    "JumpEvent",
    "DrivingPath",
    "parse_jump_dist",
    "grid_size",
    "uniform_grid",
    "sample_brownian_increments",
    "sample_jump_events",
    "insert_jump_nodes",
    "build_driving_path",
]

_STREAM_BROWNIAN = 0
_STREAM_JUMPS = 1
_STREAM_BRIDGE = 2
_N_STREAMS = 3

# relative slack allowed when checking that T/dt is an integer
_GRID_TOL = 1e-9


def _generator(seed: int, stream: int) -> np.random.Generator:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ConfigurationError(f"seed must be in [0, 2**64), got {seed}")
    child = np.random.SeedSequence(int(seed)).spawn(_N_STREAMS)[stream]
    return np.random.Generator(np.random.Philox(child))


def parse_jump_dist(tag: str) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Return a sampler ``(rng, n) -> sizes`` for a jump-size tag.

    Accepted tags: ``standard-normal``, ``constant:<v>``, ``uniform:<a>,<b>``.
    """
    name, _, arg = tag.strip().partition(":")
    try:
        if name == "standard-normal" and not arg:
            return lambda rng, n: rng.standard_normal(n)
        if name == "constant":
            value = float(arg)
            return lambda rng, n: np.full(n, value)
        if name == "uniform":
            lo, hi = (float(s) for s in arg.split(","))
            if not lo < hi:
                raise ConfigurationError(f"uniform jump law needs a < b, got {tag!r}")
            return lambda rng, n: rng.uniform(lo, hi, n)
    except ValueError as exc:
        raise ConfigurationError(f"bad jump distribution {tag!r}: {exc}") from None
    raise ConfigurationError(f"unknown jump distribution {tag!r}")


def grid_size(T: float, dt: float) -> int:
    """Number of grid steps tiling ``[0, T]``; rejects non-integral T/dt."""
    if not (math.isfinite(T) and T > 0):
        raise ConfigurationError(f"horizon T must be positive, got {T}")
    if not (math.isfinite(dt) and dt > 0):
        raise ConfigurationError(f"dt must be positive, got {dt}")
    ratio = T / dt
    n = round(ratio)
    if n < 1 or abs(ratio - n) > _GRID_TOL * max(1.0, ratio):
        raise ConfigurationError(f"T/dt = {ratio!r} is not an integer")
    return n


def uniform_grid(T: float, n: int) -> np.ndarray:
    # (i/n)*T keeps nested grids bitwise consistent: node i of an n-grid equals
    # node i*r of an (n*r)-grid because i/n is a correctly rounded rational.
    return (np.arange(n + 1) / n) * T


@dataclass(frozen=True)
class NoiseConfig:
    b: float = 1.0
    c: float = 1.0
    intensity: float = 3.4
    jump_dist: str = "standard-normal"
    T: float = 1.0
    dt: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        grid_size(self.T, self.dt)
        if not (math.isfinite(self.intensity) and self.intensity >= 0):
            raise ConfigurationError(f"jump intensity must be >= 0, got {self.intensity}")
        if not (math.isfinite(self.b) and math.isfinite(self.c)):
            raise ConfigurationError("noise weights b and c must be finite")
        parse_jump_dist(self.jump_dist)
        _generator(self.seed, 0)

    @property
    def n_steps(self) -> int:
        return grid_size(self.T, self.dt)


@dataclass(frozen=True)
class JumpEvent:
    time: float
    raw_size: float
    scaled_size: float


@dataclass(frozen=True)
class DrivingPath:
    """One realization of L on a grid refined at the jump times.

    ``jump_nodes[i]`` is the index in ``grid_times`` of ``jumps[i]``;
    ``base_index[j]`` is the uniform-grid index of node ``j`` (-1 for
    inserted jump nodes).
    """

    grid_times: np.ndarray
    brownian_increments: np.ndarray
    jumps: tuple
    config: NoiseConfig
    jump_nodes: np.ndarray = field(repr=False)
    base_index: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.grid_times, self.brownian_increments, self.jump_nodes, self.base_index):
            arr.flags.writeable = False

    @property
    def n_intervals(self) -> int:
        return len(self.brownian_increments)

    @property
    def dt(self) -> float:
        return self.config.T / self.config.n_steps

    def brownian_values(self) -> np.ndarray:
        """B at every grid node (B(0) = 0)."""
        return np.concatenate(([0.0], np.cumsum(self.brownian_increments)))

    def jump_values(self) -> np.ndarray:
        """C at every grid node, right-continuous (post-jump at jump nodes)."""
        steps = np.zeros(len(self.grid_times))
        for node, ev in zip(self.jump_nodes, self.jumps):
            steps[node] = ev.raw_size
        return np.cumsum(steps)

    def coarsen(self, factor: int) -> "DrivingPath":
        """Aggregate onto a grid ``factor`` times coarser, keeping every jump node.

        Coarse increments are exact sums of the fine ones, so B (and C) agree
        at every node the two grids share.
        """
        n = self.config.n_steps
        if factor < 1 or n % factor:
            raise ConfigurationError(f"cannot coarsen {n} steps by factor {factor}")
        if factor == 1:
            return self
        keep = (self.base_index % factor == 0) | (self.base_index < 0)
        keep_idx = np.flatnonzero(keep)
        increments = np.add.reduceat(self.brownian_increments, keep_idx[:-1])
        new_index = np.where(self.base_index[keep_idx] >= 0, self.base_index[keep_idx] // factor, -1)
        node_map = np.full(len(self.grid_times), -1)
        node_map[keep_idx] = np.arange(len(keep_idx))
        config = replace(self.config, dt=self.config.T / (n // factor))
        return DrivingPath(
            grid_times=self.grid_times[keep_idx].copy(),
            brownian_increments=increments,
            jumps=self.jumps,
            config=config,
            jump_nodes=node_map[self.jump_nodes],
            base_index=new_index,
        )


def sample_brownian_increments(seed: int, T: float, dt: float) -> np.ndarray:
    """``round(T/dt)`` independent N(0, T/n) draws from the Brownian stream."""
    n = grid_size(T, dt)
    rng = _generator(seed, _STREAM_BROWNIAN)
    return rng.standard_normal(n) * math.sqrt(T / n)


def sample_jump_events(seed, intensity, T, jump_dist="standard-normal", c=1.0, grid_n=None):
    """Compound-Poisson jump events on ``(0, T]``, sorted by time.

    A jump time equal to another jump time, or to a node of the ``grid_n``-step
    uniform grid when given, is redrawn from the same stream.
    """
    if not (math.isfinite(intensity) and intensity >= 0):
        raise ConfigurationError(f"jump intensity must be >= 0, got {intensity}")
    if not (math.isfinite(T) and T > 0):
        raise ConfigurationError(f"horizon T must be positive, got {T}")
    draw_sizes = parse_jump_dist(jump_dist)
    rng = _generator(seed, _STREAM_JUMPS)

    count = int(rng.poisson(intensity * T))
    # 1 - U lies in (0, 1], so times land in (0, T]
    times = T * (1.0 - rng.random(count))
    sizes = np.asarray(draw_sizes(rng, count), dtype=float)

    nodes = uniform_grid(T, grid_n) if grid_n else None
    while True:
        bad = _collisions(times, nodes, T, grid_n)
        if not bad.any():
            break
        times[bad] = T * (1.0 - rng.random(int(bad.sum())))

    times.sort()
    return tuple(JumpEvent(float(t), float(r), float(c * r)) for t, r in zip(times, sizes))


def _collisions(times, nodes, T, grid_n):
    bad = np.zeros(len(times), dtype=bool)
    if len(times) > 1:
        order = np.argsort(times, kind="stable")
        dup = np.diff(times[order]) == 0
        bad[order[1:][dup]] = True
    if nodes is not None and len(times):
        i = np.clip(np.rint(times / T * grid_n).astype(int), 0, grid_n)
        bad |= nodes[i] == times
    return bad


def insert_jump_nodes(grid_times, increments, jump_times, rng):
    """Split grid intervals at ``jump_times`` using Brownian-bridge draws.

    Within an interval [a, e] carrying increment D, the piece over [a, s] is
    drawn as N(D (s-a)/(e-a), (s-a)(e-s)/(e-a)); the remainder goes to [s, e].
    Repeated left to right this samples the refined increments exactly.

    Returns ``(times, increments, jump_nodes, base_index)``.
    """
    grid_times = np.asarray(grid_times, dtype=float)
    increments = np.asarray(increments, dtype=float)
    jump_times = np.asarray(jump_times, dtype=float)
    if len(jump_times) == 0:
        return grid_times.copy(), increments.copy(), np.zeros(0, dtype=int), np.arange(len(grid_times))

    owner = np.searchsorted(grid_times, jump_times, side="right") - 1
    if np.any(owner < 0) or np.any(owner >= len(increments)) or np.any(grid_times[owner] == jump_times):
        raise ConfigurationError("jump times must lie strictly inside grid intervals")

    times_out, incs_out, base_out, jump_nodes = [], [], [], []
    k = 0
    n_jumps = len(jump_times)
    for j, (a, e, d) in enumerate(zip(grid_times[:-1], grid_times[1:], increments)):
        times_out.append(a)
        base_out.append(j)
        left, rest = a, d
        while k < n_jumps and owner[k] == j:
            s = jump_times[k]
            span = e - left
            mean = rest * (s - left) / span
            std = math.sqrt((s - left) * (e - s) / span)
            piece = mean + std * rng.standard_normal()
            incs_out.append(piece)
            rest -= piece
            jump_nodes.append(len(times_out))
            times_out.append(s)
            base_out.append(-1)
            left = s
            k += 1
        incs_out.append(rest)
    times_out.append(grid_times[-1])
    base_out.append(len(grid_times) - 1)
    return (
        np.array(times_out),
        np.array(incs_out),
        np.array(jump_nodes, dtype=int),
        np.array(base_out, dtype=int),
    )


def build_driving_path(config: NoiseConfig) -> DrivingPath:
    n = config.n_steps
    base_times = uniform_grid(config.T, n)
    increments = sample_brownian_increments(config.seed, config.T, config.dt)
    jumps = sample_jump_events(
        config.seed, config.intensity, config.T, config.jump_dist, config.c, grid_n=n
    )
    times, incs, jump_nodes, base_index = insert_jump_nodes(
        base_times, increments, [ev.time for ev in jumps], _generator(config.seed, _STREAM_BRIDGE)
    )
    return DrivingPath(times, incs, jumps, config, jump_nodes, base_index)
