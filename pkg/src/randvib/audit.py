"""Energy-work bookkeeping along a simulated trajectory.

The energy increment dE(t) = E(t) - E(0) is compared with the work done by
g and by the noise force.  Under the Stratonovich + DPF reading the two agree
up to discretization error; under the Ito reading they do not.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError
from .jumps import jump_work
from .model import OscillatorModel
from .schemes import Interpretation, JumpSolver, SchemeConfig

__all__ = [
    "EnergyLedger",
    "energy_increment",
    "work_done_dpf",
    "work_done_ito",
    "build_ledger",
    "ito_jump_deficit",
    "ito_diffusion_deficit",
]

# floor for the relative-discrepancy denominator; both series start at 0
_REL_FLOOR = 1e-12


@dataclass(frozen=True)
class EnergyLedger:
    times: np.ndarray
    delta_E: np.ndarray
    work: np.ndarray
    discrepancy: np.ndarray
    max_abs_discrepancy: float
    max_rel_discrepancy: float

    @classmethod
    def from_series(cls, times, delta_E, work):
        delta_E = np.asarray(delta_E, dtype=float)
        work = np.asarray(work, dtype=float)
        disc = delta_E - work
        if len(disc) == 0:
            return cls(np.asarray(times), delta_E, work, disc, 0.0, 0.0)
        max_abs = float(np.max(np.abs(disc)))
        scale = max(float(np.max(np.abs(delta_E))), float(np.max(np.abs(work))), _REL_FLOOR)
        return cls(np.asarray(times), delta_E, work, disc, max_abs, max_abs / scale)


def energy_increment(model: OscillatorModel, trajectory) -> np.ndarray:
    x, v = trajectory.x, trajectory.v
    energy = 0.5 * model.m * v * v + 0.5 * model.k * x * x
    return energy - energy[0]


def _node_records(trajectory, path):
    """First and last record index of every grid node, after checking alignment."""
    n_nodes = len(path.grid_times)
    if len(trajectory) != n_nodes + len(path.jumps):
        raise AlignmentError(
            f"trajectory has {len(trajectory)} records, path needs {n_nodes + len(path.jumps)}"
        )
    extra = np.zeros(n_nodes, dtype=int)
    extra[path.jump_nodes] = 1
    first = np.arange(n_nodes) + np.concatenate(([0], np.cumsum(extra)[:-1]))
    last = first + extra
    if not (
        np.array_equal(trajectory.t[first], path.grid_times)
        and np.array_equal(trajectory.t[last], path.grid_times)
        and not trajectory.post_jump[first].any()
        and trajectory.post_jump[last[path.jump_nodes]].all()
    ):
        raise AlignmentError("trajectory records do not sit on the driving-path grid")
    return first, last


def _work(model, trajectory, path, b, interpretation, solver, mode):
    first, last = _node_records(trajectory, path)
    x, v = trajectory.x, trajectory.v
    g = np.array([model.g(xi, vi) for xi, vi in zip(x, v)])
    fv = np.array([model.f(xi, vi) for xi, vi in zip(x, v)]) * v
    gv = g * v

    left, right = last[:-1], first[1:]
    h = np.diff(path.grid_times)
    dB = path.brownian_increments
    step = 0.5 * (gv[left] + gv[right]) * h
    if interpretation is Interpretation.ITO:
        step = step + fv[left] * b * dB
    else:
        step = step + 0.5 * (fv[left] + fv[right]) * b * dB

    # per-record increments: each interval lands on its right record; each
    # jump lands on its post-jump record
    inc = np.zeros(len(trajectory))
    inc[right] = step
    for node, ev in zip(path.jump_nodes, path.jumps):
        pre = first[node]
        inc[pre + 1] = jump_work(model, x[pre], v[pre], ev.scaled_size, interpretation, solver, mode)
    return np.cumsum(inc)


def work_done_dpf(model, trajectory, path, b, solver=JumpSolver(), mode="coupled"):
    """Work with trapezoidal Stratonovich quadrature and path-integrated jump work."""
    return _work(model, trajectory, path, b, Interpretation.STRATONOVICH_DPF, solver, mode)


def work_done_ito(model, trajectory, path, b):
    """Work with left-point stochastic quadrature and f v dL per jump."""
    return _work(model, trajectory, path, b, Interpretation.ITO, JumpSolver(), "coupled")


def build_ledger(model, trajectory, path, scheme: SchemeConfig, jump_work_mode="coupled"):
    dE = energy_increment(model, trajectory)
    if scheme.interpretation is Interpretation.ITO:
        work = work_done_ito(model, trajectory, path, scheme.b)
    else:
        work = work_done_dpf(model, trajectory, path, scheme.b, scheme.jump_solver, jump_work_mode)
    return EnergyLedger.from_series(trajectory.t, dE, work)


def ito_jump_deficit(model, trajectory, path) -> float:
    """Sum over jumps of f(x, v-)^2 dL^2 / (2m), from the stored left limits.

    This is exactly what the Ito jump map adds to the energy beyond the Ito
    jump work.
    """
    pre = trajectory.pre_jump_indices
    if len(pre) != len(path.jumps):
        raise AlignmentError("trajectory and path disagree on the number of jumps")
    total = 0.0
    for i, ev in zip(pre, path.jumps):
        f = model.f(trajectory.x[i], trajectory.v[i])
        total += 0.5 * f * f * ev.scaled_size**2 / model.m
    return total


def ito_diffusion_deficit(model, trajectory, path, b) -> float:
    """(b^2 / 2m) times the time integral of f^2, by the trapezoid rule.

    The Ito-Brownian counterpart of :func:`ito_jump_deficit`: the energy
    gained from the quadratic variation of B that left-point work misses.
    """
    first, last = _node_records(trajectory, path)
    f = np.array([model.f(xi, vi) for xi, vi in zip(trajectory.x, trajectory.v)])
    f2 = f * f
    h = np.diff(path.grid_times)
    return float(0.5 * b * b / model.m * np.sum(0.5 * (f2[last[:-1]] + f2[first[1:]]) * h))
