"""Full simulations: driving path -> stepping and jumps -> energy audit."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .audit import EnergyLedger, build_ledger, ito_diffusion_deficit, ito_jump_deficit
from .errors import ConfigurationError, DivergenceError
from .jumps import apply_jump
from .model import State, get_model
from .noise import DrivingPath, NoiseConfig, build_driving_path, grid_size
from .schemes import STEPPERS, Interpretation, JumpSolver, SchemeConfig, Stepper
from .trajectory import Trajectory

log = logging.getLogger(__name__)

__all__ = [
    "RunConfig",
    "SimulationResult",
    "run_simulation",
    "ConvergenceRow",
    "convergence_study",
    "EnsembleSummary",
    "ensemble_run",
    "EMIT_CHOICES",
]

EMIT_CHOICES = ("path", "trajectory", "ledger", "summary")
JUMP_WORK_MODES = ("coupled", "literal")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on.

    The scheme's noise weights are taken from ``noise``, and the ledger always
    uses the work functional of ``interpretation``; neither can be set apart.
    """

    noise: NoiseConfig = NoiseConfig()
    model_label: str = "duffing-vdp"
    interpretation: Interpretation = Interpretation.STRATONOVICH_DPF
    stepper: Stepper = Stepper.EULER_MARUYAMA
    jump_solver: JumpSolver = JumpSolver()
    initial_x: float = 2.0
    initial_v: float = 0.0
    output_dir: Optional[Path] = None
    emit: frozenset = frozenset(EMIT_CHOICES)
    jump_work_mode: str = "coupled"

    def __post_init__(self):
        get_model(self.model_label)
        if not (math.isfinite(self.initial_x) and math.isfinite(self.initial_v)):
            raise ConfigurationError("initial state must be finite")
        unknown = set(self.emit) - set(EMIT_CHOICES)
        if unknown:
            raise ConfigurationError(f"unknown emit targets: {sorted(unknown)}")
        if self.jump_work_mode not in JUMP_WORK_MODES:
            raise ConfigurationError(f"unknown jump-work mode {self.jump_work_mode!r}")

    @property
    def scheme(self) -> SchemeConfig:
        return SchemeConfig(
            self.interpretation, self.stepper, self.jump_solver, self.noise.b, self.noise.c
        )

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, noise=replace(self.noise, seed=seed))


@dataclass(frozen=True)
class SimulationResult:
    config: RunConfig
    path: DrivingPath
    trajectory: Trajectory
    ledger: EnergyLedger

    def summary(self) -> dict:
        """Flat report of the run settings and ledger extremes, in a fixed order."""
        cfg, noise = self.config, self.config.noise
        model = get_model(cfg.model_label)
        return {
            "model": cfg.model_label,
            "interpretation": cfg.interpretation.value,
            "stepper": cfg.stepper.value,
            "jump_solver": str(cfg.jump_solver),
            "jump_work": cfg.jump_work_mode,
            "seed": noise.seed,
            "T": noise.T,
            "dt": noise.dt,
            "b": noise.b,
            "c": noise.c,
            "lambda": noise.intensity,
            "jump_dist": noise.jump_dist,
            "x0": cfg.initial_x,
            "v0": cfg.initial_v,
            "n_intervals": self.path.n_intervals,
            "n_records": len(self.trajectory),
            "n_jumps": len(self.path.jumps),
            "final_delta_E": float(self.ledger.delta_E[-1]),
            "final_work": float(self.ledger.work[-1]),
            "max_abs_discrepancy": self.ledger.max_abs_discrepancy,
            "max_rel_discrepancy": self.ledger.max_rel_discrepancy,
            "ito_jump_deficit": ito_jump_deficit(model, self.trajectory, self.path),
            "ito_diffusion_deficit": ito_diffusion_deficit(model, self.trajectory, self.path, noise.b),
        }


def _integrate(model, config: RunConfig, path: DrivingPath) -> Trajectory:
    scheme = config.scheme
    step = STEPPERS[scheme.stepper]
    interp, b = scheme.interpretation, scheme.b

    times = path.grid_times.tolist()
    dBs = path.brownian_increments.tolist()
    is_jump = [False] * len(times)
    for node in path.jump_nodes.tolist():
        is_jump[node] = True
    dLs = iter(ev.scaled_size for ev in path.jumps)

    s = State(times[0], float(config.initial_x), float(config.initial_v))
    records = [(s.t, s.x, s.v, False)]
    j = 0
    try:
        for j in range(len(dBs)):
            t_next = times[j + 1]
            s = step(model, s, t_next - times[j], dBs[j], interp, b)._replace(t=t_next)
            records.append((t_next, s.x, s.v, False))
            if is_jump[j + 1]:
                jump = apply_jump(model, s.x, s.v, next(dLs), interp, scheme.jump_solver)
                if not math.isfinite(jump.v_plus):
                    raise DivergenceError(f"non-finite velocity after jump at t={t_next!r}", state=s)
                s = State(t_next, s.x, jump.v_plus)
                records.append((t_next, s.x, s.v, True))
    except DivergenceError as exc:
        exc.step = j
        if exc.state is None:
            exc.state = s
        exc.trajectory = Trajectory.from_records(records)
        raise
    return Trajectory.from_records(records)


def run_simulation(config: RunConfig, path: Optional[DrivingPath] = None) -> SimulationResult:
    """Simulate one path and audit it.

    ``path`` overrides the path built from ``config.noise`` (used to share one
    refined Brownian path across resolutions).
    """
    model = get_model(config.model_label)
    if path is None:
        path = build_driving_path(config.noise)
    elif path.config != config.noise:
        config = replace(config, noise=path.config)
    trajectory = _integrate(model, config, path)
    ledger = build_ledger(model, trajectory, path, config.scheme, config.jump_work_mode)
    return SimulationResult(config, path, trajectory, ledger)


@dataclass(frozen=True)
class ConvergenceRow:
    interpretation: str
    dt: float
    max_abs_discrepancy: float
    max_rel_discrepancy: float
    n_jumps: int
    ito_jump_deficit: float
    ito_diffusion_deficit: float


def _nesting_factors(T, dt_list):
    if not dt_list:
        raise ConfigurationError("dt list is empty")
    dts = sorted(float(d) for d in dt_list)
    counts = [grid_size(T, d) for d in dts]
    for fine, coarse in zip(counts, counts[1:]):
        if fine % coarse:
            raise ConfigurationError(f"dt list {dt_list} is not nested: {fine} steps vs {coarse}")
    finest = counts[0]
    return {d: finest // n for d, n in zip(dts, counts)}


def convergence_study(config: RunConfig, dt_list, interpretations=None):
    """Discrepancy versus dt on one Brownian path refined across resolutions.

    The path is sampled at the finest dt and summed onto the coarser grids,
    so every resolution sees the same B at shared nodes and the same jumps.
    """
    factors = _nesting_factors(config.noise.T, dt_list)
    finest = min(factors)
    interpretations = interpretations or list(Interpretation)
    fine_path = build_driving_path(replace(config.noise, dt=finest))
    model = get_model(config.model_label)

    rows = []
    for interp in interpretations:
        for dt in sorted(factors, reverse=True):
            path = fine_path.coarsen(factors[dt])
            res = run_simulation(replace(config, interpretation=interp, noise=path.config), path)
            rows.append(
                ConvergenceRow(
                    interp.value,
                    dt,
                    res.ledger.max_abs_discrepancy,
                    res.ledger.max_rel_discrepancy,
                    len(path.jumps),
                    ito_jump_deficit(model, res.trajectory, path),
                    ito_diffusion_deficit(model, res.trajectory, path, path.config.b),
                )
            )
    if config.output_dir is not None:
        from .output import write_convergence

        write_convergence(rows, Path(config.output_dir))
    return rows


@dataclass(frozen=True)
class EnsembleSummary:
    """Per-path records (ordered by seed, then interpretation) and aggregates."""

    records: list
    aggregates: dict = field(default_factory=dict)


def _ensemble_task(args):
    config, seed, interp = args
    cfg = replace(config.with_seed(seed), interpretation=interp, output_dir=None)
    try:
        led = run_simulation(cfg).ledger
    except DivergenceError as exc:
        return (seed, interp.value, "diverged", math.nan, math.nan, str(exc))
    return (seed, interp.value, "ok", led.max_abs_discrepancy, led.max_rel_discrepancy, "")


def _aggregate(records, interp):
    ok = [r for r in records if r[1] == interp and r[2] == "ok"]
    rel = np.array([r[4] for r in ok])
    ab = np.array([r[3] for r in ok])
    n_div = sum(1 for r in records if r[1] == interp and r[2] != "ok")
    if not ok:
        nan = math.nan
        return {"n_ok": 0, "n_diverged": n_div, "rel_mean": nan, "rel_median": nan,
                "rel_p95": nan, "abs_mean": nan, "abs_median": nan, "abs_p95": nan}
    return {
        "n_ok": len(ok),
        "n_diverged": n_div,
        "rel_mean": float(np.mean(rel)),
        "rel_median": float(np.median(rel)),
        "rel_p95": float(np.percentile(rel, 95)),
        "abs_mean": float(np.mean(ab)),
        "abs_median": float(np.median(ab)),
        "abs_p95": float(np.percentile(ab, 95)),
    }


def ensemble_run(config: RunConfig, n_paths: int, interpretations=None, workers: int = 1):
    """Run seeds ``base_seed + i`` for each interpretation and aggregate.

    Diverged paths are counted and left out of the statistics.  Results are
    reduced in seed order, so the output does not depend on ``workers``.
    """
    if not isinstance(n_paths, int) or n_paths < 1:
        raise ConfigurationError(f"n_paths must be >= 1, got {n_paths!r}")
    interpretations = interpretations or [config.interpretation]
    base = config.noise.seed
    if base + n_paths > 2**64:
        raise ConfigurationError("seed range exceeds 64 bits")
    tasks = [(config, base + i, interp) for i in range(n_paths) for interp in interpretations]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_ensemble_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        records = [_ensemble_task(t) for t in tasks]
    aggregates = {interp.value: _aggregate(records, interp.value) for interp in interpretations}
    summary = EnsembleSummary(records, aggregates)
    if config.output_dir is not None:
        from .output import write_ensemble

        write_ensemble(summary, Path(config.output_dir))
    return summary
