"""Nonlinear random vibration under Gaussian and Poisson white noise.

Simulates m x'' + k x = g(x, x') + f(x, x') L'(t) with L = b B + c C and
audits each trajectory against the energy-work balance.
"""
from .audit import EnergyLedger, build_ledger, energy_increment, work_done_dpf, work_done_ito
from .errors import (
    AlignmentError,
    ConfigurationError,
    DivergenceError,
    JumpDivergenceError,
    OutputError,
    SeriesDivergenceError,
    UnsupportedOperationError,
)
from .harness import RunConfig, SimulationResult, convergence_study, ensemble_run, run_simulation
from .jumps import (
    JumpResult,
    jump_map_dpf_ode,
    jump_map_dpf_series,
    jump_map_ito,
    jump_work_exact,
)
from .model import OscillatorModel, State, get_model, make_duffing_vdp, total_energy
from .noise import DrivingPath, JumpEvent, NoiseConfig, build_driving_path
from .schemes import Interpretation, JumpSolver, SchemeConfig, Stepper
from .trajectory import Trajectory

__version__ = "0.1.0"
