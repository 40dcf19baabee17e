"""Time stepping between jumps.

Both steppers are Ito-form with left-point coefficients.  The Stratonovich
reading of the Brownian integral is obtained by stepping the Ito-equivalent
system, whose velocity drift carries the extra ``(b^2 / 2m) f f_v`` force.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigurationError, DivergenceError
from .model import OscillatorModel, State

__all__ = [
    "Interpretation",
    "Stepper",
    "JumpSolver",
    "SchemeConfig",
    "Propagator2x2",
    "linear_propagator",
    "effective_ito_drift",
    "step_euler_maruyama",
    "step_variation_of_parameters",
    "STEPPERS",
]


class Interpretation(enum.Enum):
    ITO = "ito"
    STRATONOVICH_DPF = "strat-dpf"


class Stepper(enum.Enum):
    EULER_MARUYAMA = "euler"
    VARIATION_OF_PARAMETERS = "vop"


@dataclass(frozen=True)
class JumpSolver:
    """How the Di Paola-Falsone jump correction is evaluated.

    ``kind`` is ``ode`` (RK4), ``ode-euler`` (explicit Euler) or ``series``;
    ``n`` is the substep count or the number of series terms.
    """

    kind: str = "ode"
    n: int = 64

    def __post_init__(self):
        if self.kind not in ("ode", "ode-euler", "series"):
            raise ConfigurationError(f"unknown jump solver {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigurationError(f"jump solver resolution must be an integer >= 1, got {self.n!r}")

    @classmethod
    def parse(cls, text: str) -> "JumpSolver":
        kind, _, n = text.strip().partition(":")
        try:
            return cls(kind, int(n)) if n else cls(kind)
        except ValueError:
            raise ConfigurationError(f"bad jump solver {text!r}") from None

    def __str__(self):
        return f"{self.kind}:{self.n}"


@dataclass(frozen=True)
class SchemeConfig:
    interpretation: Interpretation = Interpretation.STRATONOVICH_DPF
    stepper: Stepper = Stepper.EULER_MARUYAMA
    jump_solver: JumpSolver = JumpSolver()
    b: float = 1.0
    c: float = 1.0


class Propagator2x2(NamedTuple):
    a11: float
    a12: float
    a21: float
    a22: float

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def __matmul__(self, other: "Propagator2x2") -> "Propagator2x2":
        return Propagator2x2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )


def linear_propagator(model: OscillatorModel, t: float) -> Propagator2x2:
    """exp(A t) for A = [[0, 1], [-k/m, 0]]."""
    w = model.omega
    c, s = math.cos(w * t), math.sin(w * t)
    return Propagator2x2(c, s / w, -w * s, c)


def effective_ito_drift(model, s, interpretation, b):
    """Velocity drift of the Ito-form system at state ``s``."""
    force = -model.k * s.x + model.g(s.x, s.v)
    if interpretation is Interpretation.STRATONOVICH_DPF:
        force += (b * b / (2.0 * model.m)) * model.f(s.x, s.v) * model.dfdv(s.x, s.v)
    return force / model.m


def _checked(new: State, old: State) -> State:
    if not (math.isfinite(new.x) and math.isfinite(new.v)):
        raise DivergenceError(f"non-finite state after step from {old}", state=old)
    return new


def _overflow_guard(step):
    # user-supplied coefficients may raise instead of returning inf
    def guarded(model, s, dt, dB, interpretation, b):
        try:
            return step(model, s, dt, dB, interpretation, b)
        except OverflowError:
            raise DivergenceError(f"overflow in step from {s}", state=s) from None

    guarded.__name__, guarded.__doc__ = step.__name__, step.__doc__
    return guarded


@_overflow_guard
def step_euler_maruyama(model, s, dt, dB, interpretation, b):
    a = effective_ito_drift(model, s, interpretation, b)
    sigma = b * model.f(s.x, s.v) / model.m
    return _checked(State(s.t + dt, s.x + s.v * dt, s.v + a * dt + sigma * dB), s)


@_overflow_guard
def step_variation_of_parameters(model, s, dt, dB, interpretation, b):
    """Exact rotation of the linear part plus left-point forcing through exp(A dt).

    Exact when g = f = 0.
    """
    p = linear_propagator(model, dt)
    # forcing impulse over the step, with the interpretation-corrected g
    g_eff = model.g(s.x, s.v)
    fv = model.f(s.x, s.v)
    if interpretation is Interpretation.STRATONOVICH_DPF:
        g_eff += (b * b / (2.0 * model.m)) * fv * model.dfdv(s.x, s.v)
    impulse = (g_eff * dt + b * fv * dB) / model.m
    x = p.a11 * s.x + p.a12 * s.v + p.a12 * impulse
    v = p.a21 * s.x + p.a22 * s.v + p.a22 * impulse
    return _checked(State(s.t + dt, x, v), s)


STEPPERS = {
    Stepper.EULER_MARUYAMA: step_euler_maruyama,
    Stepper.VARIATION_OF_PARAMETERS: step_variation_of_parameters,
}
