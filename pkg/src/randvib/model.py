"""Single-degree-of-freedom oscillator  m x'' + k x = g(x, x') + f(x, x') L'(t)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from .errors import ConfigurationError

__all__ = [
    "State",
    "OscillatorModel",
    "total_energy",
    "f_dv_numeric",
    "make_duffing_vdp",
    "make_free_oscillator",
    "make_sine_noise_vdp",
    "MODELS",
    "get_model",
]


class State(NamedTuple):
    t: float
    x: float
    v: float

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.v) and math.isfinite(self.t)


@dataclass(frozen=True)
class OscillatorModel:
    """Mass, stiffness and the two generalized-force callables.

    ``f_dv`` is the analytic velocity derivative of ``f``; when omitted a
    central difference is used.  ``f_dv_chain(x, v, j)`` returns the j-th
    velocity derivative and is only needed by the series jump solver.
    ``series_radius`` is a lower bound on the convergence radius (in jump
    size) of that series, used to warn about slow convergence.
    """

    m: float
    k: float
    g: Callable[[float, float], float]
    f: Callable[[float, float], float]
    f_dv: Optional[Callable[[float, float], float]] = None
    f_dv_chain: Optional[Callable[[float, float, int], float]] = None
    label: str = "custom"
    series_radius: float = math.inf

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise ConfigurationError(f"mass must be positive, got {self.m}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise ConfigurationError(f"stiffness must be positive, got {self.k}")

    @property
    def omega(self) -> float:
        return math.sqrt(self.k / self.m)

    def dfdv(self, x: float, v: float) -> float:
        if self.f_dv is not None:
            return self.f_dv(x, v)
        return f_dv_numeric(self, x, v)

    def derivative(self, x: float, v: float, order: int) -> float:
        """``d^order f / dv^order`` from the analytic chain (order 0 is f)."""
        if order == 0:
            return self.f(x, v)
        if self.f_dv_chain is None:
            raise ConfigurationError(f"model {self.label!r} has no derivative chain")
        return self.f_dv_chain(x, v, order)


def total_energy(model: OscillatorModel, s: State) -> float:
    return 0.5 * model.m * s.v * s.v + 0.5 * model.k * s.x * s.x


def f_dv_numeric(model: OscillatorModel, x: float, v: float, h: float = 1e-5) -> float:
    if not h > 0:
        raise ConfigurationError(f"difference step must be positive, got {h}")
    return (model.f(x, v + h) - model.f(x, v - h)) / (2.0 * h)


def _linear_chain(x, v, j):
    return 1.0 if j == 1 else 0.0


def make_duffing_vdp() -> OscillatorModel:
    """x'' + (1 + x^2) x' + x + x^3 = x' L'(t)."""
    return OscillatorModel(
        m=1.0,
        k=1.0,
        g=lambda x, v: -(1.0 + x * x) * v - x * x * x,
        f=lambda x, v: v,
        f_dv=lambda x, v: 1.0,
        f_dv_chain=_linear_chain,
        label="duffing-vdp",
    )


def make_free_oscillator(m: float = 1.0, k: float = 1.0) -> OscillatorModel:
    zero = lambda x, v: 0.0  # noqa: E731
    return OscillatorModel(
        m=m,
        k=k,
        g=zero,
        f=zero,
        f_dv=zero,
        f_dv_chain=lambda x, v, j: 0.0,
        label="free",
    )


def make_sine_noise_vdp() -> OscillatorModel:
    """Duffing-van der Pol restoring force with bounded noise gain f = sin(x')."""
    return OscillatorModel(
        m=1.0,
        k=1.0,
        g=lambda x, v: -(1.0 + x * x) * v - x * x * x,
        f=lambda x, v: math.sin(v),
        f_dv=lambda x, v: math.cos(v),
        f_dv_chain=lambda x, v, j: math.sin(v + j * math.pi / 2),
        label="sine-vdp",
        # jump-path solution 2 atan(tan(v0/2) e^s) has poles at distance >= pi/2
        series_radius=math.pi / 2,
    )


MODELS = {
    "duffing-vdp": make_duffing_vdp,
    "free": make_free_oscillator,
    "sine-vdp": make_sine_noise_vdp,
}


def get_model(label: str) -> OscillatorModel:
    try:
        return MODELS[label]()
    except KeyError:
        known = ", ".join(sorted(MODELS))
        raise ConfigurationError(f"unknown model {label!r} (known: {known})") from None
