"""Velocity jump maps at Poisson arrivals.

Displacement is continuous across a jump; only the velocity changes.  The
Ito map evaluates the noise gain once, at the pre-jump state.  The
Di Paola-Falsone (DPF) map follows the state along a fictitious path
parameterized by s in [0, dL]:

    dv/ds = f(x, v) / m,   v(0) = v_minus,   v_plus = v(dL)

and reports the correction ``Y = m (v_plus - v_minus)``.  For m = 1 this is
the usual form dY/ds = f(x, v_minus + Y).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import JumpDivergenceError, SeriesDivergenceError, UnsupportedOperationError
from .schemes import Interpretation, JumpSolver

log = logging.getLogger(__name__)

__all__ = [
    "JumpResult",
    "jump_map_ito",
    "jump_map_dpf_ode",
    "jump_map_dpf_series",
    "dpf_series_coefficients",
    "jump_work_exact",
    "jump_work_literal",
    "apply_jump",
    "jump_work",
]


@dataclass(frozen=True)
class JumpResult:
    v_plus: float
    Y: float
    solver_used: str
    substeps_or_terms: int


def _result(v_minus, Y, m, solver, n):
    # v_plus is rebuilt from Y so that v_plus == v_minus + Y/m holds exactly
    return JumpResult(v_minus + Y / m, Y, solver, n)


def jump_map_ito(model, x, v_minus, dL):
    return _result(v_minus, model.f(x, v_minus) * dL, model.m, "ito", 0)


def _rk4_velocity(f, x, v, h, m):
    k1 = f(x, v) / m
    k2 = f(x, v + 0.5 * h * k1) / m
    k3 = f(x, v + 0.5 * h * k2) / m
    k4 = f(x, v + h * k3) / m
    return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_path(model, x, v_minus, dL, substeps, method):
    h = dL / substeps
    f, m = model.f, model.m
    v = v_minus
    for i in range(substeps):
        try:
            if method == "rk4":
                v = _rk4_velocity(f, x, v, h, m)
            else:
                v = v + h * f(x, v) / m
        except OverflowError:
            v = math.inf
        if not math.isfinite(v):
            raise JumpDivergenceError(
                f"jump-path velocity diverged at s={i * h!r} of dL={dL!r}", reached=i * h
            )
    return v


def jump_map_dpf_ode(model, x, v_minus, dL, substeps=64, method="rk4"):
    """DPF jump by fixed-step integration of the jump-path ODE.

    ``method`` is ``"rk4"`` (default) or ``"euler"``.  Negative ``dL`` runs the
    path backwards.
    """
    if substeps < 1:
        raise UnsupportedOperationError(f"substeps must be >= 1, got {substeps}")
    if dL == 0:
        return JumpResult(v_minus, 0.0, f"ode-{method}", substeps)
    v_end = _integrate_path(model, x, v_minus, dL, substeps, method)
    return _result(v_minus, model.m * (v_end - v_minus), model.m, f"ode-{method}", substeps)


def _taylor_coefficients(model, x, v_minus, n_terms):
    """Taylor coefficients c_1..c_n of Y(s) = sum c_j s^j.

    Y' = F(Y) with F(Y) = f(x, v_minus + Y/m).  Expanding F around 0 with the
    analytic derivative chain, F(Y(s)) = sum_j d_j Y(s)^j with
    d_j = f^(j)(x, v_minus) / (j! m^j).  Since Y(0) = 0, the s^n coefficient
    of F(Y(s)) only involves c_1..c_n, so c_{n+1} follows from it directly.
    ``powers[j][n]`` holds the s^n coefficient of Y^j.
    """
    if model.f_dv_chain is None:
        raise UnsupportedOperationError(
            f"model {model.label!r} has no derivative chain; use the ODE jump solver"
        )
    m = model.m
    d = [model.derivative(x, v_minus, j) / (math.factorial(j) * m**j) for j in range(n_terms)]
    c = [0.0] * (n_terms + 1)
    powers = [[0.0] * n_terms for _ in range(n_terms)]
    powers[0][0] = 1.0
    for n in range(n_terms):
        for j in range(1, n + 1):
            prev = powers[j - 1]
            powers[j][n] = sum(c[i] * prev[n - i] for i in range(1, n - j + 2))
        c[n + 1] = sum(d[j] * powers[j][n] for j in range(n + 1)) / (n + 1)
    return c[1:]


def dpf_series_coefficients(model, x, v_minus, n_terms):
    """The series terms f^(1), ..., f^(n) with Y = sum_j f^(j) dL^j / j!.

    f^(1) = f and f^(j) = (1/m) d/dv f^(j-1) * f, evaluated at the pre-jump
    state; for m = 1 this is the classical DPF recursion.
    """
    c = _taylor_coefficients(model, x, v_minus, n_terms)
    return [math.factorial(j + 1) * cj for j, cj in enumerate(c)]


def jump_map_dpf_series(model, x, v_minus, dL, n_terms=15):
    if n_terms < 1:
        raise UnsupportedOperationError(f"n_terms must be >= 1, got {n_terms}")
    c = _taylor_coefficients(model, x, v_minus, n_terms)
    if abs(dL) >= model.series_radius:
        log.warning(
            "jump size %g is outside the series radius %g of model %s; prefer the ODE solver",
            dL, model.series_radius, model.label,
        )
    Y = 0.0
    for cj in reversed(c):
        Y = (Y + cj) * dL
        if not math.isfinite(Y):
            raise SeriesDivergenceError(f"series partial sum is non-finite for dL={dL!r}")
    return _result(v_minus, Y, model.m, "series", n_terms)


def jump_work_exact(model, x, v_minus, dL, substeps=64, method="rk4"):
    """Work of the noise force along the jump path.

    Integrates dv/ds = f/m together with dW/ds = f v.  Along the exact path
    W(dL) = m (v_plus^2 - v_minus^2) / 2.
    """
    if dL == 0:
        return 0.0
    h = dL / substeps
    f, m = model.f, model.m
    v, W = v_minus, 0.0
    for i in range(substeps):
        try:
            v, W = _work_step(f, x, v, W, h, m, method)
        except OverflowError:
            v = math.inf
        if not (math.isfinite(v) and math.isfinite(W)):
            raise JumpDivergenceError(
                f"jump-work integration diverged at s={i * h!r} of dL={dL!r}", reached=i * h
            )
    return W


def _work_step(f, x, v, W, h, m, method):
    if method == "rk4":
        v1 = v
        f1 = f(x, v1)
        v2 = v + 0.5 * h * f1 / m
        f2 = f(x, v2)
        v3 = v + 0.5 * h * f2 / m
        f3 = f(x, v3)
        v4 = v + h * f3 / m
        f4 = f(x, v4)
        v = v + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4) / m
        W = W + (h / 6.0) * (f1 * v1 + 2.0 * f2 * v2 + 2.0 * f3 * v3 + f4 * v4)
        return v, W
    fv = f(x, v)
    return v + h * fv / m, W + h * fv * v


def jump_work_literal(model, x, v_minus, dL, substeps=64):
    """Diagnostic: RK4 solution of Z' = f(x, Z + v_minus) (Z + v_minus), Z(0) = 0.

    The velocity argument is fed with the work accumulator itself, so this
    does not reproduce the kinetic-energy change beyond first order in dL.
    Provided only to compare against :func:`jump_work_exact`.
    """
    if dL == 0:
        return 0.0
    h = dL / substeps
    f = model.f

    def rhs(z):
        u = z + v_minus
        return f(x, u) * u

    z = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(substeps):
            try:
                k1 = rhs(z)
                k2 = rhs(z + 0.5 * h * k1)
                k3 = rhs(z + 0.5 * h * k2)
                k4 = rhs(z + h * k3)
                z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            except OverflowError:
                z = math.inf
            if not math.isfinite(z):
                raise JumpDivergenceError(
                    f"literal jump-work integration diverged at s={i * h!r} of dL={dL!r}", reached=i * h
                )
    return z


def apply_jump(model, x, v_minus, dL, interpretation, solver: JumpSolver):
    """The interpretation-matched jump map."""
    if interpretation is Interpretation.ITO:
        return jump_map_ito(model, x, v_minus, dL)
    if solver.kind == "series":
        return jump_map_dpf_series(model, x, v_minus, dL, solver.n)
    method = "euler" if solver.kind == "ode-euler" else "rk4"
    return jump_map_dpf_ode(model, x, v_minus, dL, solver.n, method)


# RK4 resolution for the work integral when the jump itself used the series
_SERIES_WORK_SUBSTEPS = 64


def jump_work(model, x, v_minus, dL, interpretation, solver: JumpSolver, mode="coupled"):
    """Work credited to one jump by the interpretation-matched work functional."""
    if interpretation is Interpretation.ITO:
        return model.f(x, v_minus) * v_minus * dL
    if mode == "literal":
        n = solver.n if solver.kind != "series" else _SERIES_WORK_SUBSTEPS
        return jump_work_literal(model, x, v_minus, dL, n)
    if solver.kind == "series":
        return jump_work_exact(model, x, v_minus, dL, _SERIES_WORK_SUBSTEPS)
    method = "euler" if solver.kind == "ode-euler" else "rk4"
    return jump_work_exact(model, x, v_minus, dL, solver.n, method)
