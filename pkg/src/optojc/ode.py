"""Deterministic initial-value integrators for small dense complex systems.

Two methods are provided: classical fixed-step RK4 and adaptive
Dormand-Prince RK45 with error-per-unit-time control.  Output is produced at
the requested grid samples by clamping steps to land on them exactly; no
interpolation is ever used, so sampled values carry only integration error.
Both methods are bitwise reproducible for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import TimeGrid

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b5 - b4: weights of the embedded error estimate
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_MIN_H_REL = 1e-12
_SAFETY = 0.9
_MAX_GROW = 5.0
_MAX_SHRINK = 0.2


class OdeError(RuntimeError):
    """Integration failure; ``t`` is the time at which it occurred."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class OdeStiffnessError(OdeError):
    """Adaptive step size underflowed (problem too stiff or singular)."""


class OdeDivergenceError(OdeError):
    """The right-hand side or the state became non-finite."""


@dataclass(frozen=True)
class OdeProblem:
    """dy/dt = rhs(t, y) with y(0) = y0, sampled on ``grid``.

    ``rhs`` must be pure; ``y0`` must have length ``dimension``.
    """

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        if len(self.y0) != self.dimension:
            raise ValueError(
                f"y0 has length {len(self.y0)}, expected dimension {self.dimension}"
            )


@dataclass(frozen=True)
class OdeSolution:
    times: np.ndarray
    values: np.ndarray  # (n_samples, dimension) complex
    n_steps: int
    n_rejected: int
    max_error_estimate: float


def _check_finite(y: np.ndarray, t: float, what: str):
    if not np.all(np.isfinite(y.view(np.float64))):
        raise OdeDivergenceError(f"{what} became non-finite at t = {t:.6g}", t)


def integrate(problem: OdeProblem, method: str = "rk45",
              tol: float = 1e-10, dt: float | None = None) -> OdeSolution:
    """Integrate ``problem`` and return dense output at the grid samples.

    method="rk45": adaptive Dormand-Prince; the local error estimate is kept
    below ``tol`` per unit time.  method="rk4": classical fixed step; ``dt``
    is shrunk per sample interval so a whole number of steps fits.
    """
    if method == "rk45":
        if tol <= 0:
            raise ValueError(f"tol must be positive, got {tol}")
        return _integrate_rk45(problem, tol)
    if method == "rk4":
        if dt is None or dt <= 0:
            raise ValueError(f"rk4 requires a positive dt, got {dt!r}")
        return _integrate_rk4(problem, dt)
    raise ValueError(f"unknown method {method!r}")


def _integrate_rk4(problem: OdeProblem, dt: float) -> OdeSolution:
    times = problem.grid.times()
    y = np.array(problem.y0, dtype=np.complex128)
    out = np.empty((len(times), problem.dimension), dtype=np.complex128)
    out[0] = y
    rhs = problem.rhs
    t = times[0]
    n_steps = 0
    for k in range(1, len(times)):
        span = times[k] - t
        n_sub = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            n_steps += 1
        t = times[k]
        _check_finite(y, t, "state")
        out[k] = y
    return OdeSolution(times=times, values=out, n_steps=n_steps,
                       n_rejected=0, max_error_estimate=0.0)


def _integrate_rk45(problem: OdeProblem, tol: float) -> OdeSolution:
    times = problem.grid.times()
    y = np.array(problem.y0, dtype=np.complex128)
    out = np.empty((len(times), problem.dimension), dtype=np.complex128)
    out[0] = y
    rhs = problem.rhs
    t = times[0]
    span_total = times[-1] - times[0]
    h_pace = min(0.1, span_total / 100.0)
    n_steps = 0
    n_rejected = 0
    max_err = 0.0
    k1 = rhs(t, y)  # FSAL: reused across accepted steps
    _check_finite(k1, t, "rhs output")
    ks = [None] * 7
    for k_idx in range(1, len(times)):
        t_target = times[k_idx]
        while t < t_target:
            clamped = h_pace > t_target - t
            h = min(h_pace, t_target - t)
            if h < _MIN_H_REL * max(1.0, abs(t)):
                raise OdeStiffnessError(
                    f"step size underflow (h = {h:.3e}) at t = {t:.6g}", t)
            ks[0] = k1
            for i in range(1, 7):
                yi = y.copy()
                for j, a in enumerate(_A[i]):
                    if a != 0.0:
                        yi += (h * a) * ks[j]
                ks[i] = rhs(t + _C[i] * h, yi)
            err_vec = np.zeros_like(y)
            for j, e in enumerate(_E):
                if e != 0.0:
                    err_vec += (h * e) * ks[j]
            err = float(np.max(np.abs(err_vec)))
            if not np.isfinite(err):
                raise OdeDivergenceError(
                    f"error estimate became non-finite at t = {t:.6g}", t)
            if err <= tol * h:
                y_new = y.copy()
                for j, b in enumerate(_B5):
                    if b != 0.0:
                        y_new += (h * b) * ks[j]
                _check_finite(y_new, t + h, "state")
                t = t + h
                y = y_new
                k1 = ks[6]  # FSAL
                n_steps += 1
                max_err = max(max_err, err)
                factor = _MAX_GROW if err == 0.0 else min(
                    _MAX_GROW, _SAFETY * (tol * h / err) ** 0.2)
                candidate = h * max(_MAX_SHRINK, factor)
                # a step clamped to a sample boundary must not collapse the pace
                h_pace = max(h_pace, candidate) if clamped else candidate
            else:
                n_rejected += 1
                h_pace = h * max(_MAX_SHRINK,
                                 _SAFETY * (tol * h / err) ** 0.2)
        t = t_target
        out[k_idx] = y
    return OdeSolution(times=times, values=out, n_steps=n_steps,
                       n_rejected=n_rejected, max_error_estimate=max_err)
