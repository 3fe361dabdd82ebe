"""Scalar coefficients of the forced-optomechanics reference propagator.

The reference frame factors into number-conserving exponentials with
coefficients alpha1..alpha4, an optical displacement by beta(t) and a global
phase delta(t):

    alpha1 = -i omega_c t
    alpha2 = -i omega_m t
    alpha3 = -(G/omega_m)^2 [ -i omega_m t + (1 - exp(-i omega_m t)) ]
    alpha4 = -(G/omega_m)   [ 1 - exp(+i omega_m t) ]

    beta_dot  = -i Omega cos(omega_L t) exp(+i omega_c t),   beta(0) = 0
    delta_dot = beta * gamma_dot,  gamma = -conj(beta),      delta(0) = 0

beta is evaluated from the exact antiderivative (not by integration) so the
innermost coefficient of the propagator carries no integrator error; delta is
obtained by quadrature and satisfies Re(delta) + |beta|^2/2 = 0, which makes
exp(delta + |beta|^2/2) a pure phase.

E(t) and F(t) are the scalar magnitudes of the exponents this frame drops
from the exact pump transformation; they are diagnostics only and are never
applied to states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams, TimeGrid
from .ode import OdeProblem, integrate

#: relative detuning below which the pump-cavity resonance limit is used
RESONANCE_EPS = 1e-8

TWO_PI = 2.0 * np.pi


def cis(phase):
    """exp(1j*phase) with the argument reduced modulo 2*pi first.

    Keeps late-time phases (omega_c t ~ 2000) away from large-argument
    trigonometric evaluation.
    """
    return np.exp(1j * np.remainder(phase, TWO_PI))


@dataclass(frozen=True)
class OptoCoeffs:
    """Closed-form optomechanical coefficients at one instant."""

    alpha1: complex
    alpha2: complex
    alpha3: complex
    alpha4: complex
    t: float


@dataclass(frozen=True)
class DriveCoeffs:
    """Pump displacement beta and global-phase exponent delta at one instant.

    gamma = -conj(beta) is implicit.
    """

    beta: complex
    delta: complex
    t: float


@dataclass(frozen=True)
class EFFactors:
    """Magnitudes of the neglected pump-transformation exponents."""

    e_factor: float
    f_factor: float
    t: float


def alpha3(params: SystemParams, t):
    r = params.g_om / params.omega_m
    wt = params.omega_m * np.asarray(t, dtype=float)
    return -(r * r) * (-1j * wt + (1.0 - np.exp(-1j * wt)))


def alpha4(params: SystemParams, t):
    r = params.g_om / params.omega_m
    wt = params.omega_m * np.asarray(t, dtype=float)
    return -r * (1.0 - np.exp(1j * wt))


def opto_coeffs(params: SystemParams, t: float) -> OptoCoeffs:
    """Exact closed-form alpha coefficients at time t >= 0."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return OptoCoeffs(
        alpha1=-1j * params.omega_c * t,
        alpha2=-1j * params.omega_m * t,
        alpha3=complex(alpha3(params, t)),
        alpha4=complex(alpha4(params, t)),
        t=t,
    )


def drive_beta(params: SystemParams, t):
    """Exact antiderivative of beta_dot; accepts scalar or array t >= 0.

    Near pump-cavity resonance (|omega_c - omega_L| < 1e-8 omega_c) the
    difference-frequency term is replaced by its first-order series to avoid
    catastrophic cancellation.
    """
    t = np.asarray(t, dtype=float)
    om = params.pump_amp
    s = params.omega_c + params.omega_L
    d = params.omega_c - params.omega_L
    term_s = (np.exp(1j * s * t) - 1.0) / s
    if abs(d) < RESONANCE_EPS * params.omega_c:
        term_d = 1j * t * (1.0 + 0.5j * d * t)
    else:
        term_d = (np.exp(1j * d * t) - 1.0) / d
    out = -(om / 2.0) * (term_s + term_d)
    return out if out.ndim else complex(out)


def drive_beta_dot(params: SystemParams, t):
    """Right-hand side of the beta equation (used by the quadrature oracle)."""
    t = np.asarray(t, dtype=float)
    out = -1j * params.pump_amp * np.cos(params.omega_L * t) * np.exp(1j * params.omega_c * t)
    return out if out.ndim else complex(out)


def drive_delta(params: SystemParams, grid: TimeGrid) -> np.ndarray:
    """delta(t) on the grid by quadrature of beta * gamma_dot.

    gamma_dot = -conj(beta_dot), so Re(delta) = -|beta|^2/2 holds on every
    sample up to the integration tolerance.
    """

    def rhs(t, y):
        return np.asarray([-drive_beta(params, t) * np.conj(drive_beta_dot(params, t))])

    problem = OdeProblem(
        dimension=1,
        rhs=rhs,
        y0=np.zeros(1, dtype=np.complex128),
        grid=grid,
    )
    sol = integrate(problem, method="rk45", tol=1e-12)
    return sol.values[:, 0]


def drive_coeffs(params: SystemParams, grid: TimeGrid) -> list[DriveCoeffs]:
    """beta and delta sampled on a grid."""
    times = grid.times()
    betas = drive_beta(params, times)
    deltas = drive_delta(params, grid)
    return [DriveCoeffs(beta=complex(b), delta=complex(d), t=float(t))
            for b, d, t in zip(betas, deltas, times)]


def ef_factors(params: SystemParams, t: float) -> EFFactors:
    """Diagnostic E(t), F(t) scalars; both vanish at t = 0 and are O(G/omega_m)."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    r = params.g_om / params.omega_m
    wt = params.omega_m * t
    return EFFactors(
        e_factor=r * r * (wt - np.sin(wt)),
        f_factor=2.0 * r * np.sin(0.5 * wt),
        t=t,
    )
