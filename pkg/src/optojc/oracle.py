"""Brute-force propagation of the full Schroedinger equation.

Classical fixed-step 4th-order integration of i dpsi/dt = H(t) psi in the
truncated hybrid space.  H(t) enters as a cached static part plus the pump
operator scaled by pump_amp * cos(omega_L t); nothing is reassembled per
step.  The requested dt is shrunk so a whole number of steps lands on each
output sample.  Norms are never renormalized: the drift is measured and
reported, and a run whose drift exceeds 1e-6 is rejected.

A constant multiple of the identity ("energy shift") is subtracted from the
static part by default.  It only changes a global phase -- all populations
and observables are untouched -- but it centers the occupied spectrum near
zero, which shrinks the (dt * E)^6 amplitude damping of the integrator by
orders of magnitude.  Pass ``energy_shift=0.0`` to propagate raw phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .analytic import ObservableSeries, mandel_q_series
from .fock import hamiltonian_parts, product_state
from .model import Scenario, validate_scenario

DEFAULT_DT = 0.005
NORM_DRIFT_BOUND = 1e-6


class NormDriftError(RuntimeError):
    """Norm drift exceeded the acceptance bound; halve the step."""


@dataclass(frozen=True)
class PropagationRun:
    """States sampled on the output grid plus integration diagnostics."""

    scenario: Scenario
    times: np.ndarray
    states: np.ndarray  # (n_samples, dim) complex
    dt: float
    energy_shift: float
    norm_drift: float  # max |  ||psi||^2 - 1  |
    n_steps: int


def propagate(scenario: Scenario, dt: float | None = None,
              energy_shift: float | str = "auto") -> PropagationRun:
    """Propagate the scenario's initial state across its grid.

    dt defaults to the grid's integrator_dt, else 0.005.  energy_shift="auto"
    subtracts the initial static-energy expectation; a float subtracts that
    value; 0.0 disables the shift.
    """
    s = validate_scenario(scenario)
    if dt is None:
        dt = s.grid.integrator_dt if s.grid.integrator_dt is not None else DEFAULT_DT
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    static, pump = hamiltonian_parts(s.params, s.cutoffs)
    psi = product_state(s.initial, s.cutoffs).amplitudes.copy()
    if energy_shift == "auto":
        shift = float(np.real(np.vdot(psi, static @ psi)))
    else:
        shift = float(energy_shift)
    if shift != 0.0:
        static = (static - shift * _identity_like(static)).tocsr()
    times = s.grid.times()
    amp = s.params.pump_amp
    wl = s.params.omega_L
    pumped = amp != 0.0

    def deriv(t, v):
        out = static @ v
        if pumped:
            out += (amp * np.cos(wl * t)) * (pump @ v)
        return -1j * out

    out = np.empty((len(times), len(psi)), dtype=np.complex128)
    out[0] = psi
    t = times[0]
    n_steps = 0
    for k in range(1, len(times)):
        span = times[k] - t
        n_sub = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = deriv(t, psi)
            k2 = deriv(t + 0.5 * h, psi + (0.5 * h) * k1)
            k3 = deriv(t + 0.5 * h, psi + (0.5 * h) * k2)
            k4 = deriv(t + h, psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            n_steps += 1
        t = times[k]
        out[k] = psi
    norms2 = np.sum(np.abs(out) ** 2, axis=1)
    drift = float(np.max(np.abs(norms2 - 1.0)))
    if drift > NORM_DRIFT_BOUND:
        raise NormDriftError(
            f"norm drift {drift:.3e} exceeds {NORM_DRIFT_BOUND:g}; "
            f"retry with dt = {dt / 2:g}")
    return PropagationRun(scenario=s, times=times, states=out, dt=float(dt),
                          energy_shift=shift, norm_drift=drift, n_steps=n_steps)


def _identity_like(m):
    return sp.identity(m.shape[0], dtype=m.dtype, format="csr")


def observables_numeric(run: PropagationRun) -> dict[str, ObservableSeries]:
    """<n>, <n^2>, <N>, P_e and Mandel Q straight from the sampled states."""
    trunc = run.scenario.cutoffs
    dim = trunc.dim
    idx = np.arange(dim)
    cav = (idx // (2 * trunc.n_mech)).astype(float)
    atom = (idx // trunc.n_mech) % 2
    mech = (idx % trunc.n_mech).astype(float)
    probs = np.abs(run.states) ** 2  # (K, dim)
    n1 = probs @ cav
    n2 = probs @ (cav * cav)
    big_n = probs @ mech
    pe = probs @ (atom == 0).astype(float)
    times = run.times
    out = {
        "pe": ObservableSeries(times=times, values=pe, kind="pe"),
        "photon_n": ObservableSeries(times=times, values=n1, kind="photon_n"),
        "photon_n2": ObservableSeries(times=times, values=n2, kind="photon_n2"),
        "phonon_n": ObservableSeries(times=times, values=big_n, kind="phonon_n"),
    }
    out["mandel_q"] = mandel_q_series(out["photon_n"], out["photon_n2"])
    return out
