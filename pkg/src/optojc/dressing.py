"""Dressing coefficients of the driven atom and the per-ladder exchange.

In the displaced interaction frame the atom-field dynamics factor into a
2x2 atomic rotation

    U1 = exp(a_z sz) exp(a_+ s+) exp(a_- s-)        (basis |e>, |g|)

driven only by the pump displacement beta(t), and one rotation per
excitation manifold {|n,e>, |n+1,g>} (M = n+1 total excitations)

    U2 = exp(e1 c+) exp(e2 c) exp(e3 sz)            (basis |n,e>, |n+1,g>)

where c lowers |n+1,g> to |n,e> and c^2 = (c+)^2 = 0.  The coefficient ODE
systems are

    a_z' = -i( w_a/2 - lam conj(b) E a_+ )
    a_+' = -i lam ( b / E + conj(b) a_+^2 E )          E = e^{i w_c t + 2 a_z}
    a_-' = -i lam conj(b) E

    e1' = -i lam sqrt(M) ( P - e1^2 conj(P) )
    e2' = -i lam sqrt(M) ( 1 + 2 e1 e2 ) conj(P)       P = e^{i theta(t)}
    e3' = -i lam sqrt(M) e1 conj(P)

with all coefficients zero at t = 0.  theta is the phase of E: its real part,
of order |a_+|^2, is discarded so the ladder generator stays Hermitian -- the
discarded piece is smaller than terms already dropped by the weak-coupling
(lam << w_a) linearization that produces this interaction, and keeping it
would spoil unitarity of the ladder rotations at the 1e-5 level for nothing.

Numerics: the integrated variable is the deviation a~_z = a_z + i w_a t / 2,
so every solved quantity is slowly varying; fast phases are reconstructed
with arguments reduced modulo 2*pi.  e1 obeys a Riccati equation and can
blow up at isolated times when a manifold undergoes a complete population
flip (exactly on resonance); affected ladders fall back to entries of the
directly integrated 2x2 propagator, which stays bounded.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .coeffs import cis, drive_beta
from .model import SystemParams, TimeGrid
from .ode import OdeError, OdeProblem, integrate

log = logging.getLogger(__name__)

#: default error-per-unit-time tolerance for coefficient solves; tight so the
#: factorization cross-checks probe the algebra rather than the integrator
DRESSING_TOL = 1e-12

#: |e1| beyond which a ladder solve is declared singular
_E1_LIMIT = 1e8


class FactorizationSingularityError(RuntimeError):
    """An exponential-product coefficient diverged; ``t`` is the failure time."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class AtomDressing:
    """Atomic dressing coefficients sampled on a grid.

    ``tilde_z`` is the slow deviation a_z + i w_a t / 2 actually integrated;
    ``alpha_z`` reconstructs the full coefficient.
    """

    params: SystemParams
    times: np.ndarray
    tilde_z: np.ndarray
    alpha_p: np.ndarray
    alpha_m: np.ndarray

    @property
    def alpha_z(self) -> np.ndarray:
        return self.tilde_z - 0.5j * self.params.omega_a * self.times


@dataclass(frozen=True)
class LadderCoeffs:
    """Ladder-rotation coefficients for manifold M = n+1.

    When ``singular_from`` is set, the exponential-product parameterization
    diverged at that time; ``u2_direct`` then holds the 2x2 rotation entries
    recovered from the direct propagator at every sample and the eps arrays
    are NaN.
    """

    ladder_index: int
    times: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    eps3: np.ndarray
    singular_from: float | None = None
    u2_direct: np.ndarray | None = None


def solve_atom_dressing(params: SystemParams, grid: TimeGrid,
                        beta_fn=None, tol: float = DRESSING_TOL) -> AtomDressing:
    """Integrate the atomic coefficient system on the grid.

    ``beta_fn(t)`` defaults to the closed-form pump displacement.  With a
    zero pump the system is exactly stationary: a_z = -i w_a t / 2 and
    a_+/- = 0 with no integration error.
    """
    times = grid.times()
    if beta_fn is None and params.pump_amp == 0.0:
        zero = np.zeros(len(times), dtype=np.complex128)
        return AtomDressing(params=params, times=times, tilde_z=zero.copy(),
                            alpha_p=zero.copy(), alpha_m=zero.copy())
    if beta_fn is None:
        def beta_fn(t):
            return drive_beta(params, t)
    lam = params.lambda_jc
    dca = params.omega_c - params.omega_a

    def rhs(t, y):
        tz, ap = y[0], y[1]
        b = beta_fn(t)
        bb = np.conj(b)
        env = np.exp(2.0 * tz) * cis(dca * t)
        out = np.empty(3, dtype=np.complex128)
        out[0] = 1j * lam * bb * env * ap
        out[1] = -1j * lam * (b / env + bb * ap * ap * env)
        out[2] = -1j * lam * bb * env
        return out

    problem = OdeProblem(dimension=3, rhs=rhs,
                         y0=np.zeros(3, dtype=np.complex128), grid=grid)
    try:
        sol = integrate(problem, method="rk45", tol=tol)
    except OdeError as exc:
        raise FactorizationSingularityError(
            f"atomic dressing coefficients diverged at t = {exc.t:.6g}", exc.t
        ) from exc
    return AtomDressing(params=params, times=times,
                        tilde_z=sol.values[:, 0],
                        alpha_p=sol.values[:, 1],
                        alpha_m=sol.values[:, 2])


def _exp_alpha_z(d: AtomDressing, k=None):
    """e^{alpha_z} with the fast atomic phase reduced mod 2*pi."""
    tz = d.tilde_z if k is None else d.tilde_z[k]
    t = d.times if k is None else d.times[k]
    return np.exp(tz.real) * cis(tz.imag - 0.5 * d.params.omega_a * t)


def u1_matrix(d: AtomDressing, k: int) -> np.ndarray:
    """Atomic rotation U1 at sample k, basis (|e>, |g>); det U1 = 1 exactly."""
    return u1_matrix_series(d, k)


def u1_matrix_series(d: AtomDressing, k=None) -> np.ndarray:
    """U1 at every sample, shape (K, 2, 2); pass k for a single sample."""
    ea = _exp_alpha_z(d, k)
    ap = d.alpha_p if k is None else d.alpha_p[k]
    am = d.alpha_m if k is None else d.alpha_m[k]
    u = np.empty(np.shape(ea) + (2, 2), dtype=np.complex128)
    u[..., 0, 0] = ea * (1.0 + ap * am)
    u[..., 0, 1] = ea * ap
    u[..., 1, 0] = am / ea
    u[..., 1, 1] = 1.0 / ea
    return u


def u1_inverse_series(d: AtomDressing, k=None) -> np.ndarray:
    """Adjugate inverse of U1 (valid even where U1 is not exactly unitary)."""
    ea = _exp_alpha_z(d, k)
    ap = d.alpha_p if k is None else d.alpha_p[k]
    am = d.alpha_m if k is None else d.alpha_m[k]
    u = np.empty(np.shape(ea) + (2, 2), dtype=np.complex128)
    u[..., 0, 0] = 1.0 / ea
    u[..., 0, 1] = -ea * ap
    u[..., 1, 0] = -am / ea
    u[..., 1, 1] = ea * (1.0 + ap * am)
    return u


def u2_matrix(lc: LadderCoeffs, k: int) -> np.ndarray:
    """Ladder rotation U2 at sample k, basis (|n,e>, |n+1,g>)."""
    return u2_matrix_series(lc, k)


def u2_matrix_series(lc: LadderCoeffs, k=None) -> np.ndarray:
    """U2 at every sample (or one), from eps or from the direct fallback."""
    if lc.u2_direct is not None:
        return lc.u2_direct if k is None else lc.u2_direct[k]
    e1 = lc.eps1 if k is None else lc.eps1[k]
    e2 = lc.eps2 if k is None else lc.eps2[k]
    e3 = lc.eps3 if k is None else lc.eps3[k]
    ee3 = np.exp(e3)
    u = np.empty(np.shape(e1) + (2, 2), dtype=np.complex128)
    u[..., 0, 0] = ee3
    u[..., 0, 1] = e2 / ee3
    u[..., 1, 0] = e1 * ee3
    u[..., 1, 1] = (1.0 + e1 * e2) / ee3
    return u


def _ladder_phase_theta(params: SystemParams, t, tz_imag):
    """Phase theta of the Hermitian-kept ladder generator."""
    return (params.omega_c - params.omega_a) * t + 2.0 * tz_imag


def solve_ladders(params: SystemParams, ladder_indices, dressing: AtomDressing,
                  grid: TimeGrid, beta_fn=None,
                  tol: float = DRESSING_TOL) -> list[LadderCoeffs]:
    """Solve the eps systems for several manifolds in one batched integration.

    The atomic deviation equations are re-integrated jointly with the eps
    systems (the ladder generator needs a_z between samples, and interpolating
    dressing samples would contaminate the error budget); ``dressing`` fixes
    the grid and supplies U1 entries for any singular-ladder fallback.
    Ladders whose Riccati coefficient blows up are re-solved via
    :func:`direct_ladder_propagator` and flagged.
    """
    ms = [int(m) for m in ladder_indices]
    if any(m < 1 for m in ms):
        raise ValueError(f"ladder indices must be >= 1, got {ms}")
    times = grid.times()
    if dressing.times.shape != times.shape or not np.array_equal(dressing.times, times):
        raise ValueError("dressing was sampled on a different grid")
    if beta_fn is None:
        def beta_fn(t):
            return drive_beta(params, t)
    try:
        sol = _integrate_eps_batch(params, ms, grid, beta_fn, tol)
        return [
            LadderCoeffs(ladder_index=m, times=times,
                         eps1=sol[:, 2 + 3 * j],
                         eps2=sol[:, 3 + 3 * j],
                         eps3=sol[:, 4 + 3 * j])
            for j, m in enumerate(ms)
        ]
    except OdeError:
        pass  # isolate the singular manifold(s) below
    out = []
    for m in ms:
        try:
            sol = _integrate_eps_batch(params, [m], grid, beta_fn, tol)
            out.append(LadderCoeffs(ladder_index=m, times=times,
                                    eps1=sol[:, 2], eps2=sol[:, 3], eps3=sol[:, 4]))
        except OdeError as exc:
            log.warning(
                "ladder M=%d: exponential-product coefficients diverged at "
                "t=%.6g; using direct propagator entries", m, exc.t)
            v = direct_ladder_propagator(params, m, grid, beta_fn=beta_fn, tol=tol)
            u2 = u1_inverse_series(dressing) @ v
            nan = np.full(len(times), np.nan, dtype=np.complex128)
            out.append(LadderCoeffs(ladder_index=m, times=times,
                                    eps1=nan, eps2=nan.copy(), eps3=nan.copy(),
                                    singular_from=exc.t, u2_direct=u2))
    return out


def solve_ladder(params: SystemParams, ladder_index: int, dressing: AtomDressing,
                 grid: TimeGrid, beta_fn=None,
                 tol: float = DRESSING_TOL) -> LadderCoeffs:
    """Solve one manifold; see :func:`solve_ladders`."""
    return solve_ladders(params, [ladder_index], dressing, grid,
                         beta_fn=beta_fn, tol=tol)[0]


def _integrate_eps_batch(params, ms, grid, beta_fn, tol):
    lam = params.lambda_jc
    dca = params.omega_c - params.omega_a
    g = lam * np.sqrt(np.asarray(ms, dtype=float))
    n = 2 + 3 * len(ms)

    def rhs(t, y):
        tz, ap = y[0], y[1]
        b = beta_fn(t)
        bb = np.conj(b)
        env = np.exp(2.0 * tz) * cis(dca * t)
        p = cis(dca * t + 2.0 * tz.imag)
        pc = p.conjugate()
        e1 = y[2::3]
        e2 = y[3::3]
        if np.max(np.abs(e1.real)) > _E1_LIMIT:
            raise OdeError("ladder Riccati coefficient diverged", t)
        out = np.empty(n, dtype=np.complex128)
        out[0] = 1j * lam * bb * env * ap
        out[1] = -1j * lam * (b / env + bb * ap * ap * env)
        out[2::3] = -1j * g * (p - e1 * e1 * pc)
        out[3::3] = -1j * g * (1.0 + 2.0 * e1 * e2) * pc
        out[4::3] = -1j * g * e1 * pc
        return out

    problem = OdeProblem(dimension=n, rhs=rhs,
                         y0=np.zeros(n, dtype=np.complex128), grid=grid)
    return integrate(problem, method="rk45", tol=tol).values


def direct_ladder_propagator(params: SystemParams, ladder_index: int,
                             grid: TimeGrid, beta_fn=None,
                             tol: float = DRESSING_TOL) -> np.ndarray:
    """Directly integrated 2x2 propagator on one manifold, shape (K, 2, 2).

    Cross-check oracle for the factorized form: integrates i dV/dt = G V with
    the same approximated interaction in non-factorized form,
    G = H_atom + U1 H_ladder U1^{-1}, so V = U1 U2 holds as an identity and
    any mismatch measures the coefficient ODEs and matrix assembly only.
    G is Hermitian, hence V is unitary to integrator precision.
    """
    return direct_ladder_propagators(params, [ladder_index], grid,
                                     beta_fn=beta_fn, tol=tol)[0]


def direct_ladder_propagators(params: SystemParams, ladder_indices, grid: TimeGrid,
                              beta_fn=None, tol: float = DRESSING_TOL) -> np.ndarray:
    """Batched direct propagators, shape (L, K, 2, 2).

    Integrated in the frame rotating at the bare atomic frequency (where the
    generator is slowly varying) and mapped back at the samples.
    """
    ms = [int(m) for m in ladder_indices]
    if any(m < 1 for m in ms):
        raise ValueError(f"ladder indices must be >= 1, got {ms}")
    if beta_fn is None:
        def beta_fn(t):
            return drive_beta(params, t)
    lam = params.lambda_jc
    wa = params.omega_a
    dca = params.omega_c - params.omega_a
    rtm = np.sqrt(np.asarray(ms, dtype=float))
    nl = len(ms)
    n = 3 + 4 * nl

    def rhs(t, y):
        tz, ap, am = y[0], y[1], y[2]
        b = beta_fn(t)
        bb = np.conj(b)
        env = np.exp(2.0 * tz) * cis(dca * t)
        p = cis(dca * t + 2.0 * tz.imag)
        pc = p.conjugate()
        out = np.empty(n, dtype=np.complex128)
        out[0] = 1j * lam * bb * env * ap
        out[1] = -1j * lam * (b / env + bb * ap * ap * env)
        out[2] = -1j * lam * bb * env
        # Frame rotating at the bare atomic frequency: V = R W with
        # R = e^{-i wa t sz/2}; then i dW/dt = Gw W with
        # Gw = (R^-1 U1) H_ladder (R^-1 U1)^-1 + pump part, and R^-1 U1 is
        # the U1 matrix built from the slow deviation alone.
        ea = np.exp(tz)
        einv = 1.0 / ea
        u1s = np.array([[ea * (1.0 + ap * am), ea * ap], [am * einv, einv]])
        u1s_inv = np.array([[einv, -ea * ap], [-am * einv, ea * (1.0 + ap * am)]])
        h2 = np.array([[0.0, pc], [p, 0.0]])
        w = lam * (u1s @ h2 @ u1s_inv)
        slow = cis(-dca * t)
        hb = lam * np.array([[0.0, b * slow], [bb * slow.conjugate(), 0.0]])
        vs = y[3:].reshape(nl, 2, 2)
        gw = hb[None, :, :] + rtm[:, None, None] * w[None, :, :]
        out[3:] = (-1j * (gw @ vs)).reshape(-1)
        return out

    y0 = np.zeros(n, dtype=np.complex128)
    y0[3::4] = 1.0
    y0[6::4] = 1.0
    problem = OdeProblem(dimension=n, rhs=rhs, y0=y0, grid=grid)
    sol = integrate(problem, method="rk45", tol=tol)
    times = grid.times()
    ws = sol.values[:, 3:].reshape(len(times), nl, 2, 2).transpose(1, 0, 2, 3)
    # map back: V = diag(e^{-i wa t/2}, e^{+i wa t/2}) W
    half = cis(-0.5 * wa * times)
    vs = np.empty_like(ws)
    vs[:, :, 0, :] = ws[:, :, 0, :] * half[None, :, None]
    vs[:, :, 1, :] = ws[:, :, 1, :] * half.conjugate()[None, :, None]
    return vs
