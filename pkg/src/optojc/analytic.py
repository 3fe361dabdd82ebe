"""Interaction-picture state assembly and observable evaluation.

Starting from |cavity> x |e> x |Gamma>, the dressed evolution leaves each
photon sector coupled to its neighbours through four amplitudes per manifold,

    |n,e> -> c1 |n,e> + c2 |n,g> + c3 |n+1,g> + c4 |n+1,e>,

read off the atomic rotation U1 and the ladder rotation U2.  Observables are
evaluated with the interaction-picture operators

    n_I = n + conj(beta) a + beta a+ + |beta|^2
    N_I = N + (alpha4 b+ + conj(alpha4) b) n_I + |alpha4|^2 n_I^2

where n_I follows from conjugating n by the reference propagator: only the
optical displacement acts, every other factor commutes with n.  The dressed
evolution never touches the mechanical factor, so mechanical expectations
over |Gamma> are closed form (<b> = Gamma, <N> = |Gamma|^2) and no mechanical
cutoff enters the analytic path.  <n_I^2> is evaluated as the squared norm of
n_I applied once to the amplitude vector, not by expanding the square.

The excited-state probability sums |amplitude|^2 over the e-projected Fock
components; cross terms between different photon numbers vanish, which is
also how the per-manifold form should be read when the cavity starts in a
coherent state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import alpha4 as alpha4_series
from .coeffs import drive_beta
from .dressing import (
    AtomDressing,
    LadderCoeffs,
    solve_atom_dressing,
    solve_ladders,
    u1_matrix_series,
    u2_matrix_series,
)
from .model import (
    ATOM_EXCITED,
    CoherentCavity,
    FockCavity,
    Scenario,
    TimeGrid,
    coherent_amplitudes,
    validate_scenario,
)

OBSERVABLE_KINDS = ("pe", "photon_n", "photon_n2", "phonon_n", "mandel_q")

_KIND_SLACK = 1e-6


class UndefinedQError(ValueError):
    """Mandel Q requested where the mean photon number vanishes."""


@dataclass(frozen=True)
class ObservableSeries:
    """Real-valued observable samples on a time grid."""

    times: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if len(self.times) != len(self.values):
            raise ValueError("times and values length mismatch")
        v = self.values
        if self.kind == "pe" and (v.min() < -_KIND_SLACK or v.max() > 1 + _KIND_SLACK):
            raise ValueError(f"pe outside [0, 1]: range [{v.min()}, {v.max()}]")
        if self.kind in ("photon_n", "photon_n2", "phonon_n") and v.min() < -_KIND_SLACK:
            raise ValueError(f"{self.kind} negative: min {v.min()}")
        if self.kind == "mandel_q" and v.min() < -1 - _KIND_SLACK:
            raise ValueError(f"mandel_q below -1: min {v.min()}")


@dataclass(frozen=True)
class LadderAmplitudes:
    """The four amplitudes produced from |n,e> on manifold M = n+1."""

    n: int
    c1: complex
    c2: complex
    c3: complex
    c4: complex


@dataclass(frozen=True)
class CavityAtomState:
    """Fock-resolved cavity x atom amplitudes at one instant; the mechanical
    factor stays the coherent state |Gamma> and is kept symbolic."""

    amps: np.ndarray  # (n_fock_levels, 2); column 0 = |e>, 1 = |g>
    t: float

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def ladder_amplitudes(d: AtomDressing, lc: LadderCoeffs, k: int) -> LadderAmplitudes:
    """Amplitudes (c1..c4) at sample k for the manifold of ``lc``.

    Reads entries of U1 and U2; when the ladder solve fell back to the direct
    propagator the same entries come from there.
    """
    u1 = u1_matrix_series(d, k)
    u2 = u2_matrix_series(lc, k)
    return LadderAmplitudes(
        n=lc.ladder_index - 1,
        c1=complex(u1[0, 0] * u2[0, 0]),
        c2=complex(u1[1, 0] * u2[0, 0]),
        c3=complex(u1[1, 1] * u2[1, 0]),
        c4=complex(u1[0, 1] * u2[1, 0]),
    )


def _c_arrays(d: AtomDressing, ladders: list[LadderCoeffs]) -> np.ndarray:
    """Stacked amplitudes, shape (4, L, K), ladder j holding photon sector n = j."""
    u1 = u1_matrix_series(d)  # (K, 2, 2)
    ks = len(d.times)
    out = np.empty((4, len(ladders), ks), dtype=np.complex128)
    for j, lc in enumerate(ladders):
        u2 = u2_matrix_series(lc)  # (K, 2, 2)
        out[0, j] = u1[:, 0, 0] * u2[:, 0, 0]
        out[1, j] = u1[:, 1, 0] * u2[:, 0, 0]
        out[2, j] = u1[:, 1, 1] * u2[:, 1, 0]
        out[3, j] = u1[:, 0, 1] * u2[:, 1, 0]
    return out


def assemble_series(cavity_amps: np.ndarray, cs: np.ndarray) -> np.ndarray:
    """Fock-resolved amplitudes at every sample, shape (K, n_cav + 1, 2).

    ``cavity_amps`` are the initial Fock amplitudes c_n (length n_cav) and
    ``cs`` the (4, n_cav, K) per-manifold amplitudes.
    """
    n_cav = len(cavity_amps)
    ks = cs.shape[2]
    weighted = cavity_amps[None, :, None] * cs  # (4, n_cav, K)
    amps = np.zeros((ks, n_cav + 1, 2), dtype=np.complex128)
    amps[:, :n_cav, 0] += weighted[0].T
    amps[:, :n_cav, 1] += weighted[1].T
    amps[:, 1:, 1] += weighted[2].T
    amps[:, 1:, 0] += weighted[3].T
    return amps


def assemble_state(alpha: complex, ladders: list[LadderAmplitudes],
                   cutoff: int) -> CavityAtomState:
    """Assemble the coherent-cavity state from per-manifold amplitudes at one
    sample; ``ladders`` must cover photon sectors n = 0..cutoff-1."""
    by_n = {la.n: la for la in ladders}
    if sorted(by_n) != list(range(cutoff)):
        raise ValueError(f"need ladder amplitudes for n = 0..{cutoff - 1}")
    cs = np.empty((4, cutoff, 1), dtype=np.complex128)
    for n in range(cutoff):
        la = by_n[n]
        cs[:, n, 0] = (la.c1, la.c2, la.c3, la.c4)
    cn = coherent_amplitudes(alpha, cutoff)
    amps = assemble_series(cn, cs)[0]
    return CavityAtomState(amps=amps, t=float("nan"))


def pe_series(times: np.ndarray, amps: np.ndarray) -> ObservableSeries:
    """P_e(t) = sum_m |amp(m, e)|^2."""
    return ObservableSeries(times=times,
                            values=np.sum(np.abs(amps[:, :, 0]) ** 2, axis=1),
                            kind="pe")


def _apply_n_i(amps: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """n_I applied to the amplitude vectors, one extra Fock level appended so
    the creation part is captured exactly."""
    ks, nm, _ = amps.shape
    m = np.arange(nm, dtype=float)
    out = np.zeros((ks, nm + 1, 2), dtype=np.complex128)
    b = betas[:, None, None]
    out[:, :nm] = (m[None, :, None] + np.abs(b) ** 2) * amps
    # conj(beta) * a: amp(m) <- sqrt(m+1) amp(m+1)
    out[:, :nm - 1] += np.conj(b) * np.sqrt(m[1:])[None, :, None] * amps[:, 1:]
    # beta * a+: amp(m) <- sqrt(m) amp(m-1)
    out[:, 1:] += b * np.sqrt(np.arange(1, nm + 1))[None, :, None] * amps
    return out


def photon_series(times: np.ndarray, amps: np.ndarray,
                  betas: np.ndarray) -> tuple[ObservableSeries, ObservableSeries]:
    """<n_I> and <n_I^2>; the square is the squared norm of n_I applied once."""
    napp = _apply_n_i(amps, betas)
    n1 = np.sum((np.conj(amps) * napp[:, :-1]).real, axis=(1, 2))
    n2 = np.sum(np.abs(napp) ** 2, axis=(1, 2))
    return (
        ObservableSeries(times=times, values=n1, kind="photon_n"),
        ObservableSeries(times=times, values=n2, kind="photon_n2"),
    )


def phonon_series(n: ObservableSeries, n2: ObservableSeries, gamma: complex,
                  alpha4_of_t) -> ObservableSeries:
    """<N_I>(t) = |Gamma|^2 + 2 Re(alpha4 conj(Gamma)) <n_I> + |alpha4|^2 <n_I^2>."""
    a4 = np.asarray(alpha4_of_t(n.times), dtype=np.complex128)
    vals = (abs(gamma) ** 2
            + 2.0 * (a4 * np.conj(gamma)).real * n.values
            + np.abs(a4) ** 2 * n2.values)
    return ObservableSeries(times=n.times, values=vals, kind="phonon_n")


def mandel_q_series(n: ObservableSeries, n2: ObservableSeries) -> ObservableSeries:
    """Q(t) = (<n^2> - <n>^2)/<n> - 1; undefined where <n> vanishes."""
    if np.any(n.values <= 1e-12):
        k = int(np.argmax(n.values <= 1e-12))
        raise UndefinedQError(
            f"mean photon number {n.values[k]:.3e} at t = {n.times[k]:.6g} "
            "is too small for a meaningful Mandel Q")
    vals = (n2.values - n.values**2) / n.values - 1.0
    return ObservableSeries(times=n.times, values=vals, kind="mandel_q")


def jc_exact_pe(params, cavity, grid: TimeGrid) -> ObservableSeries:
    """Closed-form excited-state probability of the bare atom-field exchange
    (no pump, no mechanics): the validation oracle for the undriven limit.

    P_e(t) = sum_n |c_n|^2 [1 - (lam^2 (n+1) / W_n^2) sin^2(W_n t)] with
    W_n = sqrt(lam^2 (n+1) + Delta^2/4), Delta = omega_a - omega_c.
    """
    times = grid.times()
    if isinstance(cavity, FockCavity):
        weights = {cavity.n: 1.0}
    elif isinstance(cavity, CoherentCavity):
        a = abs(cavity.alpha)
        cutoff = int(np.ceil(a * a + 8 * a + 12))
        amps = coherent_amplitudes(cavity.alpha, cutoff)
        weights = {n: float(w) for n, w in enumerate(np.abs(amps) ** 2)}
    else:
        raise TypeError(f"unknown cavity state {type(cavity).__name__}")
    delta = params.omega_a - params.omega_c
    lam2 = params.lambda_jc**2
    pe = np.zeros(len(times))
    for n, w in weights.items():
        wn2 = lam2 * (n + 1) + 0.25 * delta * delta
        if wn2 == 0.0:
            pe += w
            continue
        wn = np.sqrt(wn2)
        pe += w * (1.0 - (lam2 * (n + 1) / wn2) * np.sin(wn * times) ** 2)
    return ObservableSeries(times=times, values=pe, kind="pe")


def analytic_observables(scenario: Scenario) -> dict[str, ObservableSeries]:
    """Run the factorized propagator for a scenario and evaluate every
    observable.  The atom must start excited (the assembly above has no
    ground-start form); use the numeric propagator for other initial states.
    """
    s = validate_scenario(scenario)
    if s.initial.atom != ATOM_EXCITED:
        raise ValueError(
            "the factorized propagator is assembled from an initially excited "
            "atom; use the numeric path for ground-state starts")
    n_cav = s.cutoffs.n_cav
    if isinstance(s.initial.cavity, CoherentCavity):
        cn = coherent_amplitudes(s.initial.cavity.alpha, n_cav)
    else:
        cn = np.zeros(n_cav, dtype=np.complex128)
        cn[s.initial.cavity.n] = 1.0
    times = s.grid.times()
    dressing = solve_atom_dressing(s.params, s.grid)
    ladders = solve_ladders(s.params, range(1, n_cav + 1), dressing, s.grid)
    amps = assemble_series(cn, _c_arrays(dressing, ladders))
    betas = np.asarray(drive_beta(s.params, times), dtype=np.complex128)
    pe = pe_series(times, amps)
    n1, n2 = photon_series(times, amps, betas)
    phon = phonon_series(n1, n2, s.initial.mech_gamma,
                         lambda ts: alpha4_series(s.params, ts))
    out = {"pe": pe, "photon_n": n1, "photon_n2": n2, "phonon_n": phon}
    out["mandel_q"] = mandel_q_series(n1, n2)
    return out


def state_norms(amps: np.ndarray) -> np.ndarray:
    """Norm of the assembled state at every sample (should stay at 1)."""
    return np.sqrt(np.sum(np.abs(amps) ** 2, axis=(1, 2)))
