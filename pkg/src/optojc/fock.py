"""Truncated (cavity x atom x mechanics) Hilbert space and sparse operators.

Basis ordering: index = ((cav * 2) + atom) * n_mech + mech with atom = 0 for
|e> and 1 for |g>; the atomic sigma_z carries +1 on |e>.  Ladder operators
use the standard truncated matrices <n-1|a|n> = sqrt(n); the commutator
defect [a, a+] != 1 on the top Fock level is inherent to truncation and is
owned by the convergence tests, not patched here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import (
    COHERENT_TAIL_TOL,
    ATOM_EXCITED,
    ATOM_GROUND,
    CoherentCavity,
    FockCavity,
    InitialState,
    TruncationSpec,
    coherent_amplitudes,
)

OPERATOR_KINDS = (
    "a", "adag", "b", "bdag", "n_cav", "n_mech", "sigma_z", "sigma_p", "sigma_m",
)


class CutoffError(ValueError):
    """A truncated mode cannot hold the requested state."""


@dataclass(frozen=True)
class HybridState:
    """Complex amplitude vector over the hybrid basis."""

    amplitudes: np.ndarray
    trunc: TruncationSpec

    def __post_init__(self):
        if self.amplitudes.shape != (self.trunc.dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({self.trunc.dim},)"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_index(cav: int, atom: int, mech: int, trunc: TruncationSpec) -> int:
    """Flat index of |cav, atom, mech>; atom is 0 (|e>) or 1 (|g>)."""
    if not (0 <= cav < trunc.n_cav and atom in (0, 1) and 0 <= mech < trunc.n_mech):
        raise IndexError(f"state ({cav}, {atom}, {mech}) outside truncation {trunc}")
    return (cav * 2 + atom) * trunc.n_mech + mech


def basis_unindex(index: int, trunc: TruncationSpec) -> tuple[int, int, int]:
    """Inverse of :func:`basis_index`."""
    if not 0 <= index < trunc.dim:
        raise IndexError(f"index {index} outside dimension {trunc.dim}")
    mech = index % trunc.n_mech
    rest = index // trunc.n_mech
    return rest // 2, rest % 2, mech


def _destroy(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, format="csr")


def _number(dim: int) -> sp.csr_matrix:
    return sp.diags(np.arange(dim, dtype=float), 0, format="csr")


def _embed(cav_op, atom_op, mech_op) -> sp.csr_matrix:
    return sp.kron(sp.kron(cav_op, atom_op, format="csr"), mech_op, format="csr")


def build_operator(kind: str, trunc: TruncationSpec) -> sp.csr_matrix:
    """Sparse operator over the hybrid basis; ``kind`` is one of
    OPERATOR_KINDS."""
    ic = sp.identity(trunc.n_cav, format="csr")
    ia = sp.identity(2, format="csr")
    im = sp.identity(trunc.n_mech, format="csr")
    if kind == "a":
        return _embed(_destroy(trunc.n_cav), ia, im)
    if kind == "adag":
        return _embed(_destroy(trunc.n_cav).T, ia, im)
    if kind == "b":
        return _embed(ic, ia, _destroy(trunc.n_mech))
    if kind == "bdag":
        return _embed(ic, ia, _destroy(trunc.n_mech).T)
    if kind == "n_cav":
        return _embed(_number(trunc.n_cav), ia, im)
    if kind == "n_mech":
        return _embed(ic, ia, _number(trunc.n_mech))
    if kind == "sigma_z":
        return _embed(ic, sp.diags([1.0, -1.0], 0, format="csr"), im)
    if kind == "sigma_p":
        return _embed(ic, sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])), im)
    if kind == "sigma_m":
        return _embed(ic, sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]])), im)
    raise ValueError(f"unknown operator kind {kind!r}; expected one of {OPERATOR_KINDS}")


def hamiltonian_parts(params, trunc: TruncationSpec) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """(static, pump) split of the full Hamiltonian:
    H(t) = static + pump_amp * cos(omega_L t) * pump."""
    ncav = build_operator("n_cav", trunc)
    nmech = build_operator("n_mech", trunc)
    a = build_operator("a", trunc)
    b = build_operator("b", trunc)
    sz = build_operator("sigma_z", trunc)
    sp_ = build_operator("sigma_p", trunc)
    jc = a @ sp_
    static = (
        params.omega_c * ncav
        + params.omega_m * nmech
        - params.g_om * (ncav @ (b + b.conjugate().transpose()))
        + 0.5 * params.omega_a * sz
        + params.lambda_jc * (jc + jc.conjugate().transpose())
    )
    pump = a + a.conjugate().transpose()
    return static.tocsr(), pump.tocsr()


def hamiltonian_at(params, t: float, trunc: TruncationSpec) -> sp.csr_matrix:
    """Full Hamiltonian at time t; Hermitian by construction."""
    static, pump = hamiltonian_parts(params, trunc)
    return (static + params.pump_amp * np.cos(params.omega_L * t) * pump).tocsr()


def apply(op: sp.spmatrix, state: HybridState) -> HybridState:
    """Matrix-vector product op |state>."""
    if op.shape != (state.trunc.dim, state.trunc.dim):
        raise ValueError(
            f"operator shape {op.shape} does not match dimension {state.trunc.dim}")
    return HybridState(amplitudes=op @ state.amplitudes, trunc=state.trunc)


def _cavity_vector(cavity, n_cav: int) -> np.ndarray:
    if isinstance(cavity, FockCavity):
        if cavity.n >= n_cav:
            raise CutoffError(
                f"cavity cutoff {n_cav} cannot hold Fock level {cavity.n}")
        vec = np.zeros(n_cav, dtype=np.complex128)
        vec[cavity.n] = 1.0
        return vec
    if isinstance(cavity, CoherentCavity):
        vec = coherent_amplitudes(cavity.alpha, n_cav)
        tail = 1.0 - float(np.sum(np.abs(vec) ** 2))
        if tail > COHERENT_TAIL_TOL:
            raise CutoffError(
                f"cavity cutoff {n_cav} leaves coherent tail mass {tail:.3e} "
                f"> {COHERENT_TAIL_TOL:g} for alpha = {cavity.alpha}")
        return vec
    raise TypeError(f"unknown cavity state {type(cavity).__name__}")


def product_state(initial: InitialState, trunc: TruncationSpec) -> HybridState:
    """Tensor-product initial state |cavity> x |atom> x |gamma>."""
    cav = _cavity_vector(initial.cavity, trunc.n_cav)
    if initial.atom == ATOM_EXCITED:
        atom = np.array([1.0, 0.0], dtype=np.complex128)
    elif initial.atom == ATOM_GROUND:
        atom = np.array([0.0, 1.0], dtype=np.complex128)
    else:
        raise ValueError(f"initial.atom must be 'e' or 'g', got {initial.atom!r}")
    mech = coherent_amplitudes(initial.mech_gamma, trunc.n_mech)
    tail = 1.0 - float(np.sum(np.abs(mech) ** 2))
    if tail > COHERENT_TAIL_TOL:
        raise CutoffError(
            f"mechanical cutoff {trunc.n_mech} leaves coherent tail mass "
            f"{tail:.3e} > {COHERENT_TAIL_TOL:g} for gamma = {initial.mech_gamma}")
    amps = np.kron(np.kron(cav, atom), mech)
    return HybridState(amplitudes=amps, trunc=trunc)
