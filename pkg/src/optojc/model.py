"""Physical parameters, initial states, time grids and scenario validation.

All frequencies and couplings are expressed in units of the cavity frequency
(omega_c = 1, hbar = 1), so times are in units of 1/omega_c.  Every type here
is an immutable dataclass and safe to share between workers.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

OMEGA_C = 1.0

ATOM_EXCITED = "e"
ATOM_GROUND = "g"

#: hard ceiling on the hybrid-space dimension n_cav * 2 * n_mech
MAX_HILBERT_DIM = 200_000

#: largest tolerated probability mass outside a truncated coherent state
COHERENT_TAIL_TOL = 1e-8


class ValidationError(ValueError):
    """Raised when one or more model invariants are violated.

    The ``errors`` attribute lists every violation, each naming the field
    that caused it.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _finite(x) -> bool:
    try:
        return math.isfinite(float(abs(x)))
    except (TypeError, OverflowError):
        return False


@dataclass(frozen=True)
class SystemParams:
    """Model frequencies and couplings in units of the cavity frequency.

    Attributes
    ----------
    omega_m : mechanical oscillator frequency
    omega_a : atomic transition frequency
    omega_L : pump laser frequency
    g_om : optomechanical coupling (photon number to mirror displacement)
    lambda_jc : atom-field coupling
    pump_amp : pump amplitude
    omega_c : cavity frequency; fixed reference, must stay 1.0
    """

    omega_m: float
    omega_a: float
    omega_L: float
    g_om: float
    lambda_jc: float
    pump_amp: float
    omega_c: float = OMEGA_C

    def __post_init__(self):
        errs = param_errors(self)
        if errs:
            raise ValidationError(errs)
        ratio = self.g_om / self.omega_m
        if ratio > 0.1:
            warnings.warn(
                f"g_om/omega_m = {ratio:.3g} exceeds 0.1; the factorized "
                "propagator assumes weak optomechanical coupling",
                stacklevel=2,
            )


def param_errors(p: SystemParams) -> list[str]:
    """All parameter invariant violations, one message per field."""
    errs = []
    for name in ("omega_m", "omega_a", "omega_L", "omega_c"):
        v = getattr(p, name)
        if not _finite(v) or v <= 0.0:
            errs.append(f"{name} must be finite and strictly positive, got {v!r}")
    for name in ("g_om", "lambda_jc", "pump_amp"):
        v = getattr(p, name)
        if not _finite(v) or v < 0.0:
            errs.append(f"{name} must be finite and nonnegative, got {v!r}")
    if _finite(p.omega_m) and p.omega_m > 0 and _finite(p.g_om) and p.g_om >= 0:
        if p.g_om / p.omega_m > 0.5:
            errs.append(
                f"g_om/omega_m = {p.g_om / p.omega_m:.3g} exceeds 0.5; "
                "the weak-coupling factorization is invalid"
            )
    return errs


@dataclass(frozen=True)
class FockCavity:
    """Cavity starts in the number state |n>."""

    n: int


@dataclass(frozen=True)
class CoherentCavity:
    """Cavity starts in the coherent state |alpha>."""

    alpha: complex


@dataclass(frozen=True)
class InitialState:
    """Product initial state (cavity) x (atom) x (mechanical coherent state)."""

    cavity: FockCavity | CoherentCavity
    atom: str = ATOM_EXCITED
    mech_gamma: complex = 0.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid starting at t = 0.

    ``integrator_dt`` is the requested internal step of fixed-step
    propagators; it is clamped so that a whole number of steps fits between
    consecutive samples.  ``None`` defers to the propagator default.
    """

    t_end: float
    n_samples: int
    integrator_dt: float | None = None
    t_start: float = 0.0

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_samples)

    @property
    def spacing(self) -> float:
        return (self.t_end - self.t_start) / (self.n_samples - 1)


def grid_errors(g: TimeGrid) -> list[str]:
    errs = []
    if g.t_start != 0.0:
        errs.append(f"t_start must be 0, got {g.t_start!r}")
    if not _finite(g.t_end) or g.t_end <= 0.0:
        errs.append(f"t_end must be finite and positive, got {g.t_end!r}")
    if g.n_samples < 2:
        errs.append(f"n_samples must be at least 2, got {g.n_samples!r}")
    if g.integrator_dt is not None:
        if not _finite(g.integrator_dt) or g.integrator_dt <= 0.0:
            errs.append(f"integrator_dt must be positive, got {g.integrator_dt!r}")
        elif g.n_samples >= 2 and g.t_end > 0 and g.integrator_dt > g.t_end / g.n_samples:
            errs.append(
                f"integrator_dt = {g.integrator_dt!r} exceeds the sample "
                f"spacing budget t_end/n_samples = {g.t_end / g.n_samples!r}"
            )
    return errs


@dataclass(frozen=True)
class TruncationSpec:
    """Fock-space cutoffs: ``n_cav`` cavity levels and ``n_mech`` mechanical
    levels (the atom always contributes a factor of 2)."""

    n_cav: int
    n_mech: int

    @property
    def dim(self) -> int:
        return self.n_cav * 2 * self.n_mech


def truncation_errors(t: TruncationSpec, max_dim: int = MAX_HILBERT_DIM) -> list[str]:
    errs = []
    if t.n_cav < 2:
        errs.append(f"n_cav must be at least 2, got {t.n_cav!r}")
    if t.n_mech < 2:
        errs.append(f"n_mech must be at least 2, got {t.n_mech!r}")
    if t.n_cav >= 2 and t.n_mech >= 2 and t.dim > max_dim:
        errs.append(f"hybrid dimension {t.dim} exceeds the memory bound {max_dim}")
    return errs


@dataclass(frozen=True)
class Scenario:
    """A complete simulation request: parameters, initial state, grid and
    cutoffs.  ``cutoffs=None`` means "default from the initial state"."""

    params: SystemParams
    initial: InitialState
    grid: TimeGrid
    cutoffs: TruncationSpec | None = None
    label: str = "scenario"


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Fock amplitudes c_0..c_{cutoff-1} of the coherent state |alpha>.

    Uses the stable recurrence c_{n+1} = c_n * alpha / sqrt(n+1) starting
    from c_0 = exp(-|alpha|^2 / 2); no factorials are evaluated.
    """
    if cutoff < 1:
        raise ValueError(f"cutoff must be at least 1, got {cutoff}")
    if not _finite(alpha):
        raise ValueError(f"coherent amplitude must be finite, got {alpha!r}")
    alpha = complex(alpha)
    out = np.empty(cutoff, dtype=np.complex128)
    out[0] = cmath.exp(-0.5 * abs(alpha) ** 2)
    for n in range(cutoff - 1):
        out[n + 1] = out[n] * alpha / math.sqrt(n + 1)
    return out


def coherent_tail_mass(alpha: complex, cutoff: int) -> float:
    """Probability mass of |alpha> outside Fock levels 0..cutoff-1."""
    amps = coherent_amplitudes(alpha, cutoff)
    return max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))


def default_truncation(initial: InitialState) -> TruncationSpec:
    """Cutoffs with at least an 8-sigma Poisson-tail margin."""
    if isinstance(initial.cavity, CoherentCavity):
        a = abs(initial.cavity.alpha)
        n_cav = math.ceil(a * a + 8.0 * a + 10.0)
    else:
        n_cav = initial.cavity.n + 10
    g = abs(initial.mech_gamma)
    n_mech = math.ceil(g * g + 8.0 * g + 10.0)
    return TruncationSpec(n_cav=n_cav, n_mech=n_mech)


def validate_scenario(s: Scenario, max_dim: int = MAX_HILBERT_DIM) -> Scenario:
    """Check every invariant of a scenario and fill in default cutoffs.

    Returns a new Scenario (cutoffs always populated).  Raises
    ValidationError listing every violation by field name.
    """
    errs = list(param_errors(s.params))
    errs += grid_errors(s.grid)

    if s.initial.atom not in (ATOM_EXCITED, ATOM_GROUND):
        errs.append(f"initial.atom must be 'e' or 'g', got {s.initial.atom!r}")
    if isinstance(s.initial.cavity, FockCavity):
        if s.initial.cavity.n < 0:
            errs.append(f"initial.cavity.n must be nonnegative, got {s.initial.cavity.n}")
    elif isinstance(s.initial.cavity, CoherentCavity):
        if not _finite(s.initial.cavity.alpha):
            errs.append(f"initial.cavity.alpha must be finite, got {s.initial.cavity.alpha!r}")
    else:
        errs.append(f"initial.cavity has unknown kind {type(s.initial.cavity).__name__}")
    if not _finite(s.initial.mech_gamma):
        errs.append(f"initial.mech_gamma must be finite, got {s.initial.mech_gamma!r}")
    if not s.label:
        errs.append("label must be a nonempty string")

    cutoffs = s.cutoffs
    if cutoffs is None and not errs:
        cutoffs = default_truncation(s.initial)
    if cutoffs is not None:
        errs += truncation_errors(cutoffs, max_dim=max_dim)

    if not errs and cutoffs is not None:
        if isinstance(s.initial.cavity, CoherentCavity):
            tail = coherent_tail_mass(s.initial.cavity.alpha, cutoffs.n_cav)
            if tail > COHERENT_TAIL_TOL:
                errs.append(
                    f"cutoffs.n_cav = {cutoffs.n_cav} leaves coherent tail mass "
                    f"{tail:.3e} > {COHERENT_TAIL_TOL:g} for alpha = {s.initial.cavity.alpha}"
                )
        elif isinstance(s.initial.cavity, FockCavity):
            if s.initial.cavity.n >= cutoffs.n_cav:
                errs.append(
                    f"cutoffs.n_cav = {cutoffs.n_cav} cannot hold Fock level "
                    f"{s.initial.cavity.n}"
                )
        tail = coherent_tail_mass(s.initial.mech_gamma, cutoffs.n_mech)
        if tail > COHERENT_TAIL_TOL:
            errs.append(
                f"cutoffs.n_mech = {cutoffs.n_mech} leaves mechanical tail mass "
                f"{tail:.3e} > {COHERENT_TAIL_TOL:g} for gamma = {s.initial.mech_gamma}"
            )

    if errs:
        raise ValidationError(errs)
    return replace(s, cutoffs=cutoffs)
