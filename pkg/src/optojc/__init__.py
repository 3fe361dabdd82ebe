"""Pumped optomechanical cavity with a two-level atom.

A factorized (product-of-exponentials) propagator for the hybrid
cavity/mirror/atom system, a brute-force truncated-Hilbert-space oracle, and
a harness that reproduces the observable time series (excited-state
probability, photon and phonon numbers, Mandel Q) and quantifies the
agreement between the two routes.
"""

from .analytic import (
    ObservableSeries,
    UndefinedQError,
    analytic_observables,
    jc_exact_pe,
    mandel_q_series,
)
from .coeffs import drive_beta, drive_delta, ef_factors, opto_coeffs
from .dressing import (
    AtomDressing,
    FactorizationSingularityError,
    LadderCoeffs,
    direct_ladder_propagator,
    solve_atom_dressing,
    solve_ladder,
    solve_ladders,
    u1_matrix,
    u2_matrix,
)
from .fock import HybridState, apply, build_operator, hamiltonian_at, product_state
from .harness import (
    ComparisonReport,
    RunConfig,
    builtin_names,
    builtin_scenario,
    compare_series,
    parse_config,
    run,
)
from .model import (
    CoherentCavity,
    FockCavity,
    InitialState,
    Scenario,
    SystemParams,
    TimeGrid,
    TruncationSpec,
    ValidationError,
    coherent_amplitudes,
    validate_scenario,
)
from .oracle import NormDriftError, PropagationRun, observables_numeric, propagate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
