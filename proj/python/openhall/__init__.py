"""Hall conductivity, Chern numbers and Lindblad steady states of band models."""

from ._core import (
    BandModel,
    ConfigError,
    ConvergenceError,
    DegeneratePoint,
    DissipatorSpec,
    Error,
    NonlinearResponse,
    ResolutionError,
    SolverError,
    TwoBandModel,
    ValidationError,
    bi2se3_analytic,
    bi2se3_valley,
    chern_number,
    eigensystem,
    hall_conductivity,
    hall_two_band_spin,
    hamiltonian,
    magnetic_lattice,
    oracle_response,
    qwz_lattice,
    rashba_dresselhaus,
    single_steady_band,
    spin_lowering,
    spin_one_lift,
    steady_state,
    two_steady_bands,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
