"""Parametrically pumped Kerr coupler: Werner-like states, damping, entanglement."""

from .entanglement import (
    Convention,
    EsdReport,
    Event,
    EventKind,
    NegativitySeries,
    QubitSubspace,
    ReducedState,
    XClass,
    XForm,
    detect_events,
    eigs_analytic,
    esd_conditions,
    negativity,
    partial_transpose,
    reduce_to_qubits,
    x_classify,
)
from .evolution import (
    IntegrationError,
    IntegratorConfig,
    ReservoirKind,
    ReservoirSpec,
    Trajectory,
    evolve_closed,
    integrate_master,
    leakage,
    lindblad_rhs_amplitude,
    lindblad_rhs_phase,
    unitary_propagator,
)
from .fock import (
    TruncatedSpace,
    annihilation_matrix,
    basis_index,
    hermitian_eigensystem,
    hermitize,
    tensor_product,
)
from .model import BellFamily, BellSpec, ModelParams, Sign, WernerSpec, bell_ket, build_hamiltonian, coupling_chain, werner_density

__version__ = "0.1.0"
