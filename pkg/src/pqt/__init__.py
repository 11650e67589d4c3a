"""Collapse-free ("passive") projective measurement, side by side with collapse.

The package simulates finite-dimensional quantum systems under two
state-update rules: the textbook projection rule and a no-update rule
under which outcomes are still Born-distributed but the state never
changes.  Everything downstream of that single switch, from single-copy
tomography to oracle costs, lives in the submodules:

- :mod:`pqt.hilbert`     states, operators, tensor structure
- :mod:`pqt.measurement` sampling and the two update rules
- :mod:`pqt.tomography`  single-copy state reconstruction
- :mod:`pqt.composite`   bipartite statistics, CHSH, signalling
- :mod:`pqt.protocols`   end-to-end divergence demonstrations
- :mod:`pqt.harness`     experiment configs, reports and the CLI
"""

from .hilbert import (
    DensityOperator,
    SpectralDecomposition,
    StateVector,
    UnitaryOperator,
    basis_state,
    bell_state,
    evolve,
    fidelity,
    maximally_mixed,
    partial_trace,
    pauli_matrix,
    plus_state,
    spectral_decompose,
    tensor,
)
from .measurement import (
    MeasurementRecord,
    Observable,
    OutcomeDistribution,
    PSystem,
    born_distribution,
    collapse_update,
    expectation_variance,
    luders_map,
    measure,
    nonlinearity_witness,
    p_instrument_map,
    passive_update,
    repeated_measure,
)
from .rng import stream

__all__ = [
    "DensityOperator",
    "MeasurementRecord",
    "Observable",
    "OutcomeDistribution",
    "PSystem",
    "SpectralDecomposition",
    "StateVector",
    "UnitaryOperator",
    "basis_state",
    "bell_state",
    "born_distribution",
    "collapse_update",
    "evolve",
    "expectation_variance",
    "fidelity",
    "luders_map",
    "maximally_mixed",
    "measure",
    "nonlinearity_witness",
    "p_instrument_map",
    "partial_trace",
    "passive_update",
    "pauli_matrix",
    "plus_state",
    "repeated_measure",
    "spectral_decompose",
    "stream",
    "tensor",
]
