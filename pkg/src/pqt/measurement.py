"""Projective measurement with two rival state-update rules.

A ``PSystem`` is one simulated physical system: its current state, a
measurement mode and an owned random stream.  In ``"quantum"`` mode an
observed outcome projects the state (collapse); in ``"passive"`` mode
outcomes occur with the same Born probabilities but the state is left
untouched, so the very same system can be measured again and again.

Outcome sampling is inverse-CDF over the ascending outcome list with one
uniform draw per shot, taken from the system's Philox stream (see
:mod:`pqt.rng`); the platform-default RNG is never used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (
    DensityOperator,
    SpectralDecomposition,
    State,
    StateVector,
    spectral_decompose,
)

ZERO_PROBABILITY = 1e-12
RECONSTRUCTION_TOL = 1e-9


class Observable:
    """A named Hermitian matrix with its cached spectral decomposition."""

    __slots__ = ("name", "matrix", "decomposition")

    def __init__(self, name: str, matrix: np.ndarray, degeneracy_tol: float = 1e-9):
        self.name = name
        self.decomposition = spectral_decompose(matrix, degeneracy_tol)
        self.matrix = np.array(matrix, dtype=complex)
        self.matrix.setflags(write=False)
        defect = np.abs(self.decomposition.reconstruct() - self.matrix).max()
        if defect > RECONSTRUCTION_TOL:
            raise ValueError(f"decomposition does not reconstruct {name!r} (defect {defect:.3e})")

    @classmethod
    def from_decomposition(cls, name: str, decomposition: SpectralDecomposition) -> "Observable":
        """Build an observable from an already-known outcome structure.

        Used for lifted local observables, whose degenerate projectors
        P_r tensor I should be inherited exactly rather than recomputed.
        """
        obs = cls.__new__(cls)
        obs.name = name
        obs.decomposition = decomposition
        obs.matrix = decomposition.reconstruct()
        obs.matrix.setflags(write=False)
        return obs

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return self.decomposition.eigenvalues

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return self.decomposition.projectors

    def __repr__(self) -> str:
        return f"Observable({self.name!r}, dim={self.dim})"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Born probabilities over the distinct outcomes of one observable."""

    eigenvalues: tuple[float, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.min() < -ZERO_PROBABILITY:
            raise ValueError(f"negative outcome probability {probs.min()!r}")
        probs = np.clip(probs, 0.0, None)
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Inverse-CDF sampling: one uniform per shot over the sorted outcomes."""
        cdf = np.cumsum(self.probabilities)
        draws = rng.random(n)
        return np.minimum(np.searchsorted(cdf, draws, side="right"), len(self.eigenvalues) - 1)

    def as_dict(self) -> dict[float, float]:
        return {a: float(p) for a, p in zip(self.eigenvalues, self.probabilities)}


@dataclass
class MeasurementRecord:
    """Outcome log of a run of measurements of one observable."""

    observable: str
    outcomes: list[float]
    mode: str
    shots: int

    def __post_init__(self):
        if len(self.outcomes) != self.shots:
            raise ValueError(f"record has {len(self.outcomes)} outcomes for {self.shots} shots")


_MODES = ("quantum", "passive")


class PSystem:
    """A single simulated system: state, measurement mode and RNG stream.

    The system is single-owner mutable state; in passive mode its state
    object is never replaced by a measurement, so it stays bit-identical
    across arbitrarily many measurements.
    """

    def __init__(self, state: State, mode: str, rng: np.random.Generator):
        if mode not in _MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {_MODES}")
        self.state = state
        self.mode = mode
        self.rng = rng
        self.history: list[MeasurementRecord] = []

    @property
    def dim(self) -> int:
        return self.state.dim

    def replace_state(self, state: State) -> None:
        """Substitute another system into this slot.

        This models physically swapping the system out (as in collapse
        simulation protocols), not a measurement update.
        """
        if state.dim != self.state.dim:
            raise ValueError("replacement state has a different dimension")
        self.state = state

    def __repr__(self) -> str:
        return f"PSystem(dim={self.dim}, mode={self.mode!r})"


def born_distribution(obs: Observable, state: State) -> OutcomeDistribution:
    """Outcome probabilities p(a_r) = <psi|P_r|psi> or Tr(P_r rho).

    The distribution is the same in both measurement modes and the same
    for a pure state and its projector.
    """
    if obs.dim != state.dim:
        raise ValueError(f"dimension mismatch: observable {obs.dim}, state {state.dim}")
    if isinstance(state, StateVector):
        psi = state.amplitudes
        probs = [float(np.vdot(psi, proj @ psi).real) for proj in obs.projectors]
    else:
        probs = [float(np.trace(proj @ state.matrix).real) for proj in obs.projectors]
    return OutcomeDistribution(obs.eigenvalues, np.asarray(probs))


def _outcome_probability(state: State, projector: np.ndarray) -> float:
    if isinstance(state, StateVector):
        return float(np.vdot(state.amplitudes, projector @ state.amplitudes).real)
    return float(np.trace(projector @ state.matrix).real)


def collapse_update(state: State, obs: Observable, outcome_index: int) -> State:
    """Project onto the observed outcome (the textbook collapse rule).

    psi -> P_r psi / |P_r psi|, rho -> P_r rho P_r / Tr(P_r rho P_r).
    Applying it twice with the same outcome is a no-op.
    """
    projector = obs.projectors[outcome_index]
    probability = _outcome_probability(state, projector)
    if probability <= ZERO_PROBABILITY:
        raise ValueError(
            f"outcome {obs.eigenvalues[outcome_index]!r} of {obs.name!r} has zero "
            "probability; the post-measurement state is undefined"
        )
    if isinstance(state, StateVector):
        return StateVector(projector @ state.amplitudes / np.sqrt(probability), state.shape)
    updated = projector @ state.matrix @ projector / probability
    return DensityOperator(updated, state.shape)


def passive_update(state: State, obs: Observable, outcome_index: int) -> State:
    """The no-update rule: return the input state itself, unchanged.

    The outcome must still be realizable; claiming an impossible outcome
    is an error just as in the collapse rule.
    """
    probability = _outcome_probability(state, obs.projectors[outcome_index])
    if probability <= ZERO_PROBABILITY:
        raise ValueError(
            f"outcome {obs.eigenvalues[outcome_index]!r} of {obs.name!r} has zero "
            "probability; an impossible outcome was claimed"
        )
    return state


def _sample_and_update(sys: PSystem, obs: Observable, dist: OutcomeDistribution) -> float:
    index = int(dist.sample_indices(sys.rng, 1)[0])
    if sys.mode == "quantum":
        sys.state = collapse_update(sys.state, obs, index)
    else:
        sys.state = passive_update(sys.state, obs, index)
    return obs.eigenvalues[index]


def measure(sys: PSystem, obs: Observable) -> float:
    """Measure once: sample an eigenvalue and apply the mode's update rule."""
    dist = born_distribution(obs, sys.state)
    value = _sample_and_update(sys, obs, dist)
    sys.history.append(MeasurementRecord(obs.name, [value], sys.mode, 1))
    return value


def repeated_measure(sys: PSystem, obs: Observable, n: int) -> MeasurementRecord:
    """Measure the same observable n times in succession on one system.

    Quantum mode: the first outcome collapses the state, so outcomes
    2..n repeat outcome 1 exactly.  Passive mode: outcomes are i.i.d.
    from the Born distribution of the unchanged state; this path is
    vectorised but consumes the RNG stream exactly as n single
    measurements would.
    """
    if n < 1:
        raise ValueError("need at least one shot")
    if sys.mode == "passive":
        dist = born_distribution(obs, sys.state)
        indices = dist.sample_indices(sys.rng, n)
        passive_update(sys.state, obs, int(indices[0]))
        outcomes = [obs.eigenvalues[i] for i in indices]
    else:
        outcomes = []
        for _ in range(n):
            dist = born_distribution(obs, sys.state)
            outcomes.append(_sample_and_update(sys, obs, dist))
    record = MeasurementRecord(obs.name, outcomes, sys.mode, n)
    sys.history.append(record)
    return record


def luders_map(rho: DensityOperator, projector: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-outcome collapse map at the density-matrix level.

    Returns the un-normalised post-measurement state P_r rho P_r and its
    weight Tr[P_r rho P_r], which equals the Born probability.  The map
    is linear in rho.
    """
    updated = projector @ rho.matrix @ projector
    return updated, float(np.trace(updated).real)


def p_instrument_map(rho: DensityOperator, projector: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-outcome no-update map: rho -> Tr[P_r rho P_r] rho.

    Carries the same weight as the collapse map but scales the *input*
    state, which makes it non-linear in rho.
    """
    weight = float(np.trace(projector @ rho.matrix @ projector).real)
    return weight * rho.matrix, weight


def nonlinearity_witness(
    rho1: DensityOperator,
    rho2: DensityOperator,
    lam: float,
    projector: np.ndarray,
) -> float:
    """Frobenius gap between the no-update map of a blend and the blend of maps.

    Strictly positive exactly when the two states differ and assign the
    projector different probabilities; zero for the collapse map always.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("blend weight must lie strictly between 0 and 1")
    blend = DensityOperator(lam * rho1.matrix + (1.0 - lam) * rho2.matrix, rho1.shape)
    lhs, _ = p_instrument_map(blend, projector)
    map1, _ = p_instrument_map(rho1, projector)
    map2, _ = p_instrument_map(rho2, projector)
    rhs = lam * map1 + (1.0 - lam) * map2
    return float(np.linalg.norm(lhs - rhs))


def expectation_variance(obs: Observable, state: State) -> tuple[float, float]:
    """Mean and variance of an observable's outcome distribution."""
    dist = born_distribution(obs, state)
    values = np.asarray(dist.eigenvalues)
    mean = float(np.dot(values, dist.probabilities))
    variance = float(np.dot(values**2, dist.probabilities) - mean**2)
    return mean, max(variance, 0.0)
