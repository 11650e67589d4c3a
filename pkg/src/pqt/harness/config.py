"""Declarative experiment configuration.

Configs are JSON objects.  States and observables can be given as
presets (``"bell:phi+"``, ``"pauli:ZX"``) or explicitly: states as a
list of ``[re, im]`` amplitude pairs (renormalized on input), matrices
row-major with ``[re, im]`` entries (must be Hermitian within 1e-8).

Validation failures raise :class:`ConfigError`, which names the
offending field and the violated constraint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .. import rng
from ..hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    State,
    StateVector,
    basis_state,
    bell_state,
    maximally_mixed,
    pauli_matrix,
    plus_state,
    random_pure_state,
)
from ..measurement import Observable

MODES = ("quantum", "passive")

# Protocol-specific optional fields accepted on top of the common ones.
EXTRA_FIELDS = (
    "source",
    "action",
    "candidates",
    "mixture",
    "purification",
    "oracle",
    "ensemble",
    "followup_observable",
    "library",
    "unitary",
    "followup_shots",
)

_COMMON_FIELDS = (
    "name",
    "protocol",
    "mode",
    "shape",
    "dimension",
    "initial_state",
    "observables",
    "shots",
    "trials",
    "seed",
)


class ConfigError(ValueError):
    """A configuration field violated a constraint."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")


@dataclass
class ExperimentConfig:
    """A validated experiment description (raw values, JSON-serializable)."""

    name: str
    protocol: str
    mode: str = "passive"
    shape: tuple[int, ...] | None = None
    initial_state: object = None
    observables: list = dataclass_field(default_factory=list)
    shots: int = 10_000
    trials: int = 1
    seed: int = 42
    extras: dict = dataclass_field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "protocol": self.protocol,
            "mode": self.mode,
            "initial_state": self.initial_state,
            "observables": self.observables,
            "shots": self.shots,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.shape is not None:
            payload["shape"] = list(self.shape)
        payload.update(self.extras)
        return json.dumps(payload, sort_keys=True, indent=2)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment config."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<document>", "expected a JSON object")

    from .runner import PROTOCOLS  # late import: runner imports this module

    for key in ("name", "protocol"):
        if key not in raw:
            raise ConfigError(key, "required field is missing")
    if not isinstance(raw["name"], str) or not raw["name"]:
        raise ConfigError("name", "must be a non-empty string")
    if raw["protocol"] not in PROTOCOLS:
        known = ", ".join(sorted(PROTOCOLS))
        raise ConfigError("protocol", f"unknown protocol {raw['protocol']!r}; known: {known}")

    mode = raw.get("mode", "passive")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}, got {mode!r}")

    shape = None
    if "shape" in raw:
        entries = raw["shape"]
        if not isinstance(entries, list) or not entries or any(int(d) < 2 for d in entries):
            raise ConfigError("shape", "must be a list of subsystem dimensions >= 2")
        shape = tuple(int(d) for d in entries)
    elif "dimension" in raw:
        if int(raw["dimension"]) < 2:
            raise ConfigError("dimension", "must be >= 2")
        shape = (int(raw["dimension"]),)

    shots = int(raw.get("shots", 10_000))
    if shots < 1:
        raise ConfigError("shots", "must be a positive count")
    trials = int(raw.get("trials", 1))
    if trials < 1:
        raise ConfigError("trials", "must be a positive count")
    seed = int(raw.get("seed", 42))
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", "must fit in 64 unsigned bits")

    observables = raw.get("observables", [])
    if not isinstance(observables, list):
        raise ConfigError("observables", "must be a list")

    extras = {k: raw[k] for k in raw if k not in _COMMON_FIELDS}
    for key in extras:
        if key not in EXTRA_FIELDS:
            raise ConfigError(key, f"unknown field; protocol extras are {EXTRA_FIELDS}")

    config = ExperimentConfig(
        name=raw["name"],
        protocol=raw["protocol"],
        mode=mode,
        shape=shape,
        initial_state=raw.get("initial_state"),
        observables=observables,
        shots=shots,
        trials=trials,
        seed=seed,
        extras=extras,
    )

    # Validate resolvable pieces eagerly so diagnostics appear before a run.
    if config.initial_state is not None:
        resolve_state(config.initial_state, shape, field="initial_state")
    for i, spec in enumerate(config.observables):
        resolve_observable(spec, field=f"observables[{i}]")
    return config


def _state_shape(dim: int, shape: tuple[int, ...] | None, field: str) -> tuple[int, ...] | None:
    if shape is None:
        return None
    if int(np.prod(shape)) != dim:
        raise ConfigError(field, f"shape {shape} does not match the state dimension {dim}")
    return shape


def resolve_state(spec, shape: tuple[int, ...] | None = None, field: str = "initial_state") -> State:
    """Turn a state spec (preset name or amplitude pairs) into a state."""
    if isinstance(spec, str):
        if spec == "plus":
            n_qubits = len(shape) if shape is not None else 1
            if shape is not None and any(d != 2 for d in shape):
                raise ConfigError(field, "'plus' needs qubit subsystems")
            return plus_state(n_qubits)
        if spec.startswith("basis:"):
            index = int(spec.split(":", 1)[1])
            dim = int(np.prod(shape)) if shape is not None else 2
            if not 0 <= index < dim:
                raise ConfigError(field, f"basis index {index} out of range for dimension {dim}")
            return basis_state(dim, index, shape)
        if spec.startswith("bell:"):
            if shape is not None and shape != (2, 2):
                raise ConfigError(field, f"Bell states live on shape (2, 2), config says {shape}")
            which = spec.split(":", 1)[1]
            try:
                return bell_state(which)
            except ValueError as exc:
                raise ConfigError(field, str(exc)) from exc
        if spec == "maximally-mixed":
            dim = int(np.prod(shape)) if shape is not None else 2
            return maximally_mixed(dim, shape)
        if spec.startswith("random-pure:"):
            state_seed = int(spec.split(":", 1)[1])
            dim = int(np.prod(shape)) if shape is not None else 2
            return random_pure_state(dim, rng.stream(state_seed, "preset/random-pure"), shape)
        raise ConfigError(field, f"unknown state preset {spec!r}")

    if isinstance(spec, list):
        try:
            amps = np.array([complex(re, im) for re, im in spec])
        except (TypeError, ValueError) as exc:
            raise ConfigError(field, f"explicit state must be a list of [re, im] pairs ({exc})") from exc
        norm = float(np.linalg.norm(amps))
        if norm <= 1e-6:
            raise ConfigError(field, "explicit state has (near-)zero norm and cannot be normalized")
        return StateVector(amps / norm, _state_shape(amps.size, shape, field))
    raise ConfigError(field, f"cannot interpret {type(spec).__name__} as a state")


def _bloch_observable(spec: str, field: str) -> Observable:
    parts = spec.split(":", 1)[1].split(",")
    if len(parts) != 3:
        raise ConfigError(field, "bloch observable needs three components, e.g. 'bloch:1,0,1'")
    vector = np.array([float(p) for p in parts])
    norm = float(np.linalg.norm(vector))
    if norm <= 1e-6:
        raise ConfigError(field, "bloch vector has (near-)zero norm")
    x, y, z = vector / norm
    return Observable(spec, x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def resolve_observable(spec, field: str = "observables[0]") -> Observable:
    """Turn an observable spec (preset name or explicit matrix) into an Observable."""
    if isinstance(spec, str):
        if spec.startswith("pauli:"):
            label = spec.split(":", 1)[1]
            try:
                return Observable(label, pauli_matrix(label))
            except ValueError as exc:
                raise ConfigError(field, str(exc)) from exc
        if spec.startswith("bloch:"):
            return _bloch_observable(spec, field)
        raise ConfigError(field, f"unknown observable preset {spec!r}")

    if isinstance(spec, dict):
        if "matrix" not in spec:
            raise ConfigError(field, "explicit observable needs a 'matrix' entry")
        try:
            matrix = np.array([[complex(re, im) for re, im in row] for row in spec["matrix"]])
        except (TypeError, ValueError) as exc:
            raise ConfigError(field, f"matrix rows must be lists of [re, im] pairs ({exc})") from exc
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(field, "matrix must be square")
        if np.abs(matrix - matrix.conj().T).max() > 1e-8:
            raise ConfigError(field, "matrix is not Hermitian (tolerance 1e-8)")
        matrix = (matrix + matrix.conj().T) / 2.0
        return Observable(str(spec.get("name", field)), matrix)
    raise ConfigError(field, f"cannot interpret {type(spec).__name__} as an observable")
