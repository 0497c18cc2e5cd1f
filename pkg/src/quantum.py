import logging
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src._default import DIM, EXACT_TOL, N_QUBITS, NORM_TOL
from src.errors import DomainError, NormalizationError, NumericalError, ShapeError
from src.formats import RestrictedStateWeights, StrategyProfile

logger = logging.getLogger(__name__)

Label = Tuple[int, int, int, int]

# label value 1 = Cooperate, 2 = Defect; positions (i, j, k, l)
BASIS_LABELS: Tuple[Label, ...] = tuple(product((1, 2), repeat=N_QUBITS))
RESTRICTED_LABELS: Tuple[Label, ...] = ((1, 1, 1, 1), (1, 1, 2, 2), (2, 2, 1, 1), (2, 2, 2, 2))
STAGE_QUBITS = {1: (1, 2), 2: (3, 4)}


def basis_index(label: Sequence[int]) -> int:
    i, j, k, l = label
    return (i - 1) * 8 + (j - 1) * 4 + (k - 1) * 2 + (l - 1)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class PureState(BaseModel):
    """A normalized 4-qubit state; `amplitudes[basis_index(label)]` is c_ijkl."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amplitudes: np.ndarray

    def amplitude(self, label: Sequence[int]) -> complex:
        return complex(self.amplitudes[basis_index(label)])

    def with_phases(self, phases: np.ndarray) -> "PureState":
        return PureState(amplitudes=_frozen(self.amplitudes * np.exp(1j * np.asarray(phases, dtype=float))))


class DensityMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))

    def check(self, tol: float = NORM_TOL) -> "DensityMatrix":
        """Raise NumericalError unless the matrix is Hermitian, unit-trace and positive semidefinite."""
        if self.entries.shape != (DIM, DIM):
            raise ShapeError(f"density matrix must be {DIM}x{DIM}, got {self.entries.shape}")
        hermitian_gap = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if hermitian_gap > tol:
            raise NumericalError(f"density matrix is not Hermitian (gap {hermitian_gap:.3e})")
        if abs(self.trace - 1.0) > tol:
            raise NumericalError(f"density matrix trace is {self.trace}")
        smallest = float(self.eigenvalues().min())
        if smallest < -tol:
            raise NumericalError(f"density matrix has negative eigenvalue {smallest:.3e}")
        return self


def make_pure_state(amplitudes: Sequence[complex], tol: float = NORM_TOL) -> PureState:
    array = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if array.size != DIM:
        raise ShapeError(f"expected {DIM} amplitudes, got {array.size}")
    if not np.all(np.isfinite(array)):
        raise NormalizationError("amplitudes must be finite")
    norm = float(np.sum(np.abs(array) ** 2))
    if abs(norm - 1.0) > tol:
        raise NormalizationError(f"sum of |amplitude|^2 is {norm!r}, expected 1")
    return PureState(amplitudes=_frozen(array.copy()))


def make_restricted_state(c1: complex, c2: complex, c3: complex, c4: complex, tol: float = NORM_TOL) -> PureState:
    array = np.zeros(DIM, dtype=complex)
    for label, c in zip(RESTRICTED_LABELS, (c1, c2, c3, c4)):
        array[basis_index(label)] = c
    return make_pure_state(array, tol=tol)


def restricted_state_from_weights(weights: RestrictedStateWeights, phases: Optional[Sequence[float]] = None) -> PureState:
    weights.check()
    moduli = np.sqrt(np.clip(np.asarray(weights.as_tuple()), 0.0, None))
    moduli = moduli / np.linalg.norm(moduli)
    if phases is not None:
        moduli = moduli * np.exp(1j * np.asarray(phases, dtype=float))
    return make_restricted_state(*moduli)


def restricted_weights(state: PureState, tol: float = NORM_TOL) -> Optional[RestrictedStateWeights]:
    """Return |c1|²..|c4|² when `state` lives on 1111, 1122, 2211, 2222 only, else None."""
    probabilities = np.abs(state.amplitudes) ** 2
    support = [basis_index(label) for label in RESTRICTED_LABELS]
    outside = np.delete(probabilities, support)
    if outside.sum() > tol:
        return None
    return RestrictedStateWeights.from_sequence(probabilities[support])


def density_of(state: PureState) -> DensityMatrix:
    psi = state.amplitudes
    return DensityMatrix(entries=_frozen(np.outer(psi, psi.conj())))


@lru_cache(maxsize=None)
def _flip_matrix(target: int) -> np.ndarray:
    operator = np.zeros((DIM, DIM), dtype=complex)
    for label in BASIS_LABELS:
        flipped = list(label)
        flipped[target - 1] = 3 - flipped[target - 1]
        operator[basis_index(flipped), basis_index(label)] = 1.0
    return _frozen(operator)


def flip_on(target: int) -> np.ndarray:
    """Inversion operator C on one qubit (|1⟩ ↔ |2⟩), identity on the other three."""
    if target not in (1, 2, 3, 4):
        raise IndexError(f"qubit position must be in 1..4, got {target}")
    return _flip_matrix(target)


@lru_cache(maxsize=None)
def _stage_operators(stage: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    a, b = STAGE_QUBITS[stage]
    identity = _frozen(np.eye(DIM, dtype=complex))
    # I⊗I, I⊗C, C⊗I, C⊗C on the stage's qubit pair
    return identity, flip_on(b), flip_on(a), _frozen(flip_on(a) @ flip_on(b))


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must be a probability in [0, 1], got {value!r}")
    return value


def stage_channel(rho: DensityMatrix, pr_id_a: float, pr_id_b: float, stage: int) -> DensityMatrix:
    """
    Apply one stage of probabilistic identity/inversion moves.

    Player A applies I with probability `pr_id_a` and C otherwise on its qubit for the stage,
    player B likewise with `pr_id_b`; the result is the four-term convex mixture of conjugations.

    Args:
        rho (`DensityMatrix`): Input state.
        pr_id_a (`float`): Probability that A applies the identity.
        pr_id_b (`float`): Probability that B applies the identity.
        stage (`int`): 1 acts on qubits (1, 2), 2 acts on qubits (3, 4).

    Returns:
        `DensityMatrix`: The mixed output state.
    """
    if stage not in STAGE_QUBITS:
        raise DomainError(f"stage must be 1 or 2, got {stage!r}")
    p = _check_probability("pr_id_a", pr_id_a)
    q = _check_probability("pr_id_b", pr_id_b)

    weights = (p * q, p * (1.0 - q), (1.0 - p) * q, (1.0 - p) * (1.0 - q))
    out = np.zeros((DIM, DIM), dtype=complex)
    for weight, operator in zip(weights, _stage_operators(stage)):
        if weight:
            out += weight * (operator @ rho.entries @ operator.conj().T)
    return DensityMatrix(entries=_frozen(out))


def evolve_two_stage(rho_ini: DensityMatrix, profile: StrategyProfile) -> DensityMatrix:
    rho_fin = stage_channel(rho_ini, profile.p, profile.q, stage=1)
    return stage_channel(rho_fin, profile.p1, profile.q1, stage=2)


def reduced_purity(state: PureState, position: int) -> float:
    """Tr(ρ_k²) of the single-qubit reduced state at `position`."""
    if position not in (1, 2, 3, 4):
        raise IndexError(f"qubit position must be in 1..4, got {position}")
    tensor = np.moveaxis(state.amplitudes.reshape((2,) * N_QUBITS), position - 1, 0).reshape(2, -1)
    reduced = tensor @ tensor.conj().T
    return float(np.real(np.trace(reduced @ reduced)))


def is_product_state(state: PureState, tol: float = NORM_TOL) -> bool:
    return all(abs(reduced_purity(state, k) - 1.0) <= tol for k in range(1, N_QUBITS + 1))


def max_entry_gap(left: DensityMatrix, right: DensityMatrix) -> float:
    return float(np.max(np.abs(left.entries - right.entries)))


def is_diagonal(rho: DensityMatrix, tol: float = EXACT_TOL) -> bool:
    off_diagonal = rho.entries - np.diag(np.diag(rho.entries))
    return bool(np.max(np.abs(off_diagonal)) <= tol)
