import logging
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np

from src._default import DEFAULT_PD_MATRIX, NORM_TOL
from src.errors import NumericalError
from src.formats import Player, RestrictedStateWeights, StagePayoffs, StrategyProfile
from src.quantum import BASIS_LABELS, DensityMatrix, PureState, density_of, evolve_two_stage

logger = logging.getLogger(__name__)

PayoffMatrix = Tuple[Tuple[Tuple[float, float], Tuple[float, float]], Tuple[Tuple[float, float], Tuple[float, float]]]
PlayerLike = Union[Player, str]

# qubit positions (0-based) holding the A and B moves of each stage
_STAGE_POSITIONS = {1: (0, 1), 2: (2, 3)}


def _player(player: PlayerLike) -> Player:
    return player if isinstance(player, Player) else Player(player)


def _matrix_key(matrix) -> PayoffMatrix:
    return tuple(tuple(tuple(float(v) for v in cell) for cell in row) for row in matrix)


@lru_cache(maxsize=64)
def _operator_diagonal(player: Player, stage: int, matrix: PayoffMatrix) -> np.ndarray:
    a_pos, b_pos = _STAGE_POSITIONS[stage]
    k = 0 if player is Player.A else 1
    diagonal = np.array(
        [matrix[label[a_pos] - 1][label[b_pos] - 1][k] for label in BASIS_LABELS],
        dtype=float,
    )
    diagonal.flags.writeable = False
    return diagonal


def payoff_operator(player: PlayerLike, stage: int, matrix: Sequence = DEFAULT_PD_MATRIX) -> np.ndarray:
    """
    The diagonal payoff observable held by the measuring agent.

    For (A, 1) the diagonal is 3 on |11kl⟩, 0 on |12kl⟩, 5 on |21kl⟩ and 1 on |22kl⟩;
    the other three operators read the same matrix on their own qubit pair and column.
    """
    return np.diag(_operator_diagonal(_player(player), int(stage), _matrix_key(matrix))).astype(complex)


def measured_payoff(
        rho_ffin: DensityMatrix,
        player: PlayerLike,
        stage: int,
        matrix: Sequence = DEFAULT_PD_MATRIX,
        tol: float = NORM_TOL,
) -> float:
    """Mean value Tr(P ρ_ffin) of a payoff observable; raises NumericalError on a complex result."""
    diagonal = _operator_diagonal(_player(player), int(stage), _matrix_key(matrix))
    # P is diagonal, so Tr(P ρ) only reads the diagonal of ρ
    value = complex(np.dot(diagonal, np.diag(rho_ffin.entries)))
    if abs(value.imag) > tol:
        raise NumericalError(f"payoff for ({_player(player).value}, {stage}) has imaginary part {value.imag:.3e}")
    return value.real


def all_payoffs(state: PureState, profile: StrategyProfile, matrix: Sequence = DEFAULT_PD_MATRIX) -> StagePayoffs:
    rho_ffin = evolve_two_stage(density_of(state), profile)
    return StagePayoffs(
        a1=measured_payoff(rho_ffin, Player.A, 1, matrix),
        b1=measured_payoff(rho_ffin, Player.B, 1, matrix),
        a2=measured_payoff(rho_ffin, Player.A, 2, matrix),
        b2=measured_payoff(rho_ffin, Player.B, 2, matrix),
    )


def _cooperative_bracket(x: float, y: float) -> float:
    # own payoff when both start on |11⟩: −xy − x + 4y + 1
    return -x * y - x + 4.0 * y + 1.0


def _inverted_bracket(x: float, y: float) -> float:
    # own payoff when both start on |22⟩: −xy + 2x − 3y + 3
    return -x * y + 2.0 * x - 3.0 * y + 3.0


def closed_form_payoffs(w: RestrictedStateWeights, profile: StrategyProfile) -> StagePayoffs:
    """
    Closed-form stage payoffs for the restricted initial state.

    Stage 1 reads the pair (i, j), which starts on |11⟩ with weight w1 + w2 and on |22⟩ with
    weight w3 + w4; stage 2 reads (k, l), starting on |11⟩ with weight w1 + w3.
    """
    w.check()
    p, q, p1, q1 = profile.as_tuple()
    first_11, first_22 = w.w1 + w.w2, w.w3 + w.w4
    second_11, second_22 = w.w1 + w.w3, w.w2 + w.w4
    return StagePayoffs(
        a1=first_11 * _cooperative_bracket(p, q) + first_22 * _inverted_bracket(p, q),
        b1=first_11 * _cooperative_bracket(q, p) + first_22 * _inverted_bracket(q, p),
        a2=second_11 * _cooperative_bracket(p1, q1) + second_22 * _inverted_bracket(p1, q1),
        b2=second_11 * _cooperative_bracket(q1, p1) + second_22 * _inverted_bracket(q1, p1),
    )


def classical_payoffs(profile: StrategyProfile) -> StagePayoffs:
    p, q, p1, q1 = profile.as_tuple()
    return StagePayoffs(
        a1=-p * q + 4.0 * q - p + 1.0,
        b1=-p * q + 4.0 * p - q + 1.0,
        a2=-p1 * q1 + 4.0 * q1 - p1 + 1.0,
        b2=-p1 * q1 + 4.0 * p1 - q1 + 1.0,
    )


def defect_payoffs(w: RestrictedStateWeights) -> Tuple[float, float]:
    """Stage-2 payoffs when both players defect in stage 2: 3(w2 + w4) + (w1 + w3) each."""
    w.check()
    value = 3.0 * (w.w2 + w.w4) + (w.w1 + w.w3)
    return value, value


def first_stage_total_payoffs(w: RestrictedStateWeights, p: float, q: float) -> Tuple[float, float]:
    """Stage-1 payoffs plus the anticipated mutual-defection payoffs of stage 2."""
    w.check()

    def total(x: float, y: float) -> float:
        return (
            w.w1 * (-x * y + 4.0 * y - x + 2.0)
            + w.w2 * (-x * y + 4.0 * y - x + 4.0)
            + w.w3 * (-x * y - 3.0 * y + 2.0 * x + 4.0)
            + w.w4 * (-x * y - 3.0 * y + 2.0 * x + 6.0)
        )

    return total(p, q), total(q, p)


def corrupted_matrix(matrix: Sequence = DEFAULT_PD_MATRIX, delta: float = 0.5) -> PayoffMatrix:
    """Copy of `matrix` with the (D, C) temptation payoff of A shifted by `delta`."""
    rows = [[list(cell) for cell in row] for row in _matrix_key(matrix)]
    rows[1][0][0] += delta
    return _matrix_key(rows)
