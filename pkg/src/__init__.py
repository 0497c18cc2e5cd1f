from .equilibrium import (
    cooperation_conditions,
    corner_matrix,
    grid_oracle,
    nash_2x2,
    oracle_agreement,
    restricted_stage2_equilibria,
    sgpo,
    sgpo_from_weights,
    sgpo_kind,
    stage_game,
    verify_ne,
)
from .errors import (
    DomainError,
    IoError,
    NormalizationError,
    NumericalError,
    ParseError,
    QuantumGameError,
    ShapeError,
)
from .formats import (
    BilinearGame,
    ComponentKind,
    ConditionClass,
    ConditionReport,
    EquilibriumComponent,
    NashStatus,
    Player,
    RestrictedStateWeights,
    SgpoKind,
    SgpoReport,
    StagePayoffs,
    StrategyProfile,
    Strictness,
)
from .payoffs import (
    all_payoffs,
    classical_payoffs,
    closed_form_payoffs,
    defect_payoffs,
    first_stage_total_payoffs,
    measured_payoff,
    payoff_operator,
)
from .quantum import (
    DensityMatrix,
    PureState,
    density_of,
    evolve_two_stage,
    flip_on,
    is_product_state,
    make_pure_state,
    make_restricted_state,
    reduced_purity,
    restricted_state_from_weights,
    restricted_weights,
    stage_channel,
)

__all__ = [
    # Quantum core
    "DensityMatrix",
    "PureState",
    "density_of",
    "evolve_two_stage",
    "flip_on",
    "is_product_state",
    "make_pure_state",
    "make_restricted_state",
    "reduced_purity",
    "restricted_state_from_weights",
    "restricted_weights",
    "stage_channel",
    # Payoff engine
    "all_payoffs",
    "classical_payoffs",
    "closed_form_payoffs",
    "defect_payoffs",
    "first_stage_total_payoffs",
    "measured_payoff",
    "payoff_operator",
    # Equilibrium
    "cooperation_conditions",
    "corner_matrix",
    "grid_oracle",
    "nash_2x2",
    "oracle_agreement",
    "restricted_stage2_equilibria",
    "sgpo",
    "sgpo_from_weights",
    "sgpo_kind",
    "stage_game",
    "verify_ne",
    # Formats
    "BilinearGame",
    "ComponentKind",
    "ConditionClass",
    "ConditionReport",
    "EquilibriumComponent",
    "NashStatus",
    "Player",
    "RestrictedStateWeights",
    "SgpoKind",
    "SgpoReport",
    "StagePayoffs",
    "StrategyProfile",
    "Strictness",
    # Errors
    "DomainError",
    "IoError",
    "NormalizationError",
    "NumericalError",
    "ParseError",
    "QuantumGameError",
    "ShapeError",
]
