from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src._default import DEFAULT_RUN_KWARGS, NORM_TOL
from src.errors import DomainError

Interval = Tuple[float, float]
PayoffPair = Tuple[float, float]


class Player(Enum):
    A = "A"
    B = "B"


class ComponentKind(Enum):
    PURE_POINT = "pure-point"
    MIXED_POINT = "mixed-point"
    SEGMENT = "segment"
    REGION = "region"


class Strictness(Enum):
    STRICT = "strict"
    WEAK = "weak"


class NashStatus(Enum):
    STRICT = "strict"
    WEAK = "weak"
    NOT_EQUILIBRIUM = "not-equilibrium"


class ConditionClass(Enum):
    STRICT_HOLD = "strict-hold"
    BOUNDARY_HOLD = "boundary-hold"
    FAIL = "fail"


class SgpoKind(Enum):
    COOPERATE_THEN_DEFECT = "cooperate-then-defect"
    ALL_DEFECT = "all-defect"
    ALL_COOPERATE = "all-cooperate"
    MIXED = "mixed"
    OTHER = "other"


class Command(Enum):
    EVALUATE = "evaluate"
    SGPO = "sgpo"
    CONDITIONS = "conditions"
    SWEEP = "sweep"
    VERIFY_CLASSICAL = "verify-classical"


class OutputFormat(Enum):
    TEXT = "text"
    CSV = "csv"
    JSON = "json"


class StrategyProfile(BaseModel):
    """Identity-application probabilities: (p, q) in stage 1, (p1, q1) in stage 2."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(ge=0.0, le=1.0)
    q: float = Field(ge=0.0, le=1.0)
    p1: float = Field(ge=0.0, le=1.0)
    q1: float = Field(ge=0.0, le=1.0)

    @classmethod
    def from_sequence(cls, values) -> "StrategyProfile":
        p, q, p1, q1 = (float(v) for v in values)
        return cls(p=p, q=q, p1=p1, q1=q1)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return self.p, self.q, self.p1, self.q1

    def stage(self, stage: int) -> PayoffPair:
        return (self.p, self.q) if stage == 1 else (self.p1, self.q1)


class RestrictedStateWeights(BaseModel):
    """Moduli-squared |c1|²..|c4|² of the state c1|1111⟩ + c2|1122⟩ + c3|2211⟩ + c4|2222⟩."""

    model_config = ConfigDict(frozen=True)

    w1: float
    w2: float
    w3: float
    w4: float

    @classmethod
    def from_sequence(cls, values) -> "RestrictedStateWeights":
        w1, w2, w3, w4 = (float(v) for v in values)
        return cls(w1=w1, w2=w2, w3=w3, w4=w4)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return self.w1, self.w2, self.w3, self.w4

    @property
    def x_sum(self) -> float:
        return self.w1 + self.w2

    @property
    def y_sum(self) -> float:
        return self.w2 + self.w4

    def check(self, tol: float = NORM_TOL) -> "RestrictedStateWeights":
        values = np.asarray(self.as_tuple())
        if not np.all(np.isfinite(values)) or np.any(values < -tol) or np.any(values > 1.0 + tol):
            raise DomainError(f"weights must lie in [0, 1], got {self.as_tuple()}")
        if abs(values.sum() - 1.0) > tol:
            raise DomainError(f"weights must sum to 1, got sum {values.sum()!r}")
        return self


class StagePayoffs(BaseModel):
    a1: float
    b1: float
    a2: float
    b2: float

    @property
    def a_total(self) -> float:
        return self.a1 + self.a2

    @property
    def b_total(self) -> float:
        return self.b1 + self.b2

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return self.a1, self.b1, self.a2, self.b2

    def max_abs_diff(self, other: "StagePayoffs") -> float:
        return float(np.max(np.abs(np.subtract(self.as_tuple(), other.as_tuple()))))


class BilinearGame(BaseModel):
    """
    Payoffs α·xy + β·x + γ·y + δ for both players.

    `x` is the row player's (A's) identity probability and `y` the column player's (B's).
    Coefficients are stored as (α, β, γ, δ).
    """

    model_config = ConfigDict(frozen=True)

    a: Tuple[float, float, float, float]
    b: Tuple[float, float, float, float]

    @staticmethod
    def _evaluate(coef, x, y):
        alpha, beta, gamma, delta = coef
        return alpha * x * y + beta * x + gamma * y + delta

    @classmethod
    def from_corners(cls, f00: PayoffPair, f01: PayoffPair, f10: PayoffPair, f11: PayoffPair) -> "BilinearGame":
        """Interpolate a bilinear game from payoff pairs at (x, y) = (0,0), (0,1), (1,0), (1,1)."""
        def coefficients(k: int) -> Tuple[float, float, float, float]:
            return (
                f11[k] - f10[k] - f01[k] + f00[k],
                f10[k] - f00[k],
                f01[k] - f00[k],
                f00[k],
            )

        return cls(a=coefficients(0), b=coefficients(1))

    def payoff_a(self, x, y):
        return self._evaluate(self.a, x, y)

    def payoff_b(self, x, y):
        return self._evaluate(self.b, x, y)

    def payoffs(self, x: float, y: float) -> PayoffPair:
        return float(self.payoff_a(x, y)), float(self.payoff_b(x, y))

    def gain_a(self, y: float) -> float:
        """∂(A payoff)/∂x, which depends on y only."""
        return self.a[0] * y + self.a[1]

    def gain_b(self, x: float) -> float:
        """∂(B payoff)/∂y, which depends on x only."""
        return self.b[0] * x + self.b[2]

    def shifted(self, continuation: PayoffPair) -> "BilinearGame":
        ca, cb = continuation
        return BilinearGame(a=(*self.a[:3], self.a[3] + ca), b=(*self.b[:3], self.b[3] + cb))


class EquilibriumComponent(BaseModel):
    """A closed axis-aligned box [x_lo, x_hi] × [y_lo, y_hi] of Nash equilibria."""

    model_config = ConfigDict(frozen=True)

    kind: ComponentKind
    x: Interval
    y: Interval
    strictness: Strictness

    @property
    def is_point(self) -> bool:
        return self.kind in (ComponentKind.PURE_POINT, ComponentKind.MIXED_POINT)

    @property
    def point(self) -> PayoffPair:
        return self.x[0], self.y[0]

    def vertices(self) -> List[PayoffPair]:
        xs = sorted({self.x[0], self.x[1]})
        ys = sorted({self.y[0], self.y[1]})
        return [(x, y) for x in xs for y in ys]

    def sample(self, n: int) -> List[PayoffPair]:
        if self.is_point:
            return [self.point]
        ts = np.linspace(0.0, 1.0, n)
        return [
            (float(self.x[0] + t * (self.x[1] - self.x[0])), float(self.y[0] + s * (self.y[1] - self.y[0])))
            for t, s in zip(ts, ts[::-1] if self.kind is ComponentKind.REGION else ts)
        ]

    def distance(self, x: float, y: float) -> float:
        """L∞ distance from (x, y) to the box."""
        dx = max(self.x[0] - x, 0.0, x - self.x[1])
        dy = max(self.y[0] - y, 0.0, y - self.y[1])
        return max(dx, dy)

    def contains(self, x: float, y: float, tol: float = NORM_TOL) -> bool:
        return self.distance(x, y) <= tol

    def covers(self, other: "EquilibriumComponent") -> bool:
        return (
            self.x[0] <= other.x[0] and other.x[1] <= self.x[1]
            and self.y[0] <= other.y[0] and other.y[1] <= self.y[1]
        )


class Continuation(BaseModel):
    """A stage-2 equilibrium point and the stage-1 game it induces."""

    point: PayoffPair
    component_index: int
    inducible: bool
    payoffs: PayoffPair
    stage1_game: BilinearGame
    stage1_equilibria: List[EquilibriumComponent]


class SgpoProfile(BaseModel):
    profile: StrategyProfile
    stage_payoffs: StagePayoffs
    totals: PayoffPair
    strictness: Strictness
    stage1_kind: ComponentKind
    stage2_kind: ComponentKind


class SgpoReport(BaseModel):
    stage1_base_game: BilinearGame
    stage2_game: BilinearGame
    stage2_equilibria: List[EquilibriumComponent]
    continuations: List[Continuation]
    sgpo_profiles: List[SgpoProfile]
    flags: List[str] = Field(default_factory=list)

    def find(self, profile, tol: float = NORM_TOL) -> Optional[SgpoProfile]:
        target = np.asarray(profile, dtype=float)
        for entry in self.sgpo_profiles:
            if np.max(np.abs(np.asarray(entry.profile.as_tuple()) - target)) <= tol:
                return entry
        return None

    def contains(self, profile, tol: float = NORM_TOL) -> bool:
        return self.find(profile, tol) is not None

    @property
    def is_unique(self) -> bool:
        """A single point equilibrium in stage 2 inducing a single point equilibrium in stage 1."""
        return (
            len(self.stage2_equilibria) == 1
            and self.stage2_equilibria[0].is_point
            and len(self.continuations) == 1
            and len(self.continuations[0].stage1_equilibria) == 1
            and self.continuations[0].stage1_equilibria[0].is_point
        )


class ConditionReport(BaseModel):
    cond1_value: float
    cond2_value: float
    x_sum: float
    y_sum: float
    cond1_class: ConditionClass
    cond2_class: ConditionClass

    @property
    def both_hold(self) -> bool:
        return ConditionClass.FAIL not in (self.cond1_class, self.cond2_class)

    @property
    def both_strict(self) -> bool:
        return self.cond1_class is ConditionClass.STRICT_HOLD and self.cond2_class is ConditionClass.STRICT_HOLD


class EvaluateReport(BaseModel):
    amplitude_count: int
    restricted: bool
    product_state: bool
    profile: StrategyProfile
    density_payoffs: StagePayoffs
    closed_form_payoffs: Optional[StagePayoffs] = None
    discrepancy: Optional[float] = None


class SgpoCommandReport(BaseModel):
    product_state: bool
    weights: Optional[RestrictedStateWeights] = None
    conditions: Optional[ConditionReport] = None
    sgpo_kind: SgpoKind
    grid_n: int
    oracle_agrees: bool
    report: SgpoReport


class SweepRow(BaseModel):
    w1: float
    w2: float
    w3: float
    w4: float
    x_sum: float
    y_sum: float
    cond1_value: float
    cond2_value: float
    cond1_class: ConditionClass
    cond2_class: ConditionClass
    sgpo_kind: SgpoKind
    a_total: float
    b_total: float


class SweepReport(BaseModel):
    resolution: int
    rows: List[SweepRow]


class CheckResult(BaseModel):
    name: str
    max_error: float
    tolerance: float
    samples: int
    passed: bool


class VerificationReport(BaseModel):
    seed: int
    corrupted: bool
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class RunConfig(BaseModel):
    command: Command
    state: Optional[List[str]] = None
    weights: Optional[List[str]] = None
    profile: Optional[str] = None
    resolution: int = Field(default=DEFAULT_RUN_KWARGS["resolution"], ge=2)
    grid_n: int = Field(default=DEFAULT_RUN_KWARGS["grid_n"], ge=1)
    output_format: OutputFormat = OutputFormat(DEFAULT_RUN_KWARGS["output_format"])
    out: Optional[str] = None
    seed: int = DEFAULT_RUN_KWARGS["seed"]
    samples: int = Field(default=DEFAULT_RUN_KWARGS["samples"], ge=1)
    tol: float = Field(default=DEFAULT_RUN_KWARGS["tol"], ge=0.0)
    workers: int = Field(default=DEFAULT_RUN_KWARGS["workers"], ge=1)
    progress: bool = False
    corrupt: bool = False
