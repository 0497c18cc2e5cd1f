import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src._default import DEFAULT_PD_MATRIX, DEFAULT_TOL, EXACT_TOL
from src.errors import DomainError
from src.formats import (
    BilinearGame,
    ComponentKind,
    ConditionClass,
    ConditionReport,
    Continuation,
    EquilibriumComponent,
    Interval,
    NashStatus,
    PayoffPair,
    RestrictedStateWeights,
    SgpoKind,
    SgpoProfile,
    SgpoReport,
    StagePayoffs,
    StrategyProfile,
    Strictness,
)
from src.payoffs import all_payoffs
from src.quantum import PureState, restricted_state_from_weights

logger = logging.getLogger(__name__)

_CORNERS = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
_KIND_ORDER = {
    ComponentKind.PURE_POINT: 0,
    ComponentKind.MIXED_POINT: 1,
    ComponentKind.SEGMENT: 2,
    ComponentKind.REGION: 3,
}


def stage_game(
        state: PureState,
        stage: int,
        continuation: PayoffPair = (0.0, 0.0),
        matrix: Sequence = DEFAULT_PD_MATRIX,
) -> BilinearGame:
    """
    Extract the exact bilinear game of one stage from four corner evaluations.

    Payoffs are affine in each probability separately, so interpolating the corners is exact.
    The other stage's probabilities are held at 1; stage payoffs do not depend on them.
    `continuation` is added to each player's constant term.
    """
    if stage not in (1, 2):
        raise DomainError(f"stage must be 1 or 2, got {stage!r}")

    corner_payoffs = []
    for x, y in _CORNERS:
        profile = StrategyProfile(p=x, q=y, p1=1.0, q1=1.0) if stage == 1 else StrategyProfile(p=1.0, q=1.0, p1=x, q1=y)
        payoffs = all_payoffs(state, profile, matrix)
        corner_payoffs.append((payoffs.a1, payoffs.b1) if stage == 1 else (payoffs.a2, payoffs.b2))

    return BilinearGame.from_corners(*corner_payoffs).shifted(continuation)


def corner_matrix(game: BilinearGame) -> np.ndarray:
    """2×2 bimatrix `[row][col] = (A, B)`; row/column 0 is identity (cooperate), 1 is inversion."""
    bimatrix = np.empty((2, 2, 2), dtype=float)
    for row, x in enumerate((1.0, 0.0)):
        for col, y in enumerate((1.0, 0.0)):
            bimatrix[row, col] = game.payoffs(x, y)
    return bimatrix


def _snap(value: float, tol: float) -> float:
    return 0.0 if abs(value) <= tol else value


def _sign_sets(d0: float, d1: float) -> Tuple[Optional[Interval], Optional[Interval], Optional[Interval]]:
    """
    For a linear function on [0, 1] with end values d0, d1 return the closed sets where it is
    ≥ 0, ≤ 0 and = 0, each an interval or None.
    """
    if d0 == 0.0 and d1 == 0.0:
        full = (0.0, 1.0)
        return full, full, full

    crossing = None
    if d0 == 0.0:
        crossing = 0.0
    elif d1 == 0.0:
        crossing = 1.0
    elif (d0 > 0.0) != (d1 > 0.0):
        crossing = min(max(d0 / (d0 - d1), 0.0), 1.0)

    if crossing is None:
        if d0 > 0.0:
            return (0.0, 1.0), None, None
        return None, (0.0, 1.0), None

    zero = (crossing, crossing)
    if d0 > 0.0 or d1 < 0.0:
        # decreasing through the crossing
        return (0.0, crossing), (crossing, 1.0), zero
    return (crossing, 1.0), (0.0, crossing), zero


def _classify(box: Tuple[Interval, Interval], game: BilinearGame, tol: float) -> EquilibriumComponent:
    x, y = box
    x_point, y_point = x[0] == x[1], y[0] == y[1]
    if x_point and y_point:
        if x[0] in (0.0, 1.0) and y[0] in (0.0, 1.0):
            kind = ComponentKind.PURE_POINT
            strict = _snap(game.gain_a(y[0]), tol) != 0.0 and _snap(game.gain_b(x[0]), tol) != 0.0
        else:
            kind = ComponentKind.MIXED_POINT
            strict = False
    elif x_point or y_point:
        kind, strict = ComponentKind.SEGMENT, False
    else:
        kind, strict = ComponentKind.REGION, False
    return EquilibriumComponent(
        kind=kind, x=x, y=y, strictness=Strictness.STRICT if strict else Strictness.WEAK
    )


def _sort_key(component: EquilibriumComponent):
    return _KIND_ORDER[component.kind], component.x, component.y


def nash_2x2(game: BilinearGame, tol: float = DEFAULT_TOL) -> List[EquilibriumComponent]:
    """
    Enumerate every Nash equilibrium of a bilinear 2×2 game.

    A's best response depends on the sign of gain_a(y), B's on the sign of gain_b(x). The
    equilibrium set is the intersection of the two best-response graphs, each a union of
    axis-aligned boxes, so it is returned as the maximal boxes of the pairwise intersections:
    pure corners, interior mixed points, segments and (for a fully indifferent game) the square.
    Derivative values within `tol` of zero count as ties.
    """
    y_ge, y_le, y_eq = _sign_sets(_snap(game.gain_a(0.0), tol), _snap(game.gain_a(1.0), tol))
    x_ge, x_le, x_eq = _sign_sets(_snap(game.gain_b(0.0), tol), _snap(game.gain_b(1.0), tol))

    # A's best-response graph: x=1 over y_ge, x=0 over y_le, any x over y_eq
    graph_a = [((1.0, 1.0), y_ge), ((0.0, 0.0), y_le), ((0.0, 1.0), y_eq)]
    # B's best-response graph: y=1 over x_ge, y=0 over x_le, any y over x_eq
    graph_b = [(x_ge, (1.0, 1.0)), (x_le, (0.0, 0.0)), (x_eq, (0.0, 1.0))]

    boxes = []
    for ax, ay in graph_a:
        if ay is None:
            continue
        for bx, by in graph_b:
            if bx is None:
                continue
            x_lo, x_hi = max(ax[0], bx[0]), min(ax[1], bx[1])
            y_lo, y_hi = max(ay[0], by[0]), min(ay[1], by[1])
            if x_lo <= x_hi and y_lo <= y_hi:
                boxes.append(((x_lo, x_hi), (y_lo, y_hi)))

    components = [_classify(box, game, tol) for box in dict.fromkeys(boxes)]
    maximal = [
        c for c in components
        if not any(other is not c and other.covers(c) and not c.covers(other) for other in components)
    ]
    if any(not c.is_point for c in maximal):
        logger.debug("degenerate equilibrium set: %s", [(c.kind.value, c.x, c.y) for c in maximal])
    return sorted(maximal, key=_sort_key)


def verify_ne(game: BilinearGame, x: float, y: float, eps: float = 0.0) -> NashStatus:
    """
    Check the Nash inequalities at (x, y) against every unilateral deviation.

    Payoffs are linear in the deviating player's own probability, so the best deviation is
    attained at 0 or 1. The point is strict when both players play pure actions that beat the
    alternative by more than `eps`.
    """
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise DomainError(f"equilibrium coordinates must lie in [0, 1], got ({x}, {y})")

    here_a, here_b = game.payoffs(x, y)
    gain_a = max(game.payoff_a(0.0, y), game.payoff_a(1.0, y)) - here_a
    gain_b = max(game.payoff_b(x, 0.0), game.payoff_b(x, 1.0)) - here_b
    if gain_a > eps or gain_b > eps:
        return NashStatus.NOT_EQUILIBRIUM

    strict_a = x in (0.0, 1.0) and here_a - game.payoff_a(1.0 - x, y) > eps
    strict_b = y in (0.0, 1.0) and here_b - game.payoff_b(x, 1.0 - y) > eps
    return NashStatus.STRICT if strict_a and strict_b else NashStatus.WEAK


def grid_oracle(game: BilinearGame, N: int, eps: float = DEFAULT_TOL) -> List[PayoffPair]:
    """All grid points (i/N, j/N) that no grid deviation improves by more than `eps`."""
    if N < 1:
        raise DomainError(f"grid resolution must be at least 1, got {N}")
    grid = np.arange(N + 1) / N
    xs, ys = np.meshgrid(grid, grid, indexing="ij")
    payoff_a = game.payoff_a(xs, ys)
    payoff_b = game.payoff_b(xs, ys)
    stable_a = payoff_a >= payoff_a.max(axis=0, keepdims=True) - eps
    stable_b = payoff_b >= payoff_b.max(axis=1, keepdims=True) - eps
    rows, cols = np.nonzero(stable_a & stable_b)
    return [(float(grid[i]), float(grid[j])) for i, j in zip(rows, cols)]


def oracle_agreement(
        game: BilinearGame,
        components: List[EquilibriumComponent],
        N: int,
        eps: float = DEFAULT_TOL,
) -> bool:
    """
    Cross-check an equilibrium enumeration against the grid oracle.

    Every oracle point must lie within 1/N of some component, and every pure corner
    component must itself be an oracle point.
    """
    points = grid_oracle(game, N, eps)
    near = all(any(c.distance(x, y) <= 1.0 / N + EXACT_TOL for c in components) for x, y in points)
    found = set(points)
    corners = all(c.point in found for c in components if c.kind is ComponentKind.PURE_POINT)
    return near and corners


def _continuation_points(
        game: BilinearGame,
        components: List[EquilibriumComponent],
        tol: float,
) -> Tuple[List[Tuple[PayoffPair, int, bool]], List[str]]:
    points: Dict[PayoffPair, Tuple[int, bool]] = {}
    flags = []
    for index, component in enumerate(components):
        vertices = component.vertices()
        values = np.array([game.payoffs(x, y) for x, y in vertices])
        inducible = bool(np.max(np.ptp(values, axis=0)) <= tol) if len(vertices) > 1 else True
        if not inducible:
            message = (
                f"stage-2 {component.kind.value} x={component.x} y={component.y} has non-constant payoffs; "
                f"its endpoints are used as separate continuations"
            )
            logger.info(message)
            flags.append(message)
        for vertex in vertices:
            points.setdefault(vertex, (index, inducible))
    return [(point, index, inducible) for point, (index, inducible) in points.items()], flags


def _strictness(*components: EquilibriumComponent) -> Strictness:
    if all(c.strictness is Strictness.STRICT for c in components):
        return Strictness.STRICT
    return Strictness.WEAK


def sgpo(state: PureState, tol: float = DEFAULT_TOL, matrix: Sequence = DEFAULT_PD_MATRIX) -> SgpoReport:
    """
    Subgame-perfect outcomes by backward induction.

    Solve the stage-2 game, add each stage-2 equilibrium payoff pair to the stage-1 game as a
    constant, solve the induced stage-1 game and pair every stage-1 equilibrium with the
    stage-2 equilibrium that induced it. Segment equilibria contribute their endpoints.
    """
    stage2 = stage_game(state, 2, matrix=matrix)
    stage1_base = stage_game(state, 1, matrix=matrix)
    stage2_equilibria = nash_2x2(stage2, tol)
    points, flags = _continuation_points(stage2, stage2_equilibria, EXACT_TOL)

    continuations = []
    profiles: Dict[Tuple[float, float, float, float], SgpoProfile] = {}
    for (x1, y1), index, inducible in points:
        payoffs = stage2.payoffs(x1, y1)
        induced = stage1_base.shifted(payoffs)
        stage1_equilibria = nash_2x2(induced, tol)
        continuations.append(
            Continuation(
                point=(x1, y1),
                component_index=index,
                inducible=inducible,
                payoffs=payoffs,
                stage1_game=induced,
                stage1_equilibria=stage1_equilibria,
            )
        )
        stage2_component = stage2_equilibria[index]
        for component in stage1_equilibria:
            for x, y in component.vertices():
                key = (x, y, x1, y1)
                if key in profiles:
                    continue
                a1, b1 = stage1_base.payoffs(x, y)
                stage_payoffs = StagePayoffs(a1=a1, b1=b1, a2=payoffs[0], b2=payoffs[1])
                profiles[key] = SgpoProfile(
                    profile=StrategyProfile(p=x, q=y, p1=x1, q1=y1),
                    stage_payoffs=stage_payoffs,
                    totals=(stage_payoffs.a_total, stage_payoffs.b_total),
                    strictness=_strictness(component, stage2_component),
                    stage1_kind=component.kind,
                    stage2_kind=stage2_component.kind,
                )

    return SgpoReport(
        stage1_base_game=stage1_base,
        stage2_game=stage2,
        stage2_equilibria=stage2_equilibria,
        continuations=continuations,
        sgpo_profiles=[profiles[key] for key in sorted(profiles)],
        flags=flags,
    )


def sgpo_from_weights(w: RestrictedStateWeights, tol: float = DEFAULT_TOL) -> SgpoReport:
    return sgpo(restricted_state_from_weights(w), tol=tol)


def sgpo_kind(report: SgpoReport, tol: float = DEFAULT_TOL) -> Tuple[SgpoKind, Optional[SgpoProfile]]:
    """Classify an SGPO set and return the profile that decided the class."""
    for kind, target in (
            (SgpoKind.COOPERATE_THEN_DEFECT, (1.0, 1.0, 0.0, 0.0)),
            (SgpoKind.ALL_DEFECT, (0.0, 0.0, 0.0, 0.0)),
            (SgpoKind.ALL_COOPERATE, (1.0, 1.0, 1.0, 1.0)),
    ):
        entry = report.find(target, tol)
        if entry is not None:
            return kind, entry
    for entry in report.sgpo_profiles:
        if any(tol < v < 1.0 - tol for v in entry.profile.as_tuple()):
            return SgpoKind.MIXED, entry
    return SgpoKind.OTHER, report.sgpo_profiles[0] if report.sgpo_profiles else None


def _condition_class(value: float, tol: float) -> ConditionClass:
    if value < -tol:
        return ConditionClass.STRICT_HOLD
    if value <= tol:
        return ConditionClass.BOUNDARY_HOLD
    return ConditionClass.FAIL


def cooperation_conditions(w: RestrictedStateWeights, tol: float = DEFAULT_TOL) -> ConditionReport:
    """
    Conditions for cooperating in stage 1 while both defect in stage 2.

    cond1 ≤ 0 makes mutual defection a stage-2 equilibrium, cond2 ≤ 0 makes mutual cooperation
    an equilibrium of the induced stage-1 game.
    """
    w.check()
    cond1 = 2.0 * (w.w2 + w.w4) - (w.w1 + w.w3)
    cond2 = 2.0 * (w.w1 + w.w2) - (w.w3 + w.w4)
    return ConditionReport(
        cond1_value=cond1,
        cond2_value=cond2,
        x_sum=w.x_sum,
        y_sum=w.y_sum,
        cond1_class=_condition_class(cond1, tol),
        cond2_class=_condition_class(cond2, tol),
    )


def restricted_stage2_equilibria(w: RestrictedStateWeights, tol: float = DEFAULT_TOL) -> List[EquilibriumComponent]:
    """Stage-2 equilibria of the restricted family, read off from y_sum alone."""
    w.check()
    y = w.y_sum
    strict, weak = Strictness.STRICT, Strictness.WEAK

    def pure(x_: float, y_: float) -> EquilibriumComponent:
        return EquilibriumComponent(kind=ComponentKind.PURE_POINT, x=(x_, x_), y=(y_, y_), strictness=strict)

    def segment(x_: Interval, y_: Interval) -> EquilibriumComponent:
        return EquilibriumComponent(kind=ComponentKind.SEGMENT, x=x_, y=y_, strictness=weak)

    if y < 1.0 / 3.0 - tol:
        return [pure(0.0, 0.0)]
    if y > 2.0 / 3.0 + tol:
        return [pure(1.0, 1.0)]
    if abs(y - 1.0 / 3.0) <= tol:
        return [segment((0.0, 0.0), (0.0, 1.0)), segment((0.0, 1.0), (0.0, 0.0))]
    if abs(y - 2.0 / 3.0) <= tol:
        return [segment((0.0, 1.0), (1.0, 1.0)), segment((1.0, 1.0), (0.0, 1.0))]
    mixed = 3.0 * y - 1.0
    return [
        pure(0.0, 1.0),
        pure(1.0, 0.0),
        EquilibriumComponent(kind=ComponentKind.MIXED_POINT, x=(mixed, mixed), y=(mixed, mixed), strictness=weak),
    ]
