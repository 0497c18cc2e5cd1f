import logging

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from src.equilibrium import (
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
from src.errors import DomainError
from src.formats import (
    BilinearGame,
    ComponentKind,
    ConditionClass,
    NashStatus,
    RestrictedStateWeights,
    SgpoKind,
    Strictness,
)
from src.quantum import restricted_state_from_weights
from src.utils import random_weights

from tests.conftest import CLASSICAL_WEIGHTS, INTERIOR_WEIGHTS, BOUNDARY_WEIGHTS

ZERO_GAME = BilinearGame(a=(0.0, 0.0, 0.0, 0.0), b=(0.0, 0.0, 0.0, 0.0))
# quarter steps keep ties exact so degenerate games come up often
coefficient = st.integers(min_value=-20, max_value=20).map(lambda k: k / 4)


def weights_with_y_sum(y):
    return RestrictedStateWeights(w1=(1.0 - y) / 2, w2=y / 2, w3=(1.0 - y) / 2, w4=y / 2)


def assert_same_components(found, expected, tol=1e-9):
    assert [c.kind for c in found] == [c.kind for c in expected]
    assert [c.strictness for c in found] == [c.strictness for c in expected]
    for left, right in zip(found, expected):
        assert np.allclose(left.x, right.x, atol=tol)
        assert np.allclose(left.y, right.y, atol=tol)


def assert_sound_and_complete(game, grid_n=100):
    components = nash_2x2(game)
    assert components
    for component in components:
        for x, y in component.sample(5):
            assert verify_ne(game, x, y, eps=1e-9) is not NashStatus.NOT_EQUILIBRIUM
    assert oracle_agreement(game, components, grid_n)


def test_stage_game_coefficients(classical_state, boundary_state):
    classical = stage_game(classical_state, 2)
    assert classical.a == (-1.0, -1.0, 4.0, 1.0)
    assert stage_game(classical_state, 1, continuation=(1.0, 1.0)).a[3] == 2.0

    boundary = stage_game(boundary_state, 2)
    assert np.allclose(boundary.a, (-1.0, 0.0, 5 / 3, 5 / 3), atol=1e-12)
    # B's coefficients mirror A's with the roles of x and y swapped
    assert np.allclose(boundary.b, (-1.0, 5 / 3, 0.0, 5 / 3), atol=1e-12)


def test_stage_game_rejects_bad_stage(classical_state):
    with pytest.raises(DomainError):
        stage_game(classical_state, 3)


def test_corner_matrix(classical_state):
    bimatrix = corner_matrix(stage_game(classical_state, 1))
    assert bimatrix.tolist() == [[[3.0, 3.0], [0.0, 5.0]], [[5.0, 0.0], [1.0, 1.0]]]
    assert np.count_nonzero(corner_matrix(ZERO_GAME)) == 0

    game = BilinearGame(a=(-1.0, -1.0, 4.0, 1.0), b=(0.0, 0.0, 0.0, 0.0))
    assert game.payoff_a(1, 1) == 3.0
    assert game.payoff_a(1, 0) == 0.0
    assert game.payoff_a(0, 1) == 5.0
    assert game.payoff_a(0, 0) == 1.0


def test_nash_classical_pd_is_unique_defection(classical_state):
    components = nash_2x2(stage_game(classical_state, 2))
    assert len(components) == 1
    assert components[0].kind is ComponentKind.PURE_POINT
    assert components[0].point == (0.0, 0.0)
    assert components[0].strictness is Strictness.STRICT


def test_nash_anti_coordination_between_thresholds():
    components = nash_2x2(stage_game(restricted_state_from_weights(weights_with_y_sum(0.5)), 2))
    assert [c.kind for c in components] == [
        ComponentKind.PURE_POINT,
        ComponentKind.PURE_POINT,
        ComponentKind.MIXED_POINT,
    ]
    assert components[0].point == (0.0, 1.0)
    assert components[1].point == (1.0, 0.0)
    assert np.allclose(components[2].point, (0.5, 0.5), atol=1e-9)
    assert [c.strictness for c in components] == [Strictness.STRICT, Strictness.STRICT, Strictness.WEAK]


def test_nash_boundary_segments(boundary_state):
    components = nash_2x2(stage_game(boundary_state, 2))
    assert [(c.kind, c.x, c.y) for c in components] == [
        (ComponentKind.SEGMENT, (0.0, 0.0), (0.0, 1.0)),
        (ComponentKind.SEGMENT, (0.0, 1.0), (0.0, 0.0)),
    ]
    assert all(c.strictness is Strictness.WEAK for c in components)


def test_nash_degenerate_games():
    assert [(c.kind, c.x, c.y) for c in nash_2x2(ZERO_GAME)] == [(ComponentKind.REGION, (0.0, 1.0), (0.0, 1.0))]

    # A indifferent, B strictly prefers y = 1
    game = BilinearGame(a=(0.0, 0.0, 0.0, 2.0), b=(0.0, 0.0, 1.0, 0.0))
    assert [(c.kind, c.x, c.y) for c in nash_2x2(game)] == [(ComponentKind.SEGMENT, (0.0, 1.0), (1.0, 1.0))]


def test_nash_matching_pennies_has_only_mixed_point():
    game = BilinearGame(a=(4.0, -2.0, -2.0, 1.0), b=(-4.0, 2.0, 2.0, -1.0))
    components = nash_2x2(game)
    assert len(components) == 1
    assert components[0].kind is ComponentKind.MIXED_POINT
    assert np.allclose(components[0].point, (0.5, 0.5))


def test_verify_ne_examples(classical_state, boundary_state):
    classical = stage_game(classical_state, 1)
    assert verify_ne(classical, 0.0, 0.0) is NashStatus.STRICT
    assert verify_ne(classical, 1.0, 1.0) is NashStatus.NOT_EQUILIBRIUM

    induced = stage_game(boundary_state, 1, continuation=(5 / 3, 5 / 3))
    assert verify_ne(induced, 1.0, 1.0, eps=1e-9) is NashStatus.WEAK

    with pytest.raises(DomainError):
        verify_ne(classical, 1.5, 0.0)


def test_grid_oracle_examples(classical_state):
    assert grid_oracle(stage_game(classical_state, 2), 10, 1e-9) == [(0.0, 0.0)]

    middle = stage_game(restricted_state_from_weights(weights_with_y_sum(0.5)), 2)
    assert (0.5, 0.5) in grid_oracle(middle, 10, 1e-9)

    points = grid_oracle(ZERO_GAME, 2, 0.0)
    assert len(points) == 9
    assert points == sorted(points)

    with pytest.raises(DomainError):
        grid_oracle(ZERO_GAME, 0)


def test_nash_agrees_with_grid_oracle_on_restricted_states(rng):
    for _ in range(200):
        state = restricted_state_from_weights(random_weights(rng))
        assert_sound_and_complete(stage_game(state, 2))
        assert_sound_and_complete(stage_game(state, 1))


@seed(3)
@settings(max_examples=200, deadline=None)
@given(a=st.tuples(coefficient, coefficient, coefficient, coefficient),
       b=st.tuples(coefficient, coefficient, coefficient, coefficient))
def test_nash_agrees_with_grid_oracle_on_bilinear_games(a, b):
    assert_sound_and_complete(BilinearGame(a=a, b=b), grid_n=40)


@pytest.mark.parametrize("y_sum", [0.0, 0.1, 0.3, 0.34, 0.5, 0.6, 0.66, 0.7, 0.9, 1.0])
def test_three_regime_stage2_structure(y_sum):
    w = weights_with_y_sum(y_sum)
    found = nash_2x2(stage_game(restricted_state_from_weights(w), 2))
    assert_same_components(found, restricted_stage2_equilibria(w))
    if y_sum < 1 / 3:
        assert [c.point for c in found] == [(0.0, 0.0)]
    elif y_sum > 2 / 3:
        assert [c.point for c in found] == [(1.0, 1.0)]
    else:
        assert np.allclose(found[-1].point, (3 * y_sum - 1, 3 * y_sum - 1), atol=1e-9)


@pytest.mark.parametrize(
    "weights",
    [BOUNDARY_WEIGHTS, RestrictedStateWeights(w1=1 / 6, w2=1 / 3, w3=1 / 6, w4=1 / 3)],
)
def test_restricted_stage2_boundaries_match_enumeration(weights):
    found = nash_2x2(stage_game(restricted_state_from_weights(weights), 2))
    expected = restricted_stage2_equilibria(weights)
    assert all(c.kind is ComponentKind.SEGMENT for c in expected)
    assert_same_components(found, expected)


def test_sgpo_classical_state(classical_state):
    report = sgpo(classical_state)
    assert report.is_unique
    assert len(report.sgpo_profiles) == 1
    entry = report.sgpo_profiles[0]
    assert entry.profile.as_tuple() == (0.0, 0.0, 0.0, 0.0)
    assert entry.stage_payoffs.as_tuple() == pytest.approx((1.0, 1.0, 1.0, 1.0), abs=1e-12)
    assert entry.totals == pytest.approx((2.0, 2.0), abs=1e-12)
    assert entry.strictness is Strictness.STRICT
    assert report.flags == []


def test_sgpo_boundary_example(boundary_state, caplog):
    with caplog.at_level(logging.INFO, logger="src.equilibrium"):
        report = sgpo(boundary_state)

    entry = report.find((1.0, 1.0, 0.0, 0.0))
    assert entry is not None
    assert entry.stage_payoffs.as_tuple() == pytest.approx((5 / 3,) * 4, abs=1e-12)
    assert entry.totals == pytest.approx((10 / 3, 10 / 3), abs=1e-12)
    assert entry.strictness is Strictness.WEAK
    assert entry.stage1_kind is ComponentKind.SEGMENT
    assert not report.is_unique

    assert [c.point for c in report.continuations] == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
    assert not any(c.inducible for c in report.continuations)
    assert len(report.flags) == 2
    assert "non-constant payoffs" in caplog.text

    profiles = [p.profile.as_tuple() for p in report.sgpo_profiles]
    assert profiles == sorted(profiles)
    assert len(profiles) == len(set(profiles))


def test_sgpo_strict_interior(interior_state):
    report = sgpo(interior_state)
    assert report.is_unique
    assert [p.profile.as_tuple() for p in report.sgpo_profiles] == [(1.0, 1.0, 0.0, 0.0)]
    assert report.sgpo_profiles[0].strictness is Strictness.STRICT


def test_sgpo_profiles_are_nash_in_both_stages(rng):
    for _ in range(50):
        report = sgpo_from_weights(random_weights(rng))
        for entry in report.sgpo_profiles:
            p, q, p1, q1 = entry.profile.as_tuple()
            assert verify_ne(report.stage2_game, p1, q1, eps=1e-9) is not NashStatus.NOT_EQUILIBRIUM
            induced = report.stage1_base_game.shifted(report.stage2_game.payoffs(p1, q1))
            assert verify_ne(induced, p, q, eps=1e-9) is not NashStatus.NOT_EQUILIBRIUM


@pytest.mark.parametrize(
    "weights, kind, profile",
    [
        (CLASSICAL_WEIGHTS, SgpoKind.ALL_DEFECT, (0.0, 0.0, 0.0, 0.0)),
        (BOUNDARY_WEIGHTS, SgpoKind.COOPERATE_THEN_DEFECT, (1.0, 1.0, 0.0, 0.0)),
        (INTERIOR_WEIGHTS, SgpoKind.COOPERATE_THEN_DEFECT, (1.0, 1.0, 0.0, 0.0)),
        (RestrictedStateWeights(w1=0.0, w2=0.0, w3=0.0, w4=1.0), SgpoKind.ALL_COOPERATE, (1.0, 1.0, 1.0, 1.0)),
    ],
)
def test_sgpo_kind(weights, kind, profile):
    found, entry = sgpo_kind(sgpo_from_weights(weights))
    assert found is kind
    assert entry.profile.as_tuple() == profile


def test_sgpo_kind_mixed_between_thresholds():
    # anti-coordination in both stages
    found, entry = sgpo_kind(sgpo_from_weights(RestrictedStateWeights(w1=0.25, w2=0.25, w3=0.25, w4=0.25)))
    assert found is SgpoKind.MIXED
    assert any(0.0 < v < 1.0 for v in entry.profile.as_tuple())


@pytest.mark.parametrize(
    "weights, cond1, cond2, classes",
    [
        (BOUNDARY_WEIGHTS, 0.0, 0.0, (ConditionClass.BOUNDARY_HOLD, ConditionClass.BOUNDARY_HOLD)),
        (CLASSICAL_WEIGHTS, -1.0, 2.0, (ConditionClass.STRICT_HOLD, ConditionClass.FAIL)),
        (INTERIOR_WEIGHTS, -0.1, -0.1, (ConditionClass.STRICT_HOLD, ConditionClass.STRICT_HOLD)),
    ],
)
def test_cooperation_conditions(weights, cond1, cond2, classes):
    report = cooperation_conditions(weights)
    assert report.cond1_value == pytest.approx(cond1, abs=1e-12)
    assert report.cond2_value == pytest.approx(cond2, abs=1e-12)
    assert (report.cond1_class, report.cond2_class) == classes


def test_conditions_agree_with_sgpo(rng):
    for _ in range(500):
        w = random_weights(rng)
        conditions = cooperation_conditions(w)
        report = sgpo_from_weights(w)
        entry = report.find((1.0, 1.0, 0.0, 0.0))
        assert conditions.both_hold == (entry is not None)
        strict_unique = report.is_unique and entry is not None and entry.strictness is Strictness.STRICT
        assert conditions.both_strict == strict_unique


def test_no_strict_cooperation_when_first_stage_sum_is_large(rng):
    draws = 0
    while draws < 10_000:
        w = random_weights(rng)
        draws += 1
        if w.x_sum <= 1 / 3:
            continue
        assert sgpo_from_weights(w).find((1.0, 1.0, 0.0, 0.0)) is None
