import logging
from itertools import product
from typing import Callable, List, Sequence

import numpy as np
from tqdm import tqdm

from src._default import DEFAULT_PD_MATRIX, DEFAULT_VERIFY_KWARGS, EXACT_TOL
from src.equilibrium import sgpo
from src.formats import CheckResult, RestrictedStateWeights, StrategyProfile, VerificationReport
from src.payoffs import all_payoffs, classical_payoffs, closed_form_payoffs, corrupted_matrix
from src.quantum import make_restricted_state, restricted_state_from_weights
from src.utils import random_phases, random_profile, random_pure_state, random_weights

logger = logging.getLogger(__name__)

CLASSICAL_WEIGHTS = RestrictedStateWeights(w1=1.0, w2=0.0, w3=0.0, w4=0.0)


def _result(name: str, errors: Sequence[float], tolerance: float) -> CheckResult:
    max_error = float(max(errors)) if len(errors) else 0.0
    result = CheckResult(
        name=name,
        max_error=max_error,
        tolerance=tolerance,
        samples=len(errors),
        passed=bool(max_error <= tolerance),
    )
    logger.info("%s: max error %.3e (tol %.1e) %s", name, max_error, tolerance, "pass" if result.passed else "FAIL")
    return result


def check_classical_recovery(grid_points: int = 5) -> CheckResult:
    """Closed form at w = (1, 0, 0, 0) against the classical polynomials on a profile grid."""
    axis = np.linspace(0.0, 1.0, grid_points)
    errors = []
    for values in product(axis, repeat=4):
        profile = StrategyProfile.from_sequence(values)
        errors.append(closed_form_payoffs(CLASSICAL_WEIGHTS, profile).max_abs_diff(classical_payoffs(profile)))
    return _result("classical-recovery", errors, EXACT_TOL)


def check_oracle_equivalence(
        rng: np.random.Generator,
        samples: int,
        tol: float,
        matrix: Sequence = DEFAULT_PD_MATRIX,
        progress: bool = False,
) -> CheckResult:
    """Closed form against the density-matrix trace for restricted states with random phases."""
    errors = []
    for _ in tqdm(range(samples), desc="oracle-equivalence", disable=not progress):
        weights = random_weights(rng)
        state = restricted_state_from_weights(weights, phases=random_phases(rng, 4))
        profile = random_profile(rng)
        errors.append(closed_form_payoffs(weights, profile).max_abs_diff(all_payoffs(state, profile, matrix)))
    return _result("oracle-equivalence", errors, tol)


def check_stage_decoupling(rng: np.random.Generator, samples: int, shift: float = 0.3) -> CheckResult:
    """Stage-1 payoffs ignore (p1, q1) and stage-2 payoffs ignore (p, q), on general states."""
    errors = []
    for _ in range(samples):
        state = random_pure_state(rng)
        p, q, p1, q1 = rng.uniform(0.0, 1.0 - shift, size=4)
        base = all_payoffs(state, StrategyProfile(p=p, q=q, p1=p1, q1=q1))
        moved_second = all_payoffs(state, StrategyProfile(p=p, q=q, p1=p1 + shift, q1=q1 + shift))
        moved_first = all_payoffs(state, StrategyProfile(p=p + shift, q=q + shift, p1=p1, q1=q1))
        errors.append(max(abs(base.a1 - moved_second.a1), abs(base.b1 - moved_second.b1)))
        errors.append(max(abs(base.a2 - moved_first.a2), abs(base.b2 - moved_first.b2)))
    return _result("stage-decoupling", errors, EXACT_TOL)


def check_phase_invariance(rng: np.random.Generator, samples: int) -> CheckResult:
    errors = []
    for _ in range(samples):
        state = random_pure_state(rng)
        profile = random_profile(rng)
        rotated = state.with_phases(random_phases(rng, state.amplitudes.size))
        errors.append(all_payoffs(state, profile).max_abs_diff(all_payoffs(rotated, profile)))
    return _result("phase-invariance", errors, EXACT_TOL)


def check_classical_sgpo() -> CheckResult:
    """The classical state has the unique all-defect SGPO with totals (2, 2)."""
    report = sgpo(make_restricted_state(1.0, 0.0, 0.0, 0.0))
    entry = report.find((0.0, 0.0, 0.0, 0.0))
    if entry is None or not report.is_unique:
        return _result("classical-sgpo", [1.0], EXACT_TOL)
    return _result("classical-sgpo", [float(np.max(np.abs(np.subtract(entry.totals, (2.0, 2.0)))))], EXACT_TOL)


def run_verification(
        seed: int = DEFAULT_VERIFY_KWARGS["seed"],
        samples: int = DEFAULT_VERIFY_KWARGS["samples"],
        tol: float = DEFAULT_VERIFY_KWARGS["tol"],
        grid_points: int = DEFAULT_VERIFY_KWARGS["grid_points"],
        corrupt: bool = False,
        progress: bool = False,
) -> VerificationReport:
    """
    Runs the classical-limit and density-matrix consistency checks.

    Args:
        seed (`int`): Seed for the sampled checks.
        samples (`int`): Number of oracle-equivalence samples; the decoupling and phase checks
            use up to 100 general states.
        tol (`float`): Tolerance of the oracle-equivalence check.
        grid_points (`int`): Points per axis of the classical-recovery profile grid.
        corrupt (`bool`): Shift one payoff-matrix entry on the density-matrix path, a negative
            control under which oracle equivalence must fail.
        progress (`bool`): Show a tqdm progress bar.

    Returns:
        `VerificationReport`: One CheckResult per check.
    """
    rng = np.random.default_rng(seed)
    matrix = corrupted_matrix() if corrupt else DEFAULT_PD_MATRIX
    property_samples = min(samples, 100)
    checks: List[Callable[[], CheckResult]] = [
        lambda: check_classical_recovery(grid_points),
        lambda: check_oracle_equivalence(rng, samples, tol, matrix, progress),
        lambda: check_stage_decoupling(rng, property_samples),
        lambda: check_phase_invariance(rng, property_samples),
        check_classical_sgpo,
    ]
    return VerificationReport(seed=seed, corrupted=corrupt, checks=[check() for check in checks])
