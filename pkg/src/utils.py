import logging
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from src._default import DIM
from src.errors import DomainError, ParseError
from src.formats import RestrictedStateWeights, StrategyProfile
from src.quantum import PureState, make_pure_state

logger = logging.getLogger(__name__)


def parse_real(text: str) -> float:
    """
    Parses a real number given in decimal (`0.5`, `-2e-3`) or fraction (`1/6`) form.

    Fractions are parsed exactly and converted to float at the end.

    Args:
        text (`str`): The token to parse.

    Returns:
        `float`: The parsed value.

    Raises:
        ParseError: If the token is not a finite real number.
    """
    cleaned = text.strip() if isinstance(text, str) else ""
    if not cleaned:
        raise ParseError(f"empty number in {text!r}")
    try:
        value = float(Fraction(cleaned))
    except (ValueError, ZeroDivisionError, OverflowError) as e:
        raise ParseError(f"malformed number {text!r}: {e}") from e
    return value


def parse_amplitude(text: str) -> complex:
    """Parses `re` or `re,im` into a complex amplitude."""
    parts = text.split(",")
    if len(parts) == 1:
        return complex(parse_real(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(parse_real(parts[0]), parse_real(parts[1]))
    raise ParseError(f"amplitude must be 're' or 're,im', got {text!r}")


def parse_amplitudes(tokens: Sequence[str]) -> List[complex]:
    amplitudes = [parse_amplitude(token) for token in tokens]
    if len(amplitudes) not in (4, DIM):
        raise ParseError(f"expected 4 restricted or {DIM} general amplitudes, got {len(amplitudes)}")
    return amplitudes


def parse_weights(tokens: Sequence[str]) -> RestrictedStateWeights:
    values = [parse_real(token) for token in tokens]
    if len(values) != 4:
        raise ParseError(f"expected 4 weights, got {len(values)}")
    return RestrictedStateWeights.from_sequence(values).check()


def parse_profile(text: str) -> StrategyProfile:
    """Parses `p,q,p1,q1` into a StrategyProfile."""
    values = [parse_real(token) for token in text.split(",")]
    if len(values) != 4:
        raise ParseError(f"profile must be 'p,q,p1,q1', got {text!r}")
    try:
        return StrategyProfile.from_sequence(values)
    except ValidationError as e:
        raise DomainError(f"profile probabilities must lie in [0, 1], got {text!r}") from e


def simplex_grid(resolution: int) -> Iterator[Tuple[float, float, float, float]]:
    """
    Yields every weight vector (i, j, k, l) / R with i + j + k + l = R in lexicographic order.

    Args:
        resolution (`int`): The grid resolution R.

    Returns:
        `Iterator[Tuple[float, float, float, float]]`: (R + 3 choose 3) weight vectors.
    """
    if resolution < 1:
        raise DomainError(f"resolution must be positive, got {resolution}")
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            for k in range(resolution + 1 - i - j):
                l = resolution - i - j - k
                yield i / resolution, j / resolution, k / resolution, l / resolution


def random_weights(rng: np.random.Generator) -> RestrictedStateWeights:
    """Uniform draw from the weight simplex."""
    return RestrictedStateWeights.from_sequence(rng.dirichlet(np.ones(4)))


def random_pure_state(rng: np.random.Generator) -> PureState:
    """Haar-like general 16-amplitude state from normalized complex Gaussians."""
    amplitudes = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
    return make_pure_state(amplitudes / np.linalg.norm(amplitudes))


def random_profile(rng: np.random.Generator) -> StrategyProfile:
    return StrategyProfile.from_sequence(rng.uniform(0.0, 1.0, size=4))


def random_phases(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * np.pi, size=size)
