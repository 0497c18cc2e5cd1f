class QuantumGameError(Exception):
    """Base class for every error raised by this package."""


class NormalizationError(QuantumGameError, ValueError):
    """Amplitudes or weights do not sum to one in modulus squared."""


class ShapeError(QuantumGameError, ValueError):
    """An array has the wrong number of entries."""


class DomainError(QuantumGameError, ValueError):
    """A probability, weight or coordinate lies outside its allowed range."""


class NumericalError(QuantumGameError, ArithmeticError):
    """A computed quantity violates a numerical invariant (e.g. complex payoff)."""


class ParseError(QuantumGameError, ValueError):
    """Malformed command-line amplitude, weight or profile input."""


class IoError(QuantumGameError, OSError):
    """Report output could not be written."""
