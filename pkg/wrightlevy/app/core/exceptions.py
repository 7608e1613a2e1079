"""
Exception hierarchy for wrightlevy
"""
from typing import Any, List, Optional


class WrightLevyError(Exception):
    """Base error for the package"""

    pass


class PoleError(WrightLevyError, ValueError):
    """Argument at (or within the pole threshold of) a gamma pole"""

    pass


class DomainError(WrightLevyError, ValueError):
    """Argument outside the domain of an operation"""

    pass


class PrecisionError(WrightLevyError):
    """No evaluation method reached the requested tolerance

    The best-effort result is attached as ``result`` so callers can still
    report a value together with its honest error estimate.
    """

    def __init__(self, message: str, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result


class QuadratureError(WrightLevyError):
    """Adaptive quadrature could not certify the tolerance"""

    pass


class BracketError(WrightLevyError):
    """Root bracket without a sign change"""

    pass


class ConsistencyError(WrightLevyError):
    """A computed quantity violates a structural property (e.g. negative density)"""

    pass


class ConvergenceError(WrightLevyError):
    """Iterative scheme failed its convergence diagnostic"""

    pass


class HorizonError(WrightLevyError):
    """Simulation horizon too short for the stopping rule"""

    pass


class SeriesPoleError(WrightLevyError):
    """Series representation hits a gamma pole; the caller should fall back"""

    pass


class ConfigError(WrightLevyError):
    """Invalid configuration or command parameters"""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        super().__init__(message)
        self.errors = errors or []


class OracleMismatchError(WrightLevyError):
    """A verification oracle disagreed with the closed form"""

    def __init__(self, message: str, results: Optional[List[Any]] = None):
        super().__init__(message)
        self.results = results or []
