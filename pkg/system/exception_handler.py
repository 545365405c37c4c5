# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

from typing import Any, Dict, Optional


# --------------------------------------------------------------------------------
# Exceptions
# --------------------------------------------------------------------------------

class BaseError(Exception):
    """Base class for exceptions."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message)
        self.message = message
        self.details = kwargs

    def __str__(self):
        return f"{self.message}. Details: {self.details}" if self.details else self.message

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializable form used by the CLI error stream.

        Returns:
            dict: Error name, message and stringified details.
        """
        return {
            'error': type(self).__name__,
            'message': self.message,
            'details': {key: str(value) for key, value in self.details.items()},
        }


# --------------------------------------------------------------------------------
# Configuration Exceptions
# --------------------------------------------------------------------------------

class ConfigError(BaseError):
    """Base class for configuration-related exceptions."""

    def __init__(self, message: str, errors: Optional[dict] = None):
        super().__init__(message, errors=errors)


class ConfigNotFoundError(ConfigError):
    """Raised when the configuration file is not found."""

    def __init__(self, filepath: str):
        super().__init__(f"Configuration file '{filepath}' not found")
        self.details = {'filepath': filepath}


class InvalidConfigError(ConfigError):
    """Raised when the configuration file contains invalid data."""


# --------------------------------------------------------------------------------
# Usage Exceptions
# --------------------------------------------------------------------------------

class UsageError(BaseError):
    """Raised on malformed command lines or unreadable input files."""


# --------------------------------------------------------------------------------
# Domain Exceptions
# --------------------------------------------------------------------------------

class DomainError(BaseError):
    """Base class for all errors raised by the envelope computations."""


class NonPositiveAmount(DomainError):
    """Raised when an amount that must be strictly positive is not."""


class NegativeIndex(DomainError):
    """Raised when a prior index is negative."""


class InvalidPrior(DomainError):
    """Raised when a prior definition is malformed."""


class MassExceedsOne(InvalidPrior):
    """Raised when the total mass of a prior exceeds one (or diverges)."""


class ImproperPrior(DomainError):
    """Raised when an operation needs a proper prior and gets something else."""


class NonPositivePoint(DomainError):
    """Raised when a density is evaluated outside the positive reals."""


class UnattainableObservation(DomainError):
    """Raised when conditioning on an observation of probability zero."""


# --------------------------------------------------------------------------------
# Simulation Exceptions
# --------------------------------------------------------------------------------

class SimulationError(DomainError):
    """Base class for Monte Carlo errors."""


class ZeroTrials(SimulationError):
    """Raised when a run asks for fewer than one trial."""


class BudgetExceeded(SimulationError):
    """Raised when rejection sampling accepts too rarely to finish."""


# --------------------------------------------------------------------------------
# Randomized Strategy Exceptions
# --------------------------------------------------------------------------------

class EqualNumbers(DomainError):
    """Raised when the two envelope numbers coincide."""


class NonPositiveNumbers(DomainError):
    """Raised when an envelope number is not strictly positive."""


class PrecisionExhausted(DomainError):
    """Raised when the precision ladder cannot separate a threshold from the drawn bits."""


class InvalidProbe(DomainError):
    """Raised when a probe survival function violates its invariants."""


class InvalidStrategy(DomainError):
    """Raised when an arranger or player strategy is malformed."""


class SearchFailed(DomainError):
    """Raised when the shift adversary cannot find a pair."""
