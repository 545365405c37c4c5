# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Posterior splits and switching decisions given the amount a seen in Envelope A.

Discrete priors give exact `Fraction` results; continuous priors give floats
compared with a relative tolerance (`posterior.float_rtol`).
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Union

from config import config
from system.amounts import Amount, AmountLike, format_amount, positive_amount
from system.exception_handler import ImproperPrior, InvalidPrior, UnattainableObservation
from system.priors import (
    ContinuousPrior,
    DiscretePrior,
    ImproperUniformPowers,
    density_at,
    require_attainable,
    require_proper,
)
from system.utils import format_decimal

Number = Union[Fraction, float]
Prior = Union[DiscretePrior, ContinuousPrior]


class Decision(str, Enum):
    SWITCH = 'Switch'
    KEEP = 'Keep'
    INDIFFERENT = 'Indifferent'


@dataclass(frozen=True)
class PosteriorSplit:
    p_up: Number
    p_down: Number
    exact: bool

    def __post_init__(self) -> None:
        if not (0 <= self.p_up <= 1 and 0 <= self.p_down <= 1):
            raise ValueError(f"Split probabilities out of range: {self.p_up}, {self.p_down}")
        if self.exact and self.p_up + self.p_down != 1:
            raise ValueError(f"Exact split does not sum to one: {self.p_up} + {self.p_down}")

    def is_half_half(self) -> bool:
        return self.exact and self.p_up == self.p_down


def _float_rtol() -> float:
    return float(config.get('posterior.float_rtol', 1e-12))


def _compare(left: Number, right: Number, exact: bool) -> int:
    """Three-way comparison; floats within the relative tolerance count as equal."""
    if exact:
        return (left > right) - (left < right)
    if math.isclose(left, right, rel_tol=_float_rtol(), abs_tol=0.0):
        return 0
    return 1 if left > right else -1


def _check_prior(prior: Prior) -> None:
    if isinstance(prior, ImproperUniformPowers):
        raise ImproperPrior("Cannot condition on an improper prior", label=prior.label)
    if not isinstance(prior, (DiscretePrior, ContinuousPrior)):
        raise InvalidPrior("Posterior needs a discrete or continuous prior", prior=getattr(prior, 'label', prior))


def _decision(sign: int) -> Decision:
    if sign > 0:
        return Decision.SWITCH
    if sign < 0:
        return Decision.KEEP
    return Decision.INDIFFERENT


# --------------------------------------------------------------------------------
# Splits
# --------------------------------------------------------------------------------

def split_discrete(prior: DiscretePrior, a: AmountLike) -> PosteriorSplit:
    """
    P(B = 2a | A = a) and P(B = a/2 | A = a) under a discrete prior.

    p_up = p(a) / (p(a/2) + p(a)); an off-grid a/2 has mass zero, giving (1, 0).

    Raises:
        UnattainableObservation: If p(a) = p(a/2) = 0.
    """
    a = positive_amount(a, 'a')
    up, down = require_attainable(prior, a)
    total = up + down
    return PosteriorSplit(p_up=up / total, p_down=down / total, exact=True)


def split_continuous(prior: ContinuousPrior, a: float) -> PosteriorSplit:
    """
    Continuous split: p_up = 2f(a) / (f(a/2) + 2f(a)).

    Raises:
        UnattainableObservation: If f(a) = f(a/2) = 0.
    """
    f_a, f_half = density_at(prior, a), density_at(prior, float(a) / 2)
    total = f_half + 2.0 * f_a
    if total == 0:
        raise UnattainableObservation("Both densities vanish at this observation", a=a, prior=prior.label)
    p_up = 2.0 * f_a / total
    return PosteriorSplit(p_up=p_up, p_down=1.0 - p_up, exact=False)


def split(prior: Prior, a: Union[AmountLike, float]) -> PosteriorSplit:
    _check_prior(prior)
    if isinstance(prior, DiscretePrior):
        return split_discrete(prior, a)
    return split_continuous(prior, float(a))


def conditional_expectation(prior: Prior, a: Union[AmountLike, float]) -> Number:
    """
    E[B | A = a] = p_up * 2a + p_down * a/2.

    Exact `Fraction` for discrete priors, float for continuous ones.
    """
    posterior = split(prior, a)
    if posterior.exact:
        a = positive_amount(a, 'a')
        return posterior.p_up * 2 * a + posterior.p_down * a / 2
    a = float(a)
    return posterior.p_up * 2.0 * a + posterior.p_down * a / 2.0


# --------------------------------------------------------------------------------
# Decisions
# --------------------------------------------------------------------------------

def decide_expectation(prior: Prior, a: Union[AmountLike, float]) -> Decision:
    """
    Maximizes the expected amount held.

    Discrete: switch iff p(a/2) < 2p(a). Continuous: switch iff f(a/2) < 4f(a).
    """
    _check_prior(prior)
    if isinstance(prior, DiscretePrior):
        a = positive_amount(a, 'a')
        up, down = require_attainable(prior, a)
        return _decision(_compare(2 * up, down, exact=True))
    split_continuous(prior, float(a))
    f_a, f_half = density_at(prior, a), density_at(prior, float(a) / 2)
    return _decision(_compare(4.0 * f_a, f_half, exact=False))


def decide_probability_of_larger(prior: Prior, a: Union[AmountLike, float]) -> Decision:
    """
    Maximizes the chance of ending with the larger amount.

    Discrete: switch iff a/2 is off-grid or p(a/2) < p(a). Continuous: switch iff f(a/2) < 2f(a).
    """
    _check_prior(prior)
    if isinstance(prior, DiscretePrior):
        a = positive_amount(a, 'a')
        up, down = require_attainable(prior, a)
        return _decision(_compare(up, down, exact=True))
    split_continuous(prior, float(a))
    f_a, f_half = density_at(prior, a), density_at(prior, float(a) / 2)
    return _decision(_compare(2.0 * f_a, f_half, exact=False))


# --------------------------------------------------------------------------------
# Averages over observations (finite priors)
# --------------------------------------------------------------------------------

def observation_law(prior: DiscretePrior) -> dict[Amount, Fraction]:
    """
    P(A = a) = (p(a) + p(a/2)) / 2 for every attainable a.

    Raises:
        InvalidPrior: If the prior has an infinite tail.
    """
    require_proper(prior)
    if not prior.is_finite:
        raise InvalidPrior("Observation law is enumerated for finite-support priors only", prior=prior.label)
    return {a: (prior.mass_at(a) + prior.mass_at(a / 2)) / 2 for a in prior.observations()}


def expected_switch_gain(prior: DiscretePrior,
                         policy: Callable[[DiscretePrior, Amount], Decision] | None = None) -> Fraction:
    """
    Unconditional expected gain of a switching policy, exact.

    With no policy every observation switches, and the gain is exactly zero
    for every finite prior: seeing a large amount is rare but costly.
    """
    gain = Fraction(0)
    for a, probability in observation_law(prior).items():
        if policy is None or policy(prior, a) == Decision.SWITCH:
            gain += probability * (conditional_expectation(prior, a) - a)
    return gain


def describe(prior: Prior, a: Union[AmountLike, float]) -> dict:
    """
    Split, conditional expectation and both decisions as a serializable dict.

    Exact results are "num/den" strings, each with a `*_decimal` sidecar.
    """
    posterior = split(prior, a)
    expectation = conditional_expectation(prior, a)
    result = {
        'prior': prior.label,
        'exact': posterior.exact,
        'decide_expectation': decide_expectation(prior, a).value,
        'decide_probability_of_larger': decide_probability_of_larger(prior, a).value,
    }
    values = {'a': positive_amount(a, 'a') if posterior.exact else float(a), 'p_up': posterior.p_up,
              'p_down': posterior.p_down, 'conditional_expectation': expectation}
    for key, value in values.items():
        if posterior.exact:
            result[key] = format_amount(value)
            result[f'{key}_decimal'] = format_decimal(value)
        else:
            result[key] = float(value)
    return result
