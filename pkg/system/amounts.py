# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Exact envelope amounts, envelope pairs and the two baseline expectations.

Amounts are `fractions.Fraction` values: always in lowest terms, arbitrary
precision, and closed under halving and doubling.
"""

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

from system.exception_handler import NonPositiveAmount

Amount = Fraction
AmountLike = Union[Fraction, int, str]

HALF = Fraction(1, 2)
NAIVE_SWITCH_FACTOR = Fraction(5, 4)


def to_amount(value: AmountLike) -> Amount:
    """
    Converts an integer, a rational or a "num/den" string into an Amount.

    Args:
        value (AmountLike): The value to convert.

    Returns:
        Amount: The exact amount.

    Raises:
        NonPositiveAmount: If the value is negative.
        ValueError: If the string cannot be parsed.
    """
    if isinstance(value, bool):
        raise ValueError(f"Not an amount: {value!r}")
    if isinstance(value, (Rational, str)):
        amount = Fraction(value.strip() if isinstance(value, str) else value)
    else:
        raise ValueError(f"Not an exact amount: {value!r}")
    if amount < 0:
        raise NonPositiveAmount("Amounts cannot be negative", amount=amount)
    return amount


def positive_amount(value: AmountLike, name: str = 'amount') -> Amount:
    """
    Converts a value into an Amount that must be strictly positive.

    Args:
        value (AmountLike): The value to convert.
        name (str): Name used in the error message and details.

    Returns:
        Amount: The exact positive amount.

    Raises:
        NonPositiveAmount: If the amount is zero or negative.
    """
    amount = to_amount(value)
    if amount <= 0:
        raise NonPositiveAmount(f"The {name} must be strictly positive", **{name: amount})
    return amount


def format_amount(value: Fraction) -> str:
    """Renders a rational as "num/den", or "num" when the denominator is 1."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# --------------------------------------------------------------------------------
# Envelopes
# --------------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopePair:
    smaller: Amount
    larger: Amount

    def __post_init__(self) -> None:
        if self.smaller <= 0:
            raise NonPositiveAmount("The smaller amount must be strictly positive", smaller=self.smaller)
        if self.larger != 2 * self.smaller:
            raise ValueError(f"Larger amount {self.larger} is not twice {self.smaller}")

    def as_tuple(self) -> tuple[Amount, Amount]:
        return self.smaller, self.larger


@dataclass(frozen=True)
class Assignment:
    pair: EnvelopePair
    a_holds_smaller: bool

    @property
    def a(self) -> Amount:
        return self.pair.smaller if self.a_holds_smaller else self.pair.larger

    @property
    def b(self) -> Amount:
        return self.pair.larger if self.a_holds_smaller else self.pair.smaller

    @property
    def swap_gain(self) -> Amount:
        return self.b - self.a


def make_pair(x: AmountLike) -> EnvelopePair:
    """
    Builds the pair {x, 2x}.

    Args:
        x (AmountLike): The smaller amount.

    Returns:
        EnvelopePair: The pair (x, 2x).

    Raises:
        NonPositiveAmount: If x <= 0.
    """
    smaller = positive_amount(x, 'smaller')
    return EnvelopePair(smaller=smaller, larger=2 * smaller)


def deal(pair: EnvelopePair, fair_bit: int | bool) -> Assignment:
    """Hands envelope A the smaller amount when the bit is set."""
    return Assignment(pair=pair, a_holds_smaller=bool(fair_bit))


def naive_switch_estimate(a: AmountLike) -> Amount:
    """
    The "always switch" estimate 1/2 * 2a + 1/2 * a/2 = 5/4 * a.

    Raises:
        NonPositiveAmount: If a <= 0.
    """
    a = positive_amount(a, 'a')
    return HALF * (2 * a) + HALF * (a / 2)


def pair_conditional_expectation(x: AmountLike) -> Amount:
    """
    Expectation of either envelope given the pair (x, 2x): 3/2 * x.

    Raises:
        NonPositiveAmount: If x <= 0.
    """
    x = positive_amount(x, 'x')
    return HALF * x + HALF * (2 * x)
