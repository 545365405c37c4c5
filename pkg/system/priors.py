# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Probability laws for the smaller amount X.

Discrete priors are exact (`Fraction` weights); infinite families such as
Broome's carry an analytic tail instead of being truncated. Continuous
priors are float evaluation handles.
"""

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, Mapping, NamedTuple, Optional, Union

import numpy as np

from config import config
from system.amounts import Amount, AmountLike, format_amount, positive_amount, to_amount
from system.exception_handler import (
    ImproperPrior,
    InvalidPrior,
    MassExceedsOne,
    NegativeIndex,
    NonPositivePoint,
    UnattainableObservation,
    UsageError,
)

UNIFORM_BITS: int = 53
BROOME_EXPLICIT_TERMS: int = 64
BROOME_RATIO = Fraction(2, 3)


# --------------------------------------------------------------------------------
# Discrete priors
# --------------------------------------------------------------------------------

def dyadic_exponent(x: Fraction, base: Fraction) -> Optional[int]:
    """Returns n when x == base * 2**n for an integer n >= 0, else None."""
    if x <= 0:
        return None
    ratio = Fraction(x) / base
    if ratio.denominator != 1:
        return None
    numerator = ratio.numerator
    if numerator & (numerator - 1):
        return None
    return numerator.bit_length() - 1


@dataclass(frozen=True)
class DiscretePrior:
    support: tuple[Amount, ...]
    weights: tuple[Fraction, ...]
    tail_mass: Fraction = Fraction(0)
    base: Amount = Fraction(1)
    label: str = 'discrete'
    _index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.support) != len(self.weights):
            raise InvalidPrior("Support and weights differ in length",
                               support=len(self.support), weights=len(self.weights))
        if any(x <= 0 for x in self.support):
            raise InvalidPrior("Support amounts must be strictly positive", label=self.label)
        if len(set(self.support)) != len(self.support):
            raise InvalidPrior("Support amounts must be distinct", label=self.label)
        if any(w < 0 for w in self.weights) or self.tail_mass < 0:
            raise InvalidPrior("Weights must be nonnegative", label=self.label)
        if self.base <= 0:
            raise InvalidPrior("Grid base must be strictly positive", base=self.base)
        total = sum(self.weights, Fraction(0)) + self.tail_mass
        if total > 1:
            raise MassExceedsOne("Prior mass exceeds one", total_mass=format_amount(total))
        self._index.update(zip(self.support, self.weights))

    @property
    def is_finite(self) -> bool:
        return self.tail_mass == 0

    def mass_at(self, x: Fraction) -> Fraction:
        """Prior probability that the smaller amount equals x."""
        return self._index.get(Fraction(x), Fraction(0))

    def explicit_mass(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def total_mass(self) -> Fraction:
        return self.explicit_mass() + self.tail_mass

    def on_grid(self, x: Fraction) -> bool:
        return dyadic_exponent(Fraction(x), self.base) is not None

    def is_dyadic(self) -> bool:
        return all(self.on_grid(x) for x in self.support)

    def atoms(self) -> list[tuple[Amount, Fraction]]:
        """Atoms with positive mass, in support order."""
        return [(x, w) for x, w in zip(self.support, self.weights) if w > 0]

    def observations(self) -> list[Amount]:
        """Every amount Envelope A can show, smallest first (explicit support only)."""
        seen = {x for x, _ in self.atoms()} | {2 * x for x, _ in self.atoms()}
        return sorted(seen)

    def inverse_cdf_table(self) -> tuple[list[Amount], np.ndarray]:
        """
        Integer thresholds of the exact inverse CDF for a UNIFORM_BITS-bit uniform.

        For U = k / 2**UNIFORM_BITS, the sampled index is the number of thresholds <= k.

        Returns:
            tuple: (amounts, thresholds) aligned by index.
        """
        scale = 1 << UNIFORM_BITS
        amounts, thresholds, cumulative = [], [], Fraction(0)
        for x, w in zip(self.support, self.weights):
            cumulative += w
            amounts.append(x)
            thresholds.append(math.ceil(cumulative * scale))
        return amounts, np.asarray(thresholds, dtype=np.int64)

    def to_dict(self) -> dict[str, Any]:
        return {
            'type': 'discrete',
            'label': self.label,
            'atoms': [{'x': format_amount(x), 'w': format_amount(w)} for x, w in zip(self.support, self.weights)],
        }


def broome_pmf(n: int) -> Fraction:
    """
    Broome's mass on the smaller amount 2**n: 2**n / 3**(n+1).

    Raises:
        NegativeIndex: If n < 0.
    """
    if n < 0:
        raise NegativeIndex("Broome index must be nonnegative", n=n)
    return Fraction(2 ** n, 3 ** (n + 1))


@lru_cache(maxsize=None)
def _broome_cdf_table() -> tuple[list[Amount], np.ndarray]:
    # CDF(n) = 1 - (2/3)**(n+1); stop once the threshold saturates the uniform's range
    scale = 1 << UNIFORM_BITS
    amounts, thresholds, n = [], [], 0
    while True:
        threshold = math.ceil((1 - BROOME_RATIO ** (n + 1)) * scale)
        amounts.append(Fraction(2 ** n))
        thresholds.append(threshold)
        if threshold >= scale:
            break
        n += 1
    table = np.asarray(thresholds, dtype=np.int64)
    table.setflags(write=False)
    return amounts, table


class BroomePrior(DiscretePrior):
    """
    p(n) = (1/3)(2/3)**n on the smaller amount 2**n, n = 0, 1, 2, ...

    The first `terms` atoms are explicit; the remaining mass (2/3)**terms is
    kept as an exact tail and every atom stays reachable through `mass_at`.
    """

    def __init__(self, terms: int = BROOME_EXPLICIT_TERMS) -> None:
        if terms < 1:
            raise InvalidPrior("Broome prior needs at least one explicit term", terms=terms)
        super().__init__(
            support=tuple(Fraction(2 ** n) for n in range(terms)),
            weights=tuple(broome_pmf(n) for n in range(terms)),
            tail_mass=BROOME_RATIO ** terms,
            base=Fraction(1),
            label='broome',
        )

    def mass_at(self, x: Fraction) -> Fraction:
        n = dyadic_exponent(Fraction(x), self.base)
        return Fraction(0) if n is None else broome_pmf(n)

    def partial_mass(self, terms: int) -> Fraction:
        return sum((broome_pmf(n) for n in range(terms)), Fraction(0))

    def inverse_cdf_table(self) -> tuple[list[Amount], np.ndarray]:
        return _broome_cdf_table()

    def to_dict(self) -> dict[str, Any]:
        return {'type': 'broome'}


class ImproperUniformPowers:
    """
    "Equally likely to be any power of two": not normalizable.

    Exists only so that check_proper can reject it.
    """

    label: str = 'improper-uniform'
    base: Amount = Fraction(1)

    def to_dict(self) -> dict[str, Any]:
        return {'type': 'improper-uniform'}


PriorLike = Union[DiscretePrior, ImproperUniformPowers]


class ProperCheck(NamedTuple):
    proper: bool
    total_mass: Fraction


def check_proper(prior: PriorLike) -> ProperCheck:
    """
    Sums the explicit weights and the analytic tail exactly.

    Raises:
        MassExceedsOne: If the total mass exceeds one or diverges.
    """
    if isinstance(prior, ImproperUniformPowers):
        raise MassExceedsOne("Uniform mass over infinitely many amounts diverges", label=prior.label,
                             total_mass='inf')
    total = prior.total_mass()
    if total > 1:
        raise MassExceedsOne("Prior mass exceeds one", total_mass=format_amount(total))
    return ProperCheck(proper=total == 1, total_mass=total)


def require_proper(prior: PriorLike) -> DiscretePrior:
    if isinstance(prior, ImproperUniformPowers) or not check_proper(prior).proper:
        raise ImproperPrior("Operation requires a proper prior", label=getattr(prior, 'label', '?'))
    return prior


def point_mass(x: AmountLike) -> DiscretePrior:
    x = positive_amount(x, 'x')
    return DiscretePrior(support=(x,), weights=(Fraction(1),), base=x, label=f'point-{format_amount(x)}')


def uniform_dyadic(levels: int, base: AmountLike = 1) -> DiscretePrior:
    """Equal mass on base * 2**n for n < levels (a prior with a maximum sum)."""
    if levels < 1:
        raise InvalidPrior("Uniform dyadic prior needs at least one level", levels=levels)
    base = positive_amount(base, 'base')
    return DiscretePrior(
        support=tuple(base * 2 ** n for n in range(levels)),
        weights=tuple(Fraction(1, levels) for _ in range(levels)),
        base=base,
        label=f'uniform-dyadic-{levels}',
    )


def discrete_prior(atoms: Iterable[tuple[AmountLike, AmountLike]], base: AmountLike = 1,
                   label: str = 'discrete') -> DiscretePrior:
    """Builds a finite prior from (amount, weight) pairs, sorted by amount."""
    parsed = sorted((positive_amount(x, 'x'), to_amount(w)) for x, w in atoms)
    return DiscretePrior(
        support=tuple(x for x, _ in parsed),
        weights=tuple(w for _, w in parsed),
        base=positive_amount(base, 'base'),
        label=label,
    )


# --------------------------------------------------------------------------------
# The half-half impossibility
# --------------------------------------------------------------------------------

def half_half_violations(prior: DiscretePrior) -> list[Amount]:
    """
    Every attainable observation a whose split differs from (1/2, 1/2).

    The split is (1/2, 1/2) exactly when p(a) == p(a/2) > 0.
    """
    require_proper(prior)
    if not prior.is_dyadic():
        raise InvalidPrior("Support must lie on the dyadic grid base * 2**n", base=prior.base)
    return [a for a in prior.observations() if prior.mass_at(a) != prior.mass_at(a / 2)]


def find_half_half_violation(prior: DiscretePrior) -> Amount:
    """
    Finds an observation where the posterior is not half-half.

    Prefers the smallest observation where both pairs remain possible; otherwise
    returns the largest attainable observation, which can only be the larger
    amount of its pair.

    Raises:
        ImproperPrior: If the prior is not proper.
    """
    violations = half_half_violations(prior)
    interior = [a for a in violations if prior.mass_at(a) > 0 and prior.mass_at(a / 2) > 0]
    if interior:
        return interior[0]
    if not violations:
        # Unreachable for proper priors: the lowest observation always has p(a/2) = 0
        raise ImproperPrior("No violation found; the prior cannot be proper", label=prior.label)
    return violations[-1]


# --------------------------------------------------------------------------------
# Sampling
# --------------------------------------------------------------------------------

def sample_indices(prior: DiscretePrior, rng: np.random.Generator, size: int) -> tuple[list[Amount], np.ndarray]:
    """
    Draws `size` smaller-amount indices by exact inverse CDF.

    Returns:
        tuple: (amounts, indices) where amounts[indices[i]] is the i-th draw.
    """
    require_proper(prior)
    amounts, thresholds = prior.inverse_cdf_table()
    uniforms = rng.integers(0, 1 << UNIFORM_BITS, size=size, dtype=np.int64)
    return amounts, np.searchsorted(thresholds, uniforms, side='right')


def sample_smaller(prior: DiscretePrior, rng: np.random.Generator) -> Amount:
    """Draws one smaller amount X from a proper prior."""
    amounts, indices = sample_indices(prior, rng, 1)
    return amounts[int(indices[0])]


# --------------------------------------------------------------------------------
# Continuous priors
# --------------------------------------------------------------------------------

DensityFunction = Callable[[np.ndarray], np.ndarray]

# Relative to the prior scale
SURVIVAL_GRID = np.logspace(-6, 6, 481)


@dataclass(frozen=True)
class ContinuousPrior:
    density: DensityFunction
    label: str
    survival: Optional[DensityFunction] = None
    breakpoints: tuple[float, ...] = ()
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.survival is None:
            return
        grid = self.scale * SURVIVAL_GRID
        values = np.asarray(self.survival(grid), dtype=float)
        if np.any(np.isnan(values)) or np.any(values < 0) or np.any(values > 1):
            raise InvalidPrior("Survival must take values in [0, 1]", label=self.label)
        if np.any(np.diff(values) > 1e-15):
            raise InvalidPrior("Survival must be nonincreasing", label=self.label)

    def to_dict(self) -> dict[str, Any]:
        return {'type': 'continuous', 'label': self.label}


def density_at(prior: ContinuousPrior, x: float) -> float:
    """
    Evaluates f(x).

    Raises:
        NonPositivePoint: If x <= 0.
        InvalidPrior: If the density is negative there.
    """
    x = float(x)
    if not x > 0:
        raise NonPositivePoint("Densities are evaluated on positive reals only", x=x)
    value = float(prior.density(np.float64(x)))
    if value < 0 or math.isnan(value):
        raise InvalidPrior("Density must be nonnegative", label=prior.label, x=x, value=value)
    return value


def exponential_prior(rate: float = 1.0) -> ContinuousPrior:
    rate = float(rate)
    if not rate > 0:
        raise InvalidPrior("Exponential rate must be strictly positive", rate=rate)
    return ContinuousPrior(
        density=lambda x: rate * np.exp(-rate * x),
        survival=lambda x: np.exp(-rate * x),
        label=f'exponential-{rate:g}',
        scale=1.0 / rate,
    )


def uniform_prior(upper: float) -> ContinuousPrior:
    upper = float(upper)
    if not upper > 0:
        raise InvalidPrior("Uniform upper bound must be strictly positive", upper=upper)
    return ContinuousPrior(
        density=lambda x: np.where((x > 0) & (x <= upper), 1.0 / upper, 0.0),
        survival=lambda x: np.clip(1.0 - np.asarray(x) / upper, 0.0, 1.0),
        label=f'uniform-{upper:g}',
        breakpoints=(upper,),
        scale=upper,
    )


def check_normalization(prior: ContinuousPrior, rtol: Optional[float] = None) -> float:
    """
    Spot-checks that the density integrates to one.

    Trapezoid rule in log-space between scale*1e-12 and scale*1e4, split at the
    declared breakpoints so that jumps do not straddle a grid cell.

    Returns:
        float: The relative error of the numerical integral.

    Raises:
        InvalidPrior: If the relative error exceeds rtol.
    """
    rtol = float(config.get('priors.normalization_rtol', 1e-6) if rtol is None else rtol)
    points = int(config.get('priors.grid_points', 20001))
    low, high = math.log(prior.scale * 1e-12), math.log(prior.scale * 1e4)
    edges = [low] + sorted(math.log(b) for b in prior.breakpoints if low < math.log(b) < high) + [high]

    total = 0.0
    for start, stop in zip(edges[:-1], edges[1:]):
        t = np.linspace(start, stop, points)
        x = np.exp(t)
        # Stay strictly inside the segment so one-sided limits are used at jumps
        x[0] = np.nextafter(x[0], np.inf)
        x[-1] = np.nextafter(x[-1], 0.0)
        total += float(np.trapz(prior.density(x) * x, t))

    error = abs(total - 1.0)
    if error > rtol:
        raise InvalidPrior("Density does not integrate to one", label=prior.label, integral=total)
    return error


# --------------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------------

AnyPrior = Union[DiscretePrior, ImproperUniformPowers, ContinuousPrior]

BUILTIN_PRIORS: dict[str, Mapping[str, Any]] = {
    'broome': {'type': 'broome'},
    'exponential': {'type': 'exponential', 'rate': 1.0},
    'uniform124': {'type': 'uniform-dyadic', 'levels': 3},
    'improper-uniform': {'type': 'improper-uniform'},
}


def prior_from_dict(data: Mapping[str, Any]) -> AnyPrior:
    """
    Builds a prior from its JSON form.

    Raises:
        InvalidPrior: On unknown types or malformed atoms.
    """
    kind = data.get('type') if isinstance(data, Mapping) else None
    try:
        if kind == 'discrete':
            atoms = [(atom['x'], atom['w']) for atom in data['atoms']]
            return discrete_prior(atoms, base=data.get('base', 1), label=data.get('label', 'discrete'))
        if kind == 'broome':
            return BroomePrior()
        if kind == 'uniform-dyadic':
            return uniform_dyadic(int(data['levels']), base=data.get('base', 1))
        if kind == 'exponential':
            return exponential_prior(float(data.get('rate', 1.0)))
        if kind == 'uniform':
            return uniform_prior(float(data['upper']))
        if kind == 'improper-uniform':
            return ImproperUniformPowers()
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InvalidPrior(f"Malformed prior definition: {e}", type=kind)
    raise InvalidPrior("Unknown prior type", type=kind)


def load_prior(source: Union[str, Mapping[str, Any]]) -> AnyPrior:
    """
    Loads a prior from a dict, a JSON file path or a built-in name.

    Raises:
        UsageError: If the source is neither a readable file nor a known name.
    """
    if isinstance(source, Mapping):
        return prior_from_dict(source)
    if os.path.isfile(source):
        try:
            with open(source, 'r', encoding='utf-8') as prior_file:
                return prior_from_dict(json.load(prior_file))
        except json.JSONDecodeError as e:
            raise UsageError(f"Invalid JSON in prior file: {e}", path=source)
    if source in BUILTIN_PRIORS:
        return prior_from_dict(BUILTIN_PRIORS[source])
    raise UsageError("Unknown prior: not a file and not a built-in name", prior=source,
                     builtins=', '.join(sorted(BUILTIN_PRIORS)))


def require_attainable(prior: DiscretePrior, a: Fraction) -> tuple[Fraction, Fraction]:
    """
    Masses of the two pairs that can show a in Envelope A.

    Args:
        prior (DiscretePrior): A proper discrete prior.
        a (Fraction): The observed amount.

    Returns:
        tuple[Fraction, Fraction]: (p(a), p(a/2)), the masses of {a, 2a} and {a/2, a}.

    Raises:
        UnattainableObservation: If both masses vanish.
    """
    up, down = prior.mass_at(a), prior.mass_at(a / 2)
    if up == 0 and down == 0:
        raise UnattainableObservation("Envelope A cannot show this amount under the prior",
                                      a=format_amount(a), prior=prior.label)
    return up, down
