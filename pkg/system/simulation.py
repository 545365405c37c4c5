# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Seeded Monte Carlo runs of the envelope-filling schemas.

Envelope contents are drawn as small integers times an exact unit
(`Fraction`), so every trial is exact and the per-chunk sums are exact
rationals; only the final SummaryStats are floats.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, NamedTuple, Optional, Union

import numpy as np

from config import config
from system.amounts import (
    NAIVE_SWITCH_FACTOR,
    Amount,
    AmountLike,
    format_amount,
    pair_conditional_expectation,
    positive_amount,
)
from system.exception_handler import BudgetExceeded, InvalidPrior, ZeroTrials
from system.logger import Logger
from system.priors import BroomePrior, DiscretePrior, broome_pmf, require_attainable, require_proper, sample_indices
from system.rng_streams import CHUNK_SIZE, check_seed, chunk_generator, chunk_sizes, ordered_map, resolve_threads

Z95: float = 1.96


# --------------------------------------------------------------------------------
# Schemas
# --------------------------------------------------------------------------------

class ChunkDraw(NamedTuple):
    a_units: np.ndarray
    b_units: np.ndarray
    unit: Fraction
    trial_index: np.ndarray


@dataclass(frozen=True)
class _AmountSchema:
    x: Amount
    name: str = field(default='', init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'x', positive_amount(self.x, 'x'))

    def echo(self) -> dict[str, Any]:
        return {'schema': self.name, 'x': format_amount(self.x)}


@dataclass(frozen=True)
class FixedPair(_AmountSchema):
    """The pair {x, 2x} is fixed; each trial deals it by a fair bit."""
    name: str = field(default='fixed', init=False)

    def draw(self, rng: np.random.Generator, size: int, offset: int) -> ChunkDraw:
        a_small = rng.integers(0, 2, size=size, dtype=np.int64)
        a_units = 2 - a_small
        return ChunkDraw(a_units, 3 - a_units, self.x, np.arange(offset, offset + size))


@dataclass(frozen=True)
class ConditionalFill(_AmountSchema):
    """Envelope A holds x; the other holds x/2 or 2x by a fair coin."""
    name: str = field(default='conditional', init=False)

    def draw(self, rng: np.random.Generator, size: int, offset: int) -> ChunkDraw:
        doubled = rng.integers(0, 2, size=size, dtype=np.int64)
        # unit x/2: A = 2, other = 1 or 4
        return ChunkDraw(np.full(size, 2, dtype=np.int64), 1 + 3 * doubled, self.x / 2,
                         np.arange(offset, offset + size))


@dataclass(frozen=True)
class AliBaba(_AmountSchema):
    """Ali's envelope is filled with x first; Baba's gets x/2 or 2x by a fair coin."""
    name: str = field(default='alibaba', init=False)

    def draw(self, rng: np.random.Generator, size: int, offset: int) -> ChunkDraw:
        doubled = rng.integers(0, 2, size=size, dtype=np.int64)
        return ChunkDraw(np.full(size, 2, dtype=np.int64), 1 + 3 * doubled, self.x / 2,
                         np.arange(offset, offset + size))


@dataclass(frozen=True)
class PriorDraw:
    """
    X is drawn from the prior, the pair is dealt, and only trials showing A = a are kept.
    """
    prior: DiscretePrior
    a: Amount
    name: str = field(default='prior', init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'a', positive_amount(self.a, 'a'))
        require_proper(self.prior)
        require_attainable(self.prior, self.a)

    def draw(self, rng: np.random.Generator, size: int, offset: int) -> ChunkDraw:
        amounts, indices = sample_indices(self.prior, rng, size)
        a_small = rng.integers(0, 2, size=size, dtype=np.int64).astype(bool)
        index_of = {amount: i for i, amount in enumerate(amounts)}
        as_smaller = index_of.get(self.a, -1)
        as_larger = index_of.get(self.a / 2, -1)
        kept = ((indices == as_smaller) & a_small) | ((indices == as_larger) & ~a_small)
        # unit a/2: A = 2, B = 4 when A holds the smaller amount, else 1
        b_units = np.where(a_small[kept], 4, 1).astype(np.int64)
        trial_index = np.arange(offset, offset + size)[kept]
        return ChunkDraw(np.full(b_units.size, 2, dtype=np.int64), b_units, self.a / 2, trial_index)

    def echo(self) -> dict[str, Any]:
        return {'schema': self.name, 'prior': self.prior.label, 'a': format_amount(self.a)}


Schema = Union[FixedPair, ConditionalFill, PriorDraw, AliBaba]


def make_schema(name: str, x: Optional[AmountLike] = None, prior: Optional[DiscretePrior] = None,
                a: Optional[AmountLike] = None) -> Schema:
    if name == 'fixed':
        return FixedPair(positive_amount(x, 'x'))
    if name == 'conditional':
        return ConditionalFill(positive_amount(x, 'x'))
    if name == 'alibaba':
        return AliBaba(positive_amount(x, 'x'))
    if name == 'prior':
        if not isinstance(prior, DiscretePrior):
            raise InvalidPrior("The prior schema needs a proper discrete prior", prior=getattr(prior, 'label', prior))
        return PriorDraw(prior, positive_amount(a, 'a'))
    raise ValueError(f"Unknown schema: {name}")


# --------------------------------------------------------------------------------
# Exact accumulation
# --------------------------------------------------------------------------------

Measure = Callable[[ChunkDraw], tuple[np.ndarray, Fraction]]

MEASURES: dict[str, Measure] = {
    'gain': lambda d: (d.b_units - d.a_units, d.unit),
    'content': lambda d: (d.a_units, d.unit),
    'other': lambda d: (d.b_units, d.unit),
    'combined': lambda d: (d.a_units + d.b_units, d.unit),
    # A / B is 2 or 1/2 whenever B is A/2 or 2A
    'ratio': lambda d: (np.where(d.b_units < d.a_units, 4, 1), Fraction(1, 2)),
}


@dataclass(frozen=True)
class RationalAccumulator:
    count: int = 0
    total: Fraction = Fraction(0)
    total_sq: Fraction = Fraction(0)

    @classmethod
    def from_values(cls, values: np.ndarray, unit: Fraction) -> 'RationalAccumulator':
        values = values.astype(np.int64, copy=False)
        return cls(
            count=int(values.size),
            total=unit * int(values.sum()),
            total_sq=unit * unit * int(np.square(values).sum()),
        )

    def merge(self, other: 'RationalAccumulator') -> 'RationalAccumulator':
        return RationalAccumulator(self.count + other.count, self.total + other.total,
                                   self.total_sq + other.total_sq)

    def exact_mean(self) -> Fraction:
        return self.total / self.count

    def exact_variance(self) -> Fraction:
        if self.count < 2:
            return Fraction(0)
        return (self.total_sq - self.total * self.total / self.count) / (self.count - 1)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sample_variance: float
    ci95_halfwidth: float
    seed: int
    schema_echo: dict
    measure: str
    exact_mean: Fraction
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_accumulator(cls, acc: RationalAccumulator, seed: int, schema_echo: dict, measure: str,
                         extra: Optional[dict] = None) -> 'SummaryStats':
        variance = float(acc.exact_variance())
        return cls(
            n=acc.count,
            mean=float(acc.exact_mean()),
            sample_variance=variance,
            ci95_halfwidth=Z95 * math.sqrt(variance / acc.count),
            seed=seed,
            schema_echo=dict(schema_echo),
            measure=measure,
            exact_mean=acc.exact_mean(),
            extra=dict(extra or {}),
        )

    def within(self, target: float, k: float = 3.0) -> bool:
        """True when the mean lies within k confidence half-widths of target."""
        return abs(self.mean - float(target)) <= k * self.ci95_halfwidth

    def to_dict(self) -> dict[str, Any]:
        return {
            'n': self.n,
            'mean': self.mean,
            'exact_mean': format_amount(self.exact_mean),
            'sample_variance': self.sample_variance,
            'ci95_halfwidth': self.ci95_halfwidth,
            'seed': self.seed,
            'measure': self.measure,
            'schema': self.schema_echo,
            **self.extra,
        }


def _check_trials(n: int) -> int:
    if n < 1:
        raise ZeroTrials("At least one trial is required", n=n)
    return int(n)


def _accumulate_chunk(schema: Schema, seed: int, chunk: tuple[int, int],
                      measures: tuple[str, ...]) -> dict[str, RationalAccumulator]:
    index, size = chunk
    draw = schema.draw(chunk_generator(seed, index), size, index * CHUNK_SIZE)
    result = {}
    for name in measures:
        values, unit = MEASURES[name](draw)
        result[name] = RationalAccumulator.from_values(values, unit)
    return result


def _run(schema: Schema, n: int, seed: int, measures: tuple[str, ...],
         threads: Optional[int] = None) -> dict[str, RationalAccumulator]:
    n, seed = _check_trials(n), check_seed(seed)
    Logger().info(f"Simulating {schema.echo()} n={n} seed={seed} measures={measures}")
    chunks = list(chunk_sizes(n))
    Logger().debug(f"Scheduling {len(chunks)} chunks of up to {CHUNK_SIZE} trials "
                   f"on {resolve_threads(threads)} threads")
    parts = ordered_map(lambda chunk: _accumulate_chunk(schema, seed, chunk, measures), chunks, threads)
    totals = {name: RationalAccumulator() for name in measures}
    for part in parts:
        totals = {name: totals[name].merge(part[name]) for name in measures}
    return totals


# --------------------------------------------------------------------------------
# Runners
# --------------------------------------------------------------------------------

def run_fixed_pair(x: AmountLike, n: int, seed: int = 0, measure: str = 'gain',
                   threads: Optional[int] = None) -> SummaryStats:
    """
    Deals the fixed pair {x, 2x} n times.

    Args:
        x (AmountLike): The smaller amount.
        n (int): Number of trials.
        seed (int): Run seed.
        measure (str): 'gain' for the swap gain b - a (true mean 0), 'content' for Envelope A (mean 3x/2).
        threads (Optional[int]): Worker threads; never changes the result.

    Returns:
        SummaryStats: Statistics of the chosen measure.
    """
    if measure not in ('gain', 'content'):
        raise ValueError(f"Unknown measure for the fixed pair: {measure}")
    schema = FixedPair(positive_amount(x, 'x'))
    totals = _run(schema, n, seed, (measure,), threads)
    expected = Fraction(0) if measure == 'gain' else pair_conditional_expectation(schema.x)
    return SummaryStats.from_accumulator(totals[measure], seed, schema.echo(), measure,
                                         {'expected': format_amount(expected)})


def run_conditional_fill(x: AmountLike, n: int, seed: int = 0, threads: Optional[int] = None) -> SummaryStats:
    """
    Fills the other envelope with x/2 or 2x; the other-envelope mean tends to 5x/4.
    """
    schema = ConditionalFill(positive_amount(x, 'x'))
    totals = _run(schema, n, seed, ('other',), threads)
    return SummaryStats.from_accumulator(totals['other'], seed, schema.echo(), 'other',
                                         {'expected': format_amount(NAIVE_SWITCH_FACTOR * schema.x)})


def _accept_chunk(schema: PriorDraw, seed: int, chunk_index: int) -> ChunkDraw:
    return schema.draw(chunk_generator(seed, chunk_index), CHUNK_SIZE, chunk_index * CHUNK_SIZE)


def _accepted_draws(schema: PriorDraw, n_target: int, seed: int,
                    threads: Optional[int] = None) -> Iterator[tuple[ChunkDraw, int]]:
    """
    Yields kept trials chunk by chunk, truncated at n_target, with the attempt count so far.

    Raises:
        BudgetExceeded: When acceptance stays below `simulation.budget_min_acceptance`
            after `simulation.budget_min_attempts` attempts.
    """
    min_attempts = int(config.get('simulation.budget_min_attempts', 10 ** 7))
    min_acceptance = float(config.get('simulation.budget_min_acceptance', 1e-6))
    wave = resolve_threads(threads)
    kept, attempts, next_chunk = 0, 0, 0

    while kept < n_target:
        chunk_indices = range(next_chunk, next_chunk + wave)
        Logger().debug(f"Scheduling rejection chunks {chunk_indices.start}..{chunk_indices.stop - 1}, "
                       f"kept {kept} so far")
        next_chunk += wave
        draws = ordered_map(lambda index: _accept_chunk(schema, seed, index), chunk_indices, threads)
        for index, draw in zip(chunk_indices, draws):
            need = n_target - kept
            if draw.b_units.size >= need:
                last = int(draw.trial_index[need - 1])
                attempts = last + 1
                kept = n_target
                yield ChunkDraw(draw.a_units[:need], draw.b_units[:need], draw.unit, draw.trial_index[:need]), attempts
                return
            kept += draw.b_units.size
            attempts = (index + 1) * CHUNK_SIZE
            yield draw, attempts

        if attempts >= min_attempts and kept / attempts < min_acceptance:
            Logger().error(f"Rejection budget exceeded: kept {kept} of {attempts} attempts")
            raise BudgetExceeded("Acceptance rate too low to reach the target", kept=kept, attempts=attempts,
                                 n_target=n_target)


def run_prior_conditioned(prior: DiscretePrior, a: AmountLike, n_target: int, seed: int = 0,
                          threads: Optional[int] = None) -> SummaryStats:
    """
    Rejection sampling of B given A = a.

    Draws X from the prior, deals the pair and keeps only trials with A = a
    until n_target are kept. The mean estimates E[B | A = a]; the acceptance
    rate estimates P(A = a) = (p(a) + p(a/2)) / 2.

    Raises:
        UnattainableObservation: If the prior cannot produce A = a.
        BudgetExceeded: If acceptance is too rare.
    """
    n_target, seed = _check_trials(n_target), check_seed(seed)
    schema = PriorDraw(prior, positive_amount(a, 'a'))
    Logger().info(f"Rejection run {schema.echo()} n_target={n_target} seed={seed}")

    total, attempts = RationalAccumulator(), 0
    for draw, attempts in _accepted_draws(schema, n_target, seed, threads):
        total = total.merge(RationalAccumulator.from_values(draw.b_units, draw.unit))

    expected_rate = (prior.mass_at(schema.a) + prior.mass_at(schema.a / 2)) / 2
    return SummaryStats.from_accumulator(total, seed, schema.echo(), 'other', {
        'attempts': attempts,
        'acceptance_rate': total.count / attempts,
        'expected_acceptance_rate': format_amount(expected_rate),
    })


@dataclass(frozen=True)
class AliBabaReport:
    baba_content: SummaryStats
    ali_over_baba: SummaryStats
    combined: SummaryStats
    asymmetry: list

    def to_dict(self) -> dict[str, Any]:
        return {
            'baba_content': self.baba_content.to_dict(),
            'ali_over_baba': self.ali_over_baba.to_dict(),
            'combined': self.combined.to_dict(),
            'asymmetry': self.asymmetry,
        }


def alibaba_asymmetry(x: AmountLike) -> list[dict[str, str]]:
    """
    Exact two-branch table: each side's 5/4 estimate versus the actual contents.

    The per-branch sum of the two estimates is 5/4 (Ali + Baba), while the
    actual contents average x + 5x/4 = 9x/4.
    """
    x = positive_amount(x, 'x')
    rows = []
    for branch, baba in (('half', x / 2), ('double', 2 * x)):
        rows.append({
            'branch': branch,
            'probability': '1/2',
            'ali': format_amount(x),
            'baba': format_amount(baba),
            'ali_plus_baba': format_amount(x + baba),
            'ali_estimate_of_baba': format_amount(NAIVE_SWITCH_FACTOR * x),
            'baba_estimate_of_ali': format_amount(NAIVE_SWITCH_FACTOR * baba),
            'sum_of_estimates': format_amount(NAIVE_SWITCH_FACTOR * (x + baba)),
        })
    rows.append({
        'branch': 'average',
        'probability': '1',
        'ali': format_amount(x),
        'baba': format_amount(NAIVE_SWITCH_FACTOR * x),
        'ali_plus_baba': format_amount(Fraction(9, 4) * x),
        'ali_estimate_of_baba': format_amount(NAIVE_SWITCH_FACTOR * x),
        'baba_estimate_of_ali': format_amount(Fraction(25, 16) * x),
        'sum_of_estimates': format_amount(Fraction(45, 16) * x),
    })
    return rows


def run_alibaba(x: AmountLike, n: int, seed: int = 0, threads: Optional[int] = None) -> AliBabaReport:
    """
    Ali holds x; Baba holds x/2 or 2x.

    Baba's content averages 5x/4 (Ali's estimate of what swapping brings him);
    Ali/Baba averages 5/4 (Baba's estimate of swapping, relative to his own amount).
    """
    schema = AliBaba(positive_amount(x, 'x'))
    totals = _run(schema, n, seed, ('other', 'ratio', 'combined'), threads)
    echo = schema.echo()
    return AliBabaReport(
        baba_content=SummaryStats.from_accumulator(totals['other'], seed, echo, 'baba_content',
                                                   {'expected': format_amount(NAIVE_SWITCH_FACTOR * schema.x)}),
        ali_over_baba=SummaryStats.from_accumulator(totals['ratio'], seed, echo, 'ali_over_baba',
                                                    {'expected': '5/4'}),
        combined=SummaryStats.from_accumulator(totals['combined'], seed, echo, 'ali_plus_baba',
                                               {'expected': format_amount(Fraction(9, 4) * schema.x)}),
        asymmetry=alibaba_asymmetry(schema.x),
    )


def run_schema(schema: Schema, n: int, seed: int = 0, threads: Optional[int] = None) -> Union[SummaryStats, AliBabaReport]:
    """Dispatches a schema to its runner."""
    if isinstance(schema, FixedPair):
        return run_fixed_pair(schema.x, n, seed, threads=threads)
    if isinstance(schema, ConditionalFill):
        return run_conditional_fill(schema.x, n, seed, threads=threads)
    if isinstance(schema, AliBaba):
        return run_alibaba(schema.x, n, seed, threads=threads)
    return run_prior_conditioned(schema.prior, schema.a, n, seed, threads=threads)


# --------------------------------------------------------------------------------
# Trial rows
# --------------------------------------------------------------------------------

def trial_rows(schema: Schema, n: int, seed: int = 0, limit: Optional[int] = None) -> list[dict[str, Any]]:
    """
    Replays the first trials of a run as rows (trial, a, b, gain).

    Rows are capped at `simulation.csv_row_cap`. For the prior schema the
    trial index is the attempt index of each kept trial.
    """
    n, seed = _check_trials(n), check_seed(seed)
    cap = int(config.get('simulation.csv_row_cap', 100000))
    limit = min(n, cap if limit is None else min(limit, cap))

    if isinstance(schema, PriorDraw):
        draws = (draw for draw, _ in _accepted_draws(schema, limit, seed, threads=1))
    else:
        # Full run-sized chunks, so the rows are exactly the run's first trials
        draws = (schema.draw(chunk_generator(seed, index), size, index * CHUNK_SIZE)
                 for index, size in chunk_sizes(n))

    rows = []
    for draw in draws:
        for trial, a_units, b_units in zip(draw.trial_index, draw.a_units, draw.b_units):
            a, b = draw.unit * int(a_units), draw.unit * int(b_units)
            rows.append({'trial': int(trial), 'a': format_amount(a), 'b': format_amount(b),
                         'gain': format_amount(b - a)})
        if len(rows) >= limit:
            break
    return rows[:limit]


# --------------------------------------------------------------------------------
# Infinite mean
# --------------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergingMean:
    rows: list
    infinite_mean: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            'infinite_mean': self.infinite_mean,
            'rows': [{'N': n, 'partial_mean': format_amount(m), 'decimal': float(m)} for n, m in self.rows],
        }


def _partial_mean_terms(prior: BroomePrior) -> Iterator[Fraction]:
    n = 0
    while True:
        # Expected content of either envelope given pair n, weighted by its mass
        yield broome_pmf(n) * pair_conditional_expectation(prior.support[0] * 2 ** n)
        n += 1


def diverging_mean_diagnostic(prior: BroomePrior, N: int) -> DivergingMean:
    """
    Partial means sum_{n<M} p(n) * 3/2 * 2**n for M = 1..N.

    Each increment is (1/2)(4/3)**n, so the sequence grows without bound.
    """
    if not isinstance(prior, BroomePrior):
        raise InvalidPrior("The diverging-mean diagnostic applies to the Broome prior", prior=prior.label)
    if N < 1:
        raise ZeroTrials("At least one partial sum is required", N=N)
    rows, partial = [], Fraction(0)
    for count, term in zip(range(1, N + 1), _partial_mean_terms(prior)):
        partial += term
        rows.append((count, partial))
    return DivergingMean(rows=rows)


def first_exceeding(prior: BroomePrior, bound: AmountLike, limit: int = 1000) -> Optional[int]:
    """Smallest N whose partial mean exceeds bound, or None within limit terms."""
    bound, partial = Fraction(bound), Fraction(0)
    for count, term in zip(range(1, limit + 1), _partial_mean_terms(prior)):
        partial += term
        if partial > bound:
            return count
    return None
