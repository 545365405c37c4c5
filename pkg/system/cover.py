# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Randomized switching with a private probe Z.

The player switches when Z exceeds the amount in Envelope A, which ends with
the larger envelope with probability 1/2 + P(Z between the numbers)/2.
"""

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, NamedTuple, Optional, Sequence, Union

import gmpy2 as gmp
import numpy as np

from config import config
from system.amounts import Assignment
from system.exception_handler import (
    EqualNumbers,
    InvalidProbe,
    NonPositiveNumbers,
    PrecisionExhausted,
    UsageError,
)
from system.logger import Logger
from system.posterior import Decision
from system.rng_streams import check_seed, chunk_generator, chunk_sizes, ordered_map
from system.simulation import RationalAccumulator, SummaryStats, _check_trials

Real = Union[float, int, Fraction]
Survival = Callable[[np.ndarray], np.ndarray]
Sampler = Callable[[np.random.Generator, int], np.ndarray]

VALIDATION_GRID = np.concatenate(([0.0], np.logspace(-6, 6, 481)))
VANISHING_TOLERANCE: float = 1e-6


# --------------------------------------------------------------------------------
# Probes
# --------------------------------------------------------------------------------

@dataclass(frozen=True)
class Probe:
    survival: Survival
    sampler: Sampler
    label: str
    # Set for exponential probes, which lazy_compare can realize bit by bit
    rate: Optional[float] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.survival(VALIDATION_GRID), dtype=float)
        if not math.isclose(values[0], 1.0, rel_tol=1e-12):
            raise InvalidProbe("Survival must equal 1 at zero", label=self.label, s0=float(values[0]))
        if np.any(np.diff(values) > 1e-15) or np.any(values < 0):
            raise InvalidProbe("Survival must be nonincreasing and nonnegative", label=self.label)
        if values[-1] > VANISHING_TOLERANCE:
            raise InvalidProbe("Survival must vanish at infinity", label=self.label, tail=float(values[-1]))

    def s(self, z: Real) -> float:
        return float(self.survival(np.float64(z)))


def exponential_probe(rate: float = 1.0) -> Probe:
    """Standard exponential by default: S(z) = exp(-z), realized as Z = -ln(U)."""
    rate = float(rate)
    if not rate > 0:
        raise InvalidProbe("Exponential probe rate must be strictly positive", rate=rate)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        # 1 - random() lies in (0, 1], so the logarithm is finite
        return -np.log(1.0 - rng.random(size)) / rate

    return Probe(survival=lambda z: np.exp(-rate * np.asarray(z, dtype=float)), sampler=sampler,
                 label=f'exponential-{rate:g}', rate=rate)


def pareto_probe() -> Probe:
    """Heavy-tailed probe S(z) = 1 / (1 + z), realized as Z = 1/U - 1."""

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        return 1.0 / (1.0 - rng.random(size)) - 1.0

    return Probe(survival=lambda z: 1.0 / (1.0 + np.asarray(z, dtype=float)), sampler=sampler, label='pareto')


PROBES: dict[str, Callable[[], Probe]] = {
    'exponential': exponential_probe,
    'pareto': pareto_probe,
}


def load_probe(name: str) -> Probe:
    if name not in PROBES:
        raise UsageError("Unknown probe", probe=name, probes=', '.join(sorted(PROBES)))
    return PROBES[name]()


# --------------------------------------------------------------------------------
# Exact win probability
# --------------------------------------------------------------------------------

def _check_numbers(a: Real, b: Real) -> tuple[float, float]:
    if not (a > 0 and b > 0):
        raise NonPositiveNumbers("Envelope numbers must be strictly positive", a=a, b=b)
    if a == b:
        raise EqualNumbers("Envelope numbers must differ", a=a)
    return float(min(a, b)), float(max(a, b))


def advantage(a: Real, b: Real, probe: Probe) -> float:
    """P(Z falls between the two numbers) / 2."""
    low, high = _check_numbers(a, b)
    return (probe.s(low) - probe.s(high)) / 2.0


def exact_win_probability(a: Real, b: Real, probe: Probe) -> float:
    """
    1/2 + (S(min) - S(max)) / 2.

    Raises:
        EqualNumbers: If a == b.
        NonPositiveNumbers: If either number is not positive.
    """
    return 0.5 + advantage(a, b, probe)


class CoverPlay(NamedTuple):
    decision: Decision
    won: bool
    z: float


def play_cover(assignment: Assignment, probe: Probe, rng: Optional[np.random.Generator] = None,
               z: Optional[float] = None) -> CoverPlay:
    """
    Plays one round: switch iff Z exceeds the content of Envelope A.

    Args:
        assignment (Assignment): The dealt envelopes.
        probe (Probe): Source of Z when z is not given.
        rng (Optional[np.random.Generator]): Generator for the probe.
        z (Optional[float]): A fixed probe value.

    Returns:
        CoverPlay: Decision, whether the final envelope is the larger one, and Z.
    """
    if z is None:
        if rng is None:
            raise ValueError("Either rng or z is required")
        z = float(probe.sampler(rng, 1)[0])
    decision = Decision.SWITCH if z > assignment.a else Decision.KEEP
    final = assignment.b if decision == Decision.SWITCH else assignment.a
    return CoverPlay(decision=decision, won=final == assignment.pair.larger, z=float(z))


# --------------------------------------------------------------------------------
# Lazy coin tossing
# --------------------------------------------------------------------------------

class BitStream:
    """Fair bits, most significant first, from a seeded generator."""

    def __init__(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._word: int = 0
        self._left: int = 0
        self.consumed: int = 0

    @classmethod
    def from_seed(cls, seed: int, index: int = 0, lane: int = 0) -> 'BitStream':
        return cls(chunk_generator(seed, index, lane))

    def next_bit(self) -> int:
        if self._left == 0:
            self._word = int(self._rng.bit_generator.random_raw())
            self._left = 64
        self._left -= 1
        self.consumed += 1
        return (self._word >> self._left) & 1

    def take(self, count: int) -> int:
        """The next `count` bits as an integer."""
        value = 0
        for _ in range(count):
            value = (value << 1) | self.next_bit()
        return value


class LazyVerdict(NamedTuple):
    z_exceeds_a: bool
    bits_used: int


def _precision_ladder() -> tuple[int, ...]:
    return tuple(int(p) for p in config.get('cover.precision_ladder', [64, 128, 256]))


@lru_cache(maxsize=4096)
def _threshold_bounds(a: Fraction, rate: Fraction, precision: int) -> tuple[Any, Any]:
    """Exact rationals lo <= exp(-rate * a) <= hi at the given working precision."""
    exponent = gmp.mpq(a.numerator, a.denominator) * gmp.mpq(rate.numerator, rate.denominator)
    with gmp.local_context(gmp.context(), precision=precision, round=gmp.RoundUp):
        exponent_hi = gmp.mpfr(exponent)
    with gmp.local_context(gmp.context(), precision=precision, round=gmp.RoundDown):
        exponent_lo = gmp.mpfr(exponent)
        lo = gmp.exp(-exponent_hi)
    with gmp.local_context(gmp.context(), precision=precision, round=gmp.RoundUp):
        hi = gmp.exp(-exponent_lo)
    return gmp.mpq(lo), gmp.mpq(hi)


def lazy_compare(bits: BitStream, a: Real, rate: Real = 1) -> LazyVerdict:
    """
    Decides whether Z = -ln(U) / rate exceeds a, tossing only as many coins as needed.

    Equivalent to U < exp(-rate * a). U is built bit by bit; after k bits it is
    known to lie in [u / 2**k, (u + 1) / 2**k), and the threshold is bracketed
    by interval arithmetic. The verdict is reached as soon as the two intervals
    separate; when U's interval falls inside the threshold bracket the working
    precision climbs the ladder (64, 128, 256 bits by default).

    Raises:
        NonPositiveNumbers: If a <= 0.
        PrecisionExhausted: If the highest precision still cannot separate.
    """
    if not a > 0:
        raise NonPositiveNumbers("The compared amount must be strictly positive", a=a)
    a, rate = Fraction(a), Fraction(rate)
    start = bits.consumed
    u, k = 0, 0

    for precision in _precision_ladder():
        lo, hi = _threshold_bounds(a, rate, precision)
        while True:
            scale = gmp.mpz(1) << k
            if gmp.mpq(u + 1, scale) <= lo:
                return LazyVerdict(True, bits.consumed - start)
            if gmp.mpq(u, scale) >= hi:
                return LazyVerdict(False, bits.consumed - start)
            if lo <= gmp.mpq(u, scale) and gmp.mpq(u + 1, scale) <= hi:
                break
            u, k = 2 * u + bits.next_bit(), k + 1

    raise PrecisionExhausted("Threshold not separated at the highest precision", a=a,
                             precision=_precision_ladder()[-1], bits=k)


# --------------------------------------------------------------------------------
# Monte Carlo win rate
# --------------------------------------------------------------------------------

STRATA: tuple[str, ...] = ('below', 'between', 'above')


@dataclass(frozen=True)
class WinRateReport:
    a: float
    b: float
    exact_p: float
    stats: SummaryStats
    strata: dict = field(default_factory=dict)
    bits_mean: Optional[float] = None

    def to_row(self) -> dict[str, Any]:
        return {
            'a': self.a,
            'b': self.b,
            'exact_p': self.exact_p,
            'empirical_p': self.stats.mean,
            'ci95': self.stats.ci95_halfwidth,
            'bits_mean': '' if self.bits_mean is None else self.bits_mean,
        }

    def to_dict(self) -> dict[str, Any]:
        return {**self.to_row(), 'stats': self.stats.to_dict(), 'strata': self.strata}


def _win_chunk(a: float, b: float, probe: Probe, seed: int, lane: int,
               chunk: tuple[int, int]) -> tuple[RationalAccumulator, dict[str, tuple[int, int]]]:
    index, size = chunk
    rng = chunk_generator(seed, index, lane)
    a_gets_first = rng.integers(0, 2, size=size, dtype=np.int64).astype(bool)
    z = probe.sampler(rng, size)

    first = np.where(a_gets_first, a, b)
    second = np.where(a_gets_first, b, a)
    final = np.where(z > first, second, first)
    won = (final == max(a, b)).astype(np.int64)

    low, high = min(a, b), max(a, b)
    masks = {'below': z < low, 'between': (z >= low) & (z < high), 'above': z >= high}
    strata = {name: (int(mask.sum()), int(won[mask].sum())) for name, mask in masks.items()}
    return RationalAccumulator.from_values(won, Fraction(1)), strata


def _bits_mean(a: float, b: float, probe: Probe, seed: int, lane: int, trials: int) -> Optional[float]:
    if probe.rate is None or trials <= 0:
        return None
    used = 0
    for t in range(trials):
        bits = BitStream.from_seed(seed, index=t, lane=lane)
        shown = a if bits.next_bit() else b
        used += lazy_compare(bits, shown, probe.rate).bits_used
    return used / trials


def estimate_win_rate(pairs: Sequence[tuple[Real, Real]], probe: Optional[Probe] = None, n_per_pair: int = 10 ** 6,
                      seed: int = 0, threads: Optional[int] = None,
                      lazy_trials: Optional[int] = None) -> list[WinRateReport]:
    """
    Monte Carlo win rate of the probe strategy, per pair.

    Each pair gets its own stream lane, so adding pairs never changes earlier
    results. Strata split the trials by where Z falls relative to the pair.

    Returns:
        list[WinRateReport]: One report per pair, in input order.
    """
    probe = probe or exponential_probe()
    n, seed = _check_trials(n_per_pair), check_seed(seed)
    lazy_trials = int(config.get('cover.lazy_trials', 1000) if lazy_trials is None else lazy_trials)
    logger = Logger()

    reports = []
    for j, (a, b) in enumerate(pairs):
        low, high = _check_numbers(a, b)
        a, b = float(a), float(b)
        lane = 2 * j + 1
        logger.info(f"Cover run pair=({a}, {b}) probe={probe.label} n={n} seed={seed}")
        parts = ordered_map(lambda chunk: _win_chunk(a, b, probe, seed, lane, chunk), chunk_sizes(n), threads)

        total = RationalAccumulator()
        counts = {name: [0, 0] for name in STRATA}
        for acc, strata in parts:
            total = total.merge(acc)
            for name, (count, wins) in strata.items():
                counts[name][0] += count
                counts[name][1] += wins

        exact_p = exact_win_probability(a, b, probe)
        echo = {'schema': 'cover', 'a': a, 'b': b, 'probe': probe.label}
        reports.append(WinRateReport(
            a=a,
            b=b,
            exact_p=exact_p,
            stats=SummaryStats.from_accumulator(total, seed, echo, 'win', {'expected': exact_p}),
            strata={name: {'count': count, 'win_rate': wins / count if count else None}
                    for name, (count, wins) in counts.items()},
            bits_mean=_bits_mean(a, b, probe, seed, lane + 1, lazy_trials),
        ))
    return reports


# --------------------------------------------------------------------------------
# Pair files
# --------------------------------------------------------------------------------

def load_pairs(path: str) -> list[tuple[float, float]]:
    """
    Reads a CSV with columns a,b (decimal).

    Raises:
        UsageError: If the file is missing or malformed.
    """
    try:
        with open(path, 'r', encoding='utf-8', newline='') as pairs_file:
            return [(float(row['a']), float(row['b'])) for row in csv.DictReader(pairs_file)]
    except FileNotFoundError:
        raise UsageError("Pairs file not found", path=path)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"Malformed pairs file: {e}", path=path)


def report_rows(reports: Iterable[WinRateReport]) -> list[dict[str, Any]]:
    return [report.to_row() for report in reports]
