# -*- coding: utf-8 -*-
# ! python3

import math
from fractions import Fraction

import gmpy2 as gmp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from system.amounts import deal, make_pair
from system.cover import (
    BitStream,
    Probe,
    estimate_win_rate,
    exact_win_probability,
    exponential_probe,
    lazy_compare,
    load_pairs,
    pareto_probe,
    play_cover,
)
from system.exception_handler import EqualNumbers, InvalidProbe, NonPositiveNumbers, PrecisionExhausted, UsageError
from system.posterior import Decision
from system.rng_streams import chunk_generator

COVER_ONE_TWO = 0.5 + (math.exp(-1) - math.exp(-2)) / 2


class _FixedWords:
    """Bit generator stand-in that replays fixed 64-bit words."""

    def __init__(self, *words: int) -> None:
        self._words = list(words)

    def random_raw(self) -> int:
        return self._words.pop(0)


class _FixedRng:
    def __init__(self, *words: int) -> None:
        self.bit_generator = _FixedWords(*words)


def _flat_probe() -> Probe:
    def survival(z):
        z = np.asarray(z, dtype=float)
        return np.where(z < 1, np.exp(-z), np.where(z <= 2, math.exp(-1), math.exp(-1) * np.exp(2 - z)))

    return Probe(survival=survival, sampler=lambda rng, size: rng.standard_exponential(size), label='flat')


# --------------------------------------------------------------------------------
# Probes
# --------------------------------------------------------------------------------

def test_probe_validation():
    with pytest.raises(InvalidProbe):
        Probe(survival=lambda z: np.ones_like(np.asarray(z, dtype=float)), sampler=None, label='constant')
    with pytest.raises(InvalidProbe):
        Probe(survival=lambda z: 0.5 * np.exp(-np.asarray(z)), sampler=None, label='half')
    with pytest.raises(InvalidProbe):
        Probe(survival=lambda z: np.minimum(1.0, 0.1 + np.asarray(z)), sampler=None, label='increasing')
    with pytest.raises(InvalidProbe):
        exponential_probe(0)


def test_builtin_probes_are_valid():
    assert exponential_probe().s(0) == 1
    assert pareto_probe().s(1) == 0.5


# --------------------------------------------------------------------------------
# Exact win probability
# --------------------------------------------------------------------------------

def test_exact_win_probability_closed_form():
    assert exact_win_probability(1, 2, exponential_probe()) == pytest.approx(COVER_ONE_TWO, rel=1e-15)
    assert exact_win_probability(1, 2, exponential_probe()) > 0.5


def test_flat_survival_gives_no_advantage():
    assert exact_win_probability(1, 2, _flat_probe()) == 0.5


def test_advantage_vanishes_for_large_pairs():
    assert exact_win_probability(50, 100, exponential_probe()) == pytest.approx(0.5, abs=1e-20)


def test_invalid_numbers():
    with pytest.raises(EqualNumbers):
        exact_win_probability(2, 2, exponential_probe())
    with pytest.raises(NonPositiveNumbers):
        exact_win_probability(0, 2, exponential_probe())


@pytest.mark.property
@settings(max_examples=300)
@given(st.floats(min_value=1e-3, max_value=20), st.floats(min_value=1e-3, max_value=20))
def test_win_probability_is_symmetric_and_favourable(a, b):
    """Property: swapping the numbers changes nothing, and the strategy beats a coin."""
    assume(abs(a - b) > 1e-2)
    for probe in (exponential_probe(), pareto_probe()):
        assert exact_win_probability(a, b, probe) == exact_win_probability(b, a, probe)
        assert exact_win_probability(a, b, probe) > 0.5


# --------------------------------------------------------------------------------
# One round
# --------------------------------------------------------------------------------

def test_play_cover_cases():
    pair = make_pair(1)
    assert play_cover(deal(pair, 1), exponential_probe(), z=1.5)[:2] == (Decision.SWITCH, True)
    assert play_cover(deal(pair, 0), exponential_probe(), z=1.5)[:2] == (Decision.KEEP, True)
    assert play_cover(deal(pair, 1), exponential_probe(), z=0.5)[:2] == (Decision.KEEP, False)


def test_play_cover_draws_z():
    play = play_cover(deal(make_pair(1), 1), exponential_probe(), rng=chunk_generator(3, 0))
    assert play.z > 0
    assert play.decision == (Decision.SWITCH if play.z > 1 else Decision.KEEP)


# --------------------------------------------------------------------------------
# Lazy comparison
# --------------------------------------------------------------------------------

def test_bitstream_is_replayable():
    first = BitStream.from_seed(5, index=2)
    second = BitStream.from_seed(5, index=2)
    assert first.take(128) == second.take(128)
    assert first.consumed == 128


def test_bits_are_most_significant_first():
    bits = BitStream(_FixedRng(1 << 63))
    assert [bits.next_bit() for _ in range(3)] == [1, 0, 0]


def test_early_decision():
    # U < 1/2 < exp(-0.1)
    verdict = lazy_compare(BitStream(_FixedRng(0)), 0.1)
    assert verdict.z_exceeds_a
    assert verdict.bits_used <= 2
    # U >= 1/2 > exp(-1)
    verdict = lazy_compare(BitStream(_FixedRng((1 << 64) - 1)), 1)
    assert not verdict.z_exceeds_a
    assert verdict.bits_used <= 2


def test_lazy_compare_matches_full_precision():
    rng = np.random.default_rng(2024)
    used = []
    for i in range(10 ** 4):
        a = float(rng.uniform(0.01, 6.0))
        verdict = lazy_compare(BitStream.from_seed(99, index=i), a)
        u_full = BitStream.from_seed(99, index=i).take(128)
        with gmp.local_context(gmp.context(), precision=512):
            expected = gmp.mpfr(u_full) / gmp.mpfr(2) ** 128 < gmp.exp(-gmp.mpfr(a))
        assert verdict.z_exceeds_a == expected
        assert verdict.bits_used <= 128
        used.append(verdict.bits_used)
    assert 1 <= np.mean(used) < 4


def test_precision_exhaustion(config_override):
    config_override('cover.precision_ladder', [8])
    with gmp.local_context(gmp.context(), precision=256):
        threshold = int(gmp.floor(gmp.exp(-gmp.mpfr(1)) * gmp.mpfr(2) ** 64))
    # The drawn bits follow exp(-1) itself, so 8 bits of precision cannot separate them
    with pytest.raises(PrecisionExhausted):
        lazy_compare(BitStream(_FixedRng(threshold)), Fraction(1))


# --------------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------------

def test_win_rate_on_one_two():
    (report,) = estimate_win_rate([(1, 2)], exponential_probe(), 200000, seed=42, lazy_trials=200)
    assert report.stats.within(COVER_ONE_TWO)
    assert report.stats.mean > 0.5
    assert report.exact_p == pytest.approx(COVER_ONE_TWO)
    assert report.strata['between']['win_rate'] == 1.0

    for name in ('below', 'above'):
        count, rate = report.strata[name]['count'], report.strata[name]['win_rate']
        assert abs(rate - 0.5) < 3 * math.sqrt(0.25 / count)
    assert sum(stratum['count'] for stratum in report.strata.values()) == 200000
    assert report.bits_mean is not None and report.bits_mean > 0


def test_large_pair_is_indistinguishable_from_a_coin():
    (report,) = estimate_win_rate([(100, 200)], exponential_probe(), 100000, seed=1, lazy_trials=0)
    assert report.stats.within(0.5)
    assert report.bits_mean is None


def test_pairs_have_independent_streams():
    alone = estimate_win_rate([(1, 2)], exponential_probe(), 50000, seed=3, lazy_trials=10)
    both = estimate_win_rate([(1, 2), (3, 5)], exponential_probe(), 50000, seed=3, lazy_trials=10)
    assert alone[0].to_dict() == both[0].to_dict()


def test_win_rate_threads_agree():
    one = estimate_win_rate([(1, 3)], pareto_probe(), 150000, seed=8, threads=1)
    four = estimate_win_rate([(1, 3)], pareto_probe(), 150000, seed=8, threads=4)
    assert one[0].to_dict() == four[0].to_dict()
    assert one[0].bits_mean is None
    assert one[0].stats.within(exact_win_probability(1, 3, pareto_probe()))


def test_load_pairs(tmp_path):
    path = tmp_path / 'pairs.csv'
    path.write_text('a,b\n1,2\n0.5,3.25\n')
    assert load_pairs(str(path)) == [(1.0, 2.0), (0.5, 3.25)]
    with pytest.raises(UsageError):
        load_pairs(str(tmp_path / 'missing.csv'))


@pytest.mark.slow
def test_win_rate_at_a_million_trials():
    (report,) = estimate_win_rate([(1, 2)], exponential_probe(), 10 ** 6, seed=42)
    assert report.stats.within(COVER_ONE_TWO)
    assert report.stats.mean > 0.5
