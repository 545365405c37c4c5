# -*- coding: utf-8 -*-
# ! python3

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from scipy import stats

from system.exception_handler import (
    ImproperPrior,
    InvalidPrior,
    MassExceedsOne,
    NegativeIndex,
    NonPositivePoint,
    UsageError,
)
from system.posterior import split_discrete
from system.priors import (
    BroomePrior,
    ContinuousPrior,
    DiscretePrior,
    ImproperUniformPowers,
    broome_pmf,
    check_normalization,
    check_proper,
    density_at,
    discrete_prior,
    exponential_prior,
    find_half_half_violation,
    half_half_violations,
    load_prior,
    point_mass,
    require_proper,
    sample_indices,
    sample_smaller,
    uniform_dyadic,
    uniform_prior,
)
from system.rng_streams import chunk_generator
from tests.conftest import dyadic_priors


# --------------------------------------------------------------------------------
# Broome
# --------------------------------------------------------------------------------

def test_broome_pmf_values():
    assert broome_pmf(0) == Fraction(1, 3)
    assert broome_pmf(1) == Fraction(2, 9)
    assert broome_pmf(2) == Fraction(4, 27)
    with pytest.raises(NegativeIndex):
        broome_pmf(-1)


def test_broome_partial_sums_are_exact():
    prior = BroomePrior()
    for terms in range(65):
        assert prior.partial_mass(terms) == 1 - Fraction(2, 3) ** terms


def test_broome_is_proper_with_unit_mass():
    check = check_proper(BroomePrior())
    assert check.proper
    assert check.total_mass == 1


def test_broome_mass_beyond_explicit_terms():
    prior = BroomePrior(terms=8)
    assert prior.mass_at(Fraction(2 ** 100)) == broome_pmf(100)
    assert prior.mass_at(Fraction(3)) == 0
    assert check_proper(prior).proper


def test_broome_witness_is_two():
    prior = BroomePrior()
    assert find_half_half_violation(prior) == 2
    assert split_discrete(prior, 2).p_up == Fraction(2, 5)


# --------------------------------------------------------------------------------
# Properness
# --------------------------------------------------------------------------------

def test_improper_uniform_is_rejected():
    with pytest.raises(MassExceedsOne):
        check_proper(ImproperUniformPowers())
    with pytest.raises(ImproperPrior):
        require_proper(ImproperUniformPowers())


def test_mass_above_one_is_rejected():
    with pytest.raises(MassExceedsOne):
        discrete_prior([(1, '2/3'), (2, '2/3')])


def test_sub_probability_is_not_proper():
    prior = discrete_prior([(1, '1/2')])
    assert not check_proper(prior).proper
    with pytest.raises(ImproperPrior):
        require_proper(prior)


def test_malformed_priors():
    with pytest.raises(InvalidPrior):
        discrete_prior([(1, '1/2'), (1, '1/2')])
    with pytest.raises(InvalidPrior):
        DiscretePrior(support=(Fraction(1),), weights=(Fraction(1, 2), Fraction(1, 2)))


# --------------------------------------------------------------------------------
# Half-half impossibility
# --------------------------------------------------------------------------------

def test_uniform_on_three_levels_witness_is_certain_loss():
    prior = uniform_dyadic(3)
    assert prior.observations() == [1, 2, 4, 8]
    assert half_half_violations(prior) == [1, 8]
    assert find_half_half_violation(prior) == 8


def test_point_mass_witness():
    # Both 1 and 2 violate; the larger observation is reported
    witness = find_half_half_violation(point_mass(1))
    assert witness in (1, 2)
    assert split_discrete(point_mass(1), witness).p_up != Fraction(1, 2)


def test_off_grid_support_is_rejected():
    with pytest.raises(InvalidPrior):
        half_half_violations(discrete_prior([(1, '1/2'), (3, '1/2')]))


@pytest.mark.property
@settings(max_examples=500, deadline=None)
@given(dyadic_priors())
def test_every_proper_prior_has_a_witness(prior):
    """Property: no proper prior gives a half-half split at every observation."""
    witness = find_half_half_violation(prior)
    assert witness in prior.observations()
    posterior = split_discrete(prior, witness)
    assert (posterior.p_up, posterior.p_down) != (Fraction(1, 2), Fraction(1, 2))


# --------------------------------------------------------------------------------
# Sampling
# --------------------------------------------------------------------------------

def test_broome_sampling_frequency_of_smallest_amount():
    n = 10 ** 6
    amounts, indices = sample_indices(BroomePrior(), chunk_generator(42, 0), n)
    assert amounts[0] == 1
    frequency = np.mean(indices == 0)
    sigma = math.sqrt(Fraction(1, 3) * Fraction(2, 3) / n)
    assert abs(frequency - 1 / 3) < 3 * sigma


def test_sampling_is_reproducible():
    prior = uniform_dyadic(4)
    first = sample_indices(prior, chunk_generator(7, 3), 1000)[1]
    second = sample_indices(prior, chunk_generator(7, 3), 1000)[1]
    np.testing.assert_array_equal(first, second)
    assert sample_smaller(prior, chunk_generator(7, 3)) in prior.support


def test_sampling_never_leaves_the_support():
    prior = discrete_prior([(1, '1/7'), (4, '6/7')])
    amounts, indices = sample_indices(prior, chunk_generator(1, 0), 50000)
    assert set(np.unique(indices)) <= {0, 1}
    assert amounts == [1, 4]


def test_point_mass_always_draws_its_amount():
    rng = chunk_generator(11, 0)
    assert {sample_smaller(point_mass(5), rng) for _ in range(100)} == {5}


def test_empirical_pmf_passes_chi_square():
    prior = discrete_prior([(1, '1/7'), (2, '2/7'), (4, '1/7'), (16, '3/7')])
    n = 200000
    amounts, indices = sample_indices(prior, chunk_generator(2024, 0), n)
    observed = np.bincount(indices, minlength=len(amounts))
    expected = np.array([float(prior.mass_at(a)) * n for a in amounts])
    statistic, _ = stats.chisquare(observed, expected)
    assert statistic < stats.chi2.ppf(0.999, df=len(amounts) - 1)


def test_broome_draws_pass_chi_square():
    n = 200000
    amounts, indices = sample_indices(BroomePrior(), chunk_generator(5, 1), n)
    # Bins n = 0..9 and the tail beyond
    bins = 10
    observed = np.bincount(np.minimum(indices, bins), minlength=bins + 1)
    probabilities = [float(broome_pmf(k)) for k in range(bins)]
    probabilities.append(1.0 - sum(probabilities))
    statistic, _ = stats.chisquare(observed, np.array(probabilities) * n)
    assert statistic < stats.chi2.ppf(0.999, df=bins)


def test_uniform_on_one_two_mean():
    prior = discrete_prior([(1, '1/2'), (2, '1/2')])
    n = 10 ** 6
    amounts, indices = sample_indices(prior, chunk_generator(42, 0), n)
    draws = np.array([float(a) for a in amounts])[indices]
    # X - 1 is Bernoulli(1/2)
    sigma = math.sqrt(0.25 / n)
    assert abs(draws.mean() - 1.5) < 3 * sigma


def test_improper_prior_cannot_be_sampled():
    with pytest.raises(ImproperPrior):
        sample_indices(ImproperUniformPowers(), chunk_generator(0, 0), 10)


# --------------------------------------------------------------------------------
# Continuous priors
# --------------------------------------------------------------------------------

def test_builtin_densities_integrate_to_one():
    assert check_normalization(exponential_prior()) < 1e-6
    assert check_normalization(exponential_prior(0.01)) < 1e-6
    assert check_normalization(uniform_prior(10)) < 1e-6


def test_unnormalized_density_is_rejected():
    doubled = ContinuousPrior(density=lambda x: 2 * np.exp(-x), label='doubled')
    with pytest.raises(InvalidPrior):
        check_normalization(doubled)


def test_survival_must_be_a_nonincreasing_probability():
    with pytest.raises(InvalidPrior):
        ContinuousPrior(density=lambda x: np.exp(-x), survival=lambda x: x, label='identity')
    with pytest.raises(InvalidPrior):
        ContinuousPrior(density=lambda x: np.exp(-x), survival=lambda x: 1 - np.exp(-x), label='increasing')
    assert exponential_prior().survival is not None
    assert uniform_prior(10).survival is not None


def test_density_outside_positive_reals():
    with pytest.raises(NonPositivePoint):
        density_at(exponential_prior(), 0)


# --------------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------------

def test_builtin_names():
    assert isinstance(load_prior('broome'), BroomePrior)
    assert load_prior('uniform124').support == (1, 2, 4)
    assert isinstance(load_prior('exponential'), ContinuousPrior)
    assert isinstance(load_prior('improper-uniform'), ImproperUniformPowers)


def test_prior_from_json_file(tmp_path):
    path = tmp_path / 'prior.json'
    path.write_text(json.dumps({'type': 'discrete', 'atoms': [{'x': '1', 'w': '1/4'}, {'x': '2', 'w': '3/4'}]}))
    prior = load_prior(str(path))
    assert prior.mass_at(Fraction(2)) == Fraction(3, 4)
    assert check_proper(prior).proper


def test_unknown_prior_sources():
    with pytest.raises(UsageError):
        load_prior('no-such-prior')
    with pytest.raises(InvalidPrior):
        load_prior({'type': 'mystery'})
    with pytest.raises(InvalidPrior):
        load_prior({'type': 'discrete', 'atoms': [{'x': '1'}]})
