# -*- coding: utf-8 -*-
# ! python3

from fractions import Fraction
from typing import Any, Callable, Iterator

import pytest
from hypothesis import strategies as st

from config import config
from system.priors import DiscretePrior, discrete_prior


@pytest.fixture
def config_override() -> Iterator[Callable[[str, Any], None]]:
    """Sets config keys for one test and restores them afterwards."""
    saved = []

    def override(keys: str, value: Any) -> None:
        saved.append((keys, config.get(keys)))
        config.set(keys, value)

    yield override
    for keys, value in reversed(saved):
        config.set(keys, value)


@st.composite
def dyadic_priors(draw, max_levels: int = 12) -> DiscretePrior:
    """Proper finite priors on 1, 2, 4, ... with random positive rational weights."""
    exponents = draw(st.lists(st.integers(min_value=0, max_value=max_levels), min_size=1, max_size=8, unique=True))
    raw = draw(st.lists(st.integers(min_value=1, max_value=50), min_size=len(exponents), max_size=len(exponents)))
    total = sum(raw)
    return discrete_prior([(2 ** n, Fraction(w, total)) for n, w in zip(exponents, raw)], label='random-dyadic')


@st.composite
def prior_observations(draw) -> tuple[DiscretePrior, Fraction]:
    """A random finite prior and an amount Envelope A can show under it."""
    prior = draw(dyadic_priors())
    return prior, draw(st.sampled_from(prior.observations()))
