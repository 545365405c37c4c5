# -*- coding: utf-8 -*-
# ! python3

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from system.amounts import make_pair
from system.cover import advantage, exact_win_probability, exponential_probe, pareto_probe
from system.exception_handler import InvalidStrategy, NonPositiveAmount, SearchFailed, UsageError
from system.game import (
    ArrangerStrategy,
    PlayerStrategy,
    adversary_report,
    cover_vs_arranger,
    exact_win_value,
    load_arranger,
    load_player,
    shift_adversary,
)


@st.composite
def arrangers(draw) -> ArrangerStrategy:
    smaller = draw(st.lists(st.fractions(min_value=Fraction(1, 100), max_value=1000), min_size=1, max_size=6,
                            unique=True))
    raw = draw(st.lists(st.integers(min_value=1, max_value=20), min_size=len(smaller), max_size=len(smaller)))
    return ArrangerStrategy.from_atoms((x, Fraction(w, sum(raw))) for x, w in zip(smaller, raw))


def _uniform_one_two_four() -> ArrangerStrategy:
    return ArrangerStrategy.from_atoms([(1, '1/2'), (2, '1/2')])


# --------------------------------------------------------------------------------
# Exact win value
# --------------------------------------------------------------------------------

def test_always_switch_on_a_point_mass():
    assert exact_win_value(ArrangerStrategy.point_mass(1), PlayerStrategy.always_switch()) == Fraction(1, 2)


def test_informed_player_on_a_point_mass():
    player = PlayerStrategy(q={Fraction(1): Fraction(1), Fraction(2): Fraction(0)})
    assert exact_win_value(ArrangerStrategy.point_mass(1), player) == 1


def test_four_deal_enumeration():
    arranger = _uniform_one_two_four()
    switch_on_two = PlayerStrategy(q={Fraction(2): Fraction(1)})
    assert exact_win_value(arranger, switch_on_two) == Fraction(1, 2)
    switch_on_one_and_two = PlayerStrategy(q={Fraction(1): Fraction(1), Fraction(2): Fraction(1)})
    assert exact_win_value(arranger, switch_on_one_and_two) == Fraction(3, 4)


def test_threshold_player():
    arranger = _uniform_one_two_four()
    player = PlayerStrategy.threshold(3, arranger.observations())
    assert exact_win_value(arranger, player) == Fraction(3, 4)


def test_value_is_affine_in_one_switch_probability():
    arranger = _uniform_one_two_four()
    values = [exact_win_value(arranger, PlayerStrategy(q={Fraction(1): q})) for q in (0, Fraction(1, 2), 1)]
    assert values == [Fraction(1, 2), Fraction(5, 8), Fraction(3, 4)]


@pytest.mark.property
@settings(max_examples=100, deadline=None)
@given(arrangers())
def test_blind_players_win_half(arranger):
    """Property: ignoring the amount seen gives exactly 1/2 against any arranger."""
    assert exact_win_value(arranger, PlayerStrategy.always_switch()) == Fraction(1, 2)
    assert exact_win_value(arranger, PlayerStrategy.never_switch()) == Fraction(1, 2)


# --------------------------------------------------------------------------------
# Cover against arrangers
# --------------------------------------------------------------------------------

def test_cover_value_on_a_point_mass():
    probe = exponential_probe()
    assert cover_vs_arranger(ArrangerStrategy.point_mass(1), probe) == pytest.approx(
        exact_win_probability(1, 2, probe), rel=1e-15)


def test_cover_value_is_a_weighted_average():
    probe = exponential_probe()
    arranger = ArrangerStrategy.from_atoms([(1, '1/2'), (10, '1/2')])
    expected = (exact_win_probability(1, 2, probe) + exact_win_probability(10, 20, probe)) / 2
    assert cover_vs_arranger(arranger, probe) == pytest.approx(expected, rel=1e-15)


def test_cover_value_decays_with_scale():
    probe = exponential_probe()
    values = [cover_vs_arranger(ArrangerStrategy.point_mass(k), probe) for k in (1, 10, 100)]
    assert values[0] > values[1] >= values[2] >= 0.5


# --------------------------------------------------------------------------------
# Shift adversary
# --------------------------------------------------------------------------------

def test_shift_adversary_for_one_percent():
    probe = exponential_probe()
    arranger = shift_adversary(probe, 0.01)
    k = arranger.atoms[0][0].smaller
    assert advantage(k, 2 * k, probe) < 0.01
    assert math.exp(-k) - math.exp(-2 * k) < 0.02
    assert k <= 5
    # smallest such k
    assert advantage(k - 1, 2 * (k - 1), probe) >= 0.01


def test_loose_epsilon_is_met_at_once():
    assert shift_adversary(exponential_probe(), 0.4).atoms[0][0] == make_pair(1)


def test_smaller_epsilon_needs_larger_pairs():
    for probe in (exponential_probe(), pareto_probe()):
        ks = [shift_adversary(probe, eps).atoms[0][0].smaller for eps in (0.2, 0.1, 0.05, 0.01, 0.001, 1e-6)]
        assert ks == sorted(ks)


def test_adversary_report():
    report = adversary_report(exponential_probe(), 0.01).to_dict()
    assert report['pair'] == ['4', '8']
    assert report['win_value'] < 0.51


def test_epsilon_range():
    with pytest.raises(UsageError):
        shift_adversary(exponential_probe(), 0)
    with pytest.raises(UsageError):
        shift_adversary(exponential_probe(), 0.5)


def test_search_fails_without_decay(monkeypatch):
    monkeypatch.setattr('system.game.advantage', lambda a, b, probe: 0.25)
    with pytest.raises(SearchFailed):
        shift_adversary(exponential_probe(), 0.1)


# --------------------------------------------------------------------------------
# Strategy validation and files
# --------------------------------------------------------------------------------

def test_invalid_arrangers():
    with pytest.raises(InvalidStrategy):
        ArrangerStrategy.from_atoms([(1, '1/2'), (2, '1/3')])
    with pytest.raises(InvalidStrategy):
        ArrangerStrategy.from_atoms([(1, '1/2'), (1, '1/2')])
    with pytest.raises(InvalidStrategy):
        ArrangerStrategy.from_atoms([])
    with pytest.raises(NonPositiveAmount):
        ArrangerStrategy.from_atoms([(0, '1')])


def test_invalid_players():
    with pytest.raises(InvalidStrategy):
        PlayerStrategy(q={Fraction(1): Fraction(3, 2)})
    with pytest.raises(InvalidStrategy):
        load_player({'q': {'1': 'half'}})


def test_strategy_files(tmp_path):
    arranger_path = tmp_path / 'arranger.json'
    arranger_path.write_text(json.dumps({'atoms': [{'x': '1', 'w': '1/2'}, {'x': '2', 'w': '1/2'}]}))
    player_path = tmp_path / 'player.json'
    player_path.write_text(json.dumps({'q': {'2': '1'}, 'default_q': '0'}))

    arranger = load_arranger(str(arranger_path))
    player = load_player(str(player_path))
    assert exact_win_value(arranger, player) == Fraction(1, 2)
    assert arranger.to_dict() == {'atoms': [{'x': '1', 'w': '1/2'}, {'x': '2', 'w': '1/2'}]}

    with pytest.raises(UsageError):
        load_arranger(str(tmp_path / 'missing.json'))
    with pytest.raises(InvalidStrategy):
        load_arranger({'pairs': []})
