# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
The arranger fills the envelopes, the player picks a switching probability q(a).

Payoffs are enumerated exactly over finite arranger strategies.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

from system.amounts import Amount, AmountLike, EnvelopePair, format_amount, make_pair, to_amount
from system.cover import Probe, advantage, exact_win_probability
from system.exception_handler import InvalidStrategy, SearchFailed, UsageError
from system.logger import Logger

# Doubling stops here: beyond it the survival of any usable probe is zero in floats
MAX_DOUBLINGS: int = 1000


# --------------------------------------------------------------------------------
# Strategies
# --------------------------------------------------------------------------------

@dataclass(frozen=True)
class ArrangerStrategy:
    atoms: tuple[tuple[EnvelopePair, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise InvalidStrategy("Arranger strategy needs at least one pair")
        if any(weight <= 0 for _, weight in self.atoms):
            raise InvalidStrategy("Arranger weights must be strictly positive")
        total = sum((weight for _, weight in self.atoms), Fraction(0))
        if total != 1:
            raise InvalidStrategy("Arranger weights must sum to one", total=format_amount(total))
        pairs = [pair for pair, _ in self.atoms]
        if len(set(pairs)) != len(pairs):
            raise InvalidStrategy("Arranger pairs must be distinct")

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[AmountLike, AmountLike]]) -> 'ArrangerStrategy':
        """Builds a strategy from (smaller amount, weight) pairs."""
        try:
            return cls(atoms=tuple((make_pair(x), to_amount(w)) for x, w in atoms))
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidStrategy(f"Malformed arranger atom: {e}")

    @classmethod
    def point_mass(cls, x: AmountLike) -> 'ArrangerStrategy':
        return cls(atoms=((make_pair(x), Fraction(1)),))

    def observations(self) -> list[Amount]:
        return sorted({amount for pair, _ in self.atoms for amount in pair.as_tuple()})

    def to_dict(self) -> dict[str, Any]:
        return {'atoms': [{'x': format_amount(pair.smaller), 'w': format_amount(weight)}
                          for pair, weight in self.atoms]}


@dataclass(frozen=True)
class PlayerStrategy:
    q: Mapping[Amount, Fraction] = field(default_factory=dict)
    default_q: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for probability in (*self.q.values(), self.default_q):
            if not 0 <= probability <= 1:
                raise InvalidStrategy("Switch probabilities must lie in [0, 1]", q=probability)

    def q_at(self, a: Amount) -> Fraction:
        """Switch probability at observed amount a, falling back to default_q."""
        return self.q.get(a, self.default_q)

    @classmethod
    def always_switch(cls) -> 'PlayerStrategy':
        """
        Blind player that always switches.

        Returns:
            PlayerStrategy: q(a) = 1 for every a.
        """
        return cls(default_q=Fraction(1))

    @classmethod
    def never_switch(cls) -> 'PlayerStrategy':
        """
        Blind player that always keeps.

        Returns:
            PlayerStrategy: q(a) = 0 for every a.
        """
        return cls(default_q=Fraction(0))

    @classmethod
    def threshold(cls, t: AmountLike, observations: Iterable[Amount]) -> 'PlayerStrategy':
        """
        Switches on every listed observation below t, keeps otherwise.

        Args:
            t (AmountLike): The threshold; observations equal to t are kept.
            observations (Iterable[Amount]): Amounts the player may see.

        Returns:
            PlayerStrategy: The deterministic threshold player.
        """
        t = to_amount(t)
        return cls(q={a: Fraction(1) for a in observations if a < t}, default_q=Fraction(0))

    def to_dict(self) -> dict[str, Any]:
        return {
            'q': {format_amount(a): format_amount(p) for a, p in sorted(self.q.items())},
            'default_q': format_amount(self.default_q),
        }


# --------------------------------------------------------------------------------
# Payoffs
# --------------------------------------------------------------------------------

def exact_win_value(arranger: ArrangerStrategy, player: PlayerStrategy) -> Fraction:
    """
    Probability that the player ends with the larger amount, exactly.

    Each atom is dealt both ways with weight/2: seeing x the player wins by
    switching, seeing 2x by keeping.

    Args:
        arranger (ArrangerStrategy): Finite distribution over pairs.
        player (PlayerStrategy): Switch probability per observed amount.

    Returns:
        Fraction: The win value.
    """
    value = Fraction(0)
    for pair, weight in arranger.atoms:
        value += weight / 2 * (player.q_at(pair.smaller) + 1 - player.q_at(pair.larger))
    return value


def cover_vs_arranger(arranger: ArrangerStrategy, probe: Probe) -> float:
    """Weighted Cover win probability over the arranger's pairs."""
    return math.fsum(float(weight) * exact_win_probability(pair.smaller, pair.larger, probe)
                     for pair, weight in arranger.atoms)


@dataclass(frozen=True)
class AdversaryReport:
    arranger: ArrangerStrategy
    epsilon: float
    value: float
    advantage: float

    def to_dict(self) -> dict[str, Any]:
        pair = self.arranger.atoms[0][0]
        return {
            'pair': [format_amount(pair.smaller), format_amount(pair.larger)],
            'epsilon': self.epsilon,
            'win_value': self.value,
            'advantage': self.advantage,
        }


def _pair_advantage(probe: Probe, k: int) -> float:
    return advantage(k, 2 * k, probe)


def shift_adversary(probe: Probe, epsilon: float) -> ArrangerStrategy:
    """
    A point-mass pair (k, 2k) on which the probe's advantage is below epsilon.

    Doubles k from 1 until S(k) - S(2k) < 2 * epsilon, then bisects the last
    doubling step for the smallest such integer k.

    Raises:
        UsageError: If epsilon is not in (0, 1/2).
        SearchFailed: If the survival never decays enough.
    """
    epsilon = float(epsilon)
    if not 0 < epsilon < 0.5:
        raise UsageError("Epsilon must lie strictly between 0 and 1/2", epsilon=epsilon)

    if _pair_advantage(probe, 1) < epsilon:
        return ArrangerStrategy.point_mass(1)

    low, high = 1, 2
    for _ in range(MAX_DOUBLINGS):
        if _pair_advantage(probe, high) < epsilon:
            break
        low, high = high, 2 * high
    else:
        raise SearchFailed("Probe advantage never fell below epsilon", probe=probe.label, epsilon=epsilon)

    # advantage(low) >= epsilon > advantage(high)
    while high - low > 1:
        middle = (low + high) // 2
        if _pair_advantage(probe, middle) < epsilon:
            high = middle
        else:
            low = middle

    Logger().debug(f"Shift adversary for {probe.label} at epsilon={epsilon}: k={high}")
    return ArrangerStrategy.point_mass(high)


def adversary_report(probe: Probe, epsilon: float) -> AdversaryReport:
    arranger = shift_adversary(probe, epsilon)
    pair = arranger.atoms[0][0]
    return AdversaryReport(
        arranger=arranger,
        epsilon=float(epsilon),
        value=cover_vs_arranger(arranger, probe),
        advantage=advantage(pair.smaller, pair.larger, probe),
    )


# --------------------------------------------------------------------------------
# Strategy files
# --------------------------------------------------------------------------------

def _read_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as strategy_file:
            return json.load(strategy_file)
    except FileNotFoundError:
        raise UsageError("Strategy file not found", path=path)
    except json.JSONDecodeError as e:
        raise UsageError(f"Invalid JSON in strategy file: {e}", path=path)


def arranger_from_dict(data: Mapping[str, Any]) -> ArrangerStrategy:
    try:
        return ArrangerStrategy.from_atoms((atom['x'], atom['w']) for atom in data['atoms'])
    except (KeyError, TypeError) as e:
        raise InvalidStrategy(f"Malformed arranger definition: {e}")


def player_from_dict(data: Mapping[str, Any]) -> PlayerStrategy:
    try:
        q = {to_amount(a): to_amount(p) for a, p in data.get('q', {}).items()}
        return PlayerStrategy(q=q, default_q=to_amount(data.get('default_q', 0)))
    except (AttributeError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InvalidStrategy(f"Malformed player definition: {e}")


def load_arranger(source: str | Mapping[str, Any]) -> ArrangerStrategy:
    """Loads {"atoms": [{"x": "1", "w": "1/2"}, ...]} from a dict or a JSON file."""
    return arranger_from_dict(source if isinstance(source, Mapping) else _read_json(source))


def load_player(source: str | Mapping[str, Any]) -> PlayerStrategy:
    """Loads {"q": {"2": "1"}, "default_q": "0"} from a dict or a JSON file."""
    return player_from_dict(source if isinstance(source, Mapping) else _read_json(source))
