"""Exhaustive enumeration: all equilibria, optimal welfare, PoA and PoS.

In typed mode strategic agents of one type are interchangeable, so the
search runs over type-colourings of the free nodes; each colouring is
materialised as the assignment that hands nodes to agents in ascending
order.  Social mode enumerates every injective placement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import comb, perm
from typing import Iterator, List, Optional, Tuple

from .core import Assignment, GameError, GameInstance, is_equilibrium, social_welfare

DEFAULT_BUDGET = 10 ** 7


class BudgetExceeded(GameError):
    pass


def _strategic_by_type(instance: GameInstance):
    groups = {}
    for i in sorted(instance.strategic):
        groups.setdefault(instance.type_of(i), []).append(i)
    return [groups[t] for t in sorted(groups)]


def count_assignments(instance: GameInstance) -> int:
    free = len(instance.free_nodes)
    if instance.typed:
        total, left = 1, free
        for group in _strategic_by_type(instance):
            total *= comb(left, len(group))
            left -= len(group)
        return total
    return perm(free, len(instance.strategic))


def enumerate_assignments(instance: GameInstance, budget: int = DEFAULT_BUDGET) -> Iterator[Assignment]:
    """Every assignment once (typed mode: once per colouring)."""
    total = count_assignments(instance)
    if total > budget:
        raise BudgetExceeded(f"{total} assignments exceed budget {budget}")
    base = [0] * instance.n
    for i, v in instance.stubborn.items():
        base[i] = v
    free = instance.free_nodes
    if instance.typed:
        groups = _strategic_by_type(instance)

        def place(g, avail):
            if g == len(groups):
                yield tuple(base)
                return
            for chosen in combinations(avail, len(groups[g])):
                for agent, node in zip(groups[g], chosen):
                    base[agent] = node
                rest = [v for v in avail if v not in chosen]
                yield from place(g + 1, rest)

        for nodes in place(0, list(free)):
            yield Assignment(nodes)
    else:
        agents = sorted(instance.strategic)
        for chosen in permutations(free, len(agents)):
            for agent, node in zip(agents, chosen):
                base[agent] = node
            yield Assignment(tuple(base))


def find_all_equilibria(instance: GameInstance, budget: int = DEFAULT_BUDGET) -> List[Tuple[Assignment, Fraction]]:
    return [(a, social_welfare(instance, a))
            for a in enumerate_assignments(instance, budget) if is_equilibrium(instance, a)]


def optimal_welfare(instance: GameInstance, budget: int = DEFAULT_BUDGET) -> Tuple[Assignment, Fraction]:
    """Maximiser of social welfare (first in enumeration order among ties)."""
    best = None
    for a in enumerate_assignments(instance, budget):
        sw = social_welfare(instance, a)
        if best is None or sw > best[1]:
            best = (a, sw)
    if best is None:
        raise GameError("instance has no assignment")
    return best


@dataclass(frozen=True)
class RatioResult:
    """``kind`` is one of value, unbounded, no-equilibrium, undefined."""

    kind: str
    value: Optional[Fraction] = None
    optimum: Optional[Tuple[Assignment, Fraction]] = None
    witness: Optional[Tuple[Assignment, Fraction]] = None

    VALUE = "value"
    UNBOUNDED = "unbounded"
    NO_EQUILIBRIUM = "no-equilibrium"
    UNDEFINED = "undefined"

    def __str__(self):
        return str(self.value) if self.kind == self.VALUE else self.kind


def _ratio(optimum, chosen) -> RatioResult:
    opt = optimum[1]
    sw = chosen[1]
    if opt == 0 and sw == 0:
        return RatioResult(RatioResult.VALUE, Fraction(1), optimum, chosen)
    if opt <= 0:
        return RatioResult(RatioResult.UNDEFINED, None, optimum, chosen)
    if sw <= 0:
        return RatioResult(RatioResult.UNBOUNDED, None, optimum, chosen)
    return RatioResult(RatioResult.VALUE, opt / sw, optimum, chosen)


def _ratio_scan(instance, budget, worst: bool) -> RatioResult:
    best_any = None
    pick = None
    for a in enumerate_assignments(instance, budget):
        sw = social_welfare(instance, a)
        if best_any is None or sw > best_any[1]:
            best_any = (a, sw)
        if is_equilibrium(instance, a):
            if pick is None or (sw < pick[1] if worst else sw > pick[1]):
                pick = (a, sw)
    if pick is None:
        return RatioResult(RatioResult.NO_EQUILIBRIUM, None, best_any, None)
    return _ratio(best_any, pick)


def price_of_anarchy(instance: GameInstance, budget: int = DEFAULT_BUDGET) -> RatioResult:
    """Optimum over worst-equilibrium welfare."""
    return _ratio_scan(instance, budget, worst=True)


def price_of_stability(instance: GameInstance, budget: int = DEFAULT_BUDGET) -> RatioResult:
    """Optimum over best-equilibrium welfare."""
    return _ratio_scan(instance, budget, worst=False)


def expand_coloring(instance: GameInstance, assignment: Assignment) -> Iterator[Assignment]:
    """All labelled assignments with the same type-colouring (typed mode)."""
    groups = _strategic_by_type(instance)
    nodes = list(assignment.nodes)

    def rec(g):
        if g == len(groups):
            yield Assignment(tuple(nodes))
            return
        agents = groups[g]
        spots = [assignment.nodes[i] for i in agents]
        for order in permutations(spots):
            for i, v in zip(agents, order):
                nodes[i] = v
            yield from rec(g + 1)

    yield from rec(0)
