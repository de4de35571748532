"""Best-response dynamics, ordinal potentials and simple-topology equilibria."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from .core import (
    Assignment,
    Fractional,
    GameError,
    GameInstance,
    Linear,
    best_deviation,
    empty_nodes,
    neighbor_counts,
    utility,
)

THIRD = Fraction(1, 3)


class MovePolicy(Enum):
    BEST_IMPROVEMENT = "best"
    FIRST_IMPROVEMENT = "first"


@dataclass(frozen=True)
class Step:
    agent: int
    source: int
    target: int
    old_utility: Fraction
    new_utility: Fraction
    potential_before: Optional[Fraction] = None
    potential_after: Optional[Fraction] = None


@dataclass
class DynamicsTrace:
    steps: List[Step] = field(default_factory=list)
    converged: bool = False
    final: Optional[Assignment] = None

    @property
    def outcome(self) -> str:
        return "converged" if self.converged else "step-limit"


def potential_deg2(instance: GameInstance, assignment: Assignment) -> Fraction:
    """Edge potential: 1 for a friendly edge, 0 for a hostile one, 1/3 if an end is empty.

    Defined on any topology; it is an ordinal potential only for maximum
    degree 2 with fractional utilities.
    """
    occ = assignment.occupant
    total = Fraction(0)
    for u, v in instance.topology.edges:
        i, j = occ.get(u), occ.get(v)
        if i is None or j is None:
            total += THIRD
        elif j in instance.friend_sets[i]:
            total += 1
    return total


def potential_linear(instance: GameInstance, assignment: Assignment) -> Fraction:
    """Sum of ``alpha*f - beta*e`` over all agents, stubborn ones included."""
    model = instance.utility
    if not isinstance(model, Linear):
        raise GameError("linear potential needs the linear utility model")
    total = Fraction(0)
    for i in range(instance.n):
        total += model.value(*neighbor_counts(instance, assignment, i))
    return total


def potential_for(instance: GameInstance):
    """The potential that applies to ``instance``, or None."""
    if isinstance(instance.utility, Linear):
        return potential_linear
    if isinstance(instance.utility, Fractional) and instance.topology.max_degree <= 2:
        return potential_deg2
    return None


def step_bound(instance: GameInstance) -> int:
    """Number of improving steps the potential argument allows before a fixed point."""
    if isinstance(instance.utility, Linear):
        # potential lives on {alpha*i - beta*j : 0 <= i, j <= n^2}
        m = instance.n ** 2 + 1
        return m * m
    return 3 * instance.topology.node_count + 1


def best_response_step(instance: GameInstance, assignment: Assignment,
                       policy: MovePolicy = MovePolicy.BEST_IMPROVEMENT):
    """One improving move, or None at an equilibrium.

    Returns ``(new_assignment, Step)`` without potential values.
    """
    empties = empty_nodes(instance, assignment)
    chosen = None
    for i in sorted(instance.strategic):
        dev = best_deviation(instance, assignment, i, empties)
        if dev is None:
            continue
        old = utility(instance, assignment, i)
        if policy is MovePolicy.FIRST_IMPROVEMENT:
            chosen = (i, dev, old)
            break
        if chosen is None or dev[1] - old > chosen[1][1] - chosen[2]:
            chosen = (i, dev, old)
    if chosen is None:
        return None
    i, (z, new), old = chosen
    return assignment.moved(i, z), Step(i, assignment.nodes[i], z, old, new)


def run_dynamics(instance: GameInstance, start: Assignment,
                 policy: MovePolicy = MovePolicy.BEST_IMPROVEMENT,
                 max_steps: Optional[int] = None) -> DynamicsTrace:
    if max_steps is None:
        max_steps = step_bound(instance)
    phi = potential_for(instance)
    trace = DynamicsTrace()
    current = start
    before = phi(instance, current) if phi else None
    while True:
        result = best_response_step(instance, current, policy)
        if result is None:
            trace.converged = True
            break
        if len(trace.steps) >= max_steps:
            break
        current, step = result
        after = phi(instance, current) if phi else None
        trace.steps.append(Step(step.agent, step.source, step.target, step.old_utility,
                                step.new_utility, before, after))
        before = after
    trace.final = current
    return trace


def initial_assignment(instance: GameInstance) -> Assignment:
    """Stubborn agents on their pins, strategic agents on the lowest free nodes in id order."""
    nodes = [0] * instance.n
    for i, v in instance.stubborn.items():
        nodes[i] = v
    for i, v in zip(sorted(instance.strategic), instance.free_nodes):
        nodes[i] = v
    return Assignment(tuple(nodes))


def random_assignment(instance: GameInstance, seed: int) -> Assignment:
    """Stubborn agents pinned, strategic agents on a uniform sample of free nodes."""
    rng = random.Random(seed)
    nodes = list(initial_assignment(instance).nodes)
    spots = rng.sample(instance.free_nodes, len(instance.strategic))
    for i, v in zip(sorted(instance.strategic), spots):
        nodes[i] = v
    return Assignment(tuple(nodes))


def construct_equilibrium_simple(instance: GameInstance,
                                 policy: MovePolicy = MovePolicy.BEST_IMPROVEMENT) -> Assignment:
    """Equilibrium on a star (occupied centre) or a max-degree-2 topology."""
    topo = instance.topology
    if topo.max_degree <= 2:
        trace = run_dynamics(instance, initial_assignment(instance), policy)
        if not trace.converged:
            raise GameError("dynamics exceeded the degree-2 step bound")
        return trace.final
    center = topo.star_center()
    if center is None:
        raise GameError("topology is neither a star nor of maximum degree 2")
    nodes = list(initial_assignment(instance).nodes)
    strategic = sorted(instance.strategic)
    if center not in instance.pinned and strategic:
        leaves = [v for v in instance.free_nodes if v != center]
        nodes[strategic[0]] = center
        for i, v in zip(strategic[1:], leaves):
            nodes[i] = v
    return Assignment(tuple(nodes))
