"""Domain types and exact utility evaluation for Schelling games on graphs.

Every utility, welfare and potential value is a :class:`fractions.Fraction`;
floats never enter a utility path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

Rational = Fraction
Edge = Tuple[int, int]


def _norm_edges(edges: Iterable[Sequence[int]]) -> frozenset:
    return frozenset((min(u, v), max(u, v)) for u, v in edges)


def ratio(num: int, den: int) -> Fraction:
    """``num/den`` with the 0/0 = 0 (and 0/x = 0) convention."""
    if num <= 0 or den <= 0:
        return Fraction(0)
    return Fraction(num, den)


@dataclass(frozen=True)
class Topology:
    """Undirected location graph on nodes ``0..node_count-1``."""

    node_count: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", _norm_edges(self.edges))

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        adj = [set() for _ in range(self.node_count)]
        for u, v in self.edges:
            if u != v and 0 <= u < self.node_count and 0 <= v < self.node_count:
                adj[u].add(v)
                adj[v].add(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, node: int) -> Tuple[int, ...]:
        return self.adjacency[node]

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def sorted_edges(self):
        return sorted(self.edges)

    def is_connected(self) -> bool:
        if self.node_count == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.node_count

    def is_tree(self) -> bool:
        return len(self.edges) == self.node_count - 1 and self.is_connected()

    def star_center(self) -> Optional[int]:
        """Center of a star ``K_{1,m}`` (m >= 1), or None."""
        n = self.node_count
        if n < 2 or len(self.edges) != n - 1:
            return None
        for v in range(n):
            if self.degree(v) == n - 1:
                return v
        return None


@dataclass(frozen=True)
class Typed:
    """Friendship by type: ``type_of[i]`` is the type of agent ``i``."""

    type_of: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "type_of", tuple(self.type_of))

    @property
    def k(self) -> int:
        return max(self.type_of, default=-1) + 1

    def to_social(self) -> "Social":
        """The union-of-cliques social network inducing the same friend sets."""
        edges = [
            (i, j)
            for i in range(len(self.type_of))
            for j in range(i + 1, len(self.type_of))
            if self.type_of[i] == self.type_of[j]
        ]
        return Social(frozenset(edges))


@dataclass(frozen=True)
class Social:
    """Friendship given by an undirected social network over agent ids."""

    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", _norm_edges(self.edges))


FriendshipSpec = Union[Typed, Social]


@dataclass(frozen=True)
class Fractional:
    """``f/(f+e)``, and 0 when there are no friends around."""

    name = "fractional"

    def value(self, f: int, e: int) -> Fraction:
        return ratio(f, f + e)


@dataclass(frozen=True)
class ModifiedFractional:
    """Enemy-averse variant ``(f+1)/(f+e+1)``; the agent counts herself a friend."""

    name = "modified"

    def value(self, f: int, e: int) -> Fraction:
        return Fraction(f + 1, f + e + 1)


@dataclass(frozen=True)
class Linear:
    """``alpha*f - beta*e`` with alpha, beta >= 0."""

    alpha: Fraction = Fraction(1)
    beta: Fraction = Fraction(0)
    name = "linear"

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))

    def value(self, f: int, e: int) -> Fraction:
        return self.alpha * f - self.beta * e


UtilityModel = Union[Fractional, ModifiedFractional, Linear]


@dataclass(frozen=True)
class Assignment:
    """``nodes[i]`` is the node occupied by agent ``i``."""

    nodes: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))

    def __len__(self):
        return len(self.nodes)

    def node_of(self, agent: int) -> int:
        return self.nodes[agent]

    @cached_property
    def occupant(self) -> dict:
        return {v: i for i, v in enumerate(self.nodes)}

    def is_empty(self, node: int) -> bool:
        return node not in self.occupant

    def moved(self, agent: int, node: int) -> "Assignment":
        nodes = list(self.nodes)
        nodes[agent] = node
        return Assignment(tuple(nodes))


class GameError(ValueError):
    """Raised when an operation is applied outside its domain."""


@dataclass(frozen=True)
class GameInstance:
    """A Schelling game ``(R, S, friendship, G, lambda)`` with a utility model.

    ``stubborn`` maps each stubborn agent to its pinned node.
    """

    topology: Topology
    strategic: frozenset
    stubborn: Mapping[int, int]
    friendship: FriendshipSpec
    utility: UtilityModel = Fractional()

    def __post_init__(self):
        object.__setattr__(self, "strategic", frozenset(self.strategic))
        object.__setattr__(self, "stubborn", dict(sorted(self.stubborn.items())))

    def __hash__(self):
        return hash((self.topology, self.strategic, tuple(self.stubborn.items()),
                     self.friendship, self.utility))

    @property
    def n(self) -> int:
        return len(self.strategic) + len(self.stubborn)

    @property
    def typed(self) -> bool:
        return isinstance(self.friendship, Typed)

    @property
    def k(self) -> int:
        return self.friendship.k if self.typed else 0

    def type_of(self, agent: int) -> int:
        return self.friendship.type_of[agent]

    @cached_property
    def friend_sets(self) -> Tuple[frozenset, ...]:
        n = self.n
        if self.typed:
            members = {}
            for i, t in enumerate(self.friendship.type_of):
                members.setdefault(t, set()).add(i)
            return tuple(frozenset(members[self.friendship.type_of[i]] - {i}) for i in range(n))
        sets = [set() for _ in range(n)]
        for i, j in self.friendship.edges:
            if i != j and 0 <= i < n and 0 <= j < n:
                sets[i].add(j)
                sets[j].add(i)
        return tuple(frozenset(s) for s in sets)

    @cached_property
    def pinned(self) -> dict:
        """node -> stubborn agent."""
        return {v: i for i, v in self.stubborn.items()}

    @cached_property
    def free_nodes(self) -> Tuple[int, ...]:
        return tuple(v for v in range(self.topology.node_count) if v not in self.pinned)

    def with_friendship(self, friendship: FriendshipSpec) -> "GameInstance":
        return GameInstance(self.topology, self.strategic, self.stubborn, friendship, self.utility)

    def with_utility(self, model: UtilityModel) -> "GameInstance":
        return GameInstance(self.topology, self.strategic, self.stubborn, self.friendship, model)


def validate(instance: GameInstance) -> list:
    """Every violated model constraint as ``"code: detail"`` strings; empty when valid."""
    errors = []
    topo = instance.topology
    n = instance.n
    if topo.node_count < 1:
        errors.append("empty-topology: node_count must be positive")
    for u, v in topo.sorted_edges():
        if u == v:
            errors.append(f"self-loop: edge ({u},{v})")
        elif not (0 <= u < topo.node_count and 0 <= v < topo.node_count):
            errors.append(f"bad-edge: ({u},{v}) outside 0..{topo.node_count - 1}")
    if topo.node_count <= n:
        errors.append(f"too-few-nodes: {topo.node_count} nodes for {n} agents")
    overlap = instance.strategic & set(instance.stubborn)
    if overlap:
        errors.append(f"agent-overlap: {sorted(overlap)} both strategic and stubborn")
    ids = instance.strategic | set(instance.stubborn)
    if ids != set(range(len(ids))):
        errors.append("agent-ids: strategic and stubborn ids must form 0..n-1")
    pins = list(instance.stubborn.values())
    if len(set(pins)) != len(pins):
        dup = sorted({v for v in pins if pins.count(v) > 1})
        errors.append(f"non-injective-lambda: nodes {dup} pinned twice")
    for i, v in instance.stubborn.items():
        if not 0 <= v < topo.node_count:
            errors.append(f"bad-pin: agent {i} pinned to missing node {v}")
    fs = instance.friendship
    if isinstance(fs, Typed):
        if len(fs.type_of) != len(ids):
            errors.append(f"type-count: {len(fs.type_of)} types given for {len(ids)} agents")
        if fs.k < 2:
            errors.append("too-few-types: need k >= 2")
        present = set(fs.type_of)
        for t in range(fs.k):
            if t not in present:
                errors.append(f"empty-type: type {t} has no agents")
    else:
        for i, j in sorted(fs.edges):
            if i == j:
                errors.append(f"self-loop: social edge ({i},{j})")
            elif not (0 <= i < n and 0 <= j < n):
                errors.append(f"bad-social-edge: ({i},{j})")
    model = instance.utility
    if isinstance(model, Linear) and (model.alpha < 0 or model.beta < 0):
        errors.append("negative-weight: linear alpha and beta must be >= 0")
    return errors


def check_assignment(instance: GameInstance, assignment: Assignment) -> list:
    errors = []
    if len(assignment) != instance.n:
        return [f"length: {len(assignment)} positions for {instance.n} agents"]
    for i, v in enumerate(assignment.nodes):
        if not 0 <= v < instance.topology.node_count:
            errors.append(f"bad-node: agent {i} at {v}")
    if len(set(assignment.nodes)) != len(assignment.nodes):
        errors.append("collision: two agents share a node")
    for i, v in instance.stubborn.items():
        if assignment.nodes[i] != v:
            errors.append(f"pin: stubborn agent {i} must be at {v}")
    return errors


def friends(instance: GameInstance, agent: int) -> frozenset:
    if not 0 <= agent < instance.n:
        raise GameError(f"unknown agent {agent}")
    return instance.friend_sets[agent]


def neighbor_counts(instance: GameInstance, assignment: Assignment, agent: int,
                    at: Optional[int] = None) -> Tuple[int, int]:
    """(friends, enemies) adjacent to ``at`` with ``agent`` moved there."""
    if at is None:
        at = assignment.nodes[agent]
    occ = assignment.occupant
    other = occ.get(at)
    if other is not None and other != agent:
        raise GameError(f"node {at} is occupied by agent {other}")
    mine = instance.friend_sets[agent]
    f = e = 0
    for w in instance.topology.adjacency[at]:
        j = occ.get(w)
        if j is None or j == agent:
            continue
        if j in mine:
            f += 1
        else:
            e += 1
    return f, e


def utility(instance: GameInstance, assignment: Assignment, agent: int,
            at: Optional[int] = None) -> Fraction:
    f, e = neighbor_counts(instance, assignment, agent, at)
    return instance.utility.value(f, e)


def social_welfare(instance: GameInstance, assignment: Assignment) -> Fraction:
    return sum((utility(instance, assignment, i) for i in sorted(instance.strategic)), Fraction(0))


def empty_nodes(instance: GameInstance, assignment: Assignment):
    occ = assignment.occupant
    return [v for v in range(instance.topology.node_count) if v not in occ]


def best_deviation(instance: GameInstance, assignment: Assignment, agent: int,
                   empties=None) -> Optional[Tuple[int, Fraction]]:
    """Best strictly improving jump to an empty node (max utility, then min node id)."""
    if agent not in instance.strategic:
        raise GameError(f"agent {agent} is not strategic")
    current = utility(instance, assignment, agent)
    best = None
    for z in empties if empties is not None else empty_nodes(instance, assignment):
        u = utility(instance, assignment, agent, z)
        if u > current and (best is None or u > best[1]):
            best = (z, u)
    return best


def is_equilibrium(instance: GameInstance, assignment: Assignment) -> bool:
    empties = empty_nodes(instance, assignment)
    return all(best_deviation(instance, assignment, i, empties) is None
               for i in sorted(instance.strategic))
