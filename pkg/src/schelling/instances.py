"""Instance families, hardness-reduction gadgets and seeded random instances.

Node and agent numbering is deterministic for every constructor, so the
generated documents are byte-stable.  Type 0 is "red" and type 1 is "blue"
wherever a construction talks about two colours.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .core import Fractional, GameError, GameInstance, Social, Topology, Typed

RED, BLUE = 0, 1


@dataclass(frozen=True)
class ExternalGraph:
    """Input graph H = (X, Y) of a reduction."""

    vertex_count: int
    edges: tuple = ()

    def __post_init__(self):
        edges = sorted({(min(u, v), max(u, v)) for u, v in self.edges})
        for u, v in edges:
            if u == v:
                raise GameError(f"self-loop ({u},{v}) in input graph")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GameError(f"edge ({u},{v}) outside 0..{self.vertex_count - 1}")
        object.__setattr__(self, "edges", tuple(edges))

    @classmethod
    def parse(cls, text: str) -> "ExternalGraph":
        """Edge-list text: first line vertex count, then one ``u v`` pair per line."""
        lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise GameError("empty graph file")
        count = int(lines[0])
        edges = []
        for ln in lines[1:]:
            u, v = ln.split()
            edges.append((int(u), int(v)))
        return cls(count, tuple(edges))

    def dump(self) -> str:
        return "\n".join([str(self.vertex_count)] + [f"{u} {v}" for u, v in self.edges]) + "\n"

    def padded(self, vertex_count: int) -> "ExternalGraph":
        return ExternalGraph(max(vertex_count, self.vertex_count), self.edges)

    @classmethod
    def complete(cls, m: int) -> "ExternalGraph":
        return cls(m, tuple(combinations(range(m), 2)))

    @classmethod
    def cycle(cls, m: int) -> "ExternalGraph":
        return cls(m, tuple((i, (i + 1) % m) for i in range(m)))

    @classmethod
    def star(cls, leaves: int) -> "ExternalGraph":
        return cls(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


class _Builder:
    """Accumulates nodes, edges and agents for one construction."""

    def __init__(self):
        self.nodes = 0
        self.edges = []
        self.strategic_types = []
        self.stubborn = []  # (type, node)

    def node(self) -> int:
        self.nodes += 1
        return self.nodes - 1

    def add_nodes(self, count: int) -> list:
        return [self.node() for _ in range(count)]

    def edge(self, u, v):
        self.edges.append((u, v))

    def clique(self, nodes):
        for u, v in combinations(nodes, 2):
            self.edge(u, v)

    def strategic(self, t: int, count: int = 1):
        self.strategic_types.extend([t] * count)

    def pin(self, t: int, node: int):
        self.stubborn.append((t, node))

    def build(self, model=None) -> GameInstance:
        r = len(self.strategic_types)
        types = list(self.strategic_types) + [t for t, _ in self.stubborn]
        stubborn = {r + j: v for j, (_, v) in enumerate(self.stubborn)}
        return GameInstance(
            topology=Topology(self.nodes, frozenset(self.edges)),
            strategic=frozenset(range(r)),
            stubborn=stubborn,
            friendship=Typed(tuple(types)),
            utility=model or Fractional(),
        )


def _require(cond: bool, msg: str):
    if not cond:
        raise GameError(msg)


def star_topology(leaves: int) -> Topology:
    return Topology(leaves + 1, frozenset((0, i) for i in range(1, leaves + 1)))


def path_topology(nodes: int) -> Topology:
    return Topology(nodes, frozenset((i, i + 1) for i in range(nodes - 1)))


def ring_topology(nodes: int) -> Topology:
    _require(nodes >= 3, "a ring needs at least 3 nodes")
    return Topology(nodes, frozenset((i, (i + 1) % nodes) for i in range(nodes)))


def typed_on(topology: Topology, type_sizes: Sequence[int], model=None) -> GameInstance:
    """All-strategic typed instance: agents numbered type by type."""
    types = [t for t, size in enumerate(type_sizes) for _ in range(size)]
    return GameInstance(topology, frozenset(range(len(types))), {}, Typed(tuple(types)),
                        model or Fractional())


def nonexistence_tree(k: int) -> GameInstance:
    """Four-layer tree with 2k+1 agents per type and no equilibrium.

    Node 0 is the root alpha, node 1 its only child beta, then the 2k-1
    children of beta, then k leaves below each of them.
    """
    _require(k >= 2, "nonexistence tree needs k >= 2")
    b = _Builder()
    alpha, beta = b.node(), b.node()
    b.edge(alpha, beta)
    gammas = b.add_nodes(2 * k - 1)
    for g in gammas:
        b.edge(beta, g)
    for g in gammas:
        for leaf in b.add_nodes(k):
            b.edge(g, leaf)
    for t in range(k):
        b.strategic(t, 2 * k + 1)
    return b.build()


def poa_cliques(k: int, l: int) -> GameInstance:
    """k cliques of size k*l plus hub y and k*k auxiliary nodes (PoA close to k).

    Node order: y, then for each clique i its k*l nodes (the first is w_i),
    then z_{i,1..k}.  z_{i,j} sees the j-th block of l clique nodes; block i
    holds w_i.
    """
    _require(k >= 2 and l >= 1, "poa-cliques needs k >= 2 and l >= 1")
    b = _Builder()
    y = b.node()
    for i in range(k):
        clique = b.add_nodes(k * l)
        b.clique(clique)
        blocks = [clique[j * l:(j + 1) * l] for j in range(k)]
        # move w_i (clique[0]) into block i
        blocks[0], blocks[i] = blocks[i], blocks[0]
        b.edge(clique[0], y)
        for j in range(k):
            z = b.node()
            for u in blocks[j]:
                b.edge(z, u)
    for t in range(k):
        b.strategic(t, k * (l + 1))
    return b.build()


def poa_stubborn_cliques(k: int) -> GameInstance:
    """Stubborn-clique construction with PoA k (odd k) or k-1 (even k).

    Odd k: k cliques of size k+1 joined through an empty-able hub z, the
    stubborn agent of type i on the clique-i node adjacent to z, k strategic
    agents per type.  Even k: k-1 cliques of size k, hub z, and k dummy
    leaves each hanging off a stubborn-occupied clique node; the type-k
    stubborn agent sits on a dummy; k-1 strategic agents per type.
    """
    _require(k >= 2, "poa-stubborn-cliques needs k >= 2")
    b = _Builder()
    z = b.node()
    cliques = k if k % 2 else k - 1
    size = k + 1 if k % 2 else k
    anchors = []
    for i in range(cliques):
        clique = b.add_nodes(size)
        b.clique(clique)
        b.edge(clique[0], z)
        anchors.append(clique[0])
    if k % 2:
        for t in range(k):
            b.strategic(t, k)
        for t, a in enumerate(anchors):
            b.pin(t, a)
    else:
        dummies = b.add_nodes(k)
        for j, d in enumerate(dummies):
            b.edge(d, anchors[j % len(anchors)])
        for t in range(k):
            b.strategic(t, k - 1)
        for t, a in enumerate(anchors):
            b.pin(t, a)
        b.pin(k - 1, dummies[0])
    return b.build()


def poa_star_unbounded(k: int) -> GameInstance:
    """Star with k+2 nodes, two agents of type 0 and one of every other type."""
    _require(k >= 2, "needs k >= 2")
    return typed_on(star_topology(k + 1), [2] + [1] * (k - 1))


def poa_star_two_per_type(k: int, n: int) -> GameInstance:
    """Star with n+1 nodes; types 0..k-2 have two agents, type k-1 the rest."""
    _require(k >= 2 and n - 2 * (k - 1) >= 2, "needs k >= 2 and n >= 2k")
    return typed_on(star_topology(n), [2] * (k - 1) + [n - 2 * (k - 1)])


def poa_star_stubborn(k: int, l: int) -> GameInstance:
    """Star with n+1 = k*l+1 nodes, stubborn agents on leaves 1.. in order.

    Type 0: l strategic; type 1: one strategic and l-1 stubborn; types >= 2:
    l stubborn each.
    """
    _require(k >= 2 and l >= 1, "needs k >= 2 and l >= 1")
    b = _Builder()
    n = k * l
    center = b.node()
    leaves = b.add_nodes(n)
    for leaf in leaves:
        b.edge(center, leaf)
    b.strategic(0, l)
    b.strategic(1, 1)
    slots = iter(leaves)
    for _ in range(l - 1):
        b.pin(1, next(slots))
    for t in range(2, k):
        for _ in range(l):
            b.pin(t, next(slots))
    return b.build()


def pos_unbounded(eps: Fraction) -> GameInstance:
    """Three free nodes z1, z2, z3 with PoS 1/eps + 1/2.

    z1 sees x+1 stubborn red and z2; z3 sees y stubborn red and the stubborn
    blue; two strategic blue agents; x = 2/eps - 2, y = 1/eps - 1.
    """
    eps = Fraction(eps)
    _require(0 < eps <= Fraction(1, 2), "eps must lie in (0, 1/2]")
    x, y = 2 / eps - 2, 1 / eps - 1
    _require(x.denominator == 1 and y.denominator == 1,
             "2/eps - 2 and 1/eps - 1 must be integers")
    x, y = int(x), int(y)
    b = _Builder()
    z1, z2, z3 = b.add_nodes(3)
    b.edge(z1, z2)
    b.strategic(BLUE, 2)
    for _ in range(x + 1):
        s = b.node()
        b.edge(z1, s)
        b.pin(RED, s)
    for _ in range(y):
        s = b.node()
        b.edge(z3, s)
        b.pin(RED, s)
    s = b.node()
    b.edge(z3, s)
    b.pin(BLUE, s)
    return b.build()


def pos_three(x: int) -> GameInstance:
    """Free nodes z, y, w with PoS 3(2x+1)/(2(x+1)).

    z sees x+1 stubborn blue and x stubborn red; y sees w and one stubborn
    red; two strategic blue agents.
    """
    _require(x >= 1, "x must be >= 1")
    b = _Builder()
    z, y, w = b.add_nodes(3)
    b.edge(y, w)
    b.strategic(BLUE, 2)
    for _ in range(x + 1):
        s = b.node()
        b.edge(z, s)
        b.pin(BLUE, s)
    for _ in range(x):
        s = b.node()
        b.edge(z, s)
        b.pin(RED, s)
    s = b.node()
    b.edge(y, s)
    b.pin(RED, s)
    return b.build()


# node names of the 34/33 construction
POS34_NODES = ("x", "y1", "alpha", "y2", "w1", "w2", "w3", "z1", "z2", "z3", "beta")


def pos_34_33() -> GameInstance:
    """Eleven-node tree, five red and five blue strategic agents (PoS 34/33).

    x joins y1, alpha, y2; y1 carries w1..w3, y2 carries z1..z3, alpha
    carries beta.  Node ids follow :data:`POS34_NODES`.
    """
    idx = {name: i for i, name in enumerate(POS34_NODES)}
    edges = [("x", "y1"), ("x", "alpha"), ("x", "y2"), ("alpha", "beta")]
    edges += [("y1", f"w{i}") for i in (1, 2, 3)]
    edges += [("y2", f"z{i}") for i in (1, 2, 3)]
    topo = Topology(len(POS34_NODES), frozenset((idx[a], idx[b]) for a, b in edges))
    return typed_on(topo, [5, 5])


def pos34_assignment(red: Sequence[str], blue: Sequence[str]):
    """Assignment of the 34/33 instance from node names (red agents 0..4, blue 5..9)."""
    from .core import Assignment

    idx = {name: i for i, name in enumerate(POS34_NODES)}
    return Assignment(tuple(idx[v] for v in list(red) + list(blue)))


def reduce_clique_equilibrium(graph: ExternalGraph, s: int) -> GameInstance:
    """Equilibrium-existence gadget: an equilibrium exists iff ``graph`` has an s-clique.

    Node order: H's vertices, W (s-2 stubborn blue), L (s-2 free), R (4s
    stubborn: 2s+1 red then 2s-1 blue), x, y, z, then 121 stubborn (41 red
    then 80 blue).  Strategic agents 0..s-1 are red.
    """
    _require(s >= 5, "clique size s must be >= 5")
    b = _Builder()
    X = b.add_nodes(graph.vertex_count)
    for u, v in graph.edges:
        b.edge(X[u], X[v])
    W = b.add_nodes(s - 2)
    for v in X:
        for w in W:
            b.edge(v, w)
    L = b.add_nodes(s - 2)
    R = b.add_nodes(4 * s)
    for u in L:
        for v in R:
            b.edge(u, v)
    x, y, z = b.add_nodes(3)
    pool = b.add_nodes(121)
    red_pool, blue_pool = pool[:41], pool[41:]
    b.edge(x, y)
    for v in pool:
        b.edge(y, v)
    for v in red_pool[:1] + blue_pool[:2]:
        b.edge(x, v)
    for v in red_pool[:5] + blue_pool[:7]:
        b.edge(z, v)
    b.strategic(RED, s)
    for w in W:
        b.pin(BLUE, w)
    for j, v in enumerate(R):
        b.pin(RED if j < 2 * s + 1 else BLUE, v)
    for v in red_pool:
        b.pin(RED, v)
    for v in blue_pool:
        b.pin(BLUE, v)
    return b.build()


def clique_gadget_nodes(graph: ExternalGraph, s: int) -> dict:
    """Named nodes of :func:`reduce_clique_equilibrium` for the same inputs."""
    m = graph.vertex_count
    L0 = m + (s - 2)
    x = L0 + (s - 2) + 4 * s
    return {"X": list(range(m)), "W": list(range(m, L0)), "L": list(range(L0, L0 + s - 2)),
            "R": list(range(L0 + s - 2, x)), "x": x, "y": x + 1, "z": x + 2,
            "pool": list(range(x + 3, x + 124))}


def reduce_clique_welfare(graph: ExternalGraph, s: int):
    """Welfare gadget: optimum >= s-1 iff ``graph`` has an s-clique.

    H gains isolated padding vertices when it has at most s vertices, so that
    there are more nodes than agents; padding cannot create a clique.
    Returns ``(instance, target)``.
    """
    _require(s >= 2, "clique size s must be >= 2")
    g = graph.padded(s + 1)
    b = _Builder()
    X = b.add_nodes(g.vertex_count)
    for u, v in g.edges:
        b.edge(X[u], X[v])
    w = b.node()
    for v in X:
        b.edge(v, w)
    b.strategic(RED, s)
    b.pin(BLUE, w)
    return b.build(), Fraction(s - 1)


def reduce_hamiltonian(graph: ExternalGraph):
    """Social-network welfare gadget: optimum = |X| iff ``graph`` is Hamiltonian.

    One strategic agent per vertex, befriending its H-neighbours; the topology
    is a |X|-cycle plus an isolated node.  Returns ``(instance, target)``.
    """
    m = graph.vertex_count
    _require(m >= 3, "need at least 3 vertices")
    topo = Topology(m + 1, frozenset((i, (i + 1) % m) for i in range(m)))
    inst = GameInstance(topo, frozenset(range(m)), {}, Social(frozenset(graph.edges)), Fractional())
    return inst, Fraction(m)


# ---------------------------------------------------------------- random


def _bernoulli(rng: random.Random, p: Fraction) -> bool:
    return rng.randrange(p.denominator) < p.numerator


def random_topology(nodes: int, edge_prob, rng: random.Random, connected: bool = False,
                    attempts: int = 200) -> Topology:
    p = Fraction(edge_prob)
    for _ in range(attempts):
        edges = frozenset((u, v) for u, v in combinations(range(nodes), 2) if _bernoulli(rng, p))
        topo = Topology(nodes, edges)
        if not connected or topo.is_connected():
            return topo
    raise GameError("no connected topology found; raise edge_prob")


def random_tree(nodes: int, rng: random.Random) -> Topology:
    """Uniform random attachment tree (each node joins an earlier one)."""
    return Topology(nodes, frozenset((rng.randrange(v), v) for v in range(1, nodes)))


def populate(topology: Topology, strategic_per_type: Sequence[int],
             stubborn_per_type: Sequence[int] = (), model=None,
             rng: Optional[random.Random] = None,
             social_edge_prob=None) -> GameInstance:
    """Place agents on ``topology``: strategic agents first (type by type), then stubborn.

    Stubborn pins are drawn uniformly without collision.  With
    ``social_edge_prob`` the friendship is a random social network over all
    agents instead of the types.
    """
    rng = rng or random.Random(0)
    stubborn_per_type = list(stubborn_per_type) + [0] * (len(strategic_per_type) - len(stubborn_per_type))
    types = [t for t, c in enumerate(strategic_per_type) for _ in range(c)]
    r = len(types)
    stub_types = [t for t, c in enumerate(stubborn_per_type) for _ in range(c)]
    if topology.node_count <= r + len(stub_types):
        raise GameError("too few nodes for the requested agents")
    pins = rng.sample(range(topology.node_count), len(stub_types))
    stubborn = {r + j: v for j, v in enumerate(pins)}
    n = r + len(stub_types)
    if social_edge_prob is None:
        friendship = Typed(tuple(types + stub_types))
    else:
        p = Fraction(social_edge_prob)
        friendship = Social(frozenset(e for e in combinations(range(n), 2) if _bernoulli(rng, p)))
    return GameInstance(topology, frozenset(range(r)), stubborn, friendship, model or Fractional())


def gen_random(nodes: int, edge_prob, k: int, strategic_per_type: Sequence[int],
               stubborn_per_type: Sequence[int] = (), model=None, seed: int = 0,
               connected: bool = False, social_edge_prob=None) -> GameInstance:
    """Deterministic random instance for a given seed."""
    _require(len(strategic_per_type) == k, "strategic_per_type needs one count per type")
    rng = random.Random(seed)
    topo = random_topology(nodes, edge_prob, rng, connected)
    return populate(topo, strategic_per_type, stubborn_per_type, model, rng, social_edge_prob)


def gen_random_tree(nodes: int, strategic_per_type: Sequence[int],
                    stubborn_per_type: Sequence[int] = (), seed: int = 0) -> GameInstance:
    rng = random.Random(seed)
    return populate(random_tree(nodes, rng), strategic_per_type, stubborn_per_type, Fractional(), rng)


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: dict = field(default_factory=dict)


def _star(p):
    sizes = list(p["type_sizes"])
    return typed_on(star_topology(p.get("leaves", sum(sizes))), sizes)


def _path(p):
    sizes = list(p["type_sizes"])
    return typed_on(path_topology(p.get("nodes", sum(sizes) + 1)), sizes)


def _ring(p):
    sizes = list(p["type_sizes"])
    return typed_on(ring_topology(p.get("nodes", sum(sizes) + 1)), sizes)


FAMILIES = {
    "Star": _star,
    "Path": _path,
    "Ring": _ring,
    "NonexistenceTree": lambda p: nonexistence_tree(p["k"]),
    "PoaCliques": lambda p: poa_cliques(p["k"], p["l"]),
    "PoaStubbornCliques": lambda p: poa_stubborn_cliques(p["k"]),
    "PoaStarStubborn": lambda p: poa_star_stubborn(p["k"], p["l"]),
    "PoaStarTwoPerType": lambda p: poa_star_two_per_type(p["k"], p["n"]),
    "PoaStarUnbounded": lambda p: poa_star_unbounded(p["k"]),
    "PosUnbounded": lambda p: pos_unbounded(Fraction(p["eps"])),
    "PosThree": lambda p: pos_three(p["x"]),
    "PosThirtyFourOver33": lambda p: pos_34_33(),
}


def gen_family(request: FamilySpec) -> GameInstance:
    try:
        build = FAMILIES[request.family]
    except KeyError:
        raise GameError(f"unknown family {request.family!r}") from None
    try:
        return build(request.params)
    except KeyError as exc:
        raise GameError(f"{request.family} needs parameter {exc.args[0]!r}") from None
