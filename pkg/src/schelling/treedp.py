"""Dynamic programming over tree topologies (typed instances, fractional utilities).

For every node ``v`` of the rooted tree a table describes the partial
assignments of ``tree(v)`` in which nobody inside ``tree(v) - {v}`` wants to
jump to an empty node of ``tree(v) - {v}``.  A key records

* ``color``     -- occupant type of ``v`` (``EMPTY`` when vacant),
* ``n``         -- per-type agent counts in ``tree(v)``,
* ``k``         -- per-type agent counts on the children of ``v``,
* ``lo``        -- per-type minimum utility of strategic agents deeper than the children,
* ``lo_child``  -- per-type minimum utility of strategic agents on the children,
* ``hi``        -- per-type best utility an outsider gets by jumping into ``tree(v) - {v}``,
* ``hi_top``    -- best utility the occupant of ``v`` gets by jumping into ``tree(v) - {v}``.

Stored keys are tight: the bounds are the exact extremes of some witnessing
partial assignment (1 for an empty minimum, 0 for an empty maximum).  A key
with weaker bounds is feasible whenever a stored key dominates it, see
:meth:`DpTable.feasible`.  Children are merged one at a time into an
intermediate table; a child's own utility is settled during its merge, when
the parent's colour is known.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .core import Assignment, Fractional, GameError, GameInstance, Typed

EMPTY = -1
TOP = Fraction(1)
ZERO = Fraction(0)


@lru_cache(maxsize=None)
def _frac(num: int, den: int) -> Fraction:
    if num <= 0 or den <= 0:
        return ZERO
    return Fraction(num, den)


def utility_grid(n: int) -> List[Fraction]:
    """All fractional utilities reachable with ``n`` agents, ascending, no duplicates."""
    if n < 1:
        raise GameError("need at least one agent")
    return sorted({Fraction(i, j) for j in range(1, n + 1) for i in range(1, j + 1)} | {ZERO})


@dataclass(frozen=True, order=True)
class DpKey:
    color: int
    n: Tuple[int, ...]
    k: Tuple[int, ...]
    lo: Tuple[Fraction, ...]
    lo_child: Tuple[Fraction, ...]
    hi: Tuple[Fraction, ...]
    hi_top: Fraction

    @property
    def shape(self):
        return self.color, self.n, self.k

    def dominates(self, other: "DpKey") -> bool:
        """Same shape and bounds at least as strong (higher lows, lower highs)."""
        return (self.shape == other.shape
                and all(a >= b for a, b in zip(self.lo, other.lo))
                and all(a >= b for a, b in zip(self.lo_child, other.lo_child))
                and all(a <= b for a, b in zip(self.hi, other.hi))
                and self.hi_top <= other.hi_top)


@dataclass
class Entry:
    welfare: Fraction
    back: Optional[Tuple[DpKey, DpKey]] = None


@dataclass
class DpTable:
    """Table of node ``owner`` after merging its first ``merged`` children."""

    owner: int
    merged: int
    size: int
    entries: Dict[DpKey, Entry] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def tight(self, key: DpKey) -> bool:
        """``key`` itself is stored, i.e. its bounds are attained exactly."""
        return key in self.entries

    def feasible(self, key: DpKey) -> bool:
        """Some witnessing partial assignment meets the (possibly loose) bounds of ``key``."""
        return any(s.dominates(key) for s in self.entries if s.shape == key.shape)

    def welfare(self, key: DpKey) -> Optional[Fraction]:
        """Best partial welfare over stored keys dominating ``key``."""
        vals = [e.welfare for s, e in self.entries.items() if s.shape == key.shape and s.dominates(key)]
        return max(vals) if vals else None


def _pareto(entries: Dict[DpKey, Entry], with_welfare: bool) -> Dict[DpKey, Entry]:
    groups: Dict[tuple, list] = {}
    for key, entry in entries.items():
        groups.setdefault(key.shape, []).append((key, entry))
    kept = {}
    for items in groups.values():
        if len(items) == 1:
            kept[items[0][0]] = items[0][1]
            continue
        # strongest candidates first so that dominators are kept before the dominated
        items.sort(key=lambda it: (-it[1].welfare if with_welfare else 0,
                                   -sum(it[0].lo) - sum(it[0].lo_child),
                                   sum(it[0].hi) + it[0].hi_top, it[0]))
        front = []
        for key, entry in items:
            if any(fk.dominates(key) and (not with_welfare or fe.welfare >= entry.welfare)
                   for fk, fe in front):
                continue
            front.append((key, entry))
        kept.update(front)
    return kept


class TreeDP:
    """Bottom-up table construction for one tree instance.

    ``stability=False`` drops every stability bound, turning the tables into
    a plain welfare optimiser over all assignments.
    """

    def __init__(self, instance: GameInstance, stability: bool = True, prune: bool = True):
        if not isinstance(instance.friendship, Typed):
            raise GameError("tree DP needs a typed instance")
        if not isinstance(instance.utility, Fractional):
            raise GameError("tree DP supports fractional utilities only")
        topo = instance.topology
        if not topo.is_tree():
            raise GameError("topology is not a tree")
        self.instance = instance
        self.stability = stability
        self.prune = prune
        self.types = instance.k
        self.census = tuple(sum(1 for t in instance.friendship.type_of if t == x) for x in range(self.types))
        self.strategic_census = tuple(
            sum(1 for i in instance.strategic if instance.type_of(i) == x) for x in range(self.types))
        self.empties = topo.node_count - instance.n
        self.root = 0
        self.parent, self.children = self._root_tree()
        self.tables: Dict[int, List[DpTable]] = {}

    def _root_tree(self):
        topo = self.instance.topology
        parent = {self.root: None}
        children = {v: [] for v in range(topo.node_count)}
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for w in topo.neighbors(u):
                if w not in parent:
                    parent[w] = u
                    children[u].append(w)
                    queue.append(w)
        return parent, {v: sorted(c) for v, c in children.items()}

    def pinned_type(self, v: int) -> Optional[int]:
        agent = self.instance.pinned.get(v)
        return None if agent is None else self.instance.type_of(agent)

    def _blank(self, color: int) -> DpKey:
        t = self.types
        onehot = tuple(int(x == color) for x in range(t))
        return DpKey(color, onehot, (0,) * t, (TOP,) * t, (TOP,) * t, (ZERO,) * t, ZERO)

    def leaf_table(self, v: int) -> DpTable:
        """Table of ``v`` before any child is merged (the whole table for a leaf)."""
        pin = self.pinned_type(v)
        if pin is not None:
            colors = [pin]
        else:
            colors = [EMPTY] + [x for x in range(self.types) if self.strategic_census[x] > 0]
        table = DpTable(v, 0, 1)
        for c in colors:
            key = self._blank(c)
            if self._admissible(key.n, 1):
                table.entries[key] = Entry(ZERO)
        return table

    def _admissible(self, n, size) -> bool:
        return all(a <= b for a, b in zip(n, self.census)) and size - sum(n) <= self.empties

    def merge_child(self, partial: DpTable, child_table: DpTable) -> DpTable:
        w, v = partial.owner, child_table.owner
        kids = self.children.get(w, [])
        if partial.merged >= len(kids) or kids[partial.merged] != v:
            raise GameError(f"table of node {v} is not the next child of node {w}")
        t = self.types
        v_pinned = v in self.instance.pinned
        size = partial.size + child_table.size
        out: Dict[DpKey, Entry] = {}
        stab = self.stability
        for a, ea in partial.entries.items():
            cw = a.color
            occ_w = int(cw != EMPTY)
            for b, eb in child_table.entries.items():
                n = tuple(x + y for x, y in zip(a.n, b.n))
                if not self._admissible(n, size):
                    continue
                cv = b.color
                sk = sum(b.k)
                u_v = None
                if cv != EMPTY:
                    u_v = _frac(b.k[cv] + (cw == cv), sk + occ_w)
                if stab:
                    if not self._stable_pair(a, b, cw, occ_w, cv, sk, u_v, v_pinned):
                        continue
                    lo_child = a.lo_child
                    if cv != EMPTY and not v_pinned and u_v < lo_child[cv]:
                        lo_child = lo_child[:cv] + (u_v,) + lo_child[cv + 1:]
                    lo = tuple(min(x, y, z) for x, y, z in zip(a.lo, b.lo, b.lo_child))
                    if cv == EMPTY:
                        hi = tuple(max(a.hi[x], b.hi[x], _frac(b.k[x] + (cw == x), sk + occ_w))
                                   for x in range(t))
                    else:
                        hi = tuple(max(x, y) for x, y in zip(a.hi, b.hi))
                    if occ_w:
                        hi_top = max(a.hi_top, b.hi[cw], _frac(b.k[cw], sk) if cv == EMPTY else ZERO)
                    else:
                        hi_top = ZERO
                else:
                    lo_child, lo, hi, hi_top = a.lo_child, a.lo, a.hi, a.hi_top
                k = a.k if cv == EMPTY else a.k[:cv] + (a.k[cv] + 1,) + a.k[cv + 1:]
                key = DpKey(cw, n, k, lo, lo_child, hi, hi_top)
                welfare = ea.welfare + eb.welfare
                if u_v is not None and not v_pinned:
                    welfare += u_v
                old = out.get(key)
                if old is None or welfare > old.welfare:
                    out[key] = Entry(welfare, (a, b))
        if self.prune:
            out = _pareto(out, with_welfare=True)
        return DpTable(w, partial.merged + 1, size, out)

    def _stable_pair(self, a, b, cw, occ_w, cv, sk, u_v, v_pinned) -> bool:
        for x in range(self.types):
            # branch agents vs. earlier branches, and earlier branches vs. this branch
            if b.lo[x] < a.hi[x] or b.lo_child[x] < a.hi[x]:
                return False
            if a.lo[x] < b.hi[x] or a.lo_child[x] < b.hi[x]:
                return False
        if cv == EMPTY:
            for x in range(self.types):
                far = _frac(b.k[x] + (cw == x), sk + occ_w)
                if b.lo[x] < far or a.lo[x] < far or a.lo_child[x] < far:
                    return False
                if b.k[x] > 0 and b.lo_child[x] < _frac(b.k[x] + (cw == x) - 1, sk + occ_w - 1):
                    return False
        elif not v_pinned:
            if u_v < a.hi[cv] or u_v < b.hi_top:
                return False
        return True

    def table(self, v: int) -> DpTable:
        """Final table of ``v`` (all children merged); builds the subtree on demand."""
        if v not in self.tables:
            self._build(v)
        return self.tables[v][-1]

    def _build(self, top: int):
        order = []
        stack = [top]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(c for c in self.children[u] if c not in self.tables)
        for u in reversed(order):
            if u in self.tables:
                continue
            seq = [self.leaf_table(u)]
            for c in self.children[u]:
                seq.append(self.merge_child(seq[-1], self.tables[c][-1]))
            self.tables[u] = seq

    def root_value(self, key: DpKey) -> Optional[Fraction]:
        """Utility of the root occupant if ``key`` passes the root conditions, else None."""
        if key.n != self.census:
            return None
        sk = sum(key.k)
        root_strategic = self.root not in self.instance.pinned
        if key.color == EMPTY:
            if self.stability:
                for x in range(self.types):
                    if key.k[x] == 0:
                        continue
                    if key.lo[x] < _frac(key.k[x], sk) or key.lo_child[x] < _frac(key.k[x] - 1, sk - 1):
                        return None
            return ZERO
        u = _frac(key.k[key.color], sk)
        if not root_strategic:
            return ZERO
        if self.stability and u < key.hi_top:
            return None
        return u

    def accept(self, best_welfare: bool = False) -> Optional[Tuple[DpKey, Fraction]]:
        """Accepting root key with its total welfare."""
        table = self.table(self.root)
        key = dp_root_accept(self.instance, table, self, best_welfare)
        if key is None:
            return None
        return key, table.entries[key].welfare + self.root_value(key)

    def reconstruct(self, key: DpKey) -> Assignment:
        colors: Dict[int, int] = {}
        stack = [(self.root, key)]
        while stack:
            node, k = stack.pop()
            seq = self.tables[node]
            for level in range(len(seq) - 1, 0, -1):
                a, b = seq[level].entries[k].back
                stack.append((self.children[node][level - 1], b))
                k = a
            colors[node] = k.color
        return self._assignment(colors)

    def _assignment(self, colors: Dict[int, int]) -> Assignment:
        inst = self.instance
        nodes = [0] * inst.n
        for i, v in inst.stubborn.items():
            nodes[i] = v
        pool: Dict[int, List[int]] = {}
        for i in sorted(inst.strategic):
            pool.setdefault(inst.type_of(i), []).append(i)
        for v in sorted(colors):
            c = colors[v]
            if c == EMPTY or v in inst.pinned:
                continue
            nodes[pool[c].pop(0)] = v
        if any(pool.values()):
            raise GameError("reconstruction left agents unplaced")
        return Assignment(tuple(nodes))


# ------------------------------------------------------------ public API


def dp_leaf_table(instance: GameInstance, leaf: int, dp: Optional[TreeDP] = None) -> DpTable:
    dp = dp or TreeDP(instance)
    if dp.children[leaf]:
        raise GameError(f"node {leaf} is not a leaf of the rooted tree")
    return dp.leaf_table(leaf)


def dp_merge_child(instance: GameInstance, partial: DpTable, child_table: DpTable,
                   dp: Optional[TreeDP] = None) -> DpTable:
    return (dp or TreeDP(instance)).merge_child(partial, child_table)


def dp_root_accept(instance: GameInstance, root_table: DpTable, dp: Optional[TreeDP] = None,
                   best_welfare: bool = False) -> Optional[DpKey]:
    """Accepting key of a root table: lexicographically smallest, or of maximum total welfare."""
    dp = dp or TreeDP(instance)
    best = None
    for key in sorted(root_table.entries):
        u = dp.root_value(key)
        if u is None:
            continue
        if not best_welfare:
            return key
        total = root_table.entries[key].welfare + u
        if best is None or total > best[1]:
            best = (key, total)
    return None if best is None else best[0]


def tree_decide_equilibrium(instance: GameInstance) -> Optional[Assignment]:
    dp = TreeDP(instance)
    hit = dp.accept()
    return None if hit is None else dp.reconstruct(hit[0])


def tree_max_welfare_equilibrium(instance: GameInstance) -> Optional[Tuple[Assignment, Fraction]]:
    dp = TreeDP(instance)
    hit = dp.accept(best_welfare=True)
    return None if hit is None else (dp.reconstruct(hit[0]), hit[1])


def tree_optimal_assignment(instance: GameInstance) -> Tuple[Assignment, Fraction]:
    dp = TreeDP(instance, stability=False)
    hit = dp.accept(best_welfare=True)
    if hit is None:
        raise GameError("no assignment fits the tree")
    return dp.reconstruct(hit[0]), hit[1]


def table_size_bound(instance: GameInstance) -> int:
    """Dense index-space size per node, ``(k+1)(n+1)^(2k)|U|^(3k+1)``."""
    k, n = instance.k, instance.n
    return (k + 1) * (n + 1) ** (2 * k) * len(utility_grid(max(n, 1))) ** (3 * k + 1)
