"""Exit criteria of the build.

Each test collects named sub-checks, prints a single PASS/FAIL line and then
asserts every sub-check.  The lines are repeated in the terminal summary by
``conftest.py``.  Run with ``pytest tests/test_acceptance.py -s`` to see them
inline.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction as Q
from itertools import combinations

import pytest
from click.testing import CliRunner

from schelling import io
from schelling.cli import cli
from schelling.core import (
    Assignment,
    GameInstance,
    Linear,
    Social,
    Typed,
    best_deviation,
    is_equilibrium,
    neighbor_counts,
    social_welfare,
    utility,
)
from schelling.dynamics import construct_equilibrium_simple, random_assignment, run_dynamics
from schelling.instances import (
    ExternalGraph,
    clique_gadget_nodes,
    gen_random,
    nonexistence_tree,
    path_topology,
    poa_cliques,
    poa_star_stubborn,
    poa_star_unbounded,
    poa_stubborn_cliques,
    pos34_assignment,
    pos_34_33,
    pos_three,
    pos_unbounded,
    reduce_clique_equilibrium,
    reduce_clique_welfare,
    reduce_hamiltonian,
    ring_topology,
    star_topology,
)
from schelling.search import (
    RatioResult,
    count_assignments,
    find_all_equilibria,
    optimal_welfare,
    price_of_anarchy,
    price_of_stability,
)
from schelling.treedp import (
    tree_decide_equilibrium,
    tree_max_welfare_equilibrium,
    tree_optimal_assignment,
)

from .test_treedp import _random_tree_case

pytestmark = pytest.mark.acceptance

RESULTS = {}


class Checks:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.items = []

    def add(self, label, ok, detail=""):
        self.items.append((label, bool(ok), detail))

    def finish(self):
        failed = [(label, detail) for label, ok, detail in self.items if not ok]
        verdict = "FAIL" if failed else "PASS"
        line = f"criterion {self.number:>2} {verdict}: {self.title} ({len(self.items) - len(failed)}/{len(self.items)} checks)"
        if failed:
            line += "; failed: " + "; ".join(f"{label} [{detail}]" if detail else label for label, detail in failed)
        RESULTS[self.number] = line
        print("\n" + line)
        assert not failed, line


def cli_run(*args):
    return CliRunner().invoke(cli, [str(a) for a in args], catch_exceptions=False)


# ---------------------------------------------------------------- 1


def test_criterion_01_nonexistence_tree(tmp_path):
    c = Checks(1, "non-existence on the k=2 and k=3 trees")
    path = tmp_path / "t2.json"
    c.add("gen k=2", cli_run("gen", "nonexistence-tree", "--k", 2, "--out", path).exit_code == 0)
    for method in ("brute", "treedp"):
        start = time.perf_counter()
        res = cli_run("solve", path, "--method", method)
        elapsed = time.perf_counter() - start
        c.add(f"{method} reports no-equilibrium",
              res.exit_code == 1 and res.stdout.strip() == "no-equilibrium", res.stdout.strip())
        c.add(f"{method} under 1 s", elapsed < 1, f"{elapsed:.2f} s")
    c.add("2772 colourings", count_assignments(io.read_instance(str(path))) == 2772)
    inst3 = nonexistence_tree(3)
    c.add("k=3 shape", (inst3.n, inst3.topology.node_count) == (21, 22))
    c.add("k=3 treedp no-equilibrium", tree_decide_equilibrium(inst3) is None)
    c.finish()


# ---------------------------------------------------------------- 2


def _random_friendship(rng, n):
    if rng.random() < 0.5:
        k = rng.randint(2, min(3, n))
        types = list(range(k)) + [rng.randrange(k) for _ in range(n - k)]
        rng.shuffle(types)
        return Typed(tuple(types))
    return Social(frozenset(e for e in combinations(range(n), 2) if rng.random() < 0.5))


def _simple_topology_cases():
    rng = random.Random(2)
    for leaves in range(2, 9):
        for _ in range(8):
            yield star_topology(leaves), rng
    for m in range(3, 9):
        for make in (path_topology, ring_topology):
            for _ in range(6):
                yield make(m), rng


def test_criterion_02_existence_constructors():
    c = Checks(2, "equilibria on stars, paths and rings")
    cases = bad_construct = bad_steps = bad_delta = 0
    for topo, rng in _simple_topology_cases():
        m = topo.node_count
        n = rng.randint(2, m - 1)
        stub = rng.randint(0, n - 1) if rng.random() < 0.3 else 0
        pins = rng.sample(range(m), stub)
        inst = GameInstance(topo, frozenset(range(n - stub)),
                            {n - stub + j: v for j, v in enumerate(pins)}, _random_friendship(rng, n))
        cases += 1
        if not is_equilibrium(inst, construct_equilibrium_simple(inst)):
            bad_construct += 1
        trace = run_dynamics(inst, random_assignment(inst, cases), max_steps=10 * m)
        if not trace.converged or len(trace.steps) > 3 * m + 1 or not is_equilibrium(inst, trace.final):
            bad_steps += 1
        for s in trace.steps:
            if s.potential_before is not None and s.potential_after - s.potential_before < Q(1, 3):
                bad_delta += 1
    c.add("at least 100 cases", cases >= 100, str(cases))
    c.add("constructor returns an equilibrium", bad_construct == 0, f"{bad_construct} failures")
    c.add("dynamics within 3|V|+1 steps", bad_steps == 0, f"{bad_steps} failures")
    c.add("potential deltas >= 1/3", bad_delta == 0, f"{bad_delta} failures")
    c.finish()


# ---------------------------------------------------------------- 3


def test_criterion_03_tree_dp_oracle():
    c = Checks(3, "tree DP equals brute force")
    rng = random.Random(3003)
    cases = verdicts = eq_values = opt_values = 0
    for j in range(200):
        inst = _random_tree_case(rng, seed=30000 + j)
        cases += 1
        eqs = find_all_equilibria(inst)
        verdicts += (tree_decide_equilibrium(inst) is None) != (not eqs)
        best = tree_max_welfare_equilibrium(inst)
        if eqs:
            eq_values += best is None or best[1] != max(sw for _, sw in eqs)
        else:
            eq_values += best is not None
        opt_values += tree_optimal_assignment(inst)[1] != optimal_welfare(inst)[1]
    c.add("200 trees", cases == 200)
    c.add("existence verdicts", verdicts == 0, f"{verdicts} mismatches")
    c.add("max-welfare equilibrium values", eq_values == 0, f"{eq_values} mismatches")
    c.add("optimal welfare values", opt_values == 0, f"{opt_values} mismatches")
    c.finish()


# ---------------------------------------------------------------- 4


def test_criterion_04_clique_gadget():
    c = Checks(4, "clique gadget for equilibrium existence")
    s = 5
    k5 = ExternalGraph.complete(5).padded(6)
    minus = ExternalGraph(5, ExternalGraph.complete(5).edges[1:]).padded(6)
    yes = reduce_clique_equilibrium(k5, s)
    no = reduce_clique_equilibrium(minus, s)
    c.add("792 placements", count_assignments(yes) == count_assignments(no) == 792,
          f"{count_assignments(yes)}, {count_assignments(no)}")
    c.add("K5 plus isolated vertex has an equilibrium", len(find_all_equilibria(yes)) > 0)
    c.add("K5 minus an edge has none", find_all_equilibria(no) == [])

    nodes = clique_gadget_nodes(k5, s)
    x, y, z, L = nodes["x"], nodes["y"], nodes["z"], nodes["L"]
    pins = tuple(v for _, v in sorted(yes.stubborn.items()))
    on_clique = Assignment(tuple(range(5)) + pins)
    c.add("5/12 at z", utility(yes, on_clique, 0, at=z) == Q(5, 12))
    at_y = Assignment((y, *L, 0) + pins)
    c.add("41/121 at y", utility(yes, at_y, 0) == Q(41, 121))
    c.add("y prefers z", best_deviation(yes, at_y, 0) == (z, Q(5, 12)))
    with_x = Assignment((y, *L, x) + pins)
    c.add("42/122 at y with x taken", utility(yes, with_x, 0) == Q(42, 122))
    c.add("1/3 at x", utility(yes, Assignment((1, *L, 0) + pins), 4, at=x) == Q(1, 3))
    c.add("1/2 + 1/(4s) in L", utility(yes, with_x, 1) == Q(1, 2) + Q(1, 4 * s))
    c.add("z sees 5 friends and 7 enemies", neighbor_counts(yes, on_clique, 0, at=z) == (5, 7))
    c.finish()


# ---------------------------------------------------------------- 5


def test_criterion_05_welfare_gadgets():
    c = Checks(5, "welfare reductions")
    inst, _ = reduce_clique_welfare(ExternalGraph.complete(4), 4)
    opt = optimal_welfare(inst)[1]
    c.add("clique gadget on K4 reaches 3", opt == 3, str(opt))
    inst, _ = reduce_clique_welfare(ExternalGraph.cycle(5), 3)
    opt = optimal_welfare(inst)[1]
    c.add("clique gadget on C5 stays below 2", opt < 2, str(opt))
    inst, _ = reduce_hamiltonian(ExternalGraph.cycle(6))
    opt = optimal_welfare(inst)[1]
    c.add("Hamiltonian gadget on C6 reaches 6", opt == 6, str(opt))
    inst, _ = reduce_hamiltonian(ExternalGraph.star(3))
    opt = optimal_welfare(inst)[1]
    c.add("Hamiltonian gadget on K_{1,3} stays below 4", opt < 4, str(opt))
    c.finish()


# ---------------------------------------------------------------- 6


def test_criterion_06_poa_table():
    c = Checks(6, "price of anarchy constructions")
    cliques = poa_cliques(2, 2)
    res = price_of_anarchy(cliques)
    c.add("cliques k=2 l=2 optimum 12", res.optimum[1] == 12, str(res.optimum[1]))
    c.add("cliques k=2 l=2 block equilibrium of welfare 8 present",
          any(sw == 8 for _, sw in find_all_equilibria(cliques)))
    worst = res.witness[1] if res.witness else None
    c.add("cliques k=2 l=2 worst equilibrium 8", worst == 8, str(worst))
    c.add("cliques k=2 l=2 PoA 3/2", res.kind == RatioResult.VALUE and res.value == Q(3, 2), str(res))
    res = price_of_anarchy(poa_star_unbounded(2))
    c.add("star with types 2,1 unbounded", res.kind == RatioResult.UNBOUNDED, str(res))
    res = price_of_anarchy(poa_star_stubborn(2, 3))
    c.add("stubborn star k=2 l=3 PoA 6", res.kind == RatioResult.VALUE and res.value == 6, str(res))
    c.add("stubborn star above n-k = 4", res.kind == RatioResult.VALUE and res.value >= 4, str(res))
    res = price_of_anarchy(poa_stubborn_cliques(3))
    c.add("stubborn cliques k=3 PoA 3", res.kind == RatioResult.VALUE and res.value == 3, str(res))
    c.finish()


# ---------------------------------------------------------------- 7


def test_criterion_07_pos_table():
    c = Checks(7, "price of stability constructions")
    for eps in (Q(1, 2), Q(1, 4)):
        res = price_of_stability(pos_unbounded(eps))
        c.add(f"eps={eps} PoS 1/eps+1/2", res.kind == RatioResult.VALUE and res.value == 1 / eps + Q(1, 2),
              str(res))
    for x in (1, 2, 3):
        res = price_of_stability(pos_three(x))
        want = Q(3 * (2 * x + 1), 2 * (x + 1))
        c.add(f"x={x} PoS {want}", res.kind == RatioResult.VALUE and res.value == want, str(res))
    inst = pos_34_33()
    eqs = find_all_equilibria(inst)
    best = max(sw for _, sw in eqs) if eqs else None
    c.add("34/33 gadget best equilibrium 33/4", best == Q(33, 4), str(best))
    opt = optimal_welfare(inst)[1]
    c.add("34/33 gadget optimum 34/4", opt == Q(34, 4), str(opt))
    res = price_of_stability(inst)
    c.add("34/33 gadget PoS 34/33", res.kind == RatioResult.VALUE and res.value == Q(34, 33), str(res))
    c.add("34/33 gadget 97/12 equilibrium found", any(sw == Q(97, 12) for _, sw in eqs),
          "welfares " + ", ".join(str(w) for w in sorted({sw for _, sw in eqs})))
    named = pos34_assignment(["x", "y1", "w1", "w2", "w3"], ["y2", "z1", "z2", "z3", "beta"])
    c.add("named 33/4 assignment is stable", is_equilibrium(inst, named)
          and social_welfare(inst, named) == Q(33, 4))
    c.finish()


# ---------------------------------------------------------------- 8


def _connected(rng, seed, sizes, stubborn=()):
    nodes = sum(sizes) + sum(stubborn) + rng.randint(1, 2)
    return gen_random(nodes, Q(rng.choice([3, 4, 5]), 10), len(sizes), sizes, stubborn,
                      seed=seed, connected=True)


def test_criterion_08_welfare_lower_bounds():
    c = Checks(8, "equilibrium welfare lower bounds")
    rng = random.Random(8008)
    counts = [0, 0, 0]
    bad = [0, 0, 0]
    for i in range(100):
        k = rng.choice([2, 3])
        inst = _connected(rng, 80000 + i, [rng.randint(2, 3) for _ in range(k)])
        counts[0] += 1
        bad[0] += sum(1 for _, sw in find_all_equilibria(inst) if sw < 1)

        size = rng.randint(2, 3)
        inst = _connected(rng, 81000 + i, [size] * k)
        counts[1] += 1
        bad[1] += sum(1 for _, sw in find_all_equilibria(inst) if sw < Q(inst.n, k) - 1)

        t, l = rng.randint(2, 3), rng.randint(1, 2)
        inst = _connected(rng, 82000 + i, [t, t], [l, l])
        counts[2] += 1
        bad[2] += sum(1 for _, sw in find_all_equilibria(inst) if sw < t - 1)
    c.add("100 instances per bound", min(counts) >= 100, str(counts))
    c.add("SW >= 1", bad[0] == 0, f"{bad[0]} violations")
    c.add("SW >= n/k - 1 for equal types", bad[1] == 0, f"{bad[1]} violations")
    c.add("SW >= t - 1 with stubborn agents", bad[2] == 0, f"{bad[2]} violations")
    c.finish()


# ---------------------------------------------------------------- 9


def test_criterion_09_linear_utilities():
    c = Checks(9, "linear utilities")
    rng = random.Random(9009)
    cases = stuck = bad_delta = free = bad_pos = 0
    for i in range(120):
        k = rng.choice([2, 3])
        sizes = [rng.randint(1, 2) for _ in range(k)]
        stubborn = [rng.randint(0, 1) for _ in range(k)] if i % 2 else []
        nodes = sum(sizes) + sum(stubborn) + rng.randint(1, 3)
        model = Linear(Q(rng.randint(0, 6), rng.randint(1, 3)), Q(rng.randint(0, 6), rng.randint(1, 3)))
        social = Q(1, 2) if rng.random() < 0.3 else None
        inst = gen_random(nodes, Q(rng.choice([3, 5, 7]), 10), k, sizes, stubborn, model=model,
                          seed=90000 + i, social_edge_prob=social)
        cases += 1
        trace = run_dynamics(inst, random_assignment(inst, i))
        stuck += not trace.converged or not is_equilibrium(inst, trace.final)
        bad_delta += sum(1 for s in trace.steps
                         if s.potential_after - s.potential_before != 2 * (s.new_utility - s.old_utility))
        if not inst.stubborn:
            free += 1
            eqs = find_all_equilibria(inst)
            bad_pos += not eqs or max(sw for _, sw in eqs) != optimal_welfare(inst)[1]
    c.add("at least 100 instances", cases >= 100, str(cases))
    c.add("dynamics converge", stuck == 0, f"{stuck} failures")
    c.add("potential delta is twice the gain", bad_delta == 0, f"{bad_delta} mismatches")
    c.add("stubborn-free optimum is an equilibrium", free > 0 and bad_pos == 0, f"{bad_pos} of {free}")
    c.finish()


# ---------------------------------------------------------------- 10


def _cli_process(*args):
    out = subprocess.run([sys.executable, "-m", "schelling.cli", *map(str, args)],
                         capture_output=True, check=False)
    return out.returncode, out.stdout


GEN_RUNS = [
    ("random", "--type-sizes", "3,2", "--stubborn", "1,1", "--nodes", 10, "--model", "linear", "--beta", "1/2"),
    ("random", "--type-sizes", "2,2", "--nodes", 8, "--edge-prob", "3/5", "--connected"),
    ("random-tree", "--type-sizes", "2,2,1", "--stubborn", "0,1,0", "--nodes", 9),
    ("nonexistence-tree", "--k", 3),
    ("pos-unbounded", "--eps", "1/4"),
]


def test_criterion_10_determinism(tmp_path):
    c = Checks(10, "byte-identical regeneration and traces")
    for n, args in enumerate(GEN_RUNS):
        files = []
        for run in ("a", "b"):
            path = tmp_path / f"gen{n}{run}.json"
            code, _ = _cli_process("--seed", 41, "gen", *args, "--out", path)
            files.append(path.read_bytes() if code == 0 and path.exists() else None)
        c.add(f"gen {args[0]} #{n}", files[0] is not None and files[0] == files[1])
        if files[0] is not None:
            c.add(f"gen {args[0]} #{n} round-trips", io.dumps(io.loads(files[0].decode())).encode() == files[0])
    instance = tmp_path / "gen0a.json"
    for start in ("initial", "random:3", "random:17"):
        for policy in ("best", "first"):
            outputs = [_cli_process("dynamics", instance, "--start", start, "--policy", policy) for _ in "ab"]
            c.add(f"trace {start} {policy}", outputs[0] == outputs[1] and outputs[0][1])
    c.finish()
