"""``schelling`` command line.

Exit codes: 0 found, 1 proven absent, 2 invalid input or unusable method,
3 inconclusive (dynamics hit its step limit).
"""

from __future__ import annotations

import json
import sys

import click

from . import dynamics as dyn
from . import instances as gen
from . import io
from .core import (Fractional, GameError, Linear, ModifiedFractional, check_assignment, is_equilibrium,
                   social_welfare, validate)
from .search import (DEFAULT_BUDGET, RatioResult, enumerate_assignments, find_all_equilibria,
                     optimal_welfare, price_of_anarchy, price_of_stability)
from .treedp import tree_decide_equilibrium, tree_max_welfare_equilibrium, tree_optimal_assignment

FOUND, ABSENT, INVALID, INCONCLUSIVE = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, message, code=INVALID):
        super().__init__(message)
        self.code = code


def _merge_options(ctx, budget, seed, out, as_json):
    """Global flags may be given before or after the subcommand."""
    opts = dict(ctx.find_root().obj or {})
    for key, val in (("budget", budget), ("seed", seed), ("out", out)):
        if val is not None:
            opts[key] = val
    if as_json:
        opts["json"] = True
    opts.setdefault("budget", DEFAULT_BUDGET)
    opts.setdefault("seed", 0)
    opts.setdefault("out", None)
    opts.setdefault("json", False)
    return opts


def global_options(fn):
    fn = click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Random seed.")(fn)
    fn = click.option("--budget", type=int, default=None, help="Brute-force assignment budget.")(fn)
    return fn


def command(name=None):
    """Subcommand wrapper: merges global flags and maps failures to exit codes."""

    def deco(fn):
        def wrapper(ctx, budget, seed, out, as_json, **kwargs):
            opts = _merge_options(ctx, budget, seed, out, as_json)
            try:
                code = fn(opts, **kwargs)
            except Failure as exc:
                click.echo(f"error: {exc}", err=True)
                code = exc.code
            except GameError as exc:
                click.echo(f"error: {exc}", err=True)
                code = INVALID
            ctx.exit(code or 0)

        wrapper.__doc__ = fn.__doc__
        # options declared on fn belong to the command
        wrapper.__click_params__ = list(getattr(fn, "__click_params__", []))
        return cli.command(name)(global_options(click.pass_context(wrapper)))

    return deco


@click.group()
@global_options
@click.pass_context
def cli(ctx, budget, seed, out, as_json):
    """Schelling games on graphs: equilibria, welfare, ratios and dynamics."""
    ctx.obj = {k: v for k, v in (("budget", budget), ("seed", seed), ("out", out)) if v is not None}
    if as_json:
        ctx.obj["json"] = True


# ---------------------------------------------------------------- helpers


def _load(path, check=True):
    try:
        inst = io.read_instance(path)
    except OSError as exc:
        raise Failure(f"cannot read {path}: {exc.strerror}")
    if check:
        errors = validate(inst)
        if errors:
            raise Failure("invalid instance: " + "; ".join(errors))
    return inst


def _emit(opts, text: str, report: dict):
    """Write the human text (or the JSON report with --json) to --out or stdout."""
    body = json.dumps(report, sort_keys=True, indent=2) + "\n" if opts["json"] else text
    if opts["out"]:
        with open(opts["out"], "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        click.echo(body, nl=False)


def _nodes(assignment):
    return " ".join(str(v) for v in assignment.nodes)


def _assign_report(assignment, sw):
    return {"nodes": list(assignment.nodes), "welfare": io.qstr(sw)}


# ---------------------------------------------------------------- commands


@command("validate")
@click.argument("path", type=click.Path())
def cmd_validate(opts, path):
    """Check an instance document; prints ok or the list of problems."""
    inst = _load(path, check=False)
    errors = validate(inst)
    if errors:
        for e in errors:
            click.echo(e)
        return INVALID
    _emit(opts, "ok\n", {"status": "ok"})
    return FOUND


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()] if text else []


GEN_FAMILIES = {
    "star": ("Star", ["type_sizes", "leaves"]),
    "path": ("Path", ["type_sizes", "nodes"]),
    "ring": ("Ring", ["type_sizes", "nodes"]),
    "nonexistence-tree": ("NonexistenceTree", ["k"]),
    "poa-cliques": ("PoaCliques", ["k", "l"]),
    "poa-stubborn-cliques": ("PoaStubbornCliques", ["k"]),
    "poa-star-stubborn": ("PoaStarStubborn", ["k", "l"]),
    "poa-star-two-per-type": ("PoaStarTwoPerType", ["k", "n"]),
    "poa-star-unbounded": ("PoaStarUnbounded", ["k"]),
    "pos-unbounded": ("PosUnbounded", ["eps"]),
    "pos-three": ("PosThree", ["x"]),
    "pos-34-33": ("PosThirtyFourOver33", []),
}
REDUCTIONS = ("reduce-clique", "reduce-clique-welfare", "reduce-hamiltonian")
RANDOM = ("random", "random-tree")
MODEL_CHOICE = click.Choice(["fractional", "modified", "linear"])


def _model(name, alpha, beta):
    if name == "linear":
        return Linear(io.parse_q(alpha), io.parse_q(beta))
    return ModifiedFractional() if name == "modified" else Fractional()


def _summary(inst) -> list:
    lines = [f"nodes {inst.topology.node_count}, edges {len(inst.topology.edges)}, agents {inst.n}"]
    if inst.typed:
        for t in range(inst.k):
            members = [i for i in range(inst.n) if inst.type_of(i) == t]
            stub = sum(1 for i in members if i in inst.stubborn)
            lines.append(f"type {t}: {len(members) - stub} strategic, {stub} stubborn")
    else:
        lines.append(f"social network: {len(inst.friendship.edges)} friendships, "
                     f"{len(inst.stubborn)} stubborn")
    pins = [f"{i}@{v}" for i, v in inst.stubborn.items()]
    shown = " ".join(pins[:12]) + (f" (+{len(pins) - 12} more)" if len(pins) > 12 else "")
    lines.append(f"stubborn pins: {shown or 'none'}")
    return lines


@command("gen")
@click.argument("family", type=click.Choice(sorted(list(GEN_FAMILIES) + list(REDUCTIONS) + list(RANDOM))))
@click.option("--k", type=int)
@click.option("--l", "l_", type=int)
@click.option("--n", type=int)
@click.option("--x", type=int)
@click.option("--eps", type=str)
@click.option("--s", type=int)
@click.option("--graph", type=click.Path(dir_okay=False))
@click.option("--type-sizes", type=str, help="Comma-separated counts per type.")
@click.option("--stubborn", type=str, help="Comma-separated stubborn counts per type (random families).")
@click.option("--nodes", type=int)
@click.option("--leaves", type=int)
@click.option("--edge-prob", type=str, default="1/2")
@click.option("--connected", is_flag=True)
@click.option("--model", type=MODEL_CHOICE, default="fractional")
@click.option("--alpha", type=str, default="1")
@click.option("--beta", type=str, default="0")
def cmd_gen(opts, family, k, l_, n, x, eps, s, graph, type_sizes, stubborn, nodes, leaves,
            edge_prob, connected, model, alpha, beta):
    """Generate an instance document for a named family, reduction or random draw."""
    extra = []
    target = None
    if family in GEN_FAMILIES:
        name, wanted = GEN_FAMILIES[family]
        given = {"k": k, "l": l_, "n": n, "x": x, "eps": eps, "nodes": nodes, "leaves": leaves,
                 "type_sizes": _ints(type_sizes) or None}
        params = {p: given[p] for p in wanted if given[p] is not None}
        if "eps" in params:
            params["eps"] = io.parse_q(params["eps"])
        inst = gen.gen_family(gen.FamilySpec(name, params))
    elif family in REDUCTIONS:
        if not graph:
            raise Failure(f"{family} needs --graph")
        try:
            with open(graph, encoding="utf-8") as fh:
                H = gen.ExternalGraph.parse(fh.read())
        except OSError as exc:
            raise Failure(f"cannot read {graph}: {exc.strerror}")
        except ValueError as exc:
            raise Failure(f"bad graph file: {exc}")
        if family == "reduce-clique":
            if s is None:
                raise Failure("reduce-clique needs --s")
            inst = gen.reduce_clique_equilibrium(H, s)
            extra.append("G3: 3 empty nodes x, y, z and a stubborn pool of 121 nodes, 41 red and 80 blue")
        elif family == "reduce-clique-welfare":
            if s is None:
                raise Failure("reduce-clique-welfare needs --s")
            inst, target = gen.reduce_clique_welfare(H, s)
        else:
            inst, target = gen.reduce_hamiltonian(H)
    else:
        sizes = _ints(type_sizes)
        if not sizes or nodes is None:
            raise Failure(f"{family} needs --type-sizes and --nodes")
        if family == "random":
            inst = gen.gen_random(nodes, io.parse_q(edge_prob), len(sizes), sizes, _ints(stubborn),
                                  _model(model, alpha, beta), opts["seed"], connected)
        else:
            inst = gen.gen_random_tree(nodes, sizes, _ints(stubborn), opts["seed"])
            inst = inst.with_utility(_model(model, alpha, beta))
    errors = validate(inst)
    if errors:
        raise Failure("generated instance is invalid: " + "; ".join(errors))
    summary = _summary(inst) + extra
    if target is not None:
        summary.append(f"welfare target {io.qstr(target)}")
    doc = io.dumps(inst)
    if opts["out"]:
        with open(opts["out"], "w", encoding="utf-8") as fh:
            fh.write(doc)
        for line in summary:
            click.echo(line)
    else:
        click.echo(doc, nl=False)
        for line in summary:
            click.echo(line, err=True)
    return FOUND


def _require_tree(inst):
    if not inst.typed or not isinstance(inst.utility, Fractional) or not inst.topology.is_tree():
        raise Failure("treedp needs a typed instance with fractional utilities on a tree")


@command("solve")
@click.argument("path", type=click.Path())
@click.option("--method", type=click.Choice(["brute", "treedp", "dynamics"]), default="brute")
@click.option("--policy", type=click.Choice(["best", "first"]), default="best")
def cmd_solve(opts, path, method, policy):
    """Find one equilibrium (or prove there is none)."""
    inst = _load(path)
    if method == "brute":
        found = None
        for a in enumerate_assignments(inst, opts["budget"]):
            if is_equilibrium(inst, a):
                found = a
                break
        verdict = FOUND if found else ABSENT
    elif method == "treedp":
        _require_tree(inst)
        found = tree_decide_equilibrium(inst)
        verdict = FOUND if found else ABSENT
    else:
        trace = dyn.run_dynamics(inst, dyn.initial_assignment(inst), dyn.MovePolicy(policy))
        found = trace.final if trace.converged else None
        verdict = FOUND if trace.converged else INCONCLUSIVE
    if found is not None:
        sw = social_welfare(inst, found)
        text = f"equilibrium {_nodes(found)}\nwelfare {io.qstr(sw)}\n"
        report = {"result": "equilibrium", "method": method, **_assign_report(found, sw)}
    elif verdict == ABSENT:
        text, report = "no-equilibrium\n", {"result": "no-equilibrium", "method": method}
    else:
        text = f"inconclusive: step limit reached at {_nodes(trace.final)}\n"
        report = {"result": "inconclusive", "method": method, "nodes": list(trace.final.nodes)}
    _emit(opts, text, report)
    return verdict


@command("equilibria")
@click.argument("path", type=click.Path())
def cmd_equilibria(opts, path):
    """List every equilibrium (one per type-colouring in typed mode)."""
    inst = _load(path)
    eqs = find_all_equilibria(inst, opts["budget"])
    text = "".join(f"{_nodes(a)} welfare {io.qstr(sw)}\n" for a, sw in eqs) or "no-equilibrium\n"
    _emit(opts, text, {"count": len(eqs), "equilibria": [_assign_report(a, sw) for a, sw in eqs]})
    return FOUND if eqs else ABSENT


@command("welfare")
@click.argument("path", type=click.Path())
@click.option("--method", type=click.Choice(["brute", "treedp"]), default="brute")
@click.option("--equilibrium", is_flag=True, help="Maximise over equilibria only.")
def cmd_welfare(opts, path, method, equilibrium):
    """Maximum social welfare over all assignments (or over equilibria)."""
    inst = _load(path)
    if method == "treedp":
        _require_tree(inst)
        best = tree_max_welfare_equilibrium(inst) if equilibrium else tree_optimal_assignment(inst)
    elif equilibrium:
        eqs = find_all_equilibria(inst, opts["budget"])
        best = max(eqs, key=lambda e: e[1]) if eqs else None
    else:
        best = optimal_welfare(inst, opts["budget"])
    if best is None:
        _emit(opts, "no-equilibrium\n", {"result": "no-equilibrium"})
        return ABSENT
    a, sw = best
    _emit(opts, f"welfare {io.qstr(sw)}\nassignment {_nodes(a)}\n", {"result": "value", **_assign_report(a, sw)})
    return FOUND


@command("ratio")
@click.argument("path", type=click.Path())
@click.argument("which", type=click.Choice(["poa", "pos"]))
def cmd_ratio(opts, path, which):
    """Price of anarchy or stability by exhaustive search."""
    inst = _load(path)
    res = (price_of_anarchy if which == "poa" else price_of_stability)(inst, opts["budget"])
    shown = io.qstr(res.value) if res.kind == RatioResult.VALUE else res.kind
    lines = [f"{which} {shown}"]
    report = {"which": which, "kind": res.kind}
    if res.value is not None:
        report["value"] = io.qstr(res.value)
    if res.optimum:
        lines.append(f"optimum {io.qstr(res.optimum[1])} at {_nodes(res.optimum[0])}")
        report["optimum"] = _assign_report(*res.optimum)
    if res.witness:
        label = "worst" if which == "poa" else "best"
        lines.append(f"{label} equilibrium {io.qstr(res.witness[1])} at {_nodes(res.witness[0])}")
        report["witness"] = _assign_report(*res.witness)
    _emit(opts, "\n".join(lines) + "\n", report)
    return ABSENT if res.kind == RatioResult.NO_EQUILIBRIUM else FOUND


@command("dynamics")
@click.argument("path", type=click.Path())
@click.option("--start", default="initial", help='"initial", "random:SEED" or an assignment JSON file.')
@click.option("--policy", type=click.Choice(["best", "first"]), default="best")
@click.option("--max-steps", type=int, default=None)
def cmd_dynamics(opts, path, start, policy, max_steps):
    """Run best-response dynamics and write a step-per-line trace."""
    inst = _load(path)
    if start == "initial":
        a = dyn.initial_assignment(inst)
    elif start.startswith("random:"):
        try:
            seed = int(start.split(":", 1)[1])
        except ValueError:
            raise Failure(f"bad start {start!r}")
        a = dyn.random_assignment(inst, seed)
    else:
        try:
            a = io.read_assignment(start)
        except OSError as exc:
            raise Failure(f"cannot read {start}: {exc.strerror}")
    errors = check_assignment(inst, a)
    if errors:
        raise Failure("invalid start: " + "; ".join(errors))
    trace = dyn.run_dynamics(inst, a, dyn.MovePolicy(policy), max_steps)
    lines = io.trace_lines(trace)
    report = {"outcome": trace.outcome, "steps": len(trace.steps), "final": list(trace.final.nodes),
              "trace": lines[:-1]}
    _emit(opts, "\n".join(lines) + "\n", report)
    return FOUND if trace.converged else INCONCLUSIVE


def main(argv=None):
    cli.main(args=argv, prog_name="schelling")


if __name__ == "__main__":
    sys.exit(main())
