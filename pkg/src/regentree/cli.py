"""Command-line front end.

Subcommands: sample, gh, discretize, csbp, verify, contour.  Global flags
--seed, --out, --config, --plot.  Emitted data is CSV or MTT; with --plot a
PNG figure is rendered next to the delimited output.  Exit codes: 0 on
success, 1 when a verification check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from . import csbp, harness, mtt
from .coding import contour_of, tree_from_excursion
from .discretize import discretisation_witness
from .gh import InstanceTooLarge, gh_bracket_small, gh_lower_invariants, gh_upper
from .samplers import (
    FiniteThetaParams,
    OffspringDistribution,
    RngState,
    critical_binary,
    sample_approx_levy_tree,
    sample_dyck_excursion,
    sample_finite_theta,
    sample_gw_tree,
)
from .trees import MarkedTree


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regentree")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=str, default=None, help="output file (default: stdout)")
    ap.add_argument("--config", type=str, default=None, help="key = value defaults file")
    ap.add_argument("--plot", action="store_true", help="render a PNG next to the output")
    sub = ap.add_subparsers(dest="command")

    s = sub.add_parser("sample", help="draw trees or excursions")
    s.add_argument("--kind", choices=["finite-theta", "gw", "levy", "dyck"], default="finite-theta")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--p0", type=float, default=0.5, help="offspring mass at 0 (binary pmf)")
    s.add_argument("--max-level", type=float, default=None)
    s.add_argument("--levy-n", type=int, default=100)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--dyck-n", type=int, default=100)

    g = sub.add_parser("gh", help="bracket the pointed GH distance of two trees")
    g.add_argument("--a", required=True, help="first MTT file")
    g.add_argument("--b", required=True, help="second MTT file")
    g.add_argument("--delta", type=float, default=0.05)

    d = sub.add_parser("discretize", help="discretize a tree with a certified bound")
    d.add_argument("--tree", required=True, help="MTT file (first tree used)")
    d.add_argument("--eps", type=float, required=True)

    c = sub.add_parser("csbp", help="Laplace ODE and height-tail numerics")
    c.add_argument("--power", type=float, default=None, help="psi(u) = u^power")
    c.add_argument("--alpha", type=float, default=0.0)
    c.add_argument("--beta", type=float, default=0.0)
    c.add_argument("--t", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    c.add_argument("--lam", type=float, default=1.0)

    v = sub.add_parser("verify", help="run the Monte-Carlo verification suite")
    v.add_argument("--suite", choices=["default"], default=None)
    v.add_argument("--check", action="append", default=None, help="run a single named check")
    v.add_argument("--scale", type=float, default=1.0, help="sample-size multiplier")

    k = sub.add_parser("contour", help="contour excursion of a tree")
    k.add_argument("--tree", required=True, help="MTT file (first tree used)")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold `key = value` config lines in as defaults (flag > file > default)."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    actions: dict[str, argparse.Action] = {}
    for action in ap._actions:
        actions.setdefault(action.dest, action)
    for sp in ap._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        for action in sp._actions:
            actions.setdefault(action.dest, action)
    defaults = {}
    with open(path, "r", encoding="ascii") as f:
        for ln, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                ap.error(f"config line {ln}: expected 'key = value'")
            key, value = (x.strip() for x in line.split("=", 1))
            dest = key.replace("-", "_")
            if dest not in actions or dest in ("help", "command", "config"):
                ap.error(f"config line {ln}: unknown key {key!r}")
            action = actions[dest]
            if isinstance(action, argparse._StoreTrueAction):
                if value.lower() not in ("true", "false"):
                    ap.error(f"config line {ln}: {key!r} must be true or false")
                defaults[dest] = value.lower() == "true"
            elif action.type is not None:
                try:
                    defaults[dest] = action.type(value)
                except ValueError:
                    ap.error(f"config line {ln}: bad value for {key!r}")
            else:
                defaults[dest] = value
    ap.set_defaults(**defaults)
    for sp in ap._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        sp.set_defaults(**{k: v for k, v in defaults.items() if any(a.dest == k for a in sp._actions)})
    return argv


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii") as f:
            f.write(text)


def _plot_path(out: str | None, fallback: str) -> str:
    if out is None:
        return fallback
    stem = out.rsplit(".", 1)[0] if "." in out else out
    return stem + ".png"


def _cmd_sample(args) -> int:
    rng = RngState(args.seed)
    if args.kind == "dyck":
        g = sample_dyck_excursion(args.dyck_n, rng)
        lines = ["s,g"] + [f"{s!r},{v!r}" for s, v in g.breakpoints]
        _emit("\n".join(lines) + "\n", args.out)
        if args.plot:
            from .plots import plot_excursion

            plot_excursion(g, _plot_path(args.out, "sample.png"), "Dyck excursion")
        return 0
    trees: list[MarkedTree] = []
    gen = rng.generator()
    for _ in range(args.n):
        if args.kind == "finite-theta":
            p = FiniteThetaParams(
                args.a, OffspringDistribution.from_pmf({0: args.p0, 2: 1.0 - args.p0})
            )
            trees.append(sample_finite_theta(p, gen, max_level=args.max_level))
        elif args.kind == "gw":
            theta = sample_gw_tree(
                OffspringDistribution.from_pmf({0: args.p0, 2: 1.0 - args.p0}), gen
            )
            trees.append(MarkedTree.from_shape(theta, edge=1.0, root=0.0))
        else:
            family = "stable" if args.alpha else "quadratic"
            trees.append(
                sample_approx_levy_tree(family, args.levy_n, args.a, gen, alpha=args.alpha)
            )
    _emit("".join(mtt.serialize_tree(t) + "\n" for t in trees), args.out)
    if args.plot and trees:
        from .plots import plot_tree

        plot_tree(trees[0], _plot_path(args.out, "sample.png"), f"{args.kind} sample")
    return 0


def _cmd_gh(args) -> int:
    a = mtt.parse_tree_file(args.a)[0]
    b = mtt.parse_tree_file(args.b)[0]
    try:
        lo, hi = gh_bracket_small(a, b, args.delta)
    except InstanceTooLarge:
        lo, hi = gh_lower_invariants(a, b), gh_upper(a, b, args.delta)
    _emit(f"lower,upper\n{lo!r},{hi!r}\n", args.out)
    return 0


def _cmd_discretize(args) -> int:
    tree = mtt.parse_tree_file(args.tree)[0]
    result, bound = discretisation_witness(tree, args.eps)
    lines = [
        "skeleton," + mtt.serialize_tree(result.skeleton),
        "shape," + repr(tuple(result.xi.rep.nodes())).replace(",", ";"),
        f"bound,{bound!r}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        from .plots import plot_tree

        plot_tree(result.skeleton, _plot_path(args.out, "discretize.png"), "scaled skeleton")
    return 0


def _cmd_csbp(args) -> int:
    m = csbp.BranchingMechanism(alpha=args.alpha, beta=args.beta, power=args.power)
    if args.power is None and args.beta == 0.0 and args.alpha == 0.0:
        m = csbp.BranchingMechanism(beta=1.0)
    verdict, value = csbp.extinction_integral(m)
    rows = ["t,lambda,u,v"]
    vs = []
    for t in args.t:
        u = csbp.u_solve(m, t, args.lam)
        v = csbp.v_levy(m, t) if verdict == "finite" else float("nan")
        vs.append(v)
        rows.append(f"{t!r},{args.lam!r},{u!r},{v!r}")
    rows.append(f"extinction,{verdict},{value!r},")
    _emit("\n".join(rows) + "\n", args.out)
    if args.plot:
        from .plots import plot_curve

        plot_curve(args.t, vs, _plot_path(args.out, "csbp.png"), "t", "v(t)")
    return 0


def _cmd_verify(args) -> int:
    names = args.check if args.check else None
    reports = harness.run_suite(args.seed, names=names, scale=args.scale)
    _emit(harness.report_csv(reports), args.out)
    if args.plot:
        from .plots import plot_reports

        plot_reports(reports, harness.SIGNIFICANCE, _plot_path(args.out, "verify.png"))
    return 0 if all(r.passed for r in reports) else 1


def _cmd_contour(args) -> int:
    tree = mtt.parse_tree_file(args.tree)[0]
    g = contour_of(tree)
    lines = ["s,g"] + [f"{s!r},{v!r}" for s, v in g.breakpoints]
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        from .plots import plot_excursion

        plot_excursion(g, _plot_path(args.out, "contour.png"), "contour excursion")
    # round-trip sanity: coding back must keep the tree a valid marked tree
    tree_from_excursion(g)
    return 0


def dispatch(argv: list[str]) -> int:
    ap = _build_parser()
    argv = _apply_config(ap, argv)
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_usage(sys.stderr)
        return 2
    try:
        handler = {
            "sample": _cmd_sample,
            "gh": _cmd_gh,
            "discretize": _cmd_discretize,
            "csbp": _cmd_csbp,
            "verify": _cmd_verify,
            "contour": _cmd_contour,
        }[args.command]
        return handler(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
