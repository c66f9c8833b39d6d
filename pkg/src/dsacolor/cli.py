"""Command line front end: ``dsacolor {stats,generate,export-lp,solve,verify,render}``.

Exit codes: 0 success, 1 usage, 2 input error or invalid solution,
3 budget exhausted without proof, 4 model size cap refused.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from dsacolor.conflict import build_graph, connected_components
from dsacolor.formulations import (DEFAULT_MAX_VARIABLES, MissingVariableError, ModelKind,
                                   ModelTooLarge, build_model, check_solution, encode_solution,
                                   export_lp, general_variable_count)
from dsacolor.groups import CatalogTooLarge, enumerate_groups, forbidden_triples
from dsacolor.layout import (LayoutError, Tech, TechRules, generate_cluster_layout,
                             generate_random_layout, load_layout, save_layout)
from dsacolor.render import save_svg
from dsacolor.report import solve_table, stats_table
from dsacolor.solver import Infeasible, SolveBudget, load_solution, save_solution, solve_layout

log = logging.getLogger("dsacolor")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BUDGET, EXIT_CAP = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(s):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def _add_rules(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("technology rules")
    g.add_argument("--litho", type=_positive(float), default=31.0,
                   help="lithography distance, border to border, nm (default: %(default)s)")
    g.add_argument("--l0", type=_positive(float), default=20.0,
                   help="minimum DSA pairing distance, center to center, nm (default: %(default)s)")
    g.add_argument("--u0", type=_positive(float), default=40.0,
                   help="maximum DSA pairing distance, center to center, nm (default: %(default)s)")
    g.add_argument("--tech", choices=[t.value for t in Tech], default=Tech.AXIS_193I.value,
                   help="lithography technology (default: %(default)s)")
    g.add_argument("--angle-window", type=float, nargs=2, default=(135.0, 225.0),
                   metavar=("LO", "HI"), help="EUV bend window in degrees (default: 135 225)")
    g.add_argument("--k", type=_positive(int), default=3,
                   help="maximum vias per group (default: %(default)s)")
    g.add_argument("--colors", "-L", type=_positive(int), default=5,
                   help="upper bound L on the number of colors (default: %(default)s)")
    g.add_argument("--inclusive", action="store_true",
                   help="count pairs exactly at the lithography distance as conflicts")
    g.add_argument("--no-lshape", action="store_true",
                   help="allow right-angle groups under the unrestricted technology")
    g.add_argument("--induced-wrt", choices=("E", "F"), default="E",
                   help="edge set against which group paths must be induced (default: E)")
    g.add_argument("--catalog-cap", type=_positive(int), default=1_000_000,
                   help="maximum number of enumerated groups (default: %(default)s)")
    g.add_argument("--mode", choices=("induced", "general"), default="induced",
                   help="group family: induced paths or Hamiltonian-path sets (default: induced)")


def _rules(a) -> TechRules:
    return TechRules(litho_dist=a.litho, l0=a.l0, u0=a.u0, tech=Tech(a.tech),
                     angle_window_deg=tuple(a.angle_window), k_max=a.k, color_bound=a.colors,
                     inclusive_conflict=a.inclusive, lshape=not a.no_lshape,
                     induced_wrt=a.induced_wrt, catalog_cap=a.catalog_cap)


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _model_kind(a) -> ModelKind:
    return ModelKind(a.model)


def _check_model_args(kind: ModelKind, rules: TechRules) -> None:
    if kind is ModelKind.PAIRING and rules.k_max != 2:
        raise ValueError("the pairing model groups at most two vias; use --k 2")
    if kind in (ModelKind.INDUCED_PATH, ModelKind.GENERAL_PATH) and rules.k_max < 2:
        raise ValueError(f"the {kind.value} model needs --k >= 2")


def _build(kind: ModelKind, g, rules: TechRules, mode: str, symmetry: bool, max_vars: int):
    catalog = None
    if kind in (ModelKind.NAIVE, ModelKind.NAIVE_STRENGTHENED):
        catalog = enumerate_groups(g, rules, mode)
    model = build_model(kind, g, rules.color_bound, rules.k_max, forbidden_triples(g, rules),
                        catalog, symmetry, max_vars)
    return model, catalog


# -- subcommands ------------------------------------------------------------------

def cmd_stats(a) -> int:
    layout = load_layout(a.layout)
    g = build_graph(layout, _rules(a))
    name = a.name or Path(a.layout).stem
    _write(stats_table(g, a.top, name).render(a.format), a.output)
    return EXIT_OK


def cmd_generate(a) -> int:
    rules = _rules(a)
    gen = generate_cluster_layout if a.cluster else generate_random_layout
    layout = gen(a.n, a.density, a.seed, a.diameter, rules)
    save_layout(layout, a.output)
    log.info("wrote %d vias to %s", len(layout), a.output)
    return EXIT_OK


def cmd_export_lp(a) -> int:
    rules = _rules(a)
    kind = _model_kind(a)
    _check_model_args(kind, rules)
    g = build_graph(load_layout(a.layout), rules)
    parts = [("all", g)] if a.no_split else \
        [(f"c{i}", c.graph) for i, c in enumerate(connected_components(g))]
    if kind is ModelKind.GENERAL_PATH:
        for tag, sub in parts:
            need = general_variable_count(sub.n, len(sub.dsa_edges), rules.color_bound,
                                          rules.k_max)
            if need > a.max_vars:
                raise ModelTooLarge(f"general ({tag}, {sub.n} vias)", need, a.max_vars)
    outdir = Path(a.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = a.prefix or Path(a.layout).stem
    manifest = []
    for tag, sub in parts:
        model, _ = _build(kind, sub, rules, a.mode, not a.no_symmetry, a.max_vars)
        path = export_lp(model, outdir / f"{prefix}_{tag}.lp")
        manifest.append((path.name, tag, sub.n, model.num_variables, model.num_constraints))
    with open(outdir / f"{prefix}_manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("file", "component", "vertices", "variables", "constraints"))
        w.writerows(manifest)
    print(f"wrote {len(manifest)} LP file(s) to {outdir}")
    return EXIT_OK


def _write_assignment(values: dict[str, int], objective: int, path) -> None:
    lines = [f"objective {objective}"] + [f"{k} {v}" for k, v in values.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_solve(a) -> int:
    rules = _rules(a)
    layout = load_layout(a.layout)
    budget = SolveBudget(a.time_limit, a.node_limit, a.parallel)
    result = solve_layout(layout, rules, a.mode, budget)
    table = solve_table(result, a.time_limit, a.top)
    _write(table.render(a.format), a.report)
    if a.output:
        save_solution(result.merged, a.output)
    if a.emit_assignment:
        kind = _model_kind(a)
        _check_model_args(kind, rules)
        model, catalog = _build(kind, result.graph, rules, a.mode, True, DEFAULT_MAX_VARIABLES)
        values = encode_solution(model, result.graph, result.merged.color_of,
                                 result.merged.groups, catalog)
        _write_assignment(values, result.merged.num_colors, a.emit_assignment)
    return EXIT_OK if result.merged.optimal else EXIT_BUDGET


def _read_assignment(path) -> tuple[dict[str, int], int | None]:
    values: dict[str, int] = {}
    claimed = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<name> <value>'")
        try:
            val = int(float(parts[1]))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value {parts[1]!r}") from None
        if parts[0] == "objective":
            claimed = val
        else:
            values[parts[0]] = val
    return values, claimed


def cmd_verify(a) -> int:
    rules = _rules(a)
    kind = _model_kind(a)
    _check_model_args(kind, rules)
    g = build_graph(load_layout(a.layout), rules)
    model, _ = _build(kind, g, rules, a.mode, not a.no_symmetry, a.max_vars)
    values, claimed = _read_assignment(a.assignment)
    missing = [v for v in model.variables if v not in values]
    unknown = [v for v in values if v not in model.variables]
    if missing or unknown:
        print(f"name mismatch: {len(missing)} missing, {len(unknown)} unknown")
        for v in missing[:20]:
            print(f"  missing {v}")
        for v in unknown[:20]:
            print(f"  unknown {v}")
        return EXIT_INPUT
    res = check_solution(model, values)
    print(f"objective {res.objective}")
    if not res.valid:
        print(f"INVALID: {res.n_violations} violated constraint(s)")
        for name in res.violations:
            print(f"  {name}")
        return EXIT_INPUT
    if claimed is not None and claimed != res.objective:
        print(f"value mismatch: claimed {claimed}, assignment evaluates to {res.objective}")
        return EXIT_INPUT
    print("VALID")
    return EXIT_OK


def cmd_render(a) -> int:
    layout = load_layout(a.layout)
    sol = load_solution(a.solution) if a.solution else None
    save_svg(layout, a.output, sol, a.max_colors)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dsacolor", description="DSA-aware multiple patterning of via layouts",
                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", help="instance statistics (|V|, |E|, |F|, density, omega, Delta)")
    s.add_argument("layout")
    s.add_argument("--top", type=int, default=5, help="number of largest components to list")
    s.add_argument("--format", choices=("text", "csv"), default="text")
    s.add_argument("--name", help="row label (default: file stem)")
    s.add_argument("-o", "--output", help="write report here instead of stdout")
    _add_rules(s)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("generate", help="generate a synthetic layout")
    s.add_argument("-n", type=int, required=True, help="number of vias")
    s.add_argument("--density", type=float, default=1.0, help="target |E|/|V|")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--diameter", type=_positive(float), default=10.0)
    s.add_argument("--cluster", action="store_true", help="grow one connected cluster")
    s.add_argument("-o", "--output", required=True)
    _add_rules(s)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("export-lp", help="write LP files, one per connected component")
    s.add_argument("layout")
    s.add_argument("--model", choices=[k.value for k in ModelKind], default="naive")
    s.add_argument("--outdir", default=".")
    s.add_argument("--prefix", help="file name prefix (default: layout stem)")
    s.add_argument("--no-split", action="store_true", help="one model for the whole layout")
    s.add_argument("--no-symmetry", action="store_true", help="omit color symmetry breaking")
    s.add_argument("--max-vars", type=_positive(int), default=DEFAULT_MAX_VARIABLES,
                   help="refuse general models above this many variables")
    _add_rules(s)
    s.set_defaults(func=cmd_export_lp)

    s = sub.add_parser("solve", help="exact minimum number of patterning steps")
    s.add_argument("layout")
    s.add_argument("-o", "--output", help="solution file")
    s.add_argument("--report", help="report file (default: stdout)")
    s.add_argument("--format", choices=("text", "csv"), default="text")
    s.add_argument("--top", type=int, default=10, help="component rows in the report")
    s.add_argument("--time-limit", type=_positive(float), default=3600.0,
                   help="seconds per component")
    s.add_argument("--node-limit", type=_positive(int), default=None)
    s.add_argument("--parallel", action="store_true", help="solve components in parallel")
    s.add_argument("--emit-assignment", help="also write the solution as model variables")
    s.add_argument("--model", choices=[k.value for k in ModelKind], default="naive",
                   help="model for --emit-assignment")
    _add_rules(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", help="check a variable assignment against a model")
    s.add_argument("layout")
    s.add_argument("assignment", help="lines '<variable> <0|1>', optional 'objective <v>'")
    s.add_argument("--model", choices=[k.value for k in ModelKind], default="naive")
    s.add_argument("--no-symmetry", action="store_true")
    s.add_argument("--max-vars", type=_positive(int), default=DEFAULT_MAX_VARIABLES)
    _add_rules(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("render", help="draw a layout (and solution) as SVG")
    s.add_argument("layout")
    s.add_argument("--solution")
    s.add_argument("--max-colors", type=_positive(int), default=None)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if hasattr(a, "litho"):
        try:
            _rules(a)
        except ValueError as exc:
            print(f"dsacolor: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return a.func(a)
    except (ModelTooLarge, CatalogTooLarge) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (LayoutError, ValueError, OSError, MissingVariableError, Infeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
