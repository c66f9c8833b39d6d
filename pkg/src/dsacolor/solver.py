"""Exact minimum-color solver for the group coloring problem, and a brute-force oracle.

A solution picks, for every via, one catalog group containing it (the
chosen groups partition the vias) and a color per group, such that two
groups of the same color never conflict.  The objective is the number of
colors.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from dsacolor.conflict import ComponentStats, ConflictGraph, build_graph, component_stats, \
    connected_components, max_clique
from dsacolor.groups import GroupCatalog, enumerate_groups
from dsacolor.layout import Layout, TechRules

DEFAULT_TIME_LIMIT = 3600.0


class Infeasible(RuntimeError):
    def __init__(self, bound: int, lower_bound: int):
        self.bound = bound
        self.lower_bound = lower_bound
        super().__init__(f"no solution with at most {bound} colors "
                         f"(at least {lower_bound} are needed)")


class _OutOfBudget(Exception):
    pass


@dataclass(frozen=True)
class SolveBudget:
    time_limit: float = DEFAULT_TIME_LIMIT
    node_limit: int | None = None
    parallel_components: bool = False

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")


@dataclass(frozen=True)
class ColoringSolution:
    color_of: tuple[int, ...]            # 1-based color per vertex
    group_of: tuple[tuple[int, ...], ...]  # group (path order) per vertex
    num_colors: int
    optimal: bool
    lower_bound: int
    elapsed: float = 0.0
    time_to_best: float = 0.0
    nodes: int = 0

    @property
    def groups(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for grp in self.group_of:
            if grp not in seen:
                seen.add(grp)
                out.append(grp)
        return out

    @property
    def gap(self) -> float:
        if self.optimal or self.num_colors == 0:
            return 0.0
        return (self.num_colors - self.lower_bound) / self.num_colors


def validate_solution(g: ConflictGraph, color_of: Sequence[int],
                      group_of: Sequence[Sequence[int]], catalog: GroupCatalog | None = None,
                      k_max: int | None = None) -> list[str]:
    """Independent feasibility check of a coloring; returns a list of problems."""
    problems = []
    if len(color_of) != g.n or len(group_of) != g.n:
        return [f"solution covers {len(color_of)} vertices, graph has {g.n}"]
    for v in range(g.n):
        grp = tuple(group_of[v])
        if v not in grp:
            problems.append(f"vertex {v} not in its own group {grp}")
        for u in grp:
            if tuple(group_of[u]) != grp:
                problems.append(f"group {grp} inconsistent at vertex {u}")
            if color_of[u] != color_of[v]:
                problems.append(f"group {grp} split across colors")
        if color_of[v] < 1:
            problems.append(f"vertex {v} uncolored")
    for grp in {tuple(x) for x in group_of}:
        for a, b in zip(grp, grp[1:]):
            if not g.has_dsa_edge(a, b):
                problems.append(f"group {grp} steps over non-DSA pair {(a, b)}")
        if k_max is not None and len(grp) > k_max:
            problems.append(f"group {grp} exceeds {k_max} vias")
        if catalog is not None:
            try:
                catalog.index_of(grp)
            except KeyError:
                problems.append(f"group {grp} not in catalog")
    for u, v in g.edges:
        if color_of[u] == color_of[v] and tuple(group_of[u]) != tuple(group_of[v]):
            problems.append(f"conflict {(u, v)} inside color {color_of[u]}")
    return problems


def _clique_lower_bound(g: ConflictGraph, catalog: GroupCatalog) -> int:
    if g.n == 0:
        return 0
    groups = [set(gr.vertices) for gr in catalog.groups]
    lb = 1
    # a color class meets a clique inside a single group
    cliques = [max_clique(g)]
    for v in range(g.n):
        q = [v]
        for w in sorted(g.adj[v], key=lambda w: (-len(g.adj[w]), w)):
            if all(g.has_edge(w, x) for x in q):
                q.append(w)
        cliques.append(q)
    for q in cliques:
        qs = set(q)
        m = max(len(qs & groups[gi]) for v in q for gi in catalog.membership[v])
        lb = max(lb, -(-len(q) // m))
    # a connected component in one color must be a single group
    for comp in connected_components(g):
        if len(comp.vertices) > 1:
            key = frozenset(comp.vertices)
            if not any(gr.key == key for gr in catalog.groups):
                lb = max(lb, 2)
                break
    return lb


class _Search:
    """Backtracking over (vertex -> containing group, group -> color)."""

    def __init__(self, catalog: GroupCatalog, g: ConflictGraph, budget: SolveBudget, t0: float):
        self.g = g
        self.n = g.n
        self.groups = [gr.vertices for gr in catalog.groups]
        self.options = [sorted(ms, key=lambda gi: (-len(self.groups[gi]), gi))
                        for ms in catalog.membership]
        for v, opts in enumerate(self.options):
            if not opts:
                raise ValueError(f"vertex {v} lies in no catalog group")
        self.adj = g.adj
        self.deg = [len(a) for a in g.adj]
        self.budget = budget
        self.t0 = t0
        self.nodes = 0

    def _tick(self):
        self.nodes += 1
        b = self.budget
        if b.node_limit is not None and self.nodes > b.node_limit:
            raise _OutOfBudget
        if (self.nodes & 255) == 0 and time.perf_counter() - self.t0 > b.time_limit:
            raise _OutOfBudget

    def greedy(self) -> tuple[list[int], list[int]]:
        n = self.n
        color = [-1] * n
        chosen = [-1] * n
        forb = [set() for _ in range(n)]
        for _ in range(n):
            v = -1
            key = None
            for u in range(n):
                if color[u] < 0:
                    k = (len(forb[u]), self.deg[u], -u)
                    if key is None or k > key:
                        key, v = k, u
            if v < 0:
                break
            best = None
            for gi in self.options[v]:
                members = self.groups[gi]
                if any(color[m] >= 0 for m in members):
                    continue
                blocked = set().union(*(forb[m] for m in members))
                col = 0
                while col in blocked:
                    col += 1
                cand = (col, -len(members), gi)
                if best is None or cand < best:
                    best = cand
            col, _, gi = best
            for m in self.groups[gi]:
                color[m] = col
                chosen[m] = gi
            for m in self.groups[gi]:
                for w in self.adj[m]:
                    if chosen[w] != gi:
                        forb[w].add(col)
        return color, chosen

    def feasible(self, c: int) -> tuple[list[int], list[int]] | None:
        """Search for a solution with at most ``c`` colors; None when none exists.

        Uncolored vertices that fall apart into several connected pieces are
        solved piece by piece, and pieces proven infeasible under a given
        boundary state are remembered.
        """
        n = self.n
        color = [-1] * n
        chosen = [-1] * n
        forb = [[0] * c for _ in range(n)]
        nforb = [0] * n
        groups, adj, deg, options = self.groups, self.adj, self.deg, self.options
        trail: list[tuple[int, int, list[int], int]] = []
        state = {"used": 0}
        failed: set = set()

        def assign(gi: int, col: int) -> bool:
            members = groups[gi]
            for m in members:
                color[m] = col
                chosen[m] = gi
            touched = []
            ok = True
            for m in members:
                for w in adj[m]:
                    if color[w] < 0:
                        row = forb[w]
                        if row[col] == 0:
                            nforb[w] += 1
                            if nforb[w] == c:
                                ok = False
                        row[col] += 1
                        touched.append(w)
            trail.append((gi, col, touched, state["used"]))
            state["used"] = max(state["used"], col + 1)
            return ok

        def undo_to(mark: int):
            while len(trail) > mark:
                gi, col, touched, used = trail.pop()
                for w in touched:
                    row = forb[w]
                    row[col] -= 1
                    if row[col] == 0:
                        nforb[w] -= 1
                for m in groups[gi]:
                    color[m] = -1
                    chosen[m] = -1
                state["used"] = used

        def pieces(verts: list[int]) -> list[list[int]]:
            inside = set(verts)
            out = []
            for s in verts:
                if s not in inside:
                    continue
                inside.discard(s)
                stack, comp = [s], []
                while stack:
                    u = stack.pop()
                    comp.append(u)
                    for w in adj[u]:
                        if w in inside:
                            inside.discard(w)
                            stack.append(w)
                out.append(comp)
            return out

        def rec(verts: list[int]) -> bool:
            self._tick()
            unc = [u for u in verts if color[u] < 0]
            if not unc:
                return True
            parts = pieces(unc)
            if len(parts) == 1:
                return solve_piece(unc)
            mark = len(trail)
            for part in sorted(parts, key=lambda p: (len(p), min(p))):
                if not solve_piece(sorted(part)):
                    undo_to(mark)
                    return False
            return True

        def solve_piece(unc: list[int]) -> bool:
            used = state["used"]
            key = (tuple(unc), used,
                   tuple(sum(1 << i for i in range(c) if forb[u][i]) for u in unc))
            if key in failed:
                return False
            v, best = -1, None
            for u in unc:
                k = (nforb[u], deg[u], -u)
                if best is None or k > best:
                    best, v = k, u
            for gi in options[v]:
                members = groups[gi]
                if any(color[m] >= 0 for m in members):
                    continue
                for col in range(min(used + 1, c)):
                    if any(forb[m][col] for m in members):
                        continue
                    mark = len(trail)
                    if assign(gi, col) and rec(unc):
                        return True
                    undo_to(mark)
            if len(failed) < 2_000_000:
                failed.add(key)
            return False

        if rec(list(range(n))):
            return list(color), list(chosen)
        return None


def _to_solution(search: _Search, color, chosen, optimal, lb, t0, t_best) -> ColoringSolution:
    groups = search.groups
    # renumber colors by first appearance so they are contiguous and canonical
    remap: dict[int, int] = {}
    for v in range(search.n):
        remap.setdefault(color[v], len(remap) + 1)
    color_of = tuple(remap[c] for c in color)
    group_of = tuple(tuple(groups[chosen[v]]) for v in range(search.n))
    return ColoringSolution(color_of, group_of, len(remap), optimal, lb,
                            time.perf_counter() - t0, t_best - t0, search.nodes)


def solve_exact(catalog: GroupCatalog, g: ConflictGraph, budget: SolveBudget | None = None,
                color_bound: int | None = None) -> ColoringSolution:
    """Minimum number of colors over all group partitions, by branch and bound.

    Colors are tried upward from a clique-based lower bound; each count is
    settled by a DSATUR-ordered feasibility search.  When the budget runs
    out the greedy (or best found) incumbent is returned with
    ``optimal=False``.
    """
    budget = budget or SolveBudget()
    t0 = time.perf_counter()
    if g.n == 0:
        return ColoringSolution((), (), 0, True, 0, 0.0, 0.0, 0)
    search = _Search(catalog, g, budget, t0)
    lb = _clique_lower_bound(g, catalog)
    if color_bound is not None and lb > color_bound:
        raise Infeasible(color_bound, lb)
    color, chosen = search.greedy()
    t_best = time.perf_counter()
    ub = max(color) + 1
    optimal = ub <= lb
    c = lb
    try:
        while c < ub:
            found = search.feasible(c)
            if found is not None:
                color, chosen = found
                t_best = time.perf_counter()
                ub = max(color) + 1
                break
            c += 1
            if color_bound is not None and c > color_bound:
                raise Infeasible(color_bound, c)
        optimal = True
        lb = ub
    except _OutOfBudget:
        lb = c
    return _to_solution(search, color, chosen, optimal, lb, t0, t_best)


def brute_force_oracle(catalog: GroupCatalog, g: ConflictGraph, max_n: int = 14) -> int:
    """Exhaustive minimum over every partition into catalog groups and every coloring."""
    if g.n > max_n:
        raise ValueError(f"instance too large for the oracle: {g.n} > {max_n} vertices")
    if g.n == 0:
        return 0
    groups = [set(gr.vertices) for gr in catalog.groups]
    conflicts = catalog.conflicts
    best = g.n + 1

    def colorable(parts: list[int], c: int) -> bool:
        col = [0] * len(parts)

        def rec(i: int, used: int) -> bool:
            if i == len(parts):
                return True
            for cc in range(1, min(used + 1, c) + 1):
                if all(col[j] != cc or (min(parts[i], parts[j]), max(parts[i], parts[j]))
                       not in conflicts for j in range(i)):
                    col[i] = cc
                    if rec(i + 1, max(used, cc)):
                        return True
            col[i] = 0
            return False

        return rec(0, 0)

    def partitions(covered: set[int], parts: list[int]):
        nonlocal best
        if len(covered) == g.n:
            for c in range(1, best):
                if colorable(parts, c):
                    best = c
                    break
            return
        v = min(set(range(g.n)) - covered)
        for gi in catalog.membership[v]:
            if groups[gi] & covered:
                continue
            parts.append(gi)
            partitions(covered | groups[gi], parts)
            parts.pop()

    partitions(set(), [])
    return best


# -- whole layouts --------------------------------------------------------------

@dataclass(frozen=True)
class ComponentResult:
    vertices: tuple[int, ...]
    stats: ComponentStats
    n_groups: int
    solution: ColoringSolution


@dataclass(frozen=True)
class LayoutSolution:
    graph: ConflictGraph
    components: tuple[ComponentResult, ...]
    merged: ColoringSolution


def _solve_component(args) -> ComponentResult:
    comp_vertices, sub, rules, mode, budget = args
    catalog = enumerate_groups(sub, rules, mode)
    sol = solve_exact(catalog, sub, budget, rules.color_bound)
    return ComponentResult(comp_vertices, component_stats(sub), len(catalog), sol)


def solve_layout(layout: Layout, rules: TechRules, mode: str = "induced",
                 budget: SolveBudget | None = None) -> LayoutSolution:
    """Solve every connected component independently and merge with shared colors."""
    budget = budget or SolveBudget()
    g = build_graph(layout, rules)
    comps = connected_components(g)
    jobs = [(c.vertices, c.graph, rules, mode, budget) for c in comps]
    if budget.parallel_components and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_solve_component, jobs, chunksize=8))
    else:
        results = [_solve_component(j) for j in jobs]
    color_of = [0] * g.n
    group_of: list[tuple[int, ...]] = [()] * g.n
    for res in results:
        back = res.vertices
        for local, v in enumerate(back):
            color_of[v] = res.solution.color_of[local]
            group_of[v] = tuple(back[u] for u in res.solution.group_of[local])
    sols = [r.solution for r in results]
    merged = ColoringSolution(
        tuple(color_of), tuple(group_of),
        max((s.num_colors for s in sols), default=0),
        all(s.optimal for s in sols),
        max((s.lower_bound for s in sols), default=0),
        sum(s.elapsed for s in sols),
        sum(s.time_to_best for s in sols),
        sum(s.nodes for s in sols),
    )
    problems = validate_solution(g, merged.color_of, merged.group_of, k_max=rules.k_max)
    if problems:
        raise AssertionError(f"merged solution is invalid: {problems[:5]}")
    return LayoutSolution(g, tuple(results), merged)


# -- solution files -----------------------------------------------------------------

def dumps_solution(sol: ColoringSolution) -> str:
    lines = [
        f"num_colors {sol.num_colors}",
        f"optimal {int(sol.optimal)}",
        f"lower_bound {sol.lower_bound}",
        f"elapsed {sol.elapsed:.6f}",
    ]
    for v, (c, grp) in enumerate(zip(sol.color_of, sol.group_of)):
        lines.append(f"v {v} color {c} group " + " ".join(map(str, grp)))
    return "\n".join(lines) + "\n"


def save_solution(sol: ColoringSolution, path) -> None:
    Path(path).write_text(dumps_solution(sol))


def loads_solution(text: str) -> ColoringSolution:
    head: dict[str, str] = {}
    rows: dict[int, tuple[int, tuple[int, ...]]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            if len(parts) < 6 or parts[2] != "color" or parts[4] != "group":
                raise ValueError(f"line {lineno}: expected 'v <id> color <c> group <ids...>'")
            rows[int(parts[1])] = (int(parts[3]), tuple(int(x) for x in parts[5:]))
        elif len(parts) == 2:
            head[parts[0]] = parts[1]
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise ValueError("solution vertex ids must be contiguous from 0")
    color_of = tuple(rows[v][0] for v in range(n))
    return ColoringSolution(
        color_of, tuple(rows[v][1] for v in range(n)),
        int(head.get("num_colors", len(set(color_of)))),
        head.get("optimal", "0") == "1",
        int(head.get("lower_bound", 0)),
        float(head.get("elapsed", 0.0)),
    )


def load_solution(path) -> ColoringSolution:
    return loads_solution(Path(path).read_text())
