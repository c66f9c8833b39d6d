"""Conflict graph construction, component decomposition and instance statistics."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dsacolor.layout import AXIS_TOL, REL_TOL, Layout, Tech, TechRules

Edge = tuple[int, int]


@dataclass(frozen=True)
class ConflictGraph:
    """Conflict graph G=(V,E) with the DSA-pairable subset F of E.

    ``coords`` holds via centers (needed by the geometric group filters) and
    ``origin`` maps local vertex ids back to the ids of the parent graph.
    """

    n: int
    edges: frozenset[Edge]
    dsa_edges: frozenset[Edge]
    coords: tuple[tuple[float, float], ...] = ()
    origin: tuple[int, ...] = ()

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in range(self.n)]
        adj_f: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge {(u, v)} for n={self.n}")
            adj[u].append(v)
            adj[v].append(u)
        for u, v in self.dsa_edges:
            if (u, v) not in self.edges:
                raise ValueError(f"DSA edge {(u, v)} is not a conflict edge")
            adj_f[u].append(v)
            adj_f[v].append(u)
        object.__setattr__(self, "adj", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "adj_f", tuple(tuple(sorted(a)) for a in adj_f))
        object.__setattr__(self, "_adj_sets", tuple(frozenset(a) for a in adj))
        if not self.origin:
            object.__setattr__(self, "origin", tuple(range(self.n)))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj_sets[u]

    def has_dsa_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.dsa_edges

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adj[u]

    def dsa_neighbors(self, u: int) -> tuple[int, ...]:
        return self.adj_f[u]

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def sorted_dsa_edges(self) -> list[Edge]:
        return sorted(self.dsa_edges)

    def subgraph(self, vertices) -> "ConflictGraph":
        """Induced subgraph on ``vertices`` re-indexed in ascending id order."""
        verts = sorted(vertices)
        local = {v: i for i, v in enumerate(verts)}
        e = frozenset((local[u], local[v]) for u, v in self.edges if u in local and v in local)
        f = frozenset((local[u], local[v]) for u, v in self.dsa_edges if u in local and v in local)
        coords = tuple(self.coords[v] for v in verts) if self.coords else ()
        return ConflictGraph(len(verts), e, f, coords, tuple(self.origin[v] for v in verts))

    @classmethod
    def from_edges(cls, n: int, edges, dsa_edges=(), coords=()) -> "ConflictGraph":
        norm = lambda es: frozenset((min(u, v), max(u, v)) for u, v in es)
        e, f = norm(edges), norm(dsa_edges)
        return cls(n, e | f, f, tuple(coords))


def _pair_status(dx: float, dy: float, diameter: float, rules: TechRules) -> tuple[bool, bool]:
    cd = math.hypot(dx, dy)
    b2b = max(0.0, cd - diameter)
    lit = rules.litho_dist
    if rules.inclusive_conflict:
        conflict = b2b <= lit * (1 + REL_TOL)
    else:
        conflict = b2b < lit * (1 - REL_TOL)
    if not conflict:
        return False, False
    dsa = rules.l0 * (1 - REL_TOL) <= cd <= rules.u0 * (1 + REL_TOL)
    if dsa and rules.tech is Tech.AXIS_193I:
        dsa = abs(dx) <= AXIS_TOL or abs(dy) <= AXIS_TOL
    return True, dsa


def build_graph(layout: Layout, rules: TechRules) -> ConflictGraph:
    """Conflict graph of ``layout``; candidate pairs come from a uniform grid."""
    n = len(layout)
    coords = tuple((v.x, v.y) for v in layout.vias)
    cell = rules.litho_dist * (1 + 2 * REL_TOL) + layout.diameter
    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    for i, (x, y) in enumerate(coords):
        buckets[(math.floor(x / cell), math.floor(y / cell))].append(i)
    edges, dsa = set(), set()
    for (cx, cy), members in buckets.items():
        for ox in (-1, 0, 1):
            for oy in (-1, 0, 1):
                other = buckets.get((cx + ox, cy + oy))
                if not other:
                    continue
                for u in members:
                    ux, uy = coords[u]
                    for v in other:
                        if v <= u:
                            continue
                        conflict, pair = _pair_status(coords[v][0] - ux, coords[v][1] - uy,
                                                      layout.diameter, rules)
                        if conflict:
                            edges.add((u, v))
                            if pair:
                                dsa.add((u, v))
    return ConflictGraph(n, frozenset(edges), frozenset(dsa), coords)


def build_graph_naive(layout: Layout, rules: TechRules) -> ConflictGraph:
    """All-pairs reference construction (quadratic); used to check ``build_graph``."""
    n = len(layout)
    coords = tuple((v.x, v.y) for v in layout.vias)
    edges, dsa = set(), set()
    if n > 1:
        xy = np.array(coords)
        dx = xy[None, :, 0] - xy[:, None, 0]
        dy = xy[None, :, 1] - xy[:, None, 1]
        cd = np.hypot(dx, dy)
        b2b = np.maximum(0.0, cd - layout.diameter)
        if rules.inclusive_conflict:
            conf = b2b <= rules.litho_dist * (1 + REL_TOL)
        else:
            conf = b2b < rules.litho_dist * (1 - REL_TOL)
        pair = conf & (cd >= rules.l0 * (1 - REL_TOL)) & (cd <= rules.u0 * (1 + REL_TOL))
        if rules.tech is Tech.AXIS_193I:
            pair &= (np.abs(dx) <= AXIS_TOL) | (np.abs(dy) <= AXIS_TOL)
        iu = np.triu_indices(n, 1)
        for u, v in zip(*(a[conf[iu]] for a in iu)):
            edges.add((int(u), int(v)))
        for u, v in zip(*(a[pair[iu]] for a in iu)):
            dsa.add((int(u), int(v)))
    return ConflictGraph(n, frozenset(edges), frozenset(dsa), coords)


@dataclass(frozen=True)
class Component:
    vertices: tuple[int, ...]
    graph: ConflictGraph


def connected_components(g: ConflictGraph) -> list[Component]:
    """Components of (V, E), largest first (ties by smallest vertex id)."""
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in g.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(tuple(sorted(comp)))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return [Component(c, g.subgraph(c)) for c in comps]


def max_clique(g: ConflictGraph) -> list[int]:
    """Exact maximum clique by branch and bound with greedy-coloring bounds.

    Each vertex is searched only against its later neighbors in a
    degeneracy order, which keeps the candidate sets tiny on sparse graphs.
    """
    if g.n == 0:
        return []
    adj = [set(a) for a in g.adj]
    # degeneracy order
    deg = [len(a) for a in adj]
    removed = [False] * g.n
    order = []
    buckets: dict[int, set[int]] = defaultdict(set)
    for v, d in enumerate(deg):
        buckets[d].add(v)
    d = 0
    for _ in range(g.n):
        d = max(0, d - 1)
        while not buckets[d]:
            d += 1
        v = min(buckets[d])
        buckets[d].remove(v)
        removed[v] = True
        order.append(v)
        for w in adj[v]:
            if not removed[w]:
                buckets[deg[w]].remove(w)
                deg[w] -= 1
                buckets[deg[w]].add(w)
    pos = {v: i for i, v in enumerate(order)}

    best: list[int] = [order[0]]

    def color_bound(cands: list[int]) -> list[tuple[int, int]]:
        # greedy coloring; returns (vertex, color) sorted by color
        classes: list[list[int]] = []
        for v in cands:
            for cls in classes:
                if not (adj[v] & set(cls)):
                    cls.append(v)
                    break
            else:
                classes.append([v])
        out = []
        for c, cls in enumerate(classes, 1):
            out.extend((v, c) for v in cls)
        return out

    def expand(clique: list[int], cands: list[int]):
        nonlocal best
        colored = color_bound(cands)
        while colored:
            v, c = colored.pop()
            if len(clique) + c <= len(best):
                return
            new = clique + [v]
            rest = [w for w, _ in colored if w in adj[v]]
            if rest:
                expand(new, rest)
            elif len(new) > len(best):
                best = new

    for v in order:
        later = sorted((w for w in adj[v] if pos[w] > pos[v]), key=lambda w: -len(adj[w]))
        if len(later) + 1 > len(best):
            if later:
                expand([v], later)
    return sorted(best)


@dataclass(frozen=True)
class ComponentStats:
    n_vertices: int
    n_edges: int
    n_dsa_edges: int
    density: float
    omega: int
    delta: int

    @property
    def edge_ratio(self) -> float:
        """|E|/|F| as listed for the largest components."""
        return self.n_edges / self.n_dsa_edges if self.n_dsa_edges else math.inf


def component_stats(g: ConflictGraph) -> ComponentStats:
    n = g.n
    return ComponentStats(
        n_vertices=n,
        n_edges=len(g.edges),
        n_dsa_edges=len(g.dsa_edges),
        density=len(g.edges) / n if n else 0.0,
        omega=len(max_clique(g)),
        delta=max((len(a) for a in g.adj), default=0),
    )


def dumps_graph(g: ConflictGraph) -> str:
    lines = [f"n {g.n}"]
    for u, v in g.sorted_edges():
        lines.append(f"e {u} {v} dsa" if (u, v) in g.dsa_edges else f"e {u} {v}")
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> ConflictGraph:
    n = None
    edges, dsa = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "n" and len(parts) == 2:
            n = int(parts[1])
        elif parts[0] == "e" and len(parts) in (3, 4):
            e = (int(parts[1]), int(parts[2]))
            edges.append(e)
            if len(parts) == 4:
                if parts[3] != "dsa":
                    raise ValueError(f"line {lineno}: unknown edge flag {parts[3]!r}")
                dsa.append(e)
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    if n is None:
        raise ValueError("missing 'n <count>' line")
    return ConflictGraph.from_edges(n, edges, dsa)


def save_graph(g: ConflictGraph, path) -> None:
    Path(path).write_text(dumps_graph(g))
