"""Feasible via groups (guiding patterns) and the group conflict relation."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from dsacolor.conflict import ConflictGraph
from dsacolor.layout import AXIS_TOL, Tech, TechRules

ANGLE_TOL = 1e-6

SINGLETON = "singleton"
INDUCED_PATH = "induced_path"
HAMILTONIAN_PATH = "hamiltonian_path"


class CatalogTooLarge(RuntimeError):
    def __init__(self, count: int, cap: int, offender: int, offender_count: int):
        self.count = count
        self.cap = cap
        self.offender = offender
        super().__init__(f"group catalog exceeds cap {cap} (at least {count} groups); "
                         f"vertex {offender} alone lies in {offender_count} groups")


@dataclass(frozen=True)
class Group:
    vertices: tuple[int, ...]  # witnessing path order
    kind: str

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return v in self.vertices

    @property
    def key(self) -> frozenset[int]:
        return frozenset(self.vertices)


@dataclass(frozen=True)
class GroupCatalog:
    groups: tuple[Group, ...]
    conflicts: frozenset[tuple[int, int]]
    membership: tuple[tuple[int, ...], ...]

    def index_of(self, vertices) -> int:
        key = frozenset(vertices)
        try:
            return self._index[key]
        except AttributeError:
            object.__setattr__(self, "_index", {g.key: i for i, g in enumerate(self.groups)})
            return self._index[key]

    def __len__(self):
        return len(self.groups)


def angle_at(coords, u: int, v: int, w: int) -> float:
    """Angle u-v-w at ``v`` in radians, in [0, pi]."""
    ax, ay = coords[u][0] - coords[v][0], coords[u][1] - coords[v][1]
    bx, by = coords[w][0] - coords[v][0], coords[w][1] - coords[v][1]
    na, nb = math.hypot(ax, ay), math.hypot(bx, by)
    if na == 0 or nb == 0:
        return 0.0
    c = max(-1.0, min(1.0, (ax * bx + ay * by) / (na * nb)))
    return math.acos(c)


def _dsa_triples(g: ConflictGraph):
    for v in range(g.n):
        nf = g.adj_f[v]
        for a in range(len(nf)):
            for b in range(a + 1, len(nf)):
                yield nf[a], v, nf[b]


def l_shape_triples(g: ConflictGraph) -> list[tuple[int, int, int]]:
    """Triples (u, v, w), u < w, with uv and vw in F meeting at a right angle at v."""
    if not g.coords:
        return []
    return [(u, v, w) for u, v, w in _dsa_triples(g)
            if abs(angle_at(g.coords, u, v, w) - math.pi / 2) <= ANGLE_TOL]


def forbidden_triples(g: ConflictGraph, rules: TechRules) -> list[tuple[int, int, int]]:
    """DSA triples that may not share one guiding pattern under the technology rules.

    193i and (flagged) unrestricted forbid right-angle bends; EUV forbids any
    bend whose angle falls outside the window.
    """
    if not g.coords:
        return []
    if rules.tech is Tech.EUV_ANGLE:
        lo = math.radians(rules.angle_window_deg[0])
        return [(u, v, w) for u, v, w in _dsa_triples(g)
                if angle_at(g.coords, u, v, w) < lo - ANGLE_TOL]
    if rules.tech is Tech.UNRESTRICTED and not rules.lshape:
        return []
    return l_shape_triples(g)


def _tech_ok(vertices, g: ConflictGraph, rules: TechRules, forbidden: set) -> bool:
    if len(vertices) < 3 or not g.coords:
        return True
    if rules.tech is Tech.AXIS_193I:
        xs = [g.coords[v][0] for v in vertices]
        ys = [g.coords[v][1] for v in vertices]
        if max(xs) - min(xs) > AXIS_TOL and max(ys) - min(ys) > AXIS_TOL:
            return False
    if forbidden:
        vs = set(vertices)
        for v in vertices:
            nf = [u for u in g.adj_f[v] if u in vs]
            for a in range(len(nf)):
                for b in range(a + 1, len(nf)):
                    if (nf[a], v, nf[b]) in forbidden:
                        return False
    return True


def _is_induced(path, g: ConflictGraph, wrt: str) -> bool:
    adjacent = g.has_edge if wrt == "E" else g.has_dsa_edge
    for i in range(len(path)):
        for j in range(i + 2, len(path)):
            if adjacent(path[i], path[j]):
                return False
    return True


def enumerate_groups(g: ConflictGraph, rules: TechRules, mode: str = "induced",
                     k_max: int | None = None) -> GroupCatalog:
    """All feasible groups (singletons included) plus their conflicts.

    ``mode="induced"`` keeps induced paths of G_F with at most ``k_max``
    vertices; ``mode="general"`` keeps every vertex set of that size with a
    Hamiltonian path in G_F.  Technology filters are applied to the vertex set.
    """
    if mode not in ("induced", "general"):
        raise ValueError(f"unknown mode {mode!r}")
    k = rules.k_max if k_max is None else k_max
    if k < 1:
        raise ValueError("k_max must be >= 1")
    forbidden = set(forbidden_triples(g, rules))
    for u, v, w in list(forbidden):
        forbidden.add((w, v, u))
    wrt = rules.induced_wrt
    found: dict[frozenset, tuple[int, ...]] = {}
    per_vertex: dict[int, int] = defaultdict(int)
    cap = rules.catalog_cap

    def record(path):
        key = frozenset(path)
        if key in found:
            return
        found[key] = tuple(path)
        for v in path:
            per_vertex[v] += 1
        if len(found) > cap:
            worst = max(per_vertex, key=lambda v: (per_vertex[v], -v))
            raise CatalogTooLarge(len(found), cap, worst, per_vertex[worst])

    def extend(path, members):
        record(path)
        if len(path) == k:
            return
        last = path[-1]
        for w in g.adj_f[last]:
            if w in members:
                continue
            if mode == "induced":
                adjacent = g.has_edge if wrt == "E" else g.has_dsa_edge
                if any(adjacent(w, p) for p in path[:-1]):
                    continue
            if not _tech_ok(path + [w], g, rules, forbidden):
                continue
            members.add(w)
            extend(path + [w], members)
            members.discard(w)

    for s in range(g.n):
        extend([s], {s})

    groups = []
    for key, path in found.items():
        if len(path) == 1:
            kind = SINGLETON
        elif mode == "induced" or _is_induced(path, g, wrt):
            kind = INDUCED_PATH
        else:
            kind = HAMILTONIAN_PATH
        groups.append(Group(path, kind))
    groups.sort(key=lambda gr: (len(gr), sorted(gr.vertices)))
    return make_catalog(groups, g)


def make_catalog(groups, g: ConflictGraph) -> GroupCatalog:
    groups = tuple(groups)
    membership: list[list[int]] = [[] for _ in range(g.n)]
    for i, gr in enumerate(groups):
        for v in gr.vertices:
            membership[v].append(i)
    return GroupCatalog(groups, group_conflicts(groups, g),
                        tuple(tuple(m) for m in membership))


def group_conflicts(groups, g: ConflictGraph) -> frozenset[tuple[int, int]]:
    """Pairs of groups that share a via or hold two vias joined by a conflict edge."""
    membership: dict[int, list[int]] = defaultdict(list)
    for i, gr in enumerate(groups):
        for v in gr.vertices:
            membership[v].append(i)
    out = set()
    for i, gr in enumerate(groups):
        touched = set()
        for u in gr.vertices:
            touched.update(membership[u])
            for w in g.adj[u]:
                touched.update(membership[w])
        for j in touched:
            if j > i:
                out.add((i, j))
    return frozenset(out)


def dumps_catalog(catalog: GroupCatalog) -> str:
    lines = [f"g {gr.kind} " + " ".join(map(str, gr.vertices)) for gr in catalog.groups]
    lines += [f"c {i} {j}" for i, j in sorted(catalog.conflicts)]
    return "\n".join(lines) + ("\n" if lines else "")


def save_catalog(catalog: GroupCatalog, path) -> None:
    Path(path).write_text(dumps_catalog(catalog))
