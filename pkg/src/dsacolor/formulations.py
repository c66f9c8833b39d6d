"""Integer programs for DSA-aware multiple patterning, with CPLEX-LP export.

Models are plain data: named binary variables, named linear constraints
and the objective "minimize the number of colors used".  No solver is
linked; :func:`check_solution` evaluates candidate points.

Variable names (colors ``i`` are 1-based):

``l_i``              color i is used
``z_i_v``            vertex v has color i
``xe_i_u_v``         DSA edge (u, v), u < v, lies in color i
``xo_i_kappa_u_v``   DSA edge used as edge ``kappa`` of a path, oriented u -> v
``ys_i_v``           a path of color i starts at v
``yo_i_v_o``         v lies on the color-i path starting at o
``xg_i_g``           group number g (catalog index) gets color i
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from dsacolor.conflict import ConflictGraph
from dsacolor.groups import GroupCatalog

DEFAULT_COLORS = 5
MAX_NAME = 255
LINE_WIDTH = 200
DEFAULT_MAX_VARIABLES = 10_000_000


class ModelKind(enum.Enum):
    PAIRING = "pairing"
    NAIVE = "naive"
    NAIVE_STRENGTHENED = "naive-strengthened"
    INDUCED_PATH = "induced"
    GENERAL_PATH = "general"


class ModelNameError(ValueError):
    """Duplicate or malformed variable/constraint name."""


class ModelTooLarge(RuntimeError):
    def __init__(self, kind: str, variables: int, cap: int):
        self.variables = variables
        self.cap = cap
        super().__init__(f"{kind} model would need {variables} variables, "
                         f"over the cap of {cap}")


class MissingVariableError(KeyError):
    pass


_ROLES = {"l": "lambda", "z": "z", "xe": "xe", "xo": "xo", "ys": "ys", "yo": "yo", "xg": "xg"}
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, int], ...]
    sense: str
    rhs: int

    def activity(self, values: Mapping[str, int]) -> int:
        return sum(c * values[v] for v, c in self.terms)

    def satisfied(self, values: Mapping[str, int]) -> bool:
        a = self.activity(values)
        if self.sense == "<=":
            return a <= self.rhs
        if self.sense == ">=":
            return a >= self.rhs
        return a == self.rhs

    @property
    def family(self) -> str:
        return self.name.split("_", 1)[0]


class IpModel:
    """Binary integer program; frozen once a builder returns it."""

    def __init__(self, kind: ModelKind, colors: int, k: int | None = None):
        self.kind = kind
        self.colors = colors
        self.k = k
        self.variables: dict[str, str] = {}
        self.constraints: list[Constraint] = []
        self._cnames: set[str] = set()
        self.objective: list[tuple[str, int]] = []
        self._frozen = False

    def add_variable(self, name: str, role: str | None = None) -> str:
        self._check_open()
        if name in self.variables:
            raise ModelNameError(f"duplicate variable {name!r}")
        _check_name(name)
        self.variables[name] = role or _ROLES.get(name.split("_", 1)[0], "other")
        return name

    def add_constraint(self, name: str, terms: Iterable[tuple[str, int]], sense: str,
                       rhs: int) -> None:
        self._check_open()
        if name in self._cnames:
            raise ModelNameError(f"duplicate constraint {name!r}")
        _check_name(name)
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad sense {sense!r}")
        terms = tuple(terms)
        for v, _ in terms:
            if v not in self.variables:
                raise ModelNameError(f"constraint {name!r} uses undeclared variable {v!r}")
        self._cnames.add(name)
        self.constraints.append(Constraint(name, terms, sense, rhs))

    def freeze(self) -> "IpModel":
        self._frozen = True
        return self

    def _check_open(self):
        if self._frozen:
            raise RuntimeError("model is frozen")

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def count_by_role(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for role in self.variables.values():
            out[role] = out.get(role, 0) + 1
        return out

    def __repr__(self):
        return (f"IpModel({self.kind.value}, L={self.colors}, k={self.k}, "
                f"vars={self.num_variables}, cons={self.num_constraints})")


def _check_name(name: str) -> None:
    if len(name) > MAX_NAME or not _NAME_RE.match(name):
        raise ModelNameError(f"invalid LP name {name!r}")


# -- shared pieces ----------------------------------------------------------

def _lambda_block(m: IpModel, L: int, symmetry: bool) -> None:
    for i in range(1, L + 1):
        m.add_variable(f"l_{i}")
    m.objective = [(f"l_{i}", 1) for i in range(1, L + 1)]
    if symmetry:
        for i in range(1, L):
            m.add_constraint(f"symm_{i}", [(f"l_{i + 1}", 1), (f"l_{i}", -1)], "<=", 0)


def _z(i, v):
    return f"z_{i}_{v}"


def _xe(i, u, v):
    return f"xe_{i}_{min(u, v)}_{max(u, v)}"


def _xo(i, kappa, u, v):
    return f"xo_{i}_{kappa}_{u}_{v}"


def _vertex_block(m: IpModel, g: ConflictGraph, L: int) -> None:
    for i in range(1, L + 1):
        for v in range(g.n):
            m.add_variable(_z(i, v))
    for i in range(1, L + 1):
        for u, v in g.sorted_dsa_edges():
            m.add_variable(_xe(i, u, v))


def _coloring_block(m: IpModel, g: ConflictGraph, L: int, lshape) -> None:
    """Assignment, DSA selection, non-DSA separation, color linking, L-shape cuts."""
    for v in range(g.n):
        m.add_constraint(f"assign_v{v}", [(_z(i, v), 1) for i in range(1, L + 1)], "=", 1)
    for i in range(1, L + 1):
        for u, v in g.sorted_dsa_edges():
            m.add_constraint(f"select_{i}_{u}_{v}",
                             [(_z(i, u), 1), (_z(i, v), 1), (_xe(i, u, v), -1)], "<=", 1)
    for i in range(1, L + 1):
        for u, v in g.sorted_edges():
            if (u, v) not in g.dsa_edges:
                m.add_constraint(f"sep_{i}_{u}_{v}", [(_z(i, u), 1), (_z(i, v), 1)], "<=", 1)
    _link_block(m, g, L)
    _lshape_block(m, L, lshape)


def _link_block(m: IpModel, g: ConflictGraph, L: int) -> None:
    for i in range(1, L + 1):
        for v in range(g.n):
            m.add_constraint(f"link_{i}_z{v}", [(_z(i, v), 1), (f"l_{i}", -1)], "<=", 0)
        for u, v in g.sorted_dsa_edges():
            m.add_constraint(f"link_{i}_xe{u}_{v}", [(_xe(i, u, v), 1), (f"l_{i}", -1)], "<=", 0)


def _lshape_block(m: IpModel, L: int, lshape) -> None:
    for i in range(1, L + 1):
        for u, v, w in sorted(lshape):
            m.add_constraint(f"lshape_{i}_{u}_{v}_{w}",
                             [(_z(i, u), 1), (_z(i, v), 1), (_z(i, w), 1)], "<=", 2)


def _path_block(m: IpModel, g: ConflictGraph, L: int, k: int, start) -> None:
    """Oriented positional edges, start gating, flow, orientation and visit constraints.

    ``start(i, v)`` names the variable marking v as the first vertex of a path.
    """
    fe = g.sorted_dsa_edges()
    for i in range(1, L + 1):
        for kappa in range(k - 1):
            for u, v in fe:
                m.add_variable(_xo(i, kappa, u, v))
                m.add_variable(_xo(i, kappa, v, u))
    for i in range(1, L + 1):
        for v in range(g.n):
            nf = g.adj_f[v]
            if nf:
                m.add_constraint(f"start_{i}_{v}",
                                 [(_xo(i, 0, v, u), 1) for u in nf] + [(start(i, v), -1)], "<=", 0)
        for kappa in range(1, k - 1):
            for v in range(g.n):
                nf = g.adj_f[v]
                if nf:
                    m.add_constraint(f"flow_{i}_{kappa}_{v}",
                                     [(_xo(i, kappa, v, u), 1) for u in nf]
                                     + [(_xo(i, kappa - 1, u, v), -1) for u in nf], "<=", 0)
        for u, v in fe:
            terms = []
            for kappa in range(k - 1):
                terms += [(_xo(i, kappa, u, v), 1), (_xo(i, kappa, v, u), 1)]
            m.add_constraint(f"orient_{i}_{u}_{v}", terms + [(_xe(i, u, v), -1)], "=", 0)
        for v in range(g.n):
            terms = [(start(i, v), 1)]
            for kappa in range(k - 1):
                terms += [(_xo(i, kappa, u, v), 1) for u in g.adj_f[v]]
            m.add_constraint(f"visit_{i}_{v}", terms + [(_z(i, v), -1)], "=", 0)


# -- the five models ----------------------------------------------------------

def build_pairing(g: ConflictGraph, L: int = DEFAULT_COLORS, lshape=(),
                  symmetry: bool = True) -> IpModel:
    """Pairing model: each color is a disjoint union of vertices and DSA edges."""
    if L < 1:
        raise ValueError("L must be >= 1")
    m = IpModel(ModelKind.PAIRING, L, 2)
    _lambda_block(m, L, symmetry)
    _vertex_block(m, g, L)
    _coloring_block(m, g, L, lshape)
    for i in range(1, L + 1):
        for u in range(g.n):
            nf = g.adj_f[u]
            if nf:
                m.add_constraint(f"degree_{i}_{u}", [(_xe(i, u, v), 1) for v in nf], "<=", 1)
    return m.freeze()


def _singleton_edges(catalog: GroupCatalog) -> list[tuple[int, int]]:
    # singleton-singleton conflicts are exactly the conflict edges
    single = {i: gr.vertices[0] for i, gr in enumerate(catalog.groups) if len(gr) == 1}
    out = []
    for a, b in catalog.conflicts:
        if a in single and b in single:
            u, v = single[a], single[b]
            out.append((min(u, v), max(u, v)))
    return sorted(out)


def build_naive(catalog: GroupCatalog, L: int = DEFAULT_COLORS, strengthened: bool = False,
                symmetry: bool = True) -> IpModel:
    """Group-assignment model over an enumerated catalog.

    The plain form packs every conflicting group pair per color.  The
    strengthened form instead writes, per color and conflicting via pair
    (u, v), one clique inequality over all groups containing u or v.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    kind = ModelKind.NAIVE_STRENGTHENED if strengthened else ModelKind.NAIVE
    k = max((len(gr) for gr in catalog.groups), default=1)
    m = IpModel(kind, L, k)
    _lambda_block(m, L, symmetry)
    ng = len(catalog.groups)
    xg = lambda i, gi: f"xg_{i}_{gi}"
    for i in range(1, L + 1):
        for gi in range(ng):
            m.add_variable(xg(i, gi))
    for v, groups in enumerate(catalog.membership):
        m.add_constraint(f"cover_v{v}",
                         [(xg(i, gi), 1) for i in range(1, L + 1) for gi in groups], "=", 1)
    if strengthened:
        for i in range(1, L + 1):
            for u, v in _singleton_edges(catalog):
                groups = sorted(set(catalog.membership[u]) | set(catalog.membership[v]))
                m.add_constraint(f"clique_{i}_{u}_{v}", [(xg(i, gi), 1) for gi in groups], "<=", 1)
    else:
        for i in range(1, L + 1):
            for a, b in sorted(catalog.conflicts):
                m.add_constraint(f"pack_{i}_{a}_{b}", [(xg(i, a), 1), (xg(i, b), 1)], "<=", 1)
    for i in range(1, L + 1):
        for gi in range(ng):
            m.add_constraint(f"link_{i}_g{gi}", [(xg(i, gi), 1), (f"l_{i}", -1)], "<=", 0)
    return m.freeze()


def build_induced_path(g: ConflictGraph, L: int = DEFAULT_COLORS, k: int = 3, lshape=(),
                       symmetry: bool = True) -> IpModel:
    """Each color is a disjoint union of induced DSA paths with at most ``k`` vertices."""
    if k < 2:
        raise ValueError("induced-path model needs k >= 2")
    if L < 1:
        raise ValueError("L must be >= 1")
    m = IpModel(ModelKind.INDUCED_PATH, L, k)
    _lambda_block(m, L, symmetry)
    _vertex_block(m, g, L)
    for i in range(1, L + 1):
        for v in range(g.n):
            m.add_variable(f"ys_{i}_{v}")
    _path_block(m, g, L, k, lambda i, v: f"ys_{i}_{v}")
    _coloring_block(m, g, L, lshape)
    return m.freeze()


def general_variable_count(n: int, n_dsa: int, L: int, k: int) -> int:
    return L * (1 + n + n_dsa + 2 * (k - 1) * n_dsa + n * n)


def build_general(g: ConflictGraph, L: int = DEFAULT_COLORS, k: int = 3, lshape=(),
                  symmetry: bool = True,
                  max_variables: int = DEFAULT_MAX_VARIABLES) -> IpModel:
    """Each color's components admit a Hamiltonian DSA path with at most ``k`` vertices.

    Path membership is tracked by origin variables, so the size grows with
    L * n^2; the build is refused beyond ``max_variables``.
    """
    if k < 2:
        raise ValueError("general model needs k >= 2")
    if L < 1:
        raise ValueError("L must be >= 1")
    need = general_variable_count(g.n, len(g.dsa_edges), L, k)
    if need > max_variables:
        raise ModelTooLarge("general", need, max_variables)
    m = IpModel(ModelKind.GENERAL_PATH, L, k)
    _lambda_block(m, L, symmetry)
    _vertex_block(m, g, L)
    yo = lambda i, v, o: f"yo_{i}_{v}_{o}"
    for i in range(1, L + 1):
        for v in range(g.n):
            for o in range(g.n):
                m.add_variable(yo(i, v, o))
    _path_block(m, g, L, k, lambda i, v: yo(i, v, v))
    for i in range(1, L + 1):
        for u, v in g.sorted_dsa_edges():
            for o in range(g.n):
                m.add_constraint(f"prop_{i}_{u}_{v}_{o}",
                                 [(yo(i, u, o), 1), (_xe(i, u, v), 1), (yo(i, v, o), -1)], "<=", 1)
                m.add_constraint(f"prop_{i}_{v}_{u}_{o}",
                                 [(yo(i, v, o), 1), (_xe(i, u, v), 1), (yo(i, u, o), -1)], "<=", 1)
        for v in range(g.n):
            m.add_constraint(f"origin_{i}_{v}",
                             [(yo(i, v, o), 1) for o in range(g.n)] + [(_z(i, v), -1)], "=", 0)
        for u, v in g.sorted_edges():
            for o in range(g.n):
                m.add_constraint(f"split_{i}_{u}_{v}_{o}",
                                 [(yo(i, u, o), 1)]
                                 + [(yo(i, v, p), 1) for p in range(g.n) if p != o], "<=", 1)
    for v in range(g.n):
        m.add_constraint(f"assign_v{v}", [(_z(i, v), 1) for i in range(1, L + 1)], "=", 1)
    _link_block(m, g, L)
    for i in range(1, L + 1):
        for kappa in range(k - 1):
            for u, v in g.sorted_dsa_edges():
                for a, b in ((u, v), (v, u)):
                    m.add_constraint(f"link_{i}_xo{kappa}_{a}_{b}",
                                     [(_xo(i, kappa, a, b), 1), (f"l_{i}", -1)], "<=", 0)
        for v in range(g.n):
            for o in range(g.n):
                m.add_constraint(f"link_{i}_yo{v}_{o}", [(yo(i, v, o), 1), (f"l_{i}", -1)], "<=", 0)
    _lshape_block(m, L, lshape)
    return m.freeze()


def build_model(kind: ModelKind, g: ConflictGraph, L: int, k: int, lshape=(),
                catalog: GroupCatalog | None = None, symmetry: bool = True,
                max_variables: int = DEFAULT_MAX_VARIABLES) -> IpModel:
    if kind is ModelKind.PAIRING:
        return build_pairing(g, L, lshape, symmetry)
    if kind in (ModelKind.NAIVE, ModelKind.NAIVE_STRENGTHENED):
        if catalog is None:
            raise ValueError("naive models need a group catalog")
        return build_naive(catalog, L, kind is ModelKind.NAIVE_STRENGTHENED, symmetry)
    if kind is ModelKind.INDUCED_PATH:
        return build_induced_path(g, L, k, lshape, symmetry)
    return build_general(g, L, k, lshape, symmetry, max_variables)


# -- LP text ------------------------------------------------------------------

def _expr(terms: Sequence[tuple[str, int]]) -> list[str]:
    out = []
    for n, (v, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = v if mag == 1 else f"{mag} {v}"
        if n == 0:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    return out


def _wrap(head: str, pieces: list[str]) -> list[str]:
    lines = []
    cur = head
    for p in pieces:
        if len(cur) + 1 + len(p) > LINE_WIDTH and cur.strip() and not cur.endswith(":"):
            lines.append(cur)
            cur = "   " + p
        else:
            cur = f"{cur} {p}"
    lines.append(cur)
    return lines


def dumps_lp(model: IpModel) -> str:
    k = "" if model.k is None else f" k={model.k}"
    lines = [f"\\ dsacolor {model.kind.value} L={model.colors}{k}", "Minimize"]
    lines += _wrap(" obj:", _expr(model.objective))
    lines.append("Subject To")
    for c in model.constraints:
        lines += _wrap(f" {c.name}:", _expr(c.terms) + [c.sense, str(c.rhs)])
    lines.append("Binary")
    lines += [f" {v}" for v in model.variables]
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model: IpModel, path) -> Path:
    path = Path(path)
    path.write_text(dumps_lp(model))
    return path


_HEAD_RE = re.compile(r"^\\ dsacolor (\S+) L=(\d+)(?: k=(\d+))?$")


def _parse_terms(tokens: list[str]) -> list[tuple[str, int]]:
    terms = []
    sign, coef = 1, None
    for t in tokens:
        if t in "+-":
            sign = -1 if t == "-" else 1
        elif re.fullmatch(r"\d+", t):
            coef = int(t)
        else:
            terms.append((t, sign * (coef if coef is not None else 1)))
            sign, coef = 1, None
    return terms


def loads_lp(text: str) -> IpModel:
    """Parse LP text written by :func:`dumps_lp`."""
    lines = text.splitlines()
    kind, L, k = ModelKind.PAIRING, 1, None
    section = None
    stmts: dict[str, list[list[str]]] = {"Minimize": [], "Subject To": []}
    binaries: list[str] = []
    for raw in lines:
        if raw.startswith("\\"):
            mt = _HEAD_RE.match(raw)
            if mt:
                kind = ModelKind(mt.group(1))
                L = int(mt.group(2))
                k = int(mt.group(3)) if mt.group(3) else None
            continue
        if raw in ("Minimize", "Subject To", "Binary", "End"):
            section = raw
            continue
        if section in stmts:
            for tok in raw.split():
                if tok.endswith(":"):
                    stmts[section].append([tok])
                elif not stmts[section]:
                    raise ValueError(f"unlabelled LP statement: {raw!r}")
                else:
                    stmts[section][-1].append(tok)
        elif section == "Binary":
            binaries += raw.split()
        elif raw.strip():
            raise ValueError(f"unexpected LP line: {raw!r}")
    m = IpModel(kind, L, k)
    for v in binaries:
        m.add_variable(v)
    if stmts["Minimize"]:
        m.objective = _parse_terms(stmts["Minimize"][0][1:])
    for st in stmts["Subject To"]:
        name = st[0][:-1]
        sense_at = next(i for i, t in enumerate(st) if t in ("<=", ">=", "="))
        m.add_constraint(name, _parse_terms(st[1:sense_at]), st[sense_at], int(st[sense_at + 1]))
    return m.freeze()


def load_lp(path) -> IpModel:
    return loads_lp(Path(path).read_text())


# -- checking candidate points ------------------------------------------------

@dataclass(frozen=True)
class SolutionCheck:
    valid: bool
    violations: tuple[str, ...]
    n_violations: int
    objective: int


def check_solution(model: IpModel, assignment: Mapping[str, int],
                   max_report: int = 100) -> SolutionCheck:
    """Evaluate every constraint at ``assignment``; report the first violations by name."""
    missing = [v for v in model.variables if v not in assignment]
    if missing:
        raise MissingVariableError(f"assignment lacks {len(missing)} variables, e.g. {missing[:5]}")
    bad_values = [v for v in model.variables if assignment[v] not in (0, 1)]
    violations = [f"binary:{v}" for v in bad_values]
    n_bad = len(violations)
    for c in model.constraints:
        if not c.satisfied(assignment):
            n_bad += 1
            if len(violations) < max_report:
                violations.append(c.name)
    obj = sum(c * assignment[v] for v, c in model.objective)
    return SolutionCheck(n_bad == 0, tuple(violations[:max_report]), n_bad, obj)


def encode_solution(model: IpModel, g: ConflictGraph | None, color_of: Sequence[int],
                    paths: Iterable[Sequence[int]],
                    catalog: GroupCatalog | None = None) -> dict[str, int]:
    """Map a coloring (1-based colors, groups given as path orders) onto model variables."""
    values = dict.fromkeys(model.variables, 0)
    used = max(color_of, default=0)
    if used > model.colors:
        raise ValueError(f"coloring uses {used} colors but the model allows {model.colors}")
    for i in range(1, used + 1):
        values[f"l_{i}"] = 1
    kind = model.kind
    paths = [tuple(p) for p in paths]
    if kind in (ModelKind.NAIVE, ModelKind.NAIVE_STRENGTHENED):
        if catalog is None:
            raise ValueError("naive models need the group catalog")
        for p in paths:
            values[f"xg_{color_of[p[0]]}_{catalog.index_of(p)}"] = 1
        return values
    for v, i in enumerate(color_of):
        values[_z(i, v)] = 1
    if kind is ModelKind.PAIRING:
        for u, v in g.dsa_edges:
            if color_of[u] == color_of[v]:
                values[_xe(color_of[u], u, v)] = 1
        return values
    for p in paths:
        i = color_of[p[0]]
        if kind is ModelKind.INDUCED_PATH:
            values[f"ys_{i}_{p[0]}"] = 1
        else:
            for v in p:
                values[f"yo_{i}_{v}_{p[0]}"] = 1
        for kappa in range(len(p) - 1):
            values[_xo(i, kappa, p[kappa], p[kappa + 1])] = 1
            values[_xe(i, p[kappa], p[kappa + 1])] = 1
    return values
