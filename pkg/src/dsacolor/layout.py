"""Via layouts: loading, saving, generation, rescaling and distance semantics.

Vias are disks of a common diameter.  Coordinates are nanometers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

REL_TOL = 1e-9
AXIS_TOL = 1e-6


class LayoutError(ValueError):
    """Malformed or invalid layout input."""


class Tech(enum.Enum):
    AXIS_193I = "axis193i"
    EUV_ANGLE = "euv"
    UNRESTRICTED = "unrestricted"


@dataclass(frozen=True)
class Via:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Layout:
    vias: tuple[Via, ...]
    diameter: float
    seed: int | None = None

    def __post_init__(self):
        if not self.diameter > 0:
            raise LayoutError(f"diameter must be positive, got {self.diameter}")
        for i, v in enumerate(self.vias):
            if v.id != i:
                raise LayoutError(f"via ids must be contiguous from 0; position {i} has id {v.id}")
        seen: dict[tuple[float, float], int] = {}
        dups = []
        for v in self.vias:
            key = (v.x, v.y)
            if key in seen:
                dups.append((seen[key], v.id))
            else:
                seen[key] = v.id
        if dups:
            listing = ", ".join(f"{a} and {b}" for a, b in dups)
            raise LayoutError(f"duplicate via coordinates: ids {listing}")

    def __len__(self) -> int:
        return len(self.vias)

    @property
    def coords(self) -> np.ndarray:
        if not self.vias:
            return np.zeros((0, 2))
        return np.array([(v.x, v.y) for v in self.vias], dtype=float)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], diameter: float,
                    seed: int | None = None) -> "Layout":
        vias = tuple(Via(i, float(p[0]), float(p[1])) for i, p in enumerate(points))
        return cls(vias, float(diameter), seed)


@dataclass(frozen=True)
class TechRules:
    """Lithography and DSA parameters.

    ``litho_dist`` is border to border; ``l0``/``u0`` bound the center to
    center distance of a DSA-pairable edge.
    """

    litho_dist: float = 31.0
    l0: float = 20.0
    u0: float = 40.0
    tech: Tech = Tech.AXIS_193I
    angle_window_deg: tuple[float, float] = (135.0, 225.0)
    k_max: int = 3
    color_bound: int = 5
    inclusive_conflict: bool = False
    lshape: bool = True
    induced_wrt: str = "E"
    catalog_cap: int = 1_000_000

    def __post_init__(self):
        if not (0 < self.l0 <= self.u0):
            raise ValueError(f"need 0 < l0 <= u0, got l0={self.l0}, u0={self.u0}")
        if not self.litho_dist > 0:
            raise ValueError("litho_dist must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.color_bound < 1:
            raise ValueError("color_bound must be >= 1")
        lo, hi = self.angle_window_deg
        if not (0 <= lo <= hi <= 360) or not math.isclose(lo + hi, 360.0):
            raise ValueError(f"angle window {self.angle_window_deg} must lie in [0, 360] "
                             "and be symmetric about 180")
        if self.induced_wrt not in ("E", "F"):
            raise ValueError("induced_wrt must be 'E' or 'F'")

    def with_(self, **changes) -> "TechRules":
        return replace(self, **changes)


def center_distance(a: Via, b: Via) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def border_distance(a: Via, b: Via, diameter: float) -> float:
    """Border-to-border distance between two equal disks, clamped at 0."""
    return max(0.0, center_distance(a, b) - diameter)


def min_center_distance(layout: Layout) -> float:
    if len(layout) < 2:
        raise LayoutError("need at least 2 vias")
    dist, _ = cKDTree(layout.coords).query(layout.coords, k=2)
    return float(dist[:, 1].min())


def rescale_to_pitch(layout: Layout, target_pitch: float = 10.0) -> Layout:
    """Scale uniformly so that min border distance and diameter both equal ``target_pitch``."""
    if len(layout) < 2:
        raise LayoutError("rescale needs at least 2 vias")
    dmin = min_center_distance(layout)
    if dmin <= 0:
        raise LayoutError("coincident vias")
    if dmin - layout.diameter <= 0:
        raise LayoutError("overlapping vias: minimum border distance is not positive")
    s = 2.0 * target_pitch / dmin
    if math.isclose(s, 1.0, rel_tol=REL_TOL) and math.isclose(layout.diameter, target_pitch,
                                                             rel_tol=REL_TOL):
        return layout
    vias = tuple(Via(v.id, v.x * s, v.y * s) for v in layout.vias)
    return Layout(vias, float(target_pitch), layout.seed)


# -- file formats ---------------------------------------------------------

def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def dumps_layout(layout: Layout) -> str:
    lines = [f"diameter {_fmt(layout.diameter)}"]
    if layout.seed is not None:
        lines.append(f"seed {layout.seed}")
    lines += [f"{_fmt(v.x)} {_fmt(v.y)}" for v in layout.vias]
    return "\n".join(lines) + "\n"


def save_layout(layout: Layout, path) -> None:
    Path(path).write_text(dumps_layout(layout))


def loads_layout(text: str, format: str | None = None) -> Layout:
    """Parse a point-list (``format="points"``) or generated manifest (``"manifest"``).

    ``format=None`` accepts either.
    """
    if format not in (None, "points", "manifest"):
        raise ValueError(f"unknown layout format {format!r}")
    diameter = None
    seed = None
    points = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        head = parts[0].lower()
        if head in ("diameter", "seed"):
            if len(parts) != 2:
                raise LayoutError(f"line {lineno}: expected '{head} <value>'")
            try:
                if head == "diameter":
                    diameter = float(parts[1])
                else:
                    seed = int(parts[1])
            except ValueError:
                raise LayoutError(f"line {lineno}: bad {head} value {parts[1]!r}") from None
            continue
        if len(parts) != 2:
            raise LayoutError(f"line {lineno}: expected '<x> <y>', got {line!r}")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise LayoutError(f"line {lineno}: non-numeric coordinate in {line!r}") from None
    if diameter is None:
        raise LayoutError("missing 'diameter' header")
    if diameter <= 0:
        raise LayoutError(f"nonpositive diameter {diameter}")
    if format == "manifest" and seed is None:
        raise LayoutError("generated manifest requires a 'seed' header")
    return Layout.from_points(points, diameter, seed)


def load_layout(path, format: str | None = None) -> Layout:
    return loads_layout(Path(path).read_text(), format)


# -- generation -----------------------------------------------------------

def _graph_density(layout: Layout, rules: TechRules) -> float:
    from dsacolor.conflict import build_graph

    if len(layout) == 0:
        return 0.0
    return len(build_graph(layout, rules).edges) / len(layout)


def _grid_layout(n: int, side: int, seed: int, pitch: float, diameter: float) -> Layout:
    rng = np.random.default_rng(seed)
    cells = np.sort(rng.choice(side * side, size=n, replace=False))
    pts = [(float(c % side) * pitch, float(c // side) * pitch) for c in cells]
    return Layout.from_points(pts, diameter, seed)


def generate_random_layout(n: int, density_target: float, seed: int,
                           diameter: float = 10.0, rules: TechRules | None = None) -> Layout:
    """Random layout whose conflict density |E|/|V| under ``rules`` approximates the target.

    Vias are placed on distinct cells of a square track grid of pitch
    ``2 * diameter`` (so vias never overlap); the grid side is searched so
    the achieved density is as close as possible to ``density_target``.
    For ``n >= 100`` a miss larger than 20% raises ``LayoutError``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return Layout((), float(diameter), seed)
    rules = rules or TechRules()
    pitch = 2.0 * diameter

    cache: dict[int, tuple[float, Layout]] = {}

    def attempt(side: int) -> float:
        if side not in cache:
            lay = _grid_layout(n, side, seed, pitch, diameter)
            cache[side] = (_graph_density(lay, rules), lay)
        return cache[side][0]

    lo = max(1, math.ceil(math.sqrt(n)))
    hi = lo
    while attempt(hi) > density_target and hi < 64 * lo + 64:
        hi *= 2
    # densest grid is at lo; density falls (noisily) as the side grows
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if attempt(mid) > density_target:
            lo = mid
        else:
            hi = mid
    for side in range(max(1, lo - 2), hi + 3):
        if side * side >= n:
            attempt(side)
    best = min(cache, key=lambda s: (abs(cache[s][0] - density_target), s))
    achieved, layout = cache[best]
    if n >= 100 and density_target > 0 and abs(achieved - density_target) > 0.2 * density_target:
        raise LayoutError(f"density {density_target} unreachable for n={n}; "
                          f"closest achieved density is {achieved:.3f}")
    return layout


def generate_cluster_layout(n: int, density_target: float, seed: int,
                            diameter: float = 10.0, rules: TechRules | None = None) -> Layout:
    """Connected random layout grown by accretion on the track grid.

    Every accepted via conflicts with at least one earlier via, so the
    conflict graph is a single component of ``n`` vertices.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return Layout((), float(diameter), seed)
    rules = rules or TechRules()
    pitch = 2.0 * diameter
    reach = rules.litho_dist + diameter
    r = int(reach // pitch) + 1
    offsets = [(dx, dy) for dx in range(-r, r + 1) for dy in range(-r, r + 1)
               if (dx or dy) and math.hypot(dx, dy) * pitch < reach * (1 - REL_TOL)]
    rng = np.random.default_rng(seed)
    cells = [(0, 0)]
    occupied = {(0, 0)}
    n_edges = 0
    stalls = 0
    while len(cells) < n:
        base = cells[int(rng.integers(len(cells)))]
        dx, dy = offsets[int(rng.integers(len(offsets)))]
        cand = (base[0] + dx, base[1] + dy)
        if cand in occupied:
            continue
        gain = sum((cand[0] + ox, cand[1] + oy) in occupied for ox, oy in offsets)
        if (n_edges + gain) / (len(cells) + 1) > density_target and gain > 1 and stalls < 200:
            stalls += 1
            continue
        stalls = 0
        cells.append(cand)
        occupied.add(cand)
        n_edges += gain
    cells.sort(key=lambda c: (c[1], c[0]))
    return Layout.from_points([(cx * pitch, cy * pitch) for cx, cy in cells], diameter, seed)
