"""Tabular reports (text and CSV) for instance statistics and solve runs."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from dsacolor.conflict import ComponentStats, ConflictGraph, component_stats, connected_components

STATS_COLUMNS = ("name", "V", "E", "F", "E_per_V", "E_per_F", "omega", "delta")
SOLVE_COLUMNS = ("component", "V", "E", "F", "groups", "best_value", "lower_bound",
                 "time_to_best", "time_to_certify", "gap", "optimal")

_INT = {"V", "E", "F", "omega", "delta", "groups", "best_value", "lower_bound", "optimal"}
_FLOAT = {"E_per_V", "E_per_F", "time_to_best", "time_to_certify", "gap"}


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[list]

    def cell(self, col: str, value) -> str:
        if col in _FLOAT:
            return "inf" if math.isinf(value) else f"{value:.4f}"
        return str(value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([self.cell(c, v) for c, v in zip(self.columns, r)])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [list(self.columns)] + [[self.cell(c, v) for c, v in zip(self.columns, r)]
                                        for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]
        return "\n".join("  ".join(s.rjust(w) for s, w in zip(row, widths)) for row in cells) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_text()

    @classmethod
    def from_csv(cls, text: str) -> "Table":
        reader = csv.reader(io.StringIO(text))
        columns = tuple(next(reader))
        rows = []
        for raw in reader:
            row = []
            for c, s in zip(columns, raw):
                if c in _INT:
                    row.append(int(s))
                elif c in _FLOAT:
                    row.append(float(s))
                else:
                    row.append(s)
            rows.append(row)
        return cls(columns, rows)


def _stats_row(name: str, s: ComponentStats) -> list:
    return [name, s.n_vertices, s.n_edges, s.n_dsa_edges, s.density, s.edge_ratio,
            s.omega, s.delta]


def stats_table(g: ConflictGraph, top: int = 5, name: str = "graph") -> Table:
    """Whole-graph row followed by the ``top`` largest components."""
    rows = [_stats_row(name, component_stats(g))]
    for idx, comp in enumerate(connected_components(g)[:top]):
        rows.append(_stats_row(f"{name}_c{idx}", component_stats(comp.graph)))
    return Table(STATS_COLUMNS, rows)


def solve_table(result, time_limit: float, top: int = 10) -> Table:
    """Per-component rows (largest first) plus ``total`` and ``max`` summary rows."""
    rows = []
    certify = []
    for idx, comp in enumerate(result.components):
        sol = comp.solution
        t_cert = sol.elapsed if sol.optimal else time_limit
        certify.append(t_cert)
        if idx < top:
            st = comp.stats
            rows.append([f"c{idx}", st.n_vertices, st.n_edges, st.n_dsa_edges, comp.n_groups,
                         sol.num_colors, sol.lower_bound, sol.time_to_best, t_cert, sol.gap,
                         int(sol.optimal)])
    m = result.merged
    g = result.graph
    n_groups = sum(c.n_groups for c in result.components)
    to_best = [c.solution.time_to_best for c in result.components]
    gap = 0.0 if m.optimal or m.num_colors == 0 else (m.num_colors - m.lower_bound) / m.num_colors
    base = ["", g.n, len(g.edges), len(g.dsa_edges), n_groups, m.num_colors, m.lower_bound]
    rows.append(["total"] + base[1:] + [sum(to_best), sum(certify), gap, int(m.optimal)])
    rows.append(["max"] + base[1:] + [max(to_best, default=0.0), max(certify, default=0.0),
                                       gap, int(m.optimal)])
    return Table(SOLVE_COLUMNS, rows)
