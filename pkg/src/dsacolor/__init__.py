"""DSA-aware multiple patterning: conflict graphs, via groups, exact coloring and IP export."""
from dsacolor.conflict import (ComponentStats, ConflictGraph, build_graph, component_stats,
                               connected_components, max_clique)
from dsacolor.formulations import (IpModel, ModelKind, build_general, build_induced_path,
                                   build_naive, build_pairing, check_solution, export_lp)
from dsacolor.groups import Group, GroupCatalog, enumerate_groups, l_shape_triples
from dsacolor.layout import (Layout, Tech, TechRules, Via, border_distance,
                             generate_random_layout, load_layout, rescale_to_pitch)
from dsacolor.solver import (ColoringSolution, SolveBudget, brute_force_oracle, solve_exact,
                             solve_layout)

__version__ = "0.1.0"
