import random

import pytest

from conftest import FIXTURES, FREE, complete_graph, path_graph
from dsacolor.conflict import ConflictGraph, build_graph
from dsacolor.formulations import (IpModel, MissingVariableError, ModelKind, ModelNameError,
                                   ModelTooLarge, build_general, build_induced_path, build_model,
                                   build_naive, build_pairing, check_solution, dumps_lp,
                                   encode_solution, export_lp, general_variable_count, load_lp,
                                   loads_lp)
from dsacolor.groups import enumerate_groups, forbidden_triples
from dsacolor.layout import Layout, TechRules, generate_random_layout
from dsacolor.solver import solve_exact
from oracles import expected_variables, ip_optimum, milp_optimum

LP = FIXTURES / "lp"


def single_vertex():
    return ConflictGraph.from_edges(1, [])


def single_dsa_edge():
    return ConflictGraph.from_edges(2, [(0, 1)], [(0, 1)], [(0, 0), (25, 0)])


# -- pairing -------------------------------------------------------------------

def test_pairing_k3_size_and_optimum(k3):
    m = build_pairing(k3, 3)
    assert m.num_variables == 3 * (3 + 3 + 1) == 21
    assert ip_optimum(m)[0] == 2


def test_pairing_trivial_optima():
    assert ip_optimum(build_pairing(single_vertex(), 1))[0] == 1
    assert ip_optimum(build_pairing(ConflictGraph.from_edges(0, []), 1))[0] == 0


def test_pairing_families(k3):
    fam = {c.family for c in build_pairing(k3, 2).constraints}
    assert fam == {"symm", "assign", "select", "link", "degree"}
    g = ConflictGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)], [(0, 1), (1, 2)],
                                 [(0, 0), (25, 0), (25, 25)])
    m = build_pairing(g, 2, lshape=[(0, 1, 2)])
    assert {c.family for c in m.constraints} >= {"sep", "lshape"}
    cut = [c for c in m.constraints if c.name == "lshape_1_0_1_2"][0]
    assert cut.terms == (("z_1_0", 1), ("z_1_1", 1), ("z_1_2", 1)) and cut.rhs == 2


# -- naive -------------------------------------------------------------------------

def test_naive_k3_pairs(k3):
    cat = enumerate_groups(k3, FREE.with_(k_max=2), "induced")
    assert {gr.key for gr in cat.groups} == {frozenset(s) for s in
                                             [{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}]}
    for strengthened in (False, True):
        assert ip_optimum(build_naive(cat, 3, strengthened))[0] == 2


def test_naive_singletons_is_plain_coloring(k3):
    cat = enumerate_groups(k3, FREE.with_(k_max=1), "induced")
    assert ip_optimum(build_naive(cat, 3))[0] == 3


def test_naive_empty_catalog():
    g = ConflictGraph.from_edges(0, [])
    cat = enumerate_groups(g, FREE, "induced")
    assert len(cat) == 0
    assert ip_optimum(build_naive(cat, 1))[0] == 0


def test_strengthened_replaces_pairwise_packing(k3):
    cat = enumerate_groups(k3, FREE.with_(k_max=2), "induced")
    plain, strong = build_naive(cat, 2), build_naive(cat, 2, strengthened=True)
    assert "pack" in {c.family for c in plain.constraints}
    fams = {c.family for c in strong.constraints}
    assert "clique" in fams and "pack" not in fams
    # one clique row per color and conflict edge, over groups holding either end
    row = [c for c in strong.constraints if c.name == "clique_1_0_1"][0]
    covered = {int(v.rsplit("_", 1)[1]) for v, _ in row.terms}
    assert covered == set(cat.membership[0]) | set(cat.membership[1])


def test_strengthened_lp_bound_not_weaker():
    rng = random.Random(3)
    for seed in range(25):
        lay = generate_random_layout(rng.randint(5, 12), rng.uniform(1.0, 2.6), seed)
        r = TechRules(k_max=rng.choice([2, 3]), litho_dist=rng.choice([31, 41, 49]))
        g = build_graph(lay, r)
        cat = enumerate_groups(g, r, "induced")
        plain = milp_optimum(build_naive(cat, 4), relax=True)
        strong = milp_optimum(build_naive(cat, 4, strengthened=True), relax=True)
        assert strong >= plain - 1e-7
        exact = [round(milp_optimum(build_naive(cat, 4, s))) for s in (False, True)]
        assert exact[0] == exact[1]


# -- induced / general path models ---------------------------------------------------

def test_induced_examples(k3):
    assert ip_optimum(build_induced_path(path_graph(5), 2, 3))[0] == 2
    assert ip_optimum(build_induced_path(single_dsa_edge(), 1, 2))[0] == 1
    assert ip_optimum(build_induced_path(k3, 3, 3))[0] == 2


def test_induced_has_both_orientations_per_position(k3):
    m = build_induced_path(k3, 2, 4)
    for i in (1, 2):
        for kappa in range(3):
            for u, v in k3.dsa_edges:
                assert f"xo_{i}_{kappa}_{u}_{v}" in m.variables
                assert f"xo_{i}_{kappa}_{v}_{u}" in m.variables
    with pytest.raises(ValueError):
        build_induced_path(k3, 2, 1)


def test_general_examples(k3):
    assert ip_optimum(build_general(k3, 1, 3))[0] == 1
    assert ip_optimum(build_general(k3, 2, 2))[0] == 2
    assert ip_optimum(build_general(single_vertex(), 1, 2))[0] == 1


def test_general_size_cap():
    g = ConflictGraph.from_edges(300, [])
    need = general_variable_count(300, 0, 5, 3)
    assert need == 5 * (1 + 300 + 300 ** 2)
    with pytest.raises(ModelTooLarge, match=str(need)):
        build_general(g, 5, 3, max_variables=need - 1)
    assert build_general(g, 5, 3, max_variables=need).num_variables == need


@pytest.mark.parametrize("kind", ["pairing", "naive", "naive-strengthened", "induced",
                                  "general"])
def test_variable_counts_closed_form(kind):
    rng = random.Random(kind)
    for seed in range(5):
        lay = generate_random_layout(rng.randint(3, 15), 1.8, seed)
        k = 2 if kind == "pairing" else rng.choice([2, 3])
        r = TechRules(k_max=k)
        g = build_graph(lay, r)
        cat = enumerate_groups(g, r, "induced")
        L = rng.randint(1, 5)
        m = build_model(ModelKind(kind), g, L, k, forbidden_triples(g, r), cat)
        assert m.num_variables == expected_variables(kind, L, g.n, len(g.dsa_edges), k, len(cat))


def test_constraint_names_unique_and_traceable(k3):
    m = build_general(k3, 2, 3)
    names = [c.name for c in m.constraints]
    assert len(names) == len(set(names))
    assert all(c.family in {"symm", "start", "flow", "orient", "visit", "prop", "origin",
                            "split", "assign", "link", "lshape"} for c in m.constraints)


# -- LP files ------------------------------------------------------------------------

GOLDEN = {
    "k3_pairing_L3.lp": lambda: build_pairing(complete_graph(3), 3),
    "k3_naive_k2_L3.lp": lambda: build_naive(
        enumerate_groups(complete_graph(3), FREE.with_(k_max=2)), 3),
    "k3_naive_strengthened_k2_L3.lp": lambda: build_naive(
        enumerate_groups(complete_graph(3), FREE.with_(k_max=2)), 3, strengthened=True),
    "p5_induced_k3_L2.lp": lambda: build_induced_path(path_graph(5), 2, 3),
    "k3_general_k3_L1.lp": lambda: build_general(complete_graph(3), 1, 3),
    "empty.lp": lambda: IpModel(ModelKind.PAIRING, 0).freeze(),
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_lp_matches_golden(name, tmp_path):
    out = export_lp(GOLDEN[name](), tmp_path / name)
    assert out.read_bytes() == (LP / name).read_bytes()


def test_golden_pairing_has_21_binaries():
    text = (LP / "k3_pairing_L3.lp").read_text()
    binaries = text.split("Binary\n")[1].split("End")[0].split()
    assert len(binaries) == 21


def test_empty_model_lp():
    text = dumps_lp(IpModel(ModelKind.PAIRING, 0).freeze())
    assert "Minimize\n obj:\n" in text and text.endswith("End\n")


def test_lp_round_trip_is_byte_identical():
    rng = random.Random(9)
    for seed in range(8):
        lay = generate_random_layout(rng.randint(4, 14), 2.0, seed)
        r = TechRules(k_max=3, litho_dist=49)
        g = build_graph(lay, r)
        cat = enumerate_groups(g, r, "general")
        for kind in ModelKind:
            m = build_model(kind, g, 3, 3, forbidden_triples(g, r), cat)
            text = dumps_lp(m)
            back = loads_lp(text)
            assert dumps_lp(back) == text
            assert back.num_variables == m.num_variables
            assert [c.terms for c in back.constraints] == [c.terms for c in m.constraints]


def test_long_rows_wrap_and_parse():
    cat = enumerate_groups(complete_graph(8), FREE.with_(k_max=3), "general")
    m = build_naive(cat, 5)
    text = dumps_lp(m)
    assert max(len(line) for line in text.splitlines()) <= 200
    assert any(line.startswith("   ") for line in text.splitlines())
    assert dumps_lp(loads_lp(text)) == text


def test_load_lp_file(tmp_path):
    m = build_pairing(complete_graph(3), 2)
    p = export_lp(m, tmp_path / "m.lp")
    assert load_lp(p).num_constraints == m.num_constraints


def test_name_collisions_rejected():
    m = IpModel(ModelKind.PAIRING, 1)
    m.add_variable("z_1_0")
    with pytest.raises(ModelNameError):
        m.add_variable("z_1_0")
    m.add_constraint("c_1", [("z_1_0", 1)], "<=", 1)
    with pytest.raises(ModelNameError):
        m.add_constraint("c_1", [("z_1_0", 1)], "<=", 1)
    with pytest.raises(ModelNameError):
        m.add_variable("x" * 256)
    with pytest.raises(ModelNameError):
        m.add_variable("bad name")
    with pytest.raises(ModelNameError):
        m.add_constraint("c_2", [("nope", 1)], "<=", 1)


# -- check_solution ---------------------------------------------------------------------

def test_check_all_zero_on_empty_graph():
    m = build_pairing(ConflictGraph.from_edges(0, []), 1)
    res = check_solution(m, dict.fromkeys(m.variables, 0))
    assert res.valid and res.objective == 0


def test_check_missing_variable(k3):
    m = build_pairing(k3, 2)
    with pytest.raises(MissingVariableError):
        check_solution(m, {})


def _native_point(kind, g, rules, mode="induced"):
    cat = enumerate_groups(g, rules, mode)
    sol = solve_exact(cat, g)
    m = build_model(kind, g, max(sol.num_colors, 1), rules.k_max, forbidden_triples(g, rules),
                    cat)
    return m, encode_solution(m, g, sol.color_of, sol.groups, cat), sol


@pytest.mark.parametrize("kind,family", [
    (ModelKind.PAIRING, "assign"), (ModelKind.NAIVE, "cover"),
    (ModelKind.NAIVE_STRENGTHENED, "cover"), (ModelKind.INDUCED_PATH, "visit"),
    (ModelKind.GENERAL_PATH, "origin"),
])
def test_flipped_variable_names_family(kind, family):
    g = path_graph(5)
    rules = FREE.with_(k_max=2 if kind is ModelKind.PAIRING else 3)
    mode = "general" if kind is ModelKind.GENERAL_PATH else "induced"
    m, point, sol = _native_point(kind, g, rules, mode)
    ok = check_solution(m, point)
    assert ok.valid and ok.objective == sol.num_colors
    name = next(v for v in m.variables if v.startswith("xg_" if "naive" in kind.value else "z_")
                and point[v] == 1)
    bad = dict(point)
    bad[name] = 0
    res = check_solution(m, bad)
    assert not res.valid
    assert family in {v.split("_", 1)[0] for v in res.violations}


def test_check_reports_at_most_100():
    g = ConflictGraph.from_edges(150, [])
    m = build_pairing(g, 1)
    res = check_solution(m, dict.fromkeys(m.variables, 0))
    assert res.n_violations == 150 and len(res.violations) == 100


def test_encode_rejects_too_many_colors(k3):
    m = build_pairing(k3, 1)
    with pytest.raises(ValueError):
        encode_solution(m, k3, (1, 2, 3), [(0,), (1,), (2,)])


def test_exported_lp_solved_by_milp_matches_native(tmp_path):
    """Exported files, parsed back and handed to an outside MILP solver, agree with solve_exact."""
    rng = random.Random(21)
    for seed in range(12):
        lay = generate_random_layout(rng.randint(4, 9), rng.uniform(1.0, 2.6), seed)
        r = TechRules(litho_dist=rng.choice([31, 41, 49]), k_max=2)
        g = build_graph(lay, r)
        cat = enumerate_groups(g, r, "induced")
        best = solve_exact(cat, g).num_colors
        for kind in ModelKind:
            m = build_model(kind, g, 4, 2, forbidden_triples(g, r), cat)
            parsed = load_lp(export_lp(m, tmp_path / f"{seed}_{kind.value}.lp"))
            assert round(milp_optimum(parsed)) == best
