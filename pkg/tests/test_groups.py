import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FREE, complete_graph, path_graph
from dsacolor.conflict import ConflictGraph, build_graph
from dsacolor.groups import (CatalogTooLarge, Group, dumps_catalog, enumerate_groups,
                             forbidden_triples, group_conflicts, l_shape_triples)
from dsacolor.layout import Layout, Tech, TechRules
from oracles import catalog_sets

AXIS = TechRules(tech=Tech.AXIS_193I)


def sets(catalog):
    return {frozenset(gr.vertices) for gr in catalog.groups}


def test_collinear_path_catalog():
    g = path_graph(3)
    cat = enumerate_groups(g, AXIS.with_(k_max=3), "induced")
    assert sets(cat) == {frozenset(s) for s in [{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 1, 2}]}
    assert {gr.kind for gr in cat.groups} == {"singleton", "induced_path"}


def test_l_shape_excluded_for_193i():
    coords = [(0, 0), (25, 0), (25, 25)]
    g = ConflictGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)], [(0, 1), (1, 2)], coords)
    cat = enumerate_groups(g, AXIS.with_(k_max=3), "general")
    assert frozenset({0, 1, 2}) not in sets(cat)
    assert {frozenset({0, 1}), frozenset({1, 2})} <= sets(cat)


def test_k3_induced_vs_general():
    g = complete_graph(3)
    general = enumerate_groups(g, FREE.with_(k_max=3), "general")
    induced = enumerate_groups(g, FREE.with_(k_max=3), "induced")
    assert frozenset({0, 1, 2}) in sets(general)
    assert frozenset({0, 1, 2}) not in sets(induced)
    full = [gr for gr in general.groups if len(gr) == 3][0]
    assert full.kind == "hamiltonian_path"


def test_witness_order_uses_dsa_edges():
    g = path_graph(4)
    for gr in enumerate_groups(g, AXIS.with_(k_max=4), "induced").groups:
        assert all(g.has_dsa_edge(a, b) for a, b in zip(gr.vertices, gr.vertices[1:]))


def test_k1_catalog_is_singletons():
    cat = enumerate_groups(complete_graph(4), FREE.with_(k_max=1), "general")
    assert [gr.vertices for gr in cat.groups] == [(0,), (1,), (2,), (3,)]


def test_group_conflict_examples():
    g = ConflictGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)], [(0, 1), (2, 3)])
    groups = [Group((0, 1), "induced_path"), Group((1, 2), "induced_path"),
              Group((2, 3), "induced_path"), Group((0,), "singleton"), Group((3,), "singleton")]
    c = group_conflicts(groups, g)
    assert (0, 1) in c          # shared vertex 1
    assert (0, 2) in c          # edge (1, 2) joins {0,1} and {2,3}
    assert (3, 4) not in c      # (0, 3) is no conflict edge


def test_singleton_conflicts_mirror_edges():
    g = ConflictGraph.from_edges(5, [(0, 1), (1, 2), (3, 4), (0, 4)], [(0, 1)])
    cat = enumerate_groups(g, FREE, "induced")
    single = {i: gr.vertices[0] for i, gr in enumerate(cat.groups) if len(gr) == 1}
    mirrored = {tuple(sorted((single[a], single[b]))) for a, b in cat.conflicts
                if a in single and b in single}
    assert mirrored == set(g.edges)


def test_l_shape_triple_examples():
    g = ConflictGraph.from_edges(3, [(0, 1), (1, 2)], [(0, 1), (1, 2)],
                                 [(0, 0), (25, 0), (25, 25)])
    assert l_shape_triples(g) == [(0, 1, 2)]
    assert l_shape_triples(path_graph(3)) == []
    one = ConflictGraph.from_edges(2, [(0, 1)], [(0, 1)], [(0, 0), (25, 0)])
    assert l_shape_triples(one) == []


def test_euv_window_filters_sharp_bends():
    # bend of 135 degrees is allowed, 120 is not
    import math
    pts = [(0, 0), (25, 0), (25 + 25 * math.cos(math.radians(45)), 25 * math.sin(math.radians(45))),
           (25 + 25 * math.cos(math.radians(60)), -25 * math.sin(math.radians(60)))]
    lay = Layout.from_points(pts, 10)
    r = TechRules(tech=Tech.EUV_ANGLE, litho_dist=18, k_max=3)
    g = build_graph(lay, r)
    assert {(0, 1), (1, 2), (1, 3)} <= g.dsa_edges
    bad = {(u, w) for u, v, w in forbidden_triples(g, r)}
    assert (0, 3) in bad and (0, 2) not in bad
    s = sets(enumerate_groups(g, r, "general"))
    assert frozenset({0, 1, 2}) in s and frozenset({0, 1, 3}) not in s


def test_unrestricted_lshape_flag():
    g = ConflictGraph.from_edges(3, [(0, 1), (1, 2)], [(0, 1), (1, 2)],
                                 [(0, 0), (25, 0), (25, 25)])
    with_flag = sets(enumerate_groups(g, TechRules(tech=Tech.UNRESTRICTED, lshape=True)))
    without = sets(enumerate_groups(g, TechRules(tech=Tech.UNRESTRICTED, lshape=False)))
    assert frozenset({0, 1, 2}) in without - with_flag


def test_catalog_cap():
    with pytest.raises(CatalogTooLarge, match="cap 10"):
        enumerate_groups(complete_graph(6), FREE.with_(k_max=3, catalog_cap=10), "general")


def test_catalog_dump():
    text = dumps_catalog(enumerate_groups(path_graph(2), AXIS, "induced"))
    assert text == "g singleton 0\ng singleton 1\ng induced_path 0 1\nc 0 1\nc 0 2\nc 1 2\n"


def _random_instance(rng):
    n = rng.randint(1, 9)
    cells = rng.sample([(x, y) for x in range(5) for y in range(5)], n)
    lay = Layout.from_points([(20 * x, 20 * y) for x, y in cells], 10)
    return lay


@pytest.mark.parametrize("tech", list(Tech))
@pytest.mark.parametrize("mode", ["induced", "general"])
def test_catalog_matches_brute_force(tech, mode):
    rng = random.Random(f"{tech.value}-{mode}")
    for _ in range(40):
        lay = _random_instance(rng)
        for litho, k in ((31, 3), (49, 3), (41, 4)):
            r = TechRules(litho_dist=litho, tech=tech, k_max=k)
            g = build_graph(lay, r)
            got = sets(enumerate_groups(g, r, mode))
            want = catalog_sets(g.n, g.edges, g.dsa_edges, k, mode, g.coords, tech.value,
                                r.lshape)
            assert got == want


def test_relaxed_induced_wrt_f_keeps_e_chords():
    # chord 0-2 is a conflict edge but not a DSA edge
    g = ConflictGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)], [(0, 1), (1, 2)])
    assert frozenset({0, 1, 2}) not in sets(enumerate_groups(g, FREE, "induced"))
    assert frozenset({0, 1, 2}) in sets(enumerate_groups(g, FREE.with_(induced_wrt="F"),
                                                         "induced"))


cells = st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=14,
                 unique=True)


@given(cells, st.sampled_from(list(Tech)), st.integers(1, 4), st.sampled_from([31, 41, 49]))
def test_catalog_invariants(cs, tech, k, litho):
    lay = Layout.from_points([(20 * x, 20 * y) for x, y in cs], 10)
    r = TechRules(tech=tech, k_max=k, litho_dist=litho)
    g = build_graph(lay, r)
    ind = enumerate_groups(g, r, "induced")
    gen = enumerate_groups(g, r, "general")
    assert sets(ind) <= sets(gen)
    for cat in (ind, gen):
        for v in range(g.n):
            assert any(cat.groups[i].vertices == (v,) for i in cat.membership[v])
        assert all(a < b for a, b in cat.conflicts)
        for i, gr in enumerate(cat.groups):
            assert 1 <= len(gr) <= k
            assert all(g.has_dsa_edge(a, b) for a, b in zip(gr.vertices, gr.vertices[1:]))
            for j in range(i + 1, len(cat.groups)):
                if gr.key & cat.groups[j].key:
                    assert (i, j) in cat.conflicts
    if k == 1:
        assert all(len(gr) == 1 for gr in gen.groups)


def _three_vias_case(g):
    # collinear triple whose outer pair conflicts and whose inner spacings are DSA-pairable
    for u, v, w in ((a, b, c) for b in range(g.n) for a in g.adj_f[b] for c in g.adj_f[b]
                    if a < c):
        if g.has_edge(u, w):
            return True
    return False


@given(cells)
def test_axis_general_equals_induced_without_three_vias_case(cs):
    lay = Layout.from_points([(20 * x, 20 * y) for x, y in cs], 10)
    r = TechRules(tech=Tech.AXIS_193I, k_max=3)
    g = build_graph(lay, r)
    if _three_vias_case(g):
        return
    assert sets(enumerate_groups(g, r, "induced")) == sets(enumerate_groups(g, r, "general"))


@given(cells, st.randoms(use_true_random=False))
def test_catalog_relabeling(cs, rnd):
    pts = [(20 * x, 20 * y) for x, y in cs]
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    r = TechRules(k_max=3, litho_dist=41)
    a = enumerate_groups(build_graph(Layout.from_points(pts, 10), r), r, "general")
    b = enumerate_groups(build_graph(Layout.from_points([pts[i] for i in perm], 10), r), r,
                         "general")
    assert {frozenset(perm[v] for v in s) for s in sets(b)} == sets(a)
