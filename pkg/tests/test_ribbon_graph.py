import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_aut_order, brute_force_classes, labeled_count_from_mass
from wpbound.ribbon_graph import (CANONICAL_VERSION, ContractionError, EnumerationCapError, RibbonGraph,
                                  RibbonGraphError, aut_order, canonical_form, contract_puncture_pair, dual,
                                  enumerate_trivalent, faces, genus, invariants, is_isomorphic, non_loop_edges,
                                  read_catalog, write_catalog)

# frozen from the brute-force centralizer search over all 6! permutations
THETA_AUT = 6
# frozen from the oracle in tests/oracles.py (exhaustive pairing search)
CLASS_COUNTS = {(1, 1): 1, (0, 3): 2, (1, 2): 5, (0, 4): 6, (2, 1): 9}
AUT_MASS = {(1, 1): Fraction(1, 6), (0, 3): Fraction(2, 3), (1, 2): Fraction(7, 3),
            (0, 4): Fraction(8, 3), (2, 1): Fraction(35, 6)}


def test_theta_faces(theta_graph):
    fs = faces(theta_graph)
    assert len(fs) == 1 and len(fs[0]) == 6
    assert genus(theta_graph) == 1


def test_planar_theta_faces(planar_theta_graph):
    fs = faces(planar_theta_graph)
    assert sorted(len(f) for f in fs) == [2, 2, 2]
    assert genus(planar_theta_graph) == 0


def test_every_half_edge_in_one_face(catalogs):
    for classes in catalogs.values():
        for iso in classes:
            hs = sorted(h for f in iso.canonical.faces for h in f)
            assert hs == list(range(iso.canonical.num_half_edges))


def test_figure_eight_accepted_by_faces_not_trivalent():
    g = RibbonGraph.from_cycles([(0, 1, 2, 3)], [(0, 2), (1, 3)])
    assert len(faces(g)) == 1
    assert not g.is_trivalent()
    with pytest.raises(RibbonGraphError):
        g.require_trivalent()


@pytest.mark.parametrize("sigma, alpha", [
    ([0, 1], [0, 1]),            # alpha has fixed points
    ([1, 0, 2, 3], [1, 0, 3, 2]),  # disconnected
    ([0, 0], [1, 0]),            # sigma not a permutation
])
def test_malformed_rejected(sigma, alpha):
    with pytest.raises(RibbonGraphError):
        RibbonGraph(tuple(sigma), tuple(alpha))


def test_json_round_trip(theta_graph):
    obj = theta_graph.to_json()
    assert set(obj) == {"half_edges", "sigma", "alpha"}
    assert RibbonGraph.from_json(json.loads(json.dumps(obj))) == theta_graph


def test_dual_theta(theta_graph):
    d = dual(theta_graph)
    assert (d.num_vertices, d.num_edges, d.num_faces) == (1, 3, 2)
    assert genus(d) == 1
    assert is_isomorphic(dual(d), theta_graph)


def test_dual_preserves_genus(catalogs):
    for iso in catalogs[(1, 2)]:
        assert genus(dual(iso.canonical)) == 1
        assert dual(dual(iso.canonical)) == iso.canonical


def test_theta_aut_matches_brute_force(theta_graph):
    assert brute_force_aut_order(theta_graph.sigma, theta_graph.alpha) == THETA_AUT
    assert aut_order(theta_graph) == THETA_AUT


def test_aut_orders_match_brute_force_small(catalogs):
    # 6 half-edges only; larger graphs are covered by the labeled-count identity
    for gn in [(1, 1), (0, 3)]:
        for iso in catalogs[gn]:
            G = iso.canonical
            assert iso.aut_order == brute_force_aut_order(G.sigma, G.alpha)


def test_isomorphism(theta_graph, planar_theta_graph):
    pi = [3, 5, 4, 0, 2, 1]
    assert is_isomorphic(theta_graph, theta_graph.relabel(pi))
    assert not is_isomorphic(theta_graph, planar_theta_graph)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([(1, 1), (0, 3), (1, 2), (0, 4), (2, 1)]), st.integers(0, 50), st.randoms())
def test_canonical_form_relabel_invariant(gn, k, rnd):
    classes = enumerate_trivalent(*gn)
    iso = classes[k % len(classes)]
    pi = list(range(iso.canonical.num_half_edges))
    rnd.shuffle(pi)
    again = canonical_form(iso.canonical.relabel(pi))
    assert again.canonical == iso.canonical
    assert again.aut_order == iso.aut_order


def test_relabel_many(catalogs):
    rng = np.random.default_rng(7)
    for classes in catalogs.values():
        for iso in classes:
            for _ in range(100):
                pi = rng.permutation(iso.canonical.num_half_edges).tolist()
                assert canonical_form(iso.canonical.relabel(pi)).canonical == iso.canonical


def test_enumeration_counts_and_invariants(catalogs):
    for (g, n), classes in catalogs.items():
        assert len(classes) == CLASS_COUNTS[(g, n)]
        assert sum(Fraction(1, c.aut_order) for c in classes) == AUT_MASS[(g, n)]
        for iso in classes:
            inv = invariants(iso.canonical)
            assert (inv.genus, inv.punctures) == (g, n)
            assert inv.num_edges == 6 * g - 6 + 3 * n and inv.num_vertices == 4 * g - 4 + 2 * n
        keys = [(c.canonical.sigma, c.canonical.alpha) for c in classes]
        assert keys == sorted(keys)


def test_enumeration_deterministic():
    a = enumerate_trivalent(1, 2)
    b = enumerate_trivalent(1, 2)
    assert a == b


@pytest.mark.parametrize("gn", [(1, 1), (0, 3), (1, 2)])
def test_enumeration_matches_oracle_small(gn, catalogs):
    count, labeled, _ = brute_force_classes(*gn)
    assert count == len(catalogs[gn])
    V = 4 * gn[0] - 4 + 2 * gn[1]
    assert labeled == round(labeled_count_from_mass(V, [c.aut_order for c in catalogs[gn]]))


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError, match="8"):
        enumerate_trivalent(3, 1)
    with pytest.raises(RibbonGraphError):
        enumerate_trivalent(0, 2)
    with pytest.raises(RibbonGraphError):
        enumerate_trivalent(1, 0)


def test_catalog_round_trip(tmp_path, catalogs):
    classes = catalogs[(1, 2)]
    idx = write_catalog(classes, 1, 2, tmp_path)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    write_catalog(classes, 1, 2, tmp_path)
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert json.loads(idx.read_text())["canonical_version"] == CANONICAL_VERSION
    assert read_catalog(1, 2, tmp_path) == classes
    assert (tmp_path / "g1_n2_0004.json").exists()


def test_catalog_stale_version_ignored(tmp_path, catalogs):
    idx = write_catalog(catalogs[(1, 1)], 1, 1, tmp_path)
    data = json.loads(idx.read_text())
    data["canonical_version"] = "older"
    idx.write_text(json.dumps(data))
    assert read_catalog(1, 1, tmp_path) is None


def test_contraction_lands_in_catalog(catalogs):
    target = {c.canonical for c in catalogs[(1, 1)]}
    for iso in catalogs[(1, 2)]:
        tri = dual(iso.canonical)
        edges = non_loop_edges(tri)
        assert edges
        for e in edges:
            out = contract_puncture_pair(tri, e)
            assert out.num_edges == tri.num_edges - 3
            assert genus(out) == 1
            assert canonical_form(dual(out)).canonical in target


def test_contraction_rejects_loop(catalogs):
    tri = dual(catalogs[(1, 2)][0].canonical)
    loops = [e for e in range(tri.num_edges) if e not in non_loop_edges(tri)]
    if not loops:
        tri = dual(catalogs[(1, 1)][0].canonical)
        loops = list(range(tri.num_edges))
    with pytest.raises(ContractionError, match=str(loops[0])):
        contract_puncture_pair(tri, loops[0])
