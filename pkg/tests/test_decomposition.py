import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wpbound import penner_coords as pc
from wpbound.decomposition import (LN4, DecompositionError, LinkingChoice, all_choices, chains, decompose,
                                   intout_theta, is_wheel_sequence, linked, per_graph_factor, trick3_series,
                                   verify_lemma, _vertex_roles)
from wpbound.ribbon_graph import theta
from wpbound.verify import in_domain_points

THETA = theta()
E3 = LinkingChoice.from_edges(THETA, [2, 2])


def test_choice_validation():
    with pytest.raises(ValueError):
        LinkingChoice((0, 3))
    with pytest.raises(ValueError):
        chains(THETA, LinkingChoice((0,)))
    assert len(list(all_choices(THETA))) == 9


def test_theta_linking():
    assert linked(THETA, E3, 0, 1) and linked(THETA, E3, 1, 0)
    assert not linked(THETA, E3, 0, 2)
    with pytest.raises(ValueError):
        linked(THETA, E3, 1, 1)


def test_theta_chains():
    cs = chains(THETA, E3)
    shapes = sorted((c.edges, c.closed) for c in cs)
    assert shapes == [((0, 1), True), ((2,), False)]


def test_theta_decomposition():
    d = decompose(THETA, E3, 2)
    assert d.num_wheels == 1
    w = d.wheels[0]
    assert [d.chains[c].edges for c in w.chains] == [(0, 1)]
    assert d.attachments == [(0, next(i for i, c in enumerate(d.chains) if c.edges == (2,)), "internal")]
    assert d.is_partition(3)


def test_chains_partition_and_endpoints(catalogs):
    for gn in [(1, 1), (0, 3), (1, 2), (0, 4)]:
        for iso in catalogs[gn]:
            G = iso.canonical
            for c in all_choices(G):
                cs = chains(G, c)
                assert sorted(e for ch in cs for e in ch.edges) == list(range(G.num_edges))
                minimal = {cyc[s] for cyc, s in zip(G.vertices, c.minimal_at)}
                for ch in cs:
                    for a, b in zip(ch.edges, ch.edges[1:]):
                        assert linked(G, c, a, b) or a == b
                    if not ch.closed:
                        # terminal edges are minimal at their outer vertices
                        assert ch.entries[0] in minimal
                        assert G.alpha[ch.entries[-1]] in minimal


def test_open_chain_found_on_genus_one_two_faces(catalogs):
    found = False
    for iso in catalogs[(1, 2)]:
        for c in all_choices(iso.canonical):
            found |= any(not ch.closed and len(ch) > 1 for ch in chains(iso.canonical, c))
    assert found


def test_decompose_exhaustive_small(catalogs):
    for gn in [(1, 1), (0, 3), (1, 2), (0, 4)]:
        for iso in catalogs[gn]:
            G = iso.canonical
            for c in all_choices(G):
                roles = _vertex_roles(G, chains(G, c))
                for mu in range(G.num_edges):
                    d = decompose(G, c, mu)
                    assert d.is_partition(G.num_edges)
                    assert sum(len(d.chains[i]) for i in d.chain_order()) == G.num_edges
                    for w in d.wheels:
                        assert is_wheel_sequence(d.chains, w.chains, roles)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 8), st.lists(st.integers(0, 2), min_size=6, max_size=6), st.integers(0, 8))
def test_decompose_genus_two(k, slots, mu):
    from wpbound.ribbon_graph import enumerate_trivalent
    G = enumerate_trivalent(2, 1)[k].canonical
    d = decompose(G, LinkingChoice(tuple(slots)), mu)
    assert d.is_partition(9)


def test_decompose_bad_seed():
    with pytest.raises(ValueError):
        decompose(THETA, E3, 5)


def test_decomposition_error_carries_partial():
    err = DecompositionError("stuck", partial="p")
    assert err.partial == "p"


def test_per_graph_factor():
    assert per_graph_factor(3) == pytest.approx(8 / 3)
    assert per_graph_factor(9) == pytest.approx((8 / 3) ** 4)
    assert all(per_graph_factor(n) < per_graph_factor(n + 1) for n in range(1, 20))


def test_linked_ratio_on_samples(catalogs):
    for gn in [(1, 1), (2, 1)]:
        G = catalogs[gn][0].canonical
        pts = in_domain_points(G, 2000, seed=1)
        ve = pc.tables(G).vertex_edges
        srt = np.sort(pts[:, ve], axis=-1)
        assert np.all(srt[..., 2] <= 2 * srt[..., 1] * (1 + 1e-12))


# -- lemma values against scipy and closed forms ------------------------------

def test_trick1_extreme_case():
    r = verify_lemma("trick1", {"e": 8.0})
    assert r.numeric == pytest.approx(LN4, abs=1e-10)
    assert r.passed


@pytest.mark.parametrize("e", [4.5, 6.0, 8.0, 30.0, 1e3])
def test_trick1_closed_form(e):
    assert verify_lemma("trick1", {"e": e}).numeric == pytest.approx(math.log(2 * e / max(4, e / 2)), abs=1e-10)


@pytest.mark.parametrize("g", [4.5, 5.0, 40.0, 1e3])
def test_trick2_value(g):
    # scale invariant: the full region integrates to pi^2/6
    r = verify_lemma("trick2", {"g": g})
    assert r.numeric == pytest.approx(math.pi**2 / 6, abs=1e-7)
    assert r.passed and r.numeric < 2


@pytest.mark.parametrize("e", [4.5, 10.0, 100.0, 5000.0])
def test_trick3_against_scipy(e):
    # inner df/f in closed form; dblquad without a breakpoint misses the kink at g = e/2
    ref, _ = integrate.quad(lambda g: math.log((e + g) / max(g, e - g)) / g, 4, e, points=[e / 2],
                            epsabs=1e-13, epsrel=1e-13)
    r = verify_lemma("trick3", {"e": e})
    assert r.numeric == pytest.approx(ref, abs=1e-7)
    assert r.passed and r.extra["series_ok"]


def test_trick3_series():
    assert trick3_series(10.0) < math.pi**2 / 6 < 5 / 3
    assert trick3_series(1e9, 10_000) == pytest.approx(sum(1 / n**2 for n in range(1, 10_001)), rel=1e-6)


@pytest.mark.parametrize("m,i", [(2, 0), (3, 1), (3, 2), (4, 1)])
def test_chainok(m, i):
    r = verify_lemma("chainok", {"m": m, "i": i, "value": 100.0})
    # far from 4 every link contributes exactly ln 4
    assert r.numeric == pytest.approx(LN4 ** (m - 1), rel=1e-8)
    assert r.passed


@pytest.mark.parametrize("m", [2, 3])
def test_wheelok(m):
    r = verify_lemma("wheelok", {"m": m, "g": 6.0})
    assert r.passed and r.numeric < max(LN4, math.sqrt(2)) ** m


def test_unknown_lemma():
    with pytest.raises(ValueError):
        verify_lemma("trick9", {})


def test_intout_theta():
    r = intout_theta(THETA, E3, mu=12.0)
    assert r.numeric == pytest.approx(math.pi**2 / 6, abs=1e-7)
    assert r.passed and r.extra["margin"] > 1
    others = [intout_theta(THETA, c).numeric for c in all_choices(THETA) if c != E3]
    assert max(others) < 1e-12
