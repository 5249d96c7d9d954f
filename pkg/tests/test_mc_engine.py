import math

import numpy as np
import pytest

from wpbound import penner_coords as pc
from wpbound.mc_engine import (QuadratureError, SamplerConfig, SamplingError, adaptive_simpson, domain_points,
                               domain_points_walk, estimate_cell_volume_n1, quadrature, sample_domain_points,
                               slice_point)
from wpbound.ribbon_graph import enumerate_trivalent, theta

THETA = theta()


def _joint(a, b):
    return math.hypot(a.std_error, b.std_error)


def test_quadrature_closed_forms():
    r = quadrature(lambda f: 1 / f, [(4.0, 16.0)], tol=1e-12)
    assert abs(r.value - math.log(4)) <= 1e-10
    assert quadrature(lambda x: x, [(0.0, 1.0)]).value == pytest.approx(0.5, abs=1e-14)


def test_quadrature_dependent_bounds():
    # triangle 0 <= y <= x <= 1 has area 1/2; integral of y is 1/6
    r = quadrature(lambda x, y: y, [(0.0, 1.0), (0.0, lambda x: x)], tol=1e-10)
    assert r.value == pytest.approx(1 / 6, abs=1e-10)


def test_quadrature_trick2_region():
    g = 5.0
    r = quadrature(lambda f, e: 1 / (e * f),
                   [(g, 200 * g), (lambda f: max(g, f - g), lambda f: f + g)], tol=1e-8,
                   breakpoints=[(2 * g,), ()])
    assert r.value < 2


def test_quadrature_reports_failure():
    with pytest.raises(QuadratureError) as exc:
        adaptive_simpson(lambda x: 1 / x if x > 0 else 0.0, 0.0, 1.0, 1e-10, max_depth=8)
    assert exc.value.achieved > 1e-10


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(samples=0)
    with pytest.raises(ValueError):
        SamplerConfig(proposal="log-uniform", cutoff=3.0)
    with pytest.raises(ValueError):
        SamplerConfig(proposal="gaussian")


def test_theta_estimate_bounds():
    est = estimate_cell_volume_n1(THETA, SamplerConfig(seed=1, samples=200_000))
    assert est.mean - 3 * est.std_error > 0
    assert est.mean + 3 * est.std_error < 288
    assert 0 < est.accept_rate < 1 and est.samples == 200_000
    assert set(est.as_record()) >= {"mean", "std_error", "samples", "seed", "accept_rate"}


def test_reproducible_and_shard_independent():
    cfg = SamplerConfig(seed=5, samples=50_000)
    a = estimate_cell_volume_n1(THETA, cfg)
    b = estimate_cell_volume_n1(THETA, cfg)
    c = estimate_cell_volume_n1(THETA, SamplerConfig(seed=5, samples=50_000, shards=3))
    assert a == b
    assert (a.mean, a.std_error) == (c.mean, c.std_error)


def test_relabeled_theta_agrees():
    cfg = SamplerConfig(seed=2, samples=100_000)
    a = estimate_cell_volume_n1(THETA, cfg)
    b = estimate_cell_volume_n1(THETA.relabel([4, 3, 5, 1, 0, 2]), cfg)
    assert abs(a.mean - b.mean) < 3 * _joint(a, b)


def test_gauges_agree():
    a = estimate_cell_volume_n1(THETA, SamplerConfig(seed=3, samples=100_000))
    b = estimate_cell_volume_n1(THETA, SamplerConfig(seed=3, samples=100_000, proposal="cube"))
    assert abs(a.mean - b.mean) < 3 * _joint(a, b)


def test_fd_jacobian_agrees():
    cfg = SamplerConfig(seed=4, samples=20_000)
    a = estimate_cell_volume_n1(THETA, cfg)
    b = estimate_cell_volume_n1(THETA, cfg, fd_jacobian=True)
    assert b.mean == pytest.approx(a.mean, rel=1e-5)


def test_stderr_scaling():
    ratios = []
    for seed in range(5):
        a = estimate_cell_volume_n1(THETA, SamplerConfig(seed=seed, samples=40_000))
        b = estimate_cell_volume_n1(THETA, SamplerConfig(seed=seed + 100, samples=80_000))
        ratios.append(b.std_error / a.std_error)
    assert np.mean(ratios) == pytest.approx(1 / math.sqrt(2), rel=0.2)


def test_requires_one_face():
    G = enumerate_trivalent(0, 3)[0].canonical
    with pytest.raises(SamplingError):
        estimate_cell_volume_n1(G, SamplerConfig(samples=10))
    with pytest.raises(SamplingError):
        next(sample_domain_points(G, SamplerConfig(samples=10)))


def test_sample_domain_points_in_domain():
    pts = np.array(list(sample_domain_points(THETA, SamplerConfig(seed=0, samples=20_000))))
    assert len(pts) > 0
    assert np.all(pts.min(axis=1) > 4)
    for p in pts[:200]:
        assert pc.diagnostics(THETA, p).in_domain
    assert np.allclose(slice_point(THETA, np.full(3, 1 / 3)), 12.0)


def test_walk_points_in_domain():
    G = enumerate_trivalent(2, 1)[0].canonical
    pts = domain_points_walk(G, 5000, seed=1)
    assert np.all(pc.simplicial_coordinates(G, pts) > 0)
    assert np.allclose(pc.rho_total(G, pts), 1.0, rtol=1e-12)
    assert len(np.unique(pts.round(9), axis=0)) > 2500


def test_domain_points_gives_up():
    G = enumerate_trivalent(2, 1)[0].canonical
    with pytest.raises(SamplingError):
        domain_points(G, 10**6, max_draws=1 << 15)
