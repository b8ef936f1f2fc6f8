import math

import numpy as np
import pytest

from rollframe import (
    Chart,
    ChartCurve,
    DomainError,
    DriftError,
    GridError,
    OracleConfig,
    TimeGrid,
    apply_rolling,
    apply_transport,
    chart_derivatives,
    develop_direct,
    fd_derivatives,
    fit_circle,
    make_chart,
    make_curve,
    transport_direct,
)
from rollframe.rolling import orthonormalizer
from rollframe.zoo import MANIFOLDS


def test_oracle_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(step=0.0)
    with pytest.raises(ValueError):
        OracleConfig(max_drift=-1.0)
    grid = OracleConfig(step=1e-2).grid(0.0, 1.0)
    assert grid.steps == 100


def test_fd_plane_is_exact(plane):
    jac, hess = fd_derivatives(plane.chart, [0.4, -2.0])
    np.testing.assert_allclose(jac, [[1, 0], [0, 1], [0, 0]], atol=1e-10)
    np.testing.assert_allclose(hess, 0.0, atol=1e-9)


def test_fd_sphere_accuracy(sphere):
    x = [math.pi / 3, 0.7]
    _, jac, hess = chart_derivatives(sphere.chart, x)
    fjac, fhess = fd_derivatives(sphere.chart, x)
    assert np.abs(fjac - jac).max() <= 1e-8
    assert np.abs(fhess - hess).max() <= 1e-6


def test_fd_quadratic_graph_hessian_exact():
    paraboloid = Chart(2, 3, lambda x: np.array([x[0], x[1], x[0] ** 2 + x[1] ** 2]))
    _, hess = fd_derivatives(paraboloid, [0.3, -0.8])
    expected = np.zeros((3, 2, 2))
    expected[2] = 2 * np.eye(2)
    np.testing.assert_allclose(hess, expected, atol=1e-9)


@pytest.mark.parametrize("name", MANIFOLDS)
def test_fd_matches_analytic_on_zoo(name, rng):
    entry = make_chart(name)
    for x in entry.random_points(rng, 10):
        _, jac, hess = chart_derivatives(entry.chart, x)
        fjac, fhess = fd_derivatives(entry.chart, x)
        assert np.abs(fjac - jac).max() <= 1e-5
        assert np.abs(fhess - hess).max() <= 1e-5
        np.testing.assert_array_equal(fhess, np.swapaxes(fhess, 1, 2))


def test_fd_near_boundary(sphere):
    with pytest.raises(DomainError):
        fd_derivatives(sphere.chart, [1.0005e-3 + 1e-6, 0.0])


def test_oracle_grid_must_start_at_s(pairs):
    entry, curve = pairs["sphere_equator"]
    with pytest.raises(GridError):
        develop_direct(entry.chart, curve, [0.0, 0.0], 0.5, TimeGrid(0.0, 1.0, 10))
    with pytest.raises(GridError):
        transport_direct(entry.chart, curve, [1.0, 0.0], 0.5, TimeGrid(0.0, 1.0, 10))


def test_plane_oracle_is_exact(pairs, solutions):
    entry, curve = pairs["plane_parabola"]
    sol = solutions["plane_parabola"]
    for h in (1e-1, 1e-2):
        cfg = OracleConfig(step=h)
        grid = cfg.grid(-1.0, 0.5)
        out = develop_direct(entry.chart, curve, [0.3, 0.1], -1.0, grid, cfg)
        for p in out:
            np.testing.assert_allclose(p.ambient, apply_rolling(sol, p.s, -1.0, [0.3, 0.1]).ambient, atol=1e-12)
        vs = transport_direct(entry.chart, curve, [0.3, 0.1], -1.0, grid, cfg)
        np.testing.assert_allclose([v.coords for v in vs], np.tile([0.3, 0.1], (len(vs), 1)), atol=1e-14)


def test_equator_develop_first_order(pairs, solutions):
    entry, curve = pairs["sphere_equator"]
    sol = solutions["sphere_equator"]
    # the leading error is affine in x0; (0.2, 0.5) happens to cancel it on the equator
    x0 = np.array([0.2, -0.1])
    ref = apply_rolling(sol, 1.0, 0.0, x0).ambient
    gaps = []
    for h in (1e-3, 5e-4):
        cfg = OracleConfig(step=h)
        out = develop_direct(entry.chart, curve, x0, 0.0, cfg.grid(0.0, 1.0), cfg)
        gaps.append(np.linalg.norm(out[-1].ambient - ref))
    assert gaps[0] <= 1e-2
    assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.05)


def _reversed(curve):
    """The curve run backwards, ``c(-t)``, so oracle steps can go from s down to t."""
    return ChartCurve(interval=(-curve.t_max, -curve.t_min),
                      eval=lambda t: curve.eval(-t),
                      d1=lambda t: -np.asarray(curve.d1(-t)),
                      d2=lambda t: curve.d2(-t),
                      vectorized=curve.vectorized)


def test_latitude_oracle_trace_radius(pairs):
    entry, curve = pairs["sphere_latitude"]
    # carry gamma(s_k) back to H_0 with one oracle run per s_k
    cfg = OracleConfig(step=1e-3)
    samples = []
    for s in np.linspace(0.2, 2 * math.pi - 0.2, 12):
        back = develop_direct(entry.chart, _reversed(curve), [0.0, 0.0], -s, cfg.grid(-s, 0.0), cfg)
        samples.append(back[-1])
    _, radius, _ = fit_circle(samples)
    assert radius == pytest.approx(math.sqrt(3), abs=1e-2)


def test_latitude_transport_holonomy(pairs):
    entry, curve = pairs["sphere_latitude"]
    cfg = OracleConfig(step=1e-3)
    out = transport_direct(entry.chart, curve, [1.0, 0.0], 0.0, cfg.grid(0.0, 2 * math.pi), cfg)
    gram = entry.chart.jacobian(np.array([math.pi / 3, 0.0]))
    lt = orthonormalizer(gram.T @ gram)
    a, b = lt @ out[0].coords, lt @ out[-1].coords
    angle = math.atan2(a[0] * b[1] - a[1] * b[0], a @ b)
    assert abs(abs(angle) - math.pi) <= 1e-2


def test_equator_transport_of_velocity(pairs):
    entry, curve = pairs["sphere_equator"]
    cfg = OracleConfig(step=1e-2)
    out = transport_direct(entry.chart, curve, [0.0, 1.0], 0.0, cfg.grid(0.0, 3.0), cfg)
    for p in out:
        vel = entry.chart.jacobian(curve.eval(p.s)) @ curve.d1(p.s)
        cross = np.cross(p.ambient, vel)
        assert np.linalg.norm(cross) <= 1e-12


def test_transport_direct_preserves_norm(pairs):
    for name in ("torus_top", "graph_line", "cone_circle"):
        entry, curve = pairs[name]
        cfg = OracleConfig(step=1e-2)
        out = transport_direct(entry.chart, curve, [0.3, -0.6], curve.t_min, cfg.grid(curve.t_min, curve.t_max), cfg)
        norms = np.array([np.linalg.norm(p.ambient) for p in out])
        assert np.abs(norms / norms[0] - 1).max() <= 1e-12


def test_oracle_matches_kernel_transport(pairs, solutions):
    entry, curve = pairs["torus_top"]
    cfg = OracleConfig(step=1e-3)
    out = transport_direct(entry.chart, curve, [0.3, -0.6], 0.0, cfg.grid(0.0, 1.0), cfg)
    ref = apply_transport(solutions["torus_top"], 1.0, 0.0, [0.3, -0.6]).ambient
    assert np.linalg.norm(out[-1].ambient - ref) <= 1e-2


def test_develop_drift_guard(pairs):
    entry, curve = pairs["sphere_latitude"]
    cfg = OracleConfig(step=1e-2, max_drift=1e-30)
    with pytest.raises(DriftError):
        develop_direct(entry.chart, curve, [0.5, 0.5], 0.0, cfg.grid(0.0, 1.0), cfg)


def test_oracle_uses_fd_for_eval_only_chart(pairs):
    entry, curve = pairs["sphere_latitude"]
    bare = Chart(2, 3, entry.chart.eval, domain_guard=entry.chart.domain_guard)
    cfg = OracleConfig(step=1e-2)
    grid = cfg.grid(0.0, 1.0)
    a = transport_direct(entry.chart, curve, [1.0, 0.0], 0.0, grid, cfg)[-1].ambient
    b = transport_direct(bare, curve, [1.0, 0.0], 0.0, grid, cfg)[-1].ambient
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_make_curve_reversed_helper_is_consistent(sphere):
    curve = make_curve(sphere, "latitude", {"colatitude": 1.0})
    rev = _reversed(curve)
    np.testing.assert_allclose(rev.sample([-0.5])[0], curve.sample([0.5])[0])
