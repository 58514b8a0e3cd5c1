"""Geometry primitives against closed-form oracles."""

import json

import numpy as np
import pytest

from affinekit.errors import ChartDomainError, GeodesicExitError, LogConvergenceError
from affinekit.geometry import (
    Box,
    ChartManifold,
    Curve,
    TangentVector,
    christoffel,
    integrate_geodesic,
    load_manifold,
    make_euclidean,
    make_hyperbolic,
    make_product,
    make_sphere,
    orthonormal_frame,
    parallel_transport,
    riemannian_log,
    transport_field,
)

from oracles import (
    great_circle_nodes,
    sphere_distance,
    sphere_exp_chart,
    sphere_triangle_area,
)


@pytest.fixture(scope="module")
def sphere():
    return make_sphere()


@pytest.fixture(scope="module")
def plane():
    return make_euclidean(2)


@pytest.fixture(scope="module")
def halfplane():
    return make_hyperbolic()


# ---------------------------------------------------------------------------
# Christoffel symbols


def test_christoffel_flat_vanishes(plane):
    g = christoffel(plane, [0.3, -4.0])
    assert np.max(np.abs(g)) == 0.0


def test_christoffel_sphere_closed_form(sphere):
    # Gamma^theta_{phi phi} = -sin(theta) cos(theta) = 0 at the equator
    g = christoffel(sphere, [np.pi / 2, 0.7])
    assert abs(g[0, 1, 1]) < 1e-12
    # Gamma^phi_{theta phi} = cot(theta) = 1 at theta = pi/4
    g = christoffel(sphere, [np.pi / 4, -0.2])
    assert abs(g[1, 0, 1] - 1.0) < 1e-12
    assert abs(g[1, 1, 0] - 1.0) < 1e-12


def test_christoffel_fd_matches_analytic():
    fd = make_sphere(analytic=False)
    an = make_sphere()
    for x in ([0.9, 0.4], [2.0, -1.1], [np.pi / 2, 2.0]):
        assert np.max(np.abs(christoffel(fd, x) - christoffel(an, x))) < 1e-6


def test_christoffel_fd_second_order():
    an = make_sphere()
    x = np.array([1.1, 0.3])
    exact = christoffel(an, x)
    errs = []
    for h in (1e-2, 5e-3):
        fd = make_sphere(analytic=False)
        fd.h_fd = h
        errs.append(np.max(np.abs(christoffel(fd, x) - exact)))
    assert errs[0] / errs[1] > 3.0  # halving h divides the error by about 4


def test_christoffel_lower_symmetry():
    fd = make_sphere(analytic=False)
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = fd.domain.sample(rng, shrink=0.05)
        g = christoffel(fd, x)
        assert np.max(np.abs(g - np.swapaxes(g, 1, 2))) < 1e-10


def test_christoffel_domain_error(sphere):
    with pytest.raises(ChartDomainError):
        christoffel(sphere, [0.05, 0.0])


# ---------------------------------------------------------------------------
# Geodesics


def test_flat_geodesic_straight_line(plane):
    c = integrate_geodesic(plane, [0.0, 0.0], [1.0, 2.0], 1.0, steps=64)
    assert np.max(np.abs(c.end - [1.0, 2.0])) < 1e-9


def test_sphere_equator_to_antipode(sphere):
    c = integrate_geodesic(sphere, [np.pi / 2, 0.0], [0.0, 1.0], np.pi, steps=1024)
    assert np.max(np.abs(c.end - [np.pi / 2, np.pi])) < 1e-6
    assert np.max(np.abs(c.xs[:, 0] - np.pi / 2)) < 1e-6  # stays on the equator


def test_hyperbolic_vertical_geodesic(halfplane):
    c = integrate_geodesic(halfplane, [0.0, 1.0], [0.0, 1.0], 1.0, steps=1024)
    assert np.max(np.abs(c.end - [0.0, np.e])) < 1e-6


def test_geodesic_speed_conserved(sphere, halfplane):
    for m, p, v in (
        (sphere, [1.0, 0.2], [0.4, 0.6]),
        (halfplane, [0.5, 2.0], [1.0, -0.5]),
    ):
        c = integrate_geodesic(m, p, v, 1.0, steps=256)
        speeds = np.array(
            [m.gnorm(c.xs[i], c.velocities[i]) for i in range(0, c.ts.size, 16)]
        )
        assert np.max(np.abs(speeds - speeds[0])) <= 1e-6 * speeds[0]


def test_geodesic_fourth_order_convergence(sphere):
    p = np.array([1.0, 0.0])
    v = np.array([0.3, 0.9])
    target = sphere_exp_chart(p, v, 1.0)
    err = {
        steps: np.max(
            np.abs(integrate_geodesic(sphere, p, v, 1.0, steps=steps).end - target)
        )
        for steps in (32, 64)
    }
    assert err[32] / err[64] >= 8.0


def test_geodesic_domain_exit(plane):
    with pytest.raises(GeodesicExitError) as exc:
        integrate_geodesic(plane, [9.0, 0.0], [2.0, 0.0], 1.0, steps=64)
    assert 0.0 < exc.value.last_t < 1.0
    assert exc.value.partial is not None
    assert exc.value.partial.xs[-1][0] <= 10.0


def test_geodesic_rejects_bad_args(plane):
    with pytest.raises(ValueError):
        integrate_geodesic(plane, [0.0, 0.0], [1.0, 0.0], 1.0, steps=8)
    with pytest.raises(ValueError):
        integrate_geodesic(plane, [0.0, 0.0], [1.0, 0.0], -1.0)
    with pytest.raises(ValueError):
        integrate_geodesic(
            plane, [0.0, 0.0], TangentVector([1.0, 0.0], [1.0, 0.0]), 1.0
        )


# ---------------------------------------------------------------------------
# Parallel transport


def test_transport_flat_polygon_identity(plane):
    loop = Curve(
        ts=[0.0, 1.0, 2.0, 3.0],
        xs=[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]],
        kind="polygon",
    )
    v = TangentVector([0.0, 0.0], [0.7, -0.3])
    out = parallel_transport(plane, loop, v)
    assert np.max(np.abs(out.components - v.components)) < 1e-12


def test_transport_along_equator_keeps_north(sphere):
    c = integrate_geodesic(sphere, [np.pi / 2, 0.0], [0.0, 1.0], 1.2, steps=256)
    out = parallel_transport(sphere, c, TangentVector([np.pi / 2, 0.0], [1.0, 0.0]))
    assert np.max(np.abs(out.components - [1.0, 0.0])) < 1e-6


def test_transport_tangent_to_tangent(sphere):
    c = integrate_geodesic(sphere, [1.1, -0.4], [0.5, 0.3], 1.0, steps=256)
    out = parallel_transport(sphere, c, TangentVector(c.start, c.velocities[0]))
    assert np.max(np.abs(out.components - c.velocities[-1])) < 1e-9


def test_transport_isometry(sphere, halfplane):
    rng = np.random.default_rng(1)
    for m, p in ((sphere, [1.0, 0.5]), (halfplane, [0.0, 1.5])):
        p = np.asarray(p, dtype=float)
        for _ in range(4):
            v = rng.standard_normal(2)
            c = integrate_geodesic(m, p, rng.standard_normal(2) * 0.4, 1.0, steps=192)
            w = transport_field(m, c, v)[-1]
            n0 = m.gnorm(p, v)
            n1 = m.gnorm(c.end, w)
            assert abs(n1 - n0) <= 1e-6 * n0


def test_transport_right_angle_triangle_rotates_quarter_turn(sphere):
    # Mutually orthogonal vertices tilted away from the poles; the enclosed
    # octant has three right angles and area pi/2.
    u1 = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    u2 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2)
    u3 = np.cross(u1, u2)
    chart = lambda p: np.array(
        [np.arccos(np.clip(p[2], -1, 1)), np.arctan2(p[1], p[0])]
    )
    a, b, c = chart(u1), chart(u2), chart(u3)
    assert abs(sphere_triangle_area([a, b, c]) - np.pi / 2) < 1e-12

    frame = orthonormal_frame(sphere, a)
    w = frame[:, 0]
    for start, stop in ((a, b), (b, c), (c, a)):
        ts, nodes = great_circle_nodes(start, stop, n=220)
        leg = Curve(ts, nodes, kind="generic")
        w = transport_field(sphere, leg, w)[-1]
    g = sphere.metric(a)
    coords0 = frame.T @ g @ frame[:, 0]
    coords1 = frame.T @ g @ w
    angle = np.arctan2(
        coords0[0] * coords1[1] - coords0[1] * coords1[0], coords0 @ coords1
    )
    assert abs(abs(angle) - np.pi / 2) < 1e-4


def test_transport_base_mismatch(sphere):
    c = integrate_geodesic(sphere, [1.0, 0.0], [0.1, 0.2], 1.0, steps=64)
    with pytest.raises(ValueError):
        parallel_transport(sphere, c, TangentVector([1.5, 0.0], [1.0, 0.0]))


# ---------------------------------------------------------------------------
# Riemannian logarithm


def test_log_flat_is_difference(plane):
    v = riemannian_log(plane, [0.0, 0.0], [3.0, 4.0])
    assert np.max(np.abs(v.components - [3.0, 4.0])) < 1e-9


def test_log_sphere_quarter_circle(sphere):
    p = np.array([np.pi / 2, 0.0])
    v = riemannian_log(sphere, p, [np.pi / 2, np.pi / 2], tol=1e-10)
    assert abs(sphere.gnorm(p, v.components) - np.pi / 2) < 1e-6
    assert abs(v.components[0]) < 1e-8  # tangent along the equator


def test_log_of_base_point_is_zero(sphere):
    v = riemannian_log(sphere, [1.0, 0.3], [1.0, 0.3])
    assert np.max(np.abs(v.components)) == 0.0


def test_log_exp_round_trip(sphere, halfplane):
    rng = np.random.default_rng(2)
    for m, p in ((sphere, [1.2, 0.4]), (halfplane, [0.5, 1.0])):
        p = np.asarray(p, dtype=float)
        frame = orthonormal_frame(m, p)
        for _ in range(4):
            u = rng.standard_normal(2)
            u *= rng.uniform(0.1, 0.9) * m.convexity_radius / np.linalg.norm(u)
            v = frame @ u
            x = integrate_geodesic(m, p, v, 1.0, steps=192).end
            back = riemannian_log(m, p, x, tol=1e-10)
            assert np.max(np.abs(back.components - v)) < 1e-8


def test_log_matches_embedding_oracle(sphere):
    from oracles import sphere_log_chart

    p = np.array([1.0, -0.5])
    x = np.array([1.4, 0.2])
    v = riemannian_log(sphere, p, x, tol=1e-11)
    assert np.max(np.abs(v.components - sphere_log_chart(p, x))) < 1e-8


def test_log_reports_convergence_failure(sphere):
    with pytest.raises(LogConvergenceError) as exc:
        riemannian_log(sphere, [1.0, 0.0], [1.7, 2.2], tol=1e-12, max_iter=1)
    assert exc.value.residual > 0.0


# ---------------------------------------------------------------------------
# Frames and metric validation


def test_frame_euclidean_identity(plane):
    assert np.max(np.abs(orthonormal_frame(plane, [1.0, 1.0]) - np.eye(2))) < 1e-14


def test_frame_diagonal_metric():
    m = ChartManifold(
        dim=2,
        metric_at=lambda x: np.diag([4.0, 1.0]),
        domain=Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0])),
    )
    f = orthonormal_frame(m, [0.0, 0.0])
    assert np.max(np.abs(f - np.diag([0.5, 1.0]))) < 1e-12


def test_frame_hyperbolic(halfplane):
    f = orthonormal_frame(halfplane, [0.0, 2.0])
    assert np.max(np.abs(f - np.diag([2.0, 2.0]))) < 1e-12


def test_frame_orthonormality_random_metrics():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.standard_normal((3, 3))
        spd = a @ a.T + 3 * np.eye(3)
        m = ChartManifold(
            dim=3,
            metric_at=lambda x, spd=spd: spd,
            domain=Box(-np.ones(3), np.ones(3)),
        )
        f = orthonormal_frame(m, np.zeros(3))
        assert np.max(np.abs(f.T @ spd @ f - np.eye(3))) < 1e-10


def test_builtin_metrics_are_spd(sphere, halfplane, plane):
    for m in (sphere, halfplane, plane, make_product(make_sphere(), make_euclidean(1))):
        report = m.validate_metric(n_samples=24, seed=5)
        assert report["symmetry_residual"] <= 1e-12
        assert report["min_eigenvalue"] > 0.0


# ---------------------------------------------------------------------------
# Products and config loading


def test_product_blocks(sphere):
    prod = make_product(make_sphere(), make_euclidean(1, 5.0))
    assert prod.dim == 3
    g = prod.metric([1.0, 0.2, 0.3])
    assert abs(g[2, 2] - 1.0) < 1e-14
    assert np.max(np.abs(g[:2, :2] - sphere.metric([1.0, 0.2]))) < 1e-14
    assert np.max(np.abs(g[2, :2])) == 0.0
    c = integrate_geodesic(prod, [np.pi / 2, 0.0, 0.0], [0.0, 0.5, 0.7], 1.0)
    assert abs(c.end[2] - 0.7) < 1e-12  # euclidean factor moves linearly


def test_load_manifold_roundtrip(tmp_path):
    cfg = {
        "dim": 3,
        "metric": {
            "name": "product",
            "factors": [{"name": "sphere"}, {"name": "euclidean", "dim": 1}],
        },
        "h_fd": 5e-5,
    }
    path = tmp_path / "manifold.json"
    path.write_text(json.dumps(cfg))
    m = load_manifold(path)
    assert m.dim == 3
    assert m.h_fd == 5e-5
    m2 = load_manifold({"metric": {"name": "sphere", "radius": 2.0}})
    assert m2.dim == 2
    assert abs(m2.metric([np.pi / 2, 0.0])[0, 0] - 4.0) < 1e-14


def test_load_manifold_domain_override():
    m = load_manifold(
        {
            "metric": {"name": "euclidean", "dim": 2},
            "domain": [[-1.0, 1.0], [0.0, 2.0]],
        }
    )
    assert m.contains([0.5, 1.5])
    assert not m.contains([0.5, -0.5])


def test_load_manifold_rejects_unknown_metric():
    with pytest.raises(ValueError):
        load_manifold({"metric": {"name": "lorentzian"}})


def test_load_manifold_rejects_dim_mismatch():
    with pytest.raises(ValueError):
        load_manifold({"dim": 5, "metric": {"name": "sphere"}})


def test_curve_requires_increasing_parameters():
    with pytest.raises(ValueError):
        Curve(ts=[0.0, 0.0, 1.0], xs=np.zeros((3, 2)))
