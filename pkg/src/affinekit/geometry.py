"""Chart-based Riemannian manifolds.

A manifold is a single coordinate chart with an explicit metric tensor
field on an axis-aligned domain box.  On top of that this module provides
the geometric primitives everything else consumes: Christoffel symbols
(analytic or finite-difference), fixed-step geodesic integration, parallel
transport along curves, the Riemannian logarithm by shooting, and
orthonormal frames.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.linalg import solve_triangular

from .errors import (
    ChartDomainError,
    GeodesicExitError,
    LogConvergenceError,
)

__all__ = [
    "Box",
    "ChartManifold",
    "TangentVector",
    "Curve",
    "christoffel",
    "integrate_geodesic",
    "parallel_transport",
    "transport_field",
    "riemannian_exp",
    "riemannian_log",
    "orthonormal_frame",
    "make_euclidean",
    "make_sphere",
    "make_hyperbolic",
    "make_product",
    "register_metric",
    "load_manifold",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box of valid chart coordinates."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if np.any(hi <= lo):
            raise ValueError("box upper bounds must exceed lower bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def scale(self) -> float:
        return float(np.max(self.widths))

    def contains(self, x: np.ndarray, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= self.lower - margin) and np.all(x <= self.upper + margin)
        )

    def sample(self, rng: np.random.Generator, n: int = 1, shrink: float = 0.0):
        """Uniform points in the box, optionally pulled in from the walls."""
        lo = self.lower + shrink * self.widths
        hi = self.upper - shrink * self.widths
        pts = rng.uniform(lo, hi, size=(n, self.dim))
        return pts[0] if n == 1 else pts


@dataclass(frozen=True)
class TangentVector:
    """A base point plus vector components, both in chart coordinates."""

    base: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(
            self, "components", np.asarray(self.components, dtype=float)
        )
        if self.base.shape != self.components.shape:
            raise ValueError("base and components must have equal length")


@dataclass
class ChartManifold:
    """A coordinate chart with an explicit metric tensor field.

    ``metric_at`` maps chart coordinates to a symmetric positive-definite
    matrix.  Christoffel symbols come from ``christoffel_at`` when given,
    otherwise from central finite differences of the metric with step
    ``h_fd``.  Instances are immutable in practice: nothing in this package
    mutates a manifold after construction, so they are safe to share.
    """

    dim: int
    metric_at: Callable[[np.ndarray], np.ndarray]
    domain: Box
    christoffel_at: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h_fd: Optional[float] = None
    name: str = ""
    convexity_radius: float = 1.0

    def __post_init__(self):
        if self.domain.dim != self.dim:
            raise ValueError("domain dimension does not match manifold dim")
        if self.h_fd is None:
            self.h_fd = 1e-4 * self.domain.scale

    def contains(self, x) -> bool:
        return self.domain.contains(x)

    def metric(self, x) -> np.ndarray:
        return np.asarray(self.metric_at(np.asarray(x, dtype=float)), dtype=float)

    def christoffel(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.christoffel_at is not None:
            return np.asarray(self.christoffel_at(x), dtype=float)
        return _fd_christoffel(self, x)

    def inner(self, x, u, v) -> float:
        g = self.metric(x)
        return float(np.asarray(u) @ g @ np.asarray(v))

    def gnorm(self, x, u) -> float:
        return float(np.sqrt(max(self.inner(x, u, u), 0.0)))

    def validate_metric(self, n_samples: int = 32, seed: int = 0) -> dict:
        """Sample the domain and report symmetry / definiteness residuals."""
        rng = np.random.default_rng(seed)
        pts = self.domain.sample(rng, n_samples, shrink=0.01)
        sym = 0.0
        min_eig = np.inf
        for x in np.atleast_2d(pts):
            g = self.metric(x)
            sym = max(sym, float(np.max(np.abs(g - g.T))))
            min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(g))))
        return {"symmetry_residual": sym, "min_eigenvalue": min_eig}


@dataclass
class Curve:
    """A parametrized curve given by its sampled nodes.

    ``kind`` is one of ``geodesic`` (dense integrator output, velocities
    stored), ``polygon`` (vertices joined by straight chart segments) and
    ``generic`` (dense nodes, interpolated by a spline).
    """

    ts: np.ndarray
    xs: np.ndarray
    kind: str = "generic"
    velocities: Optional[np.ndarray] = None

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        if self.ts.size != self.xs.shape[0]:
            raise ValueError("node count mismatch between parameters and points")
        if self.ts.size < 2:
            raise ValueError("a curve needs at least two nodes")
        if np.any(np.diff(self.ts) <= 0):
            raise ValueError("curve parameters must be strictly increasing")
        if self.kind not in ("geodesic", "polygon", "generic"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        self._spline = None

    @property
    def start(self) -> np.ndarray:
        return self.xs[0]

    @property
    def end(self) -> np.ndarray:
        return self.xs[-1]

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t1(self) -> float:
        return float(self.ts[-1])

    def _get_spline(self):
        if self._spline is None:
            k = min(3, self.ts.size - 1)
            self._spline = make_interp_spline(self.ts, self.xs, k=k, axis=0)
        return self._spline

    def position(self, t: float) -> np.ndarray:
        return np.asarray(self._get_spline()(t), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        return np.asarray(self._get_spline()(t, 1), dtype=float)

    def validate_domain(self, m: ChartManifold) -> bool:
        return all(m.contains(x) for x in self.xs)


# ---------------------------------------------------------------------------
# Christoffel symbols


def _fd_christoffel(m: ChartManifold, x: np.ndarray) -> np.ndarray:
    """Central-difference Levi-Civita symbols, shrinking steps at walls."""
    d = m.dim
    h = m.h_fd
    dg = np.empty((d, d, d))  # dg[l] = d g / d x_l
    for l in range(d):
        hp = min(h, float(m.domain.upper[l] - x[l]))
        hm = min(h, float(x[l] - m.domain.lower[l]))
        if hp <= 0 and hm <= 0:
            raise ChartDomainError("no room for finite differences at boundary")
        hp = max(hp, 0.0)
        hm = max(hm, 0.0)
        xp = x.copy()
        xm = x.copy()
        xp[l] += hp
        xm[l] -= hm
        dg[l] = (m.metric(xp) - m.metric(xm)) / (hp + hm)
    ginv = np.linalg.inv(m.metric(x))
    # S[l, i, j] = d_i g_{jl} + d_j g_{il} - d_l g_{ij}
    s = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    gamma = 0.5 * np.einsum("kl,lij->kij", ginv, s)
    return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))


def christoffel(m: ChartManifold, x) -> np.ndarray:
    """Connection coefficients ``gamma[k, i, j]`` at chart coordinates x."""
    x = np.asarray(x, dtype=float)
    if not m.contains(x):
        raise ChartDomainError(f"coordinates {x} outside the chart domain")
    return m.christoffel(x)


# ---------------------------------------------------------------------------
# Geodesics


def _geo_acc(m: ChartManifold, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    g = m.christoffel(x)
    return -(g @ u) @ u


def integrate_geodesic(m: ChartManifold, p, v, t_end: float, steps: int = 256) -> Curve:
    """Integrate the geodesic from p with initial velocity v over [0, t_end].

    Classical fixed-step fourth-order scheme.  Raises
    :class:`GeodesicExitError` (carrying the last valid parameter and the
    truncated curve) if a node leaves the chart domain.
    """
    if steps < 16:
        raise ValueError("steps must be at least 16")
    if not t_end > 0:
        raise ValueError("t_end must be positive; fold direction into v")
    p = np.asarray(p, dtype=float)
    if isinstance(v, TangentVector):
        if not np.allclose(v.base, p, atol=1e-12):
            raise ValueError("tangent vector is not based at p")
        u = v.components.copy()
    else:
        u = np.asarray(v, dtype=float).copy()
    if not m.contains(p):
        raise ChartDomainError(f"start point {p} outside the chart domain")

    h = t_end / steps
    ts = np.linspace(0.0, t_end, steps + 1)
    xs = np.empty((steps + 1, m.dim))
    us = np.empty_like(xs)
    x = p.copy()
    xs[0], us[0] = x, u
    for i in range(steps):
        k1x, k1u = u, _geo_acc(m, x, u)
        x2, u2 = x + 0.5 * h * k1x, u + 0.5 * h * k1u
        k2x, k2u = u2, _geo_acc(m, x2, u2)
        x3, u3 = x + 0.5 * h * k2x, u + 0.5 * h * k2u
        k3x, k3u = u3, _geo_acc(m, x3, u3)
        x4, u4 = x + h * k3x, u + h * k3u
        k4x, k4u = u4, _geo_acc(m, x4, u4)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        u = u + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
        if not m.contains(x):
            partial = Curve(ts[: i + 1].copy(), xs[: i + 1].copy(), "geodesic",
                            us[: i + 1].copy())
            raise GeodesicExitError(
                f"geodesic left the chart domain near t={ts[i + 1]:.6g}",
                last_t=float(ts[i]),
                partial=partial,
            )
        xs[i + 1], us[i + 1] = x, u
    return Curve(ts, xs, "geodesic", us)


def riemannian_exp(m: ChartManifold, p, v, steps: int = 256) -> np.ndarray:
    """Endpoint of the unit-time geodesic with initial velocity v."""
    v = v.components if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
    if np.max(np.abs(v)) == 0.0:
        return np.asarray(p, dtype=float).copy()
    return integrate_geodesic(m, p, v, 1.0, steps=steps).end


# ---------------------------------------------------------------------------
# Parallel transport


def _transport_rhs(m, x, u, w):
    g = m.christoffel(x)
    # w may be a vector (d,) or a stack of columns (d, k)
    if w.ndim == 1:
        return -(g @ w) @ u
    return -np.einsum("kim,i->km", g @ w, u)


def transport_field(m: ChartManifold, c: Curve, w0) -> np.ndarray:
    """Transport w0 along c, returning the components at every node.

    w0 may be a single vector or a matrix whose columns are transported
    together (the equation is linear, so this is exact batching).
    """
    w = np.asarray(w0, dtype=float).copy()
    out = np.empty((c.ts.size,) + w.shape)
    out[0] = w

    if c.kind == "geodesic" and c.velocities is not None:
        # Re-integrate jointly with the geodesic equation so the curve's
        # tangent transports to the tangent at integrator accuracy.
        x = c.xs[0].copy()
        u = c.velocities[0].copy()
        for i in range(c.ts.size - 1):
            h = c.ts[i + 1] - c.ts[i]
            k1x, k1u, k1w = u, _geo_acc(m, x, u), _transport_rhs(m, x, u, w)
            x2, u2, w2 = x + 0.5 * h * k1x, u + 0.5 * h * k1u, w + 0.5 * h * k1w
            k2x, k2u, k2w = u2, _geo_acc(m, x2, u2), _transport_rhs(m, x2, u2, w2)
            x3, u3, w3 = x + 0.5 * h * k2x, u + 0.5 * h * k2u, w + 0.5 * h * k2w
            k3x, k3u, k3w = u3, _geo_acc(m, x3, u3), _transport_rhs(m, x3, u3, w3)
            x4, u4, w4 = x + h * k3x, u + h * k3u, w + h * k3w
            k4x, k4u, k4w = u4, _geo_acc(m, x4, u4), _transport_rhs(m, x4, u4, w4)
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            u = u + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
            w = w + (h / 6.0) * (k1w + 2 * k2w + 2 * k3w + k4w)
            out[i + 1] = w
        return out

    if c.kind == "polygon":
        # Straight chart segments between consecutive vertices.
        substeps = 24
        for i in range(c.ts.size - 1):
            a, b = c.xs[i], c.xs[i + 1]
            dt = c.ts[i + 1] - c.ts[i]
            vel = (b - a) / dt
            h = dt / substeps
            for j in range(substeps):
                t_loc = j * h
                x0 = a + vel * t_loc
                xh = a + vel * (t_loc + 0.5 * h)
                x1 = a + vel * (t_loc + h)
                k1 = _transport_rhs(m, x0, vel, w)
                k2 = _transport_rhs(m, xh, vel, w + 0.5 * h * k1)
                k3 = _transport_rhs(m, xh, vel, w + 0.5 * h * k2)
                k4 = _transport_rhs(m, x1, vel, w + h * k3)
                w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            out[i + 1] = w
        return out

    # Generic: spline interpolation of the node path.
    pos, vel = c.position, c.velocity
    for i in range(c.ts.size - 1):
        t0, t1 = c.ts[i], c.ts[i + 1]
        h = t1 - t0
        tm = t0 + 0.5 * h
        x0, xm, x1 = pos(t0), pos(tm), pos(t1)
        u0, um, u1 = vel(t0), vel(tm), vel(t1)
        k1 = _transport_rhs(m, x0, u0, w)
        k2 = _transport_rhs(m, xm, um, w + 0.5 * h * k1)
        k3 = _transport_rhs(m, xm, um, w + 0.5 * h * k2)
        k4 = _transport_rhs(m, x1, u1, w + h * k3)
        w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = w
    return out


def parallel_transport(m: ChartManifold, c: Curve, v: TangentVector) -> TangentVector:
    """Parallel transport of v from the start of c to its end."""
    if not np.allclose(v.base, c.start, atol=1e-9):
        raise ValueError("vector is not based at the curve start")
    if not c.validate_domain(m):
        raise ChartDomainError("curve has nodes outside the chart domain")
    field_ = transport_field(m, c, v.components)
    return TangentVector(c.end, field_[-1])


# ---------------------------------------------------------------------------
# Riemannian logarithm by shooting


def riemannian_log(
    m: ChartManifold,
    p,
    x,
    tol: float = 1e-9,
    steps: int = 192,
    max_iter: int = 60,
) -> TangentVector:
    """Initial velocity v with exp_p(v) = x, by damped Newton shooting.

    Valid inside a strictly convex neighborhood of p; the chart-coordinate
    difference seeds the iteration.  Raises :class:`LogConvergenceError`
    with the final residual if the iteration stalls.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if not m.contains(p) or not m.contains(x):
        raise ChartDomainError("log endpoints must lie in the chart domain")
    if np.allclose(p, x, atol=1e-15):
        return TangentVector(p, np.zeros(m.dim))

    def shoot(v):
        try:
            return riemannian_exp(m, p, v, steps=steps)
        except GeodesicExitError:
            return None

    v = x - p
    endpoint = shoot(v)
    while endpoint is None:
        v = 0.5 * v
        endpoint = shoot(v)
        if np.max(np.abs(v)) < 1e-14:
            raise LogConvergenceError(
                "cannot shoot from p toward x without leaving the domain",
                residual=float(np.max(np.abs(x - p))),
                iterations=0,
            )

    resid = np.max(np.abs(endpoint - x))
    for it in range(max_iter):
        if resid <= tol:
            return TangentVector(p, v)
        # Forward-difference Jacobian of the endpoint map.
        jac = np.empty((m.dim, m.dim))
        hj = 1e-6 * (1.0 + float(np.max(np.abs(v))))
        for j in range(m.dim):
            vj = v.copy()
            vj[j] += hj
            ej = shoot(vj)
            if ej is None:
                vj[j] -= 2 * hj
                ej = shoot(vj)
                if ej is None:
                    raise LogConvergenceError(
                        "endpoint Jacobian not computable inside the domain",
                        residual=float(resid),
                        iterations=it,
                    )
                jac[:, j] = (endpoint - ej) / hj
            else:
                jac[:, j] = (ej - endpoint) / hj
        try:
            delta = np.linalg.solve(jac, x - endpoint)
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(jac, x - endpoint, rcond=None)
        # Backtracking damping on the residual.
        alpha = 1.0
        improved = False
        for _ in range(12):
            v_new = v + alpha * delta
            e_new = shoot(v_new)
            if e_new is not None:
                r_new = np.max(np.abs(e_new - x))
                if r_new < resid:
                    v, endpoint, resid = v_new, e_new, r_new
                    improved = True
                    break
            alpha *= 0.5
        if not improved:
            break
    if resid <= tol:
        return TangentVector(p, v)
    raise LogConvergenceError(
        f"shooting stalled with residual {resid:.3e}",
        residual=float(resid),
        iterations=max_iter,
    )


# ---------------------------------------------------------------------------
# Frames


def orthonormal_frame(m: ChartManifold, p) -> np.ndarray:
    """Matrix whose columns form a g_p-orthonormal basis (Cholesky frame)."""
    p = np.asarray(p, dtype=float)
    if not m.contains(p):
        raise ChartDomainError(f"coordinates {p} outside the chart domain")
    g = m.metric(p)
    chol = np.linalg.cholesky(g)
    return solve_triangular(chol.T, np.eye(m.dim), lower=False)


def frame_coordinates(m: ChartManifold, p, frame: np.ndarray, w: np.ndarray):
    """Coordinates of chart vector(s) w in the given orthonormal frame."""
    g = m.metric(np.asarray(p, dtype=float))
    return frame.T @ g @ np.asarray(w, dtype=float)


# ---------------------------------------------------------------------------
# Built-in metrics and config loading

_METRIC_BUILDERS: dict = {}


def register_metric(name: str, builder: Callable[..., ChartManifold]) -> None:
    _METRIC_BUILDERS[name] = builder


def make_euclidean(dim: int = 2, halfwidth: float = 10.0) -> ChartManifold:
    eye = np.eye(dim)
    zeros = np.zeros((dim, dim, dim))
    return ChartManifold(
        dim=dim,
        metric_at=lambda x: eye.copy(),
        domain=Box(-halfwidth * np.ones(dim), halfwidth * np.ones(dim)),
        christoffel_at=lambda x: zeros.copy(),
        name=f"euclidean{dim}",
        convexity_radius=halfwidth,
    )


def make_sphere(
    radius: float = 1.0,
    theta_margin: float = 0.2,
    phi_halfwidth: float = 3.4,
    analytic: bool = True,
) -> ChartManifold:
    """Round sphere in colatitude/longitude coordinates (theta, phi).

    The chart keeps theta away from the poles; the metric is
    ``radius^2 * diag(1, sin(theta)^2)``.
    """
    r2 = radius * radius

    def metric(x):
        th = x[0]
        return np.array([[r2, 0.0], [0.0, r2 * np.sin(th) ** 2]])

    def gamma(x):
        th = x[0]
        s, c = np.sin(th), np.cos(th)
        g = np.zeros((2, 2, 2))
        g[0, 1, 1] = -s * c
        g[1, 0, 1] = g[1, 1, 0] = c / s
        return g

    return ChartManifold(
        dim=2,
        metric_at=metric,
        domain=Box(
            np.array([theta_margin, -phi_halfwidth]),
            np.array([np.pi - theta_margin, phi_halfwidth]),
        ),
        christoffel_at=gamma if analytic else None,
        name="sphere",
        convexity_radius=0.7 * radius,
    )


def make_hyperbolic(
    x_halfwidth: float = 6.0,
    y_min: float = 0.05,
    y_max: float = 12.0,
    analytic: bool = True,
) -> ChartManifold:
    """Upper half-plane with metric diag(1/y^2, 1/y^2)."""

    def metric(x):
        y = x[1]
        return np.array([[1.0 / y**2, 0.0], [0.0, 1.0 / y**2]])

    def gamma(x):
        y = x[1]
        g = np.zeros((2, 2, 2))
        g[0, 0, 1] = g[0, 1, 0] = -1.0 / y
        g[1, 0, 0] = 1.0 / y
        g[1, 1, 1] = -1.0 / y
        return g

    return ChartManifold(
        dim=2,
        metric_at=metric,
        domain=Box(np.array([-x_halfwidth, y_min]), np.array([x_halfwidth, y_max])),
        christoffel_at=gamma if analytic else None,
        name="hyperbolic",
        convexity_radius=2.0,
    )


def make_product(*factors: ChartManifold, name: str = "") -> ChartManifold:
    """Block-diagonal product of chart manifolds."""
    if not factors:
        raise ValueError("a product needs at least one factor")
    dims = [f.dim for f in factors]
    dim = sum(dims)
    offs = np.concatenate([[0], np.cumsum(dims)])
    slices = [slice(int(offs[i]), int(offs[i + 1])) for i in range(len(factors))]

    def metric(x):
        g = np.zeros((dim, dim))
        for f, sl in zip(factors, slices):
            g[sl, sl] = f.metric(x[sl])
        return g

    all_analytic = all(f.christoffel_at is not None for f in factors)

    def gamma(x):
        g = np.zeros((dim, dim, dim))
        for f, sl in zip(factors, slices):
            g[sl, sl, sl] = f.christoffel(x[sl])
        return g

    return ChartManifold(
        dim=dim,
        metric_at=metric,
        domain=Box(
            np.concatenate([f.domain.lower for f in factors]),
            np.concatenate([f.domain.upper for f in factors]),
        ),
        christoffel_at=gamma if all_analytic else None,
        h_fd=min(f.h_fd for f in factors),
        name=name or "x".join(f.name or "chart" for f in factors),
        convexity_radius=min(f.convexity_radius for f in factors),
    )


def _build_from_spec(spec: dict) -> ChartManifold:
    name = spec["name"]
    if name not in _METRIC_BUILDERS:
        raise ValueError(f"unknown built-in metric {name!r}")
    params = {k: v for k, v in spec.items() if k not in ("name", "factors")}
    if name == "product":
        factors = [_build_from_spec(f) for f in spec.get("factors", [])]
        return make_product(*factors, **params)
    return _METRIC_BUILDERS[name](**params)


def load_manifold(source) -> ChartManifold:
    """Build a manifold from a JSON config (path, JSON string, or dict).

    Recognized fields: ``dim``, ``metric`` (a built-in name with
    parameters), ``domain`` (list of [lo, hi] pairs), ``h_fd``.
    """
    if isinstance(source, (str, Path)):
        try:
            is_file = Path(str(source)).exists()
        except OSError:
            is_file = False
        text = Path(source).read_text() if is_file else str(source)
        cfg = json.loads(text)
    else:
        cfg = dict(source)
    m = _build_from_spec(cfg["metric"])
    if "dim" in cfg and int(cfg["dim"]) != m.dim:
        raise ValueError(
            f"config dim {cfg['dim']} does not match metric dimension {m.dim}"
        )
    if "domain" in cfg:
        pairs = np.asarray(cfg["domain"], dtype=float)
        if pairs.shape != (m.dim, 2):
            raise ValueError("domain must be a list of [lo, hi] pairs, one per axis")
        m.domain = Box(pairs[:, 0], pairs[:, 1])
    if "h_fd" in cfg:
        m.h_fd = float(cfg["h_fd"])
    return m


register_metric("euclidean", make_euclidean)
register_metric("sphere", make_sphere)
register_metric("hyperbolic", make_hyperbolic)
register_metric("product", make_product)
