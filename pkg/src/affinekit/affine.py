"""Affinity testing of maps from a chart manifold into a metric space.

A :class:`MapOracle` is a point map together with a distance oracle on the
target.  From distance queries alone this module measures the directional
speed of image geodesics (the metric differential), tests midpoint and
linear-parametrization behavior of sampled geodesic segments, checks the
semi-norm structure and its invariance under parallel transport, probes
regular directions and the symmetric-difference decay of log images, and
verifies declared projection / norm-change / embedding factorizations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import (
    GeodesicExitError,
    LogConvergenceError,
    SamplingError,
)
from .geometry import (
    Box,
    ChartManifold,
    Curve,
    TangentVector,
    frame_coordinates,
    integrate_geodesic,
    orthonormal_frame,
    riemannian_log,
    transport_field,
)
from .norms import NormField

__all__ = [
    "MapOracle",
    "AffinityReport",
    "SlopeFit",
    "RegularVectorResult",
    "MainLemmaResult",
    "KernelReport",
    "DeclaredFactors",
    "DecompositionReport",
    "AFFINE_TOL",
    "NOT_AFFINE_TOL",
    "default_t_list",
    "metric_differential",
    "differential_grid",
    "affinity_test",
    "full_affinity_report",
    "seminorm_check",
    "parallel_invariance_check",
    "regular_vector_test",
    "mainlemma_check",
    "kernel_distribution",
    "principal_angles",
    "verify_decomposition",
    "export_differential_csv",
]

AFFINE_TOL = 1e-4
NOT_AFFINE_TOL = 1e-3
_FLOOR = 1e-12


@dataclass
class MapOracle:
    """A point map into an opaque metric space with a distance oracle.

    ``point_map`` takes chart coordinates and returns an arbitrary label;
    ``distance`` compares two labels.  ``serial`` declares that the oracle
    is unsafe for concurrent queries, in which case a runner must not
    interleave its scenario with others.
    """

    source: ChartManifold
    point_map: Callable[[np.ndarray], Any]
    distance: Callable[[Any, Any], float]
    name: str = ""
    serial: bool = False

    def validate(self, n_triples: int = 32, seed: int = 0, region: Optional[Box] = None) -> dict:
        """Sampled residuals of symmetry, triangle inequality, and d(y,y)=0."""
        rng = np.random.default_rng(seed)
        box = region or self.source.domain
        pts = np.atleast_2d(box.sample(rng, 3 * n_triples, shrink=0.05))
        labels = [self.point_map(x) for x in pts]
        sym = 0.0
        tri = 0.0
        self_d = 0.0
        scale = _FLOOR
        for k in range(n_triples):
            a, b, c = labels[3 * k], labels[3 * k + 1], labels[3 * k + 2]
            dab, dba = self.distance(a, b), self.distance(b, a)
            dbc, dac = self.distance(b, c), self.distance(a, c)
            scale = max(scale, dab, dbc, dac)
            sym = max(sym, abs(dab - dba))
            tri = max(tri, dac - dab - dbc)
            self_d = max(self_d, abs(self.distance(a, a)))
        return {
            "symmetry_residual": sym / scale,
            "triangle_defect": tri / scale,
            "self_distance": self_d,
            "ok": sym / scale <= 1e-9 and tri / scale <= 1e-9 and self_d <= 1e-12,
        }


@dataclass
class SlopeFit:
    """Least-squares slope of distance against parameter, through zero."""

    value: float
    residual: float
    abs_residual: float
    t_used: np.ndarray
    distances: np.ndarray


@dataclass
class AffinityReport:
    verdict: str
    linearity_residual: float
    seminorm_residual: Optional[float] = None
    parallel_residual: Optional[float] = None
    kernel_dims: Optional[dict] = None
    samples: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "linearity_residual": float(self.linearity_residual),
            "seminorm_residual": None
            if self.seminorm_residual is None
            else float(self.seminorm_residual),
            "parallel_residual": None
            if self.parallel_residual is None
            else float(self.parallel_residual),
            "kernel_dims": self.kernel_dims,
            "samples": self.samples,
        }
        return out


def _verdict(residuals) -> str:
    vals = [r for r in residuals if r is not None]
    if not vals:
        return "inconclusive"
    if all(r <= AFFINE_TOL for r in vals):
        return "affine"
    if any(r >= NOT_AFFINE_TOL for r in vals):
        return "not_affine"
    return "inconclusive"


def default_t_list(m: ChartManifold, k_max: int = 6) -> np.ndarray:
    """Geometric offsets 0.1 * convexity_radius * 2^-k, k = 0..k_max."""
    s = 0.1 * m.convexity_radius
    return s * (0.5 ** np.arange(k_max + 1))


# ---------------------------------------------------------------------------
# Metric differential


def metric_differential(
    o: MapOracle,
    v: TangentVector,
    t_list: Optional[Sequence[float]] = None,
    steps: int = 192,
) -> SlopeFit:
    """Directional speed of the image geodesic, with a linearity residual.

    Fits the slope of t -> distance(f(p), f(exp_p(t v))) through the
    origin over the given decreasing offsets.  Offsets whose geodesic
    point leaves the domain are dropped; fewer than three usable offsets
    raise :class:`SamplingError`.
    """
    m = o.source
    ts = np.sort(np.asarray(t_list if t_list is not None else default_t_list(m),
                            dtype=float))[::-1]
    if np.any(ts <= 0):
        raise ValueError("offsets must be positive")
    comp = v.components
    if float(np.max(np.abs(comp))) == 0.0:
        return SlopeFit(0.0, 0.0, 0.0, ts, np.zeros(ts.size))

    t_max = float(ts[0])
    try:
        curve = integrate_geodesic(m, v.base, comp, t_max, steps=steps)
        usable = ts
    except GeodesicExitError as err:
        usable = ts[ts <= 0.999 * err.last_t]
        if usable.size < 3:
            raise SamplingError(
                "fewer than three usable offsets inside the domain"
            ) from err
        curve = integrate_geodesic(m, v.base, comp, float(usable[0]), steps=steps)

    fp = o.point_map(v.base)
    dists = np.array(
        [o.distance(fp, o.point_map(curve.position(t))) for t in usable]
    )
    slope = float(dists @ usable / (usable @ usable))
    abs_res = float(np.max(np.abs(dists - slope * usable)))
    scale = max(slope * usable[0], float(np.max(dists)), _FLOOR)
    return SlopeFit(slope, abs_res / scale, abs_res, usable, dists)


def differential_grid(
    o: MapOracle,
    p,
    n_dirs: int = 64,
    seed: int = 0,
    t_list: Optional[Sequence[float]] = None,
    steps: int = 160,
) -> tuple[np.ndarray, np.ndarray]:
    """Metric differentials of unit frame directions at p.

    Returns (directions in frame coordinates, values).  The direction set
    is seeded low-discrepancy plus the signed axes and pairwise diagonals,
    so axis-aligned kernels and extremes are hit exactly.
    """
    m = o.source
    p = np.asarray(p, dtype=float)
    f = orthonormal_frame(m, p)
    d = m.dim
    rng = np.random.default_rng(seed)
    rand = rng.standard_normal((n_dirs, d))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    from .norms import _structured_directions

    dirs = np.vstack([_structured_directions(d), rand])
    vals = np.empty(dirs.shape[0])
    for i, u in enumerate(dirs):
        vals[i] = metric_differential(
            o, TangentVector(p, f @ u), t_list=t_list, steps=steps
        ).value
    return dirs, vals


def export_differential_csv(dirs: np.ndarray, vals: np.ndarray, path) -> str:
    """CSV of frame directions and metric-differential values."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"u{i}" for i in range(dirs.shape[1])] + ["value"])
        for u, val in zip(dirs, vals):
            writer.writerow([repr(float(c)) for c in u] + [repr(float(val))])
    return str(path)


# ---------------------------------------------------------------------------
# Affinity of sampled segments


_PARAM_PAIRS = ((0.0, 0.25), (0.125, 0.625), (0.25, 0.75), (0.5, 1.0))


def affinity_test(
    o: MapOracle,
    region: Box,
    n_geodesics: int,
    seed: int,
    segment_scale: Optional[float] = None,
    steps: int = 160,
) -> AffinityReport:
    """Midpoint and linear-parametrization residuals over random segments.

    For each sampled geodesic segment the midpoint must sit at equal image
    distance from both endpoints, the endpoint distance must split
    additively through it, and distances between interior parameter pairs
    must scale with the parameter gap.  Residuals are normalized by the
    segment's image size; the verdict reflects this linearity part only.
    """
    m = o.source
    rng = np.random.default_rng(seed)
    length = segment_scale or 0.6 * m.convexity_radius
    worst = 0.0
    constants = []
    used = 0
    attempts = 0
    while used < n_geodesics and attempts < 20 * n_geodesics:
        attempts += 1
        x0 = np.atleast_1d(region.sample(rng, 1, shrink=0.02))
        u = rng.standard_normal(m.dim)
        u /= np.linalg.norm(u)
        w = orthonormal_frame(m, x0) @ u
        try:
            curve = integrate_geodesic(m, x0, w, length, steps=steps)
        except GeodesicExitError:
            continue
        fx = o.point_map(curve.position(0.0))
        fm = o.point_map(curve.position(0.5 * length))
        fz = o.point_map(curve.end)
        d_xm = o.distance(fx, fm)
        d_mz = o.distance(fm, fz)
        d_xz = o.distance(fx, fz)
        scale = max(d_xz, d_xm + d_mz, _FLOOR)
        resid = max(abs(d_xm - d_mz), abs(d_xz - d_xm - d_mz)) / scale
        c = d_xz / length
        for s_frac, t_frac in _PARAM_PAIRS:
            ls, lt = s_frac * length, t_frac * length
            d_st = o.distance(
                o.point_map(curve.position(ls)), o.point_map(curve.position(lt))
            )
            resid = max(resid, abs(d_st - (lt - ls) * c) / scale)
        worst = max(worst, resid)
        constants.append(c)
        used += 1
    if used < n_geodesics:
        raise SamplingError(
            f"only {used} of {n_geodesics} segments stayed inside the domain"
        )
    return AffinityReport(
        verdict=_verdict([worst]),
        linearity_residual=worst,
        samples={
            "seed": seed,
            "n_geodesics": n_geodesics,
            "segment_scale": float(length),
            "segment_constants": [float(c) for c in constants],
        },
    )


def seminorm_check(
    o: MapOracle,
    p,
    n_pairs: int,
    seed: int = 0,
    t_list: Optional[Sequence[float]] = None,
    steps: int = 160,
) -> float:
    """Subadditivity and homogeneity defects of the metric differential at p.

    Positive values flag violations; a genuine semi-norm yields residuals
    at the level of the slope-fit noise.
    """
    m = o.source
    p = np.asarray(p, dtype=float)
    f = orthonormal_frame(m, p)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        a = f @ rng.standard_normal(m.dim)
        b = f @ rng.standard_normal(m.dim)
        md = lambda w: metric_differential(
            o, TangentVector(p, w), t_list=t_list, steps=steps
        ).value
        va, vb, vab = md(a), md(b), md(a + b)
        scale = max(va + vb, _FLOOR)
        worst = max(worst, (vab - va - vb) / scale)
        for lam in (-1.0, 0.5, 2.0):
            scaled = md(lam * a)
            worst = max(worst, abs(scaled - abs(lam) * va) / max(abs(lam) * va, _FLOOR))
    return worst


def parallel_invariance_check(
    o: MapOracle,
    curve: Curve,
    v: TangentVector,
    n_t: int,
    t_list: Optional[Sequence[float]] = None,
    steps: int = 160,
) -> float:
    """Drift of the metric differential along parallel translates of v.

    Relative when the base value is positive, absolute when v is in the
    kernel of the differential.
    """
    if curve.kind != "geodesic":
        raise ValueError("parallel invariance is checked along geodesics")
    field_ = transport_field(o.source, curve, v.components)
    idx = np.unique(np.linspace(0, curve.ts.size - 1, n_t + 1).astype(int))
    base = metric_differential(
        o, TangentVector(curve.xs[0], field_[0]), t_list=t_list, steps=steps
    ).value
    worst = 0.0
    for i in idx[1:]:
        val = metric_differential(
            o, TangentVector(curve.xs[i], field_[i]), t_list=t_list, steps=steps
        ).value
        worst = max(worst, abs(val - base))
    if base > 1e-9:
        return worst / base
    return worst


def full_affinity_report(
    o: MapOracle,
    region: Box,
    n_geodesics: int = 20,
    seed: int = 0,
    segment_scale: Optional[float] = None,
    n_seminorm_pairs: int = 6,
    n_transport_params: int = 4,
    kernel_dirs: int = 48,
    steps: int = 160,
) -> AffinityReport:
    """Linearity, semi-norm, transport-invariance, and kernel summary.

    The verdict is ``affine`` only when all three residual families stay
    below the affine tolerance; a single residual an order of magnitude
    above it forces ``not_affine``; anything between is inconclusive.
    """
    m = o.source
    rng = np.random.default_rng(seed)
    lin = affinity_test(
        o, region, n_geodesics, seed=seed, segment_scale=segment_scale, steps=steps
    )

    basepoints = np.atleast_2d(region.sample(rng, 3, shrink=0.05))
    semi = max(
        seminorm_check(o, p, n_seminorm_pairs, seed=seed + 1, steps=steps)
        for p in basepoints
    )

    length = segment_scale or 0.6 * m.convexity_radius
    par = 0.0
    done = 0
    attempts = 0
    while done < n_geodesics and attempts < 20 * n_geodesics:
        attempts += 1
        x0 = np.atleast_1d(region.sample(rng, 1, shrink=0.02))
        u = rng.standard_normal(m.dim)
        u /= np.linalg.norm(u)
        frame = orthonormal_frame(m, x0)
        try:
            curve = integrate_geodesic(m, x0, frame @ u, length, steps=steps)
        except GeodesicExitError:
            continue
        vdir = frame @ _unit(rng.standard_normal(m.dim))
        par = max(
            par,
            parallel_invariance_check(
                o, curve, TangentVector(x0, vdir), n_transport_params, steps=steps
            ),
        )
        done += 1
    if done < n_geodesics:
        raise SamplingError("not enough transport geodesics inside the domain")

    kdims = {}
    for i, p in enumerate(basepoints):
        rep = kernel_distribution(o, p, kernel_dirs, seed=seed + 2, steps=steps)
        kdims[f"p{i}"] = rep.dim

    return AffinityReport(
        verdict=_verdict([lin.linearity_residual, semi, par]),
        linearity_residual=lin.linearity_residual,
        seminorm_residual=semi,
        parallel_residual=par,
        kernel_dims=kdims,
        samples={
            **lin.samples,
            "n_seminorm_pairs": n_seminorm_pairs,
            "n_transport_geodesics": done,
            "basepoints": [p.tolist() for p in basepoints],
        },
    )


def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


# ---------------------------------------------------------------------------
# Regular vectors and the symmetric-difference limit


@dataclass
class RegularVectorResult:
    t_list: np.ndarray
    quotients: np.ndarray
    limit: float
    regular: bool

    def to_dict(self) -> dict:
        return {
            "t_list": [float(t) for t in self.t_list],
            "quotients": [float(x) for x in self.quotients],
            "limit": float(self.limit),
            "regular": bool(self.regular),
        }


def regular_vector_test(
    o: MapOracle,
    h: TangentVector,
    v: TangentVector,
    t_list: Sequence[float],
    tol: float = 1e-3,
    md_t_list: Optional[Sequence[float]] = None,
    steps: int = 160,
) -> RegularVectorResult:
    """Symmetric second-difference quotients of the differential at h.

    Computes (|h + t v| + |h - t v| - 2 |h|) / t for decreasing t and
    extrapolates t -> 0 with a linear fit on the smallest offsets.  The
    direction is regular when the extrapolated limit is at most tol.
    """
    if not np.allclose(h.base, v.base, atol=1e-12):
        raise ValueError("h and v must share a base point")
    ts = np.sort(np.asarray(t_list, dtype=float))[::-1]
    md = lambda w: metric_differential(
        o, TangentVector(h.base, w), t_list=md_t_list, steps=steps
    ).value
    center = md(h.components)
    if center <= _FLOOR:
        raise ValueError("the base direction must have positive differential")
    quot = np.array(
        [
            (md(h.components + t * v.components) + md(h.components - t * v.components)
             - 2 * center) / t
            for t in ts
        ]
    )
    tail = min(3, ts.size)
    a = np.vstack([np.ones(tail), ts[-tail:]]).T
    coef, *_ = np.linalg.lstsq(a, quot[-tail:], rcond=None)
    limit = float(coef[0])
    return RegularVectorResult(ts, quot, limit, limit <= tol)


@dataclass
class MainLemmaResult:
    r_list: np.ndarray
    ratios: np.ndarray
    dts: np.ndarray
    failures: dict

    @property
    def decay_factors(self) -> np.ndarray:
        return self.ratios[:-1] / self.ratios[1:]

    def to_dict(self) -> dict:
        return {
            "r_list": [float(r) for r in self.r_list],
            "ratios": [float(x) for x in self.ratios],
            "dts": [float(x) for x in self.dts],
            "decay_factors": [float(x) for x in self.decay_factors],
            "failures": {str(k): v for k, v in self.failures.items()},
        }


def mainlemma_check(
    m: ChartManifold,
    p,
    gamma_dir: TangentVector,
    h: TangentVector,
    r_list: Sequence[float],
    dt=None,
    steps: int = 256,
    log_tol: float = 1e-11,
) -> MainLemmaResult:
    """Symmetric difference of finite-difference log velocities.

    For each radius r the vector h is parallel translated a short
    parameter dt along the geodesic through p, geodesics of length +-r are
    shot from both basepoints, their endpoints are pulled back through the
    logarithm at p, and the t-derivative of the pullback is estimated by
    the forward difference over dt.  Reported is the g-norm of the
    difference between the +r and -r derivative estimates, divided by r.

    ``dt`` may be a number, a callable of r, or None for the default
    coupling dt = 0.1 r^2 (which keeps the finite-difference truncation
    below the leading decay; see the per-radius values in the result).
    Radii whose logarithm fails to converge are recorded in ``failures``
    and carry NaN ratios.
    """
    p = np.asarray(p, dtype=float)
    rs = np.asarray(r_list, dtype=float)
    if np.any(np.diff(rs) >= 0):
        raise ValueError("r_list must be strictly decreasing")

    def dt_of(r):
        if dt is None:
            return 0.1 * r * r
        if callable(dt):
            return float(dt(r))
        return float(dt)

    ratios = np.full(rs.size, np.nan)
    dts = np.array([dt_of(r) for r in rs])
    failures: dict = {}
    for i, r in enumerate(rs):
        dt_r = dts[i]
        try:
            base_curve = integrate_geodesic(m, p, gamma_dir.components, dt_r, steps=64)
            h_dt = transport_field(m, base_curve, h.components)[-1]
            q = base_curve.end
            mu = {}
            for sign in (1.0, -1.0):
                x_dt = integrate_geodesic(
                    m, q, sign * r * h_dt, 1.0, steps=steps
                ).end
                mu[sign] = riemannian_log(m, p, x_dt, tol=log_tol, steps=steps)
            # mu at t=0 is exactly +-r h by construction of the pullback.
            v_plus = (mu[1.0].components - r * h.components) / dt_r
            v_minus = (mu[-1.0].components + r * h.components) / dt_r
            ratios[i] = m.gnorm(p, v_plus - v_minus) / r
        except (GeodesicExitError, LogConvergenceError) as err:
            failures[float(r)] = f"{type(err).__name__}: {err}"
    return MainLemmaResult(rs, ratios, dts, failures)


# ---------------------------------------------------------------------------
# Kernel distribution


@dataclass
class KernelReport:
    basis: np.ndarray  # chart components, g-orthonormal columns
    dim: int
    threshold: float
    max_value: float
    values: np.ndarray
    directions: np.ndarray

    def to_dict(self) -> dict:
        return {
            "dim": int(self.dim),
            "threshold": float(self.threshold),
            "max_value": float(self.max_value),
        }


def kernel_distribution(
    o: MapOracle,
    p,
    n_dirs: int,
    eps: Optional[float] = None,
    seed: int = 0,
    t_list: Optional[Sequence[float]] = None,
    steps: int = 160,
) -> KernelReport:
    """Span of unit directions whose metric differential nearly vanishes.

    Directions come from a seeded set that always includes the signed
    frame axes and pairwise diagonals, so axis-aligned kernels are
    resolved exactly.  ``eps`` defaults to 1e-3 times the largest sampled
    value; a vanishing map returns the full tangent space.
    """
    m = o.source
    p = np.asarray(p, dtype=float)
    f = orthonormal_frame(m, p)
    if t_list is None:
        t_list = default_t_list(m, k_max=3)
    dirs, vals = differential_grid(
        o, p, n_dirs=n_dirs, seed=seed, t_list=t_list, steps=steps
    )
    mx = float(np.max(vals))
    if mx <= 1e-12:
        return KernelReport(f.copy(), m.dim, 0.0, mx, vals, dirs)
    threshold = eps if eps is not None else 1e-3 * mx
    sel = dirs[vals <= threshold]
    if sel.shape[0] == 0:
        return KernelReport(np.zeros((m.dim, 0)), 0, threshold, mx, vals, dirs)
    _, svals, vt = np.linalg.svd(sel, full_matrices=False)
    k = int(np.sum(svals >= 0.1 * svals[0]))
    basis_frame = vt[:k].T
    return KernelReport(f @ basis_frame, k, threshold, mx, vals, dirs)


def principal_angles(m: ChartManifold, x, basis_a: np.ndarray, basis_b: np.ndarray) -> np.ndarray:
    """Principal angles between two subspaces of T_x, in the g geometry."""
    if basis_a.shape[1] == 0 or basis_b.shape[1] == 0:
        if basis_a.shape[1] != basis_b.shape[1]:
            return np.array([np.pi / 2])
        return np.zeros(0)
    f = orthonormal_frame(m, x)
    a = frame_coordinates(m, x, f, basis_a)
    b = frame_coordinates(m, x, f, basis_b)
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    sv = np.linalg.svd(qa.T @ qb, compute_uv=False)
    k = min(qa.shape[1], qb.shape[1])
    angles = np.arccos(np.clip(sv[:k], -1.0, 1.0))
    if qa.shape[1] != qb.shape[1]:
        angles = np.append(angles, np.pi / 2)
    return angles


# ---------------------------------------------------------------------------
# Declared decompositions


@dataclass
class DeclaredFactors:
    """Projection, norm change, and embedding factors declared by a scenario.

    ``projection.point_map`` must return quotient chart coordinates.
    ``norm_field`` is either a constant :class:`NormField` on the quotient
    frame or a callable of quotient coordinates.
    """

    projection: MapOracle
    quotient: ChartManifold
    norm_field: Any
    embedding: MapOracle


@dataclass
class DecompositionReport:
    residuals: dict
    passed: bool
    failures: list

    def to_dict(self) -> dict:
        return {
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "passed": bool(self.passed),
            "failures": list(self.failures),
        }


def _norm_at(norm_field, x) -> NormField:
    if isinstance(norm_field, NormField):
        return norm_field
    return norm_field(x)


def _map_jacobian(point_map, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(point_map(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = (np.asarray(point_map(xp), dtype=float)
                     - np.asarray(point_map(xm), dtype=float)) / (2 * h)
    return jac


def verify_decomposition(
    o: MapOracle,
    declared: DeclaredFactors,
    region: Optional[Box] = None,
    n_points: int = 6,
    seed: int = 0,
    tol: float = 1e-8,
    kernel_dirs: int = 48,
    holonomy_loops: int = 4,
    holonomy_scale: float = 0.2,
) -> DecompositionReport:
    """Check a declared projection / norm-change / embedding factorization.

    (a) the projection's vertical spaces match the kernel distribution of
    the oracle; (b) the declared norm field is invariant under quotient
    holonomy; (c) the embedding is a local isometry for the norm field on
    short segments; (d) composite distances reproduce the oracle's.
    """
    from .holonomy import sample_holonomy
    from .norms import invariance_residual

    m = o.source
    rng = np.random.default_rng(seed)
    box = region or m.domain
    pts = np.atleast_2d(box.sample(rng, n_points, shrink=0.05))

    # (a) vertical distribution against the measured kernel
    angle_worst = 0.0
    for p in pts[: min(3, n_points)]:
        kernel = kernel_distribution(o, p, kernel_dirs, seed=seed)
        jac = _map_jacobian(declared.projection.point_map, p)
        _, svals, vt = np.linalg.svd(jac)
        rank = int(np.sum(svals > 1e-9 * max(svals[0], 1.0)))
        vertical = vt[rank:].T
        if vertical.shape[1] != kernel.dim:
            angle_worst = max(angle_worst, np.pi / 2)
            continue
        if kernel.dim == 0:
            continue
        angles = principal_angles(m, p, kernel.basis, vertical)
        angle_worst = max(angle_worst, float(np.max(angles)))

    # (b) holonomy invariance of the declared norm field on the quotient
    quotient = declared.quotient
    q_base = 0.5 * (quotient.domain.lower + quotient.domain.upper)
    sample = sample_holonomy(
        quotient, q_base, holonomy_loops, holonomy_scale, seed=seed + 1
    )
    inv_res = invariance_residual(_norm_at(declared.norm_field, q_base), sample)

    # (c) local isometry of the embedding for the norm field
    iso_worst = 0.0
    delta = 0.01 * quotient.convexity_radius
    q_pts = np.atleast_2d(quotient.domain.sample(rng, n_points, shrink=0.1))
    for x in q_pts:
        u = rng.standard_normal(quotient.dim)
        u /= np.linalg.norm(u)
        frame = orthonormal_frame(quotient, x)
        z = x + delta * (frame @ u)
        if not quotient.contains(z):
            continue
        d_emb = declared.embedding.distance(
            declared.embedding.point_map(x), declared.embedding.point_map(z)
        )
        qn = _norm_at(declared.norm_field, x)
        expected = qn(frame_coordinates(quotient, x, frame, z - x))
        iso_worst = max(iso_worst, abs(d_emb - expected) / max(expected, _FLOOR))

    # (d) composite distances against the oracle
    comp_worst = 0.0
    pairs = np.atleast_2d(box.sample(rng, 2 * n_points, shrink=0.05))
    for k in range(n_points):
        x, z = pairs[2 * k], pairs[2 * k + 1]
        d_o = o.distance(o.point_map(x), o.point_map(z))
        d_c = declared.embedding.distance(
            declared.embedding.point_map(
                np.asarray(declared.projection.point_map(x), dtype=float)
            ),
            declared.embedding.point_map(
                np.asarray(declared.projection.point_map(z), dtype=float)
            ),
        )
        comp_worst = max(comp_worst, abs(d_o - d_c) / max(d_o, d_c, _FLOOR))

    residuals = {
        "kernel_angle": angle_worst,
        "norm_invariance": inv_res,
        "embedding_isometry": iso_worst,
        "composite_distance": comp_worst,
    }
    failures = [k for k, v in residuals.items() if v > tol]
    return DecompositionReport(residuals, not failures, failures)
