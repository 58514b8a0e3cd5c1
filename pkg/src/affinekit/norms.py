"""Semi-norms and norms on a tangent space, and constructions on them.

A :class:`NormField` wraps a positively homogeneous convex evaluator
together with cached values on a canonical unit-sphere grid.  The grid is
shared per dimension, which makes the log-distance between norms an exact
metric on the sampled representation.  Constructions: group averaging,
orbit-hull gauges, block sums over a splitting, smoothing toward norms
with positive-definite Hessians, and restriction to sections.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.spatial import ConvexHull, QhullError

from .errors import SeminormZeroError
from .holonomy import HolonomySample, SplittingReport

__all__ = [
    "NormField",
    "MinkowskiReport",
    "sphere_grid",
    "euclidean_norm",
    "linf_norm",
    "l1_norm",
    "quadratic_norm",
    "scale_norm",
    "norm_distance",
    "norm_distance_to_euclidean",
    "average_norm",
    "invariance_residual",
    "orbit_hull_norm",
    "block_sum_norm",
    "minkowski_smooth",
    "minkowski_check",
    "restrict_norm_to_section",
    "export_grid_csv",
]

_GRID_SIZES = {2: 720, 3: 2562}
_DEFAULT_GRID_HIGH = 4096


def _structured_directions(dim: int) -> np.ndarray:
    """Basis vectors and pairwise diagonals, both signs, normalized."""
    out = []
    eye = np.eye(dim)
    for i in range(dim):
        out.append(eye[i])
        out.append(-eye[i])
        for j in range(i + 1, dim):
            for sj in (1.0, -1.0):
                v = eye[i] + sj * eye[j]
                v = v / np.linalg.norm(v)
                out.append(v)
                out.append(-v)
    return np.array(out)


@lru_cache(maxsize=16)
def _sphere_grid_cached(dim: int, n: int) -> np.ndarray:
    if dim < 1:
        raise ValueError("grids need dimension at least 1")
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        grid = np.column_stack([np.cos(angles), np.sin(angles)])
        grid[0] = [1.0, 0.0]  # exact axes help extremal checks
        quarter = n // 4
        if n % 4 == 0:
            grid[quarter] = [0.0, 1.0]
            grid[2 * quarter] = [-1.0, 0.0]
            grid[3 * quarter] = [0.0, -1.0]
        return grid
    if dim == 3:
        # Fibonacci sphere plus structured directions.
        i = np.arange(n, dtype=float)
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        z = 1.0 - 2.0 * (i + 0.5) / n
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        return np.vstack([pts, _structured_directions(3)])
    rng = np.random.default_rng(12345)
    pts = rng.standard_normal((n, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return np.vstack([pts, _structured_directions(dim)])


def sphere_grid(dim: int, n: Optional[int] = None) -> np.ndarray:
    """Canonical unit-direction grid for the given dimension (read-only)."""
    size = n or _GRID_SIZES.get(dim, 2 if dim == 1 else _DEFAULT_GRID_HIGH)
    grid = _sphere_grid_cached(dim, size)
    grid.setflags(write=False)
    return grid


@dataclass
class NormField:
    """A (semi-)norm evaluator with cached values on the canonical grid.

    ``kind`` is one of ``seminorm``, ``norm``, ``minkowski_candidate``.
    ``eval_fn`` must be vectorized over rows of an (N, dim) array.
    """

    dim: int
    eval_fn: Callable[[np.ndarray], np.ndarray]
    kind: str = "norm"
    name: str = ""
    grid: np.ndarray = None
    grid_values: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("seminorm", "norm", "minkowski_candidate"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.grid is None:
            self.grid = sphere_grid(self.dim)
        if self.grid_values is None:
            self.grid_values = np.asarray(self.eval_fn(self.grid), dtype=float)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            return float(self.eval_fn(v[None, :])[0])
        return np.asarray(self.eval_fn(v), dtype=float)

    @property
    def is_positive(self) -> bool:
        return self.kind in ("norm", "minkowski_candidate")

    def validate(self, seed: int = 0, n_pairs: int = 64) -> dict:
        """Residuals of homogeneity, convexity, and the positive floor."""
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((n_pairs, self.dim))
        vals = self(pts)
        hom = 0.0
        for lam in (-2.0, -1.0, 0.5, 3.0):
            scaled = self(lam * pts)
            denom = np.maximum(np.abs(lam) * vals, 1e-300)
            hom = max(hom, float(np.max(np.abs(scaled - np.abs(lam) * vals) / denom)))
        other = rng.standard_normal((n_pairs, self.dim))
        mid = self(0.5 * (pts + other))
        gap = mid - 0.5 * (vals + self(other))
        convexity = float(np.max(gap))
        floor = float(np.min(self.grid_values))
        return {
            "homogeneity_residual": hom,
            "convexity_defect": convexity,
            "grid_floor": floor,
        }


# ---------------------------------------------------------------------------
# Stock norms


def euclidean_norm(dim: int) -> NormField:
    return NormField(dim, lambda v: np.linalg.norm(v, axis=-1), "norm", "euclidean")


def linf_norm(dim: int) -> NormField:
    return NormField(dim, lambda v: np.max(np.abs(v), axis=-1), "norm", "linf")


def l1_norm(dim: int) -> NormField:
    return NormField(dim, lambda v: np.sum(np.abs(v), axis=-1), "norm", "l1")


def quadratic_norm(a: np.ndarray, name: str = "quadratic") -> NormField:
    """Norm sqrt(v' A v) for symmetric positive-definite A."""
    a = np.asarray(a, dtype=float)
    dim = a.shape[0]

    def fn(v):
        return np.sqrt(np.clip(np.einsum("ni,ij,nj->n", v, a, v), 0.0, None))

    return NormField(dim, fn, "norm", name)


def scale_norm(q: NormField, c: float) -> NormField:
    if c <= 0:
        raise ValueError("scale factor must be positive")
    return NormField(
        q.dim,
        lambda v: c * q.eval_fn(v),
        q.kind,
        f"{c:g}*{q.name}" if q.name else f"scaled({c:g})",
        grid=q.grid,
        grid_values=c * q.grid_values,
    )


# ---------------------------------------------------------------------------
# Distances and invariance


def _positive_grid_values(q: NormField) -> np.ndarray:
    vals = q.grid_values
    if np.any(vals <= 0.0):
        raise SeminormZeroError(
            f"norm operation hit value {float(np.min(vals)):.3e} on the grid"
        )
    return vals


def norm_distance(q1: NormField, q2: NormField) -> float:
    """Largest |log q1/q2| over the shared unit-sphere grid.

    This is the log of the best bi-Lipschitz constant between the two unit
    balls, computed on the grid representation.
    """
    if q1.dim != q2.dim:
        raise ValueError("norms live on spaces of different dimension")
    if not (q1.is_positive and q2.is_positive):
        raise SeminormZeroError("norm_distance requires positive norms")
    v1 = _positive_grid_values(q1)
    if q2.grid is q1.grid or (
        q2.grid.shape == q1.grid.shape and np.array_equal(q2.grid, q1.grid)
    ):
        v2 = _positive_grid_values(q2)
    else:
        v2 = q2(q1.grid)
        if np.any(v2 <= 0.0):
            raise SeminormZeroError("second norm vanishes on the grid")
    # log difference rather than log of the quotient keeps symmetry exact
    return float(np.max(np.abs(np.log(v1) - np.log(v2))))


def norm_distance_to_euclidean(q: NormField) -> tuple[float, float]:
    """Distance to the nearest Euclidean multiple, and that multiple.

    The grid directions are unit vectors, so the log-ratios against the
    Euclidean norm are just log of the grid values; the best multiple
    centers their range.
    """
    vals = _positive_grid_values(q)
    logs = np.log(vals)
    c = float(np.exp(0.5 * (logs.max() + logs.min())))
    return float(0.5 * (logs.max() - logs.min())), c


def invariance_residual(q: NormField, s: HolonomySample) -> float:
    """Largest |log q(Au)/q(u)| over grid directions and sampled elements."""
    if q.dim != s.dim:
        raise ValueError("norm dimension does not match the sample")
    base = np.log(_positive_grid_values(q))
    worst = 0.0
    for a in s.elements:
        vals = q(q.grid @ a.T)
        if np.any(vals <= 0.0):
            raise SeminormZeroError("norm vanishes on a rotated grid direction")
        worst = max(worst, float(np.max(np.abs(np.log(vals) - base))))
    return worst


def average_norm(q: NormField, s: HolonomySample) -> NormField:
    """Uniform average of q over the sampled elements.

    For a sample that is closed under multiplication this is exactly
    invariant; in general it never increases the invariance residual with
    respect to the sampled group elements when they form a group.
    """
    if not q.is_positive:
        raise SeminormZeroError("average_norm expects a norm")
    mats = s.stacked()
    d = q.dim
    # chunk the element axis so large closures stay within memory
    chunk_rows = max(1, int(2**22 / max(1, mats.shape[0])))

    def fn(v):
        n = v.shape[0]
        acc = np.zeros(n)
        for start in range(0, n, chunk_rows):
            block = v[start : start + chunk_rows]
            rotated = np.einsum("aij,mj->ami", mats, block)
            vals = q.eval_fn(rotated.reshape(-1, d)).reshape(len(mats), -1)
            acc[start : start + chunk_rows] = vals.mean(axis=0)
        return acc

    return NormField(q.dim, fn, "norm", f"avg({q.name})" if q.name else "avg")


# ---------------------------------------------------------------------------
# Orbit hulls and block sums


def _facet_gauge(points: np.ndarray):
    """Gauge of conv(points) (full-dimensional, 0 interior) from its facets."""
    hull = ConvexHull(points)
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    if np.any(offsets <= 1e-12):
        raise QhullError("origin is not interior to the hull")

    def fn(v):
        return np.max((v @ normals.T) / offsets, axis=1)

    return fn


def orbit_hull_norm(s: HolonomySample, seed_direction) -> NormField:
    """Gauge of the symmetrized convex hull of the orbit of a direction.

    The hull of {+-A e} is evaluated exactly through its facet
    inequalities.  When the orbit does not span the space the gauge locks
    onto the span and the result is a semi-norm (flagged with a warning).
    """
    e = np.asarray(seed_direction, dtype=float)
    if e.shape != (s.dim,):
        raise ValueError("seed direction has wrong dimension")
    orbit = s.stacked() @ e
    points = np.vstack([orbit, -orbit])
    _, svals, vt = np.linalg.svd(points, full_matrices=False)
    rank = int(np.sum(svals > 1e-10 * max(svals[0], 1.0)))

    if rank == s.dim:
        gauge = _facet_gauge(points)
        return NormField(s.dim, gauge, "norm", "orbit_hull")

    warnings.warn(
        f"orbit spans only {rank} of {s.dim} dimensions; gauge is a semi-norm",
        stacklevel=2,
    )
    basis = vt[:rank].T  # (dim, rank) orthonormal
    reduced = points @ basis
    if rank == 1:
        radius = float(np.max(np.abs(reduced)))

        def fn(v):
            return np.abs(v @ basis[:, 0]) / radius

    else:
        inner = _facet_gauge(reduced)

        def fn(v):
            return inner(v @ basis)

    return NormField(s.dim, fn, "seminorm", "orbit_hull(degenerate)")


def block_sum_norm(split: SplittingReport, block_norms: Sequence[NormField]) -> NormField:
    """Sum of block norms of the orthogonal block components.

    This is the gauge whose unit ball is the convex hull of the union of
    the blocks' unit balls; it is invariant whenever each block norm is
    invariant under the blockwise action.
    """
    bases = [np.asarray(b, dtype=float) for b in split.subspace_bases]
    if len(bases) != len(block_norms):
        raise ValueError("one norm per block is required")
    for b, q in zip(bases, block_norms):
        if b.shape[1] != q.dim:
            raise ValueError(
                f"block of dimension {b.shape[1]} got a norm of dimension {q.dim}"
            )
    dim = bases[0].shape[0]
    total = sum(b.shape[1] for b in bases)
    if len(bases) == 1:
        b0, q0 = bases[0], block_norms[0]
        return NormField(dim, lambda v: q0.eval_fn(v @ b0), q0.kind, q0.name)

    kind = "norm" if (total == dim and all(q.is_positive for q in block_norms)) else "seminorm"

    def fn(v):
        acc = np.zeros(v.shape[0])
        for b, q in zip(bases, block_norms):
            acc += q.eval_fn(v @ b)
        return acc

    return NormField(dim, fn, kind, "block_sum")


# ---------------------------------------------------------------------------
# Smoothing and the Minkowski check


def _cap_rotations(dim: int, eps: float, n_rotations: int, seed: int) -> np.ndarray:
    """Deterministic rotations within angle eps of the identity.

    Skew generators are drawn isotropically (so the set is conjugation
    symmetric in distribution) and included with both signs, which kills
    the first-order term of the average.
    """
    rng = np.random.default_rng(seed)
    n_pairs = max(1, n_rotations // 2)
    mats = []
    for _ in range(n_pairs):
        x = rng.standard_normal((dim, dim))
        skew = 0.5 * (x - x.T)
        spectral = np.linalg.norm(skew, 2)
        if spectral < 1e-12:
            continue
        radius = eps * rng.uniform(0.3, 1.0)
        r = expm((radius / spectral) * skew)
        mats.append(r)
        mats.append(r.T)
    return np.stack(mats)


def minkowski_smooth(
    q: NormField,
    eps: float,
    n_rotations: int = 128,
    seed: int = 0,
) -> NormField:
    """Blend a cap-mollified copy of q with the Euclidean norm.

    The mollified norm averages q over a fixed set of rotations of angle
    at most eps (a quadrature of the spherical cap around each direction),
    which keeps the result exactly convex and homogeneous.  The output is

        sqrt((1 - eps) * q_moll(v)^2 + eps * |v|^2)

    whose squared half has Hessian at least eps times the identity.  The
    log-distance to the input is recorded in ``meta`` along with the
    constant C = distance / eps.
    """
    if not q.is_positive:
        raise SeminormZeroError("minkowski_smooth expects a norm")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    rots = _cap_rotations(q.dim, eps, n_rotations, seed)

    def moll(v):
        acc = np.zeros(v.shape[0])
        for r in rots:
            acc += q.eval_fn(v @ r.T)
        return acc / len(rots)

    def fn(v):
        sq = np.einsum("ni,ni->n", v, v)
        return np.sqrt((1.0 - eps) * moll(v) ** 2 + eps * sq)

    out = NormField(q.dim, fn, "minkowski_candidate", f"smooth({q.name})")
    dist = norm_distance(out, q)
    out.meta.update({"eps": eps, "distance_to_input": dist, "C": dist / eps})
    return out


@dataclass
class MinkowskiReport:
    smooth_residual: float
    hessian_min_eigen: float
    n_probe: int
    step: float

    def to_dict(self) -> dict:
        return {
            "smooth_residual": float(self.smooth_residual),
            "hessian_min_eigen": float(self.hessian_min_eigen),
            "n_probe": int(self.n_probe),
            "step": float(self.step),
        }


def _fd_hessian(f, x, h):
    d = x.size
    hess = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        hess[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h**2)
    return hess


def minkowski_check(
    q: NormField,
    n_probe: int = 16,
    seed: int = 0,
    probes: Optional[np.ndarray] = None,
    h: float = 1e-3,
) -> MinkowskiReport:
    """Report-only probe of smoothness and Hessian positivity.

    Finite-difference Hessians of q^2/2 at unit directions; the smoothness
    residual is the disagreement of the Hessian entries across two step
    sizes, which blows up at kinks.
    """
    if not q.is_positive:
        raise SeminormZeroError("minkowski_check expects a norm")
    if probes is None:
        rng = np.random.default_rng(seed)
        probes = rng.standard_normal((n_probe, q.dim))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    else:
        probes = np.atleast_2d(np.asarray(probes, dtype=float))

    def f(x):
        return 0.5 * q(x) ** 2

    residual = 0.0
    min_eig = np.inf
    for x in probes:
        h1 = _fd_hessian(f, x, h)
        h2 = _fd_hessian(f, x, 0.5 * h)
        residual = max(residual, float(np.max(np.abs(h1 - h2))))
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(h2))))
    return MinkowskiReport(residual, min_eig, len(probes), h)


def restrict_norm_to_section(q: NormField, section_basis: np.ndarray) -> NormField:
    """Pull q back to section coordinates through an orthonormal basis."""
    b = np.asarray(section_basis, dtype=float)
    if b.shape[0] != q.dim:
        raise ValueError("section basis rows must match the ambient dimension")
    if np.max(np.abs(b.T @ b - np.eye(b.shape[1]))) > 1e-10:
        raise ValueError("section basis columns must be orthonormal")
    return NormField(
        b.shape[1],
        lambda w: q.eval_fn(w @ b.T),
        q.kind,
        f"{q.name}|section" if q.name else "section",
    )


# ---------------------------------------------------------------------------
# Export


def export_grid_csv(q: NormField, path) -> str:
    """Write the grid directions and values as CSV (header first)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"u{i}" for i in range(q.dim)] + ["value"])
        for u, val in zip(q.grid, q.grid_values):
            writer.writerow([repr(float(c)) for c in u] + [repr(float(val))])
    return str(path)
