"""Holonomy sampling and classification of its action on the unit sphere.

Elements are collected by parallel transporting an orthonormal frame
around geodesic triangle loops; they live in the frame at the base point,
so each one is an orthogonal matrix.  On top of the raw sample this module
closes the set under multiplication, tests transitivity of the orbit on
the unit sphere, and extracts the invariant-subspace splitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GeodesicExitError, HolonomySamplingError, LogConvergenceError
from .geometry import (
    ChartManifold,
    integrate_geodesic,
    orthonormal_frame,
    riemannian_log,
    transport_field,
)

__all__ = [
    "HolonomySample",
    "SplittingReport",
    "TransitivityReport",
    "sample_holonomy",
    "group_closure",
    "transitivity_test",
    "invariant_subspaces",
    "rotation_angle_2d",
]


@dataclass
class HolonomySample:
    """A finite set of orthogonal matrices in the frame at a base point.

    ``elements[0]`` is always the identity; ``loops[i]`` carries the
    generating loop metadata for element i (None for the identity and for
    closure products, which record their word instead).
    """

    base: np.ndarray
    frame: np.ndarray
    elements: list
    loops: list
    generation_depth: int = 1

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    def orthogonality_residual(self) -> float:
        eye = np.eye(self.dim)
        return max(
            float(np.max(np.abs(a.T @ a - eye))) for a in self.elements
        )

    def determinants(self) -> np.ndarray:
        return np.array([np.linalg.det(a) for a in self.elements])

    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)

    def subsample(self, indices) -> "HolonomySample":
        """Sample restricted to the identity plus the chosen elements."""
        keep = [0] + [i for i in indices if i != 0]
        return HolonomySample(
            base=self.base,
            frame=self.frame,
            elements=[self.elements[i] for i in keep],
            loops=[self.loops[i] for i in keep],
            generation_depth=self.generation_depth,
        )


@dataclass
class SplittingReport:
    """Invariant-subspace decomposition of the sampled action."""

    subspace_bases: list
    fixed_dim: int
    block_dims: list
    invariance_residual: float
    warning: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "block_dims": [int(d) for d in self.block_dims],
            "fixed_dim": int(self.fixed_dim),
            "invariance_residual": float(self.invariance_residual),
            "warning": self.warning,
        }


@dataclass
class TransitivityReport:
    verdict: str
    coverage_score: float
    n_dirs: int
    eps: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "coverage_score": float(self.coverage_score),
            "n_dirs": int(self.n_dirs),
            "eps": float(self.eps),
        }


def rotation_angle_2d(a: np.ndarray) -> float:
    """Rotation angle of a 2x2 special orthogonal matrix."""
    return float(np.arctan2(a[1, 0], a[0, 0]))


def _triangle_loop(m, p, dir_a, dir_b, scale, steps, log_tol):
    """Geodesic triangle p -> B -> C -> p; returns (legs, vertices)."""
    leg1 = integrate_geodesic(m, p, scale * dir_a, 1.0, steps=steps)
    b = leg1.end
    c_point = integrate_geodesic(m, p, scale * dir_b, 1.0, steps=steps).end
    v_bc = riemannian_log(m, b, c_point, tol=log_tol, steps=steps)
    leg2 = integrate_geodesic(m, b, v_bc.components, 1.0, steps=steps)
    v_cp = riemannian_log(m, c_point, p, tol=log_tol, steps=steps)
    leg3 = integrate_geodesic(m, c_point, v_cp.components, 1.0, steps=steps)
    return [leg1, leg2, leg3], (p.copy(), b.copy(), c_point.copy())


def sample_holonomy(
    m: ChartManifold,
    p,
    n_loops: int,
    scale: float,
    seed: int,
    steps: int = 128,
    log_tol: float = 1e-10,
    max_retries: int = 25,
) -> HolonomySample:
    """Transport the frame around seeded geodesic triangles based at p.

    Each loop is a triangle with two legs of length ``scale`` leaving p in
    random frame directions and a closing leg built from the Riemannian
    logarithm.  Loops that exit the domain (or whose logs fail) are
    resampled; the retry budget is per requested loop.
    """
    if n_loops < 1:
        raise ValueError("n_loops must be at least 1")
    p = np.asarray(p, dtype=float)
    frame = orthonormal_frame(m, p)
    g_p = m.metric(p)
    rng = np.random.default_rng(seed)
    d = m.dim

    elements = [np.eye(d)]
    loops: list = [None]
    for k in range(n_loops):
        for attempt in range(max_retries):
            ua = rng.standard_normal(d)
            ub = rng.standard_normal(d)
            ua /= np.linalg.norm(ua)
            ub /= np.linalg.norm(ub)
            if abs(ua @ ub) > 0.95:
                continue  # nearly collinear directions give degenerate loops
            try:
                legs, vertices = _triangle_loop(
                    m, p, frame @ ua, frame @ ub, scale, steps, log_tol
                )
                w = frame.copy()
                for leg in legs:
                    w = transport_field(m, leg, w)[-1]
            except (GeodesicExitError, LogConvergenceError):
                continue
            element = frame.T @ g_p @ w
            elements.append(element)
            loops.append(
                {
                    "vertices": [v.tolist() for v in vertices],
                    "scale": float(scale),
                    "directions": [ua.tolist(), ub.tolist()],
                }
            )
            break
        else:
            raise HolonomySamplingError(
                f"loop {k}: no valid triangle after {max_retries} attempts"
            )
    return HolonomySample(base=p, frame=frame, elements=elements, loops=loops)


def group_closure(
    s: HolonomySample,
    depth: int,
    tol: float = 1e-6,
    max_elements: int = 8192,
) -> HolonomySample:
    """Close the sample under products of up to ``depth`` factors.

    Deduplicates at Frobenius distance ``tol``.  ``max_elements`` caps the
    breadth-first growth; when the cap is hit the output is a partial
    closure (still a valid sample, no longer guaranteed to contain every
    short product).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    generators = [np.asarray(a, dtype=float) for a in s.elements]
    d = s.dim
    # Flattened copies support vectorized dedup against all kept elements.
    flat = np.empty((max_elements, d * d))
    elements: list = []
    loops: list = []

    def try_add(a, meta):
        if len(elements) >= max_elements:
            return False
        n = len(elements)
        if n and np.min(
            np.linalg.norm(flat[:n] - a.reshape(-1), axis=1)
        ) < tol:
            return False
        flat[n] = a.reshape(-1)
        elements.append(a)
        loops.append(meta)
        return True

    for a, meta in zip(generators, s.loops):
        try_add(a, meta)
    frontier = list(range(len(elements)))
    for level in range(2, depth + 1):
        new_frontier = []
        for i in frontier:
            for j, g in enumerate(generators):
                prod = elements[i] @ g
                if try_add(prod, {"word": (i, j), "level": level}):
                    new_frontier.append(len(elements) - 1)
        if not new_frontier or len(elements) >= max_elements:
            break
        frontier = new_frontier
    return HolonomySample(
        base=s.base,
        frame=s.frame,
        elements=elements,
        loops=loops,
        generation_depth=depth,
    )


def transitivity_test(
    s: HolonomySample,
    n_dirs: int,
    eps: float,
    seed: int = 0,
) -> TransitivityReport:
    """Spherical-cap coverage of the orbit of a fixed unit vector.

    The score is the largest distance from a random unit direction to the
    orbit of e_1 under the sampled elements, measured with antipodal
    identification (norms are symmetric, so +/-u are equivalent).  The
    verdict is ``transitive`` iff the score is at most eps; with finite
    samples that verdict is evidence while ``non_transitive`` at high
    coverage is the trusted one.
    """
    if not s.elements:
        raise ValueError("sample has no elements")
    d = s.dim
    if d < 2:
        raise ValueError("transitivity needs dimension at least 2")
    orbit = s.stacked() @ np.eye(d)[0]
    orbit /= np.linalg.norm(orbit, axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    cosines = np.abs(dirs @ orbit.T)
    best = np.clip(cosines.max(axis=1), -1.0, 1.0)
    score = float(np.max(np.arccos(best)))
    verdict = "transitive" if score <= eps else "non_transitive"
    return TransitivityReport(verdict=verdict, coverage_score=score,
                              n_dirs=n_dirs, eps=eps)


def _fixed_subspace(elements, fixed_tol):
    d = elements[0].shape[0]
    eye = np.eye(d)
    m = np.zeros((d, d))
    for a in elements:
        diff = a - eye
        m += diff.T @ diff
    m /= len(elements)
    vals, vecs = np.linalg.eigh(m)
    mask = np.sqrt(np.clip(vals, 0.0, None)) <= fixed_tol
    return vecs[:, mask], vecs[:, ~mask]


def _block_residual(elements, basis):
    d = basis.shape[0]
    proj = np.eye(d) - basis @ basis.T
    return max(float(np.linalg.norm(proj @ a @ basis, 2)) for a in elements)


def invariant_subspaces(
    s: HolonomySample,
    tol: float = 1e-3,
    seed: int = 0,
    fixed_tol: float = 1e-4,
    null_tol: float = 1e-3,
) -> SplittingReport:
    """Invariant-subspace splitting of the sampled action.

    The fixed subspace is the joint near-kernel of (A - I) over all
    elements.  On its orthogonal complement the commutant of the sample is
    solved as a linear system; the eigenspaces of a random symmetric
    commutant element, merged across eigenvalue gaps below ``tol``, give
    the remaining blocks.  Nontrivial blocks are listed first (largest
    first) and the fixed subspace last.
    """
    elements = [np.asarray(a, dtype=float) for a in s.elements]
    d = s.dim
    fixed_basis, comp_basis = _fixed_subspace(elements, fixed_tol)
    fixed_dim = fixed_basis.shape[1]
    warning = None

    if fixed_dim == d:
        # Trivial action: the whole space is one fixed block.
        return SplittingReport(
            subspace_bases=[np.eye(d)],
            fixed_dim=d,
            block_dims=[d],
            invariance_residual=0.0,
        )

    md = comp_basis.shape[1]
    reduced = [comp_basis.T @ a @ comp_basis for a in elements]
    eye_r = np.eye(md)
    rows = []
    for a in reduced:
        rows.append(np.kron(a.T, eye_r) - np.kron(eye_r, a))
    system = np.vstack(rows)
    _, svals, vt = np.linalg.svd(system)
    if svals.size < md * md:
        svals = np.concatenate([svals, np.zeros(md * md - svals.size)])
    smax = max(float(svals[0]), 1.0)
    null_mask = svals <= null_tol * smax
    null_vecs = vt[null_mask]
    if null_vecs.shape[0] == 0:
        # The identity always commutes, so an empty commutant means the
        # tolerances are off; report the complement as a single block.
        warning = "commutant solve found no null space; tolerances suspect"
        commutant_sym = eye_r
    else:
        rng = np.random.default_rng(seed)
        coeff = rng.standard_normal(null_vecs.shape[0])
        mat = (coeff @ null_vecs).reshape(md, md, order="F")
        commutant_sym = 0.5 * (mat + mat.T)
        if np.linalg.norm(commutant_sym) < 1e-12:
            warning = "random commutant element degenerated to skew part"
            commutant_sym = eye_r

    vals, vecs = np.linalg.eigh(commutant_sym)
    scale = max(float(np.max(np.abs(vals))), 1.0)
    groups = []
    start = 0
    for i in range(1, md + 1):
        if i == md or vals[i] - vals[i - 1] > tol * scale:
            groups.append(slice(start, i))
            start = i
    blocks = [comp_basis @ vecs[:, g] for g in groups]
    blocks.sort(key=lambda b: -b.shape[1])

    bases = list(blocks)
    dims = [b.shape[1] for b in blocks]
    if fixed_dim > 0:
        bases.append(fixed_basis)
        dims.append(fixed_dim)
    residual = max(_block_residual(elements, b) for b in bases)
    if residual > 10 * tol and warning is None:
        warning = f"block invariance residual {residual:.2e} above tolerance"
    return SplittingReport(
        subspace_bases=bases,
        fixed_dim=fixed_dim,
        block_dims=dims,
        invariance_residual=residual,
        warning=warning,
    )
