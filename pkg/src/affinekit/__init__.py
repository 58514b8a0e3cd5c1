"""Geodesics, holonomy sampling, invariant norms, and affinity testing."""

from .errors import (
    ChartDomainError,
    GeodesicExitError,
    HolonomySamplingError,
    LogConvergenceError,
    SamplingError,
    SeminormZeroError,
)
from .geometry import (
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
    riemannian_exp,
    riemannian_log,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ChartDomainError",
    "ChartManifold",
    "Curve",
    "GeodesicExitError",
    "HolonomySamplingError",
    "LogConvergenceError",
    "SamplingError",
    "SeminormZeroError",
    "TangentVector",
    "christoffel",
    "integrate_geodesic",
    "load_manifold",
    "make_euclidean",
    "make_hyperbolic",
    "make_product",
    "make_sphere",
    "orthonormal_frame",
    "parallel_transport",
    "riemannian_exp",
    "riemannian_log",
]
