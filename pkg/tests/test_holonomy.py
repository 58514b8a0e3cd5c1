"""Holonomy sampling, closure, transitivity, and splitting."""

import numpy as np
import pytest

from affinekit.geometry import (
    integrate_geodesic,
    make_euclidean,
    make_product,
    make_sphere,
    transport_field,
)
from affinekit.holonomy import (
    HolonomySample,
    group_closure,
    invariant_subspaces,
    rotation_angle_2d,
    sample_holonomy,
    transitivity_test,
)

from oracles import sphere_triangle_area


def rot2(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]])


def synthetic_sample(mats, dim=2):
    mats = [np.asarray(a, dtype=float) for a in mats]
    return HolonomySample(
        base=np.zeros(dim),
        frame=np.eye(dim),
        elements=[np.eye(dim)] + mats,
        loops=[None] * (len(mats) + 1),
    )


@pytest.fixture(scope="module")
def sphere_sample():
    return sample_holonomy(make_sphere(), [np.pi / 2, 0.0], 6, 0.45, seed=2)


@pytest.fixture(scope="module")
def s2xr_sample():
    prod = make_product(make_sphere(), make_euclidean(1, 5.0), name="s2xr")
    return prod, sample_holonomy(prod, [np.pi / 2, 0.0, 0.0], 5, 0.4, seed=3)


@pytest.fixture(scope="module")
def s2xs2_sample():
    prod = make_product(make_sphere(), make_sphere(), name="s2xs2")
    return sample_holonomy(prod, [np.pi / 2, 0.0, np.pi / 2, 0.0], 6, 0.4, seed=5)


# ---------------------------------------------------------------------------
# Sampling


def test_flat_holonomy_is_trivial():
    s = sample_holonomy(make_euclidean(2), [0.0, 0.0], 3, 0.5, seed=1)
    assert max(np.max(np.abs(a - np.eye(2))) for a in s.elements) < 1e-8


def test_sample_contains_identity_first(sphere_sample):
    assert np.array_equal(sphere_sample.elements[0], np.eye(2))
    assert sphere_sample.loops[0] is None


def test_sample_orthogonality_and_determinant(sphere_sample, s2xs2_sample):
    for s in (sphere_sample, s2xs2_sample):
        assert s.orthogonality_residual() <= 1e-6
        assert np.max(np.abs(s.determinants() - 1.0)) <= 1e-6


def test_sphere_triangle_matches_its_area(sphere_sample):
    # Gauss-Bonnet: the loop rotation angle equals the enclosed area.
    for a, loop in zip(sphere_sample.elements[1:], sphere_sample.loops[1:]):
        area = sphere_triangle_area(loop["vertices"])
        assert abs(abs(rotation_angle_2d(a)) - area) < 1e-3


def test_product_holonomy_acts_blockwise(s2xr_sample):
    prod, s = s2xr_sample
    for a in s.elements[1:]:
        off = max(
            np.max(np.abs(a[:2, 2])), np.max(np.abs(a[2, :2])), abs(a[2, 2] - 1.0)
        )
        assert off < 1e-4


def test_product_block_matches_factor_transport(s2xr_sample):
    # The sphere block of a product loop element must agree with transport
    # done on a standalone sphere along the projected loop.
    prod, s = s2xr_sample
    sphere = make_sphere()
    from affinekit.geometry import orthonormal_frame, riemannian_log

    a = s.elements[1]
    verts = [np.asarray(v, dtype=float)[:2] for v in s.loops[1]["vertices"]]
    p = verts[0]
    frame = orthonormal_frame(sphere, p)
    w = frame.copy()
    for start, stop in zip(verts, verts[1:] + verts[:1]):
        v = riemannian_log(sphere, start, stop, tol=1e-11)
        leg = integrate_geodesic(sphere, start, v.components, 1.0, steps=160)
        w = transport_field(sphere, leg, w)[-1]
    block = frame.T @ sphere.metric(p) @ w
    assert np.max(np.abs(block - a[:2, :2])) < 1e-4


def test_sampling_error_when_loops_cannot_fit():
    from affinekit.errors import HolonomySamplingError

    tiny = make_euclidean(2, 0.1)
    with pytest.raises(HolonomySamplingError):
        sample_holonomy(tiny, [0.0, 0.0], 1, 5.0, seed=0, max_retries=3)


# ---------------------------------------------------------------------------
# Closure


def test_closure_of_identity_is_identity():
    s = synthetic_sample([])
    closed = group_closure(s, depth=3)
    assert len(closed.elements) == 1


def test_closure_cyclic_group_of_order_five():
    s = synthetic_sample([rot2(2 * np.pi / 5)])
    closed = group_closure(s, depth=5)
    assert len(closed.elements) == 5


def test_closure_count_nondecreasing_in_depth(sphere_sample):
    sub = sphere_sample.subsample([1, 2])
    counts = [len(group_closure(sub, depth=d).elements) for d in (1, 2, 3, 4)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_closure_stays_orthogonal(sphere_sample):
    closed = group_closure(sphere_sample.subsample([1, 2]), depth=4)
    assert closed.orthogonality_residual() <= 1e-6


def test_closure_respects_cap():
    s = synthetic_sample([rot2(0.01)])
    closed = group_closure(s, depth=1000, max_elements=64)
    assert len(closed.elements) == 64


# ---------------------------------------------------------------------------
# Transitivity


def test_identity_only_sample_not_transitive():
    rep = transitivity_test(synthetic_sample([]), 200, 0.1, seed=0)
    assert rep.verdict == "non_transitive"
    assert 1.35 < rep.coverage_score <= np.pi / 2 + 1e-9


def test_dense_rotation_sample_transitive():
    mats = [rot2(2 * np.pi * k / 64) for k in range(1, 64)]
    rep = transitivity_test(synthetic_sample(mats), 200, 0.1, seed=0)
    assert rep.verdict == "transitive"
    assert rep.coverage_score <= 0.1


def test_product_sample_not_transitive(s2xr_sample):
    _, s = s2xr_sample
    rep = transitivity_test(group_closure(s, 3, max_elements=512), 200, 0.1)
    assert rep.verdict == "non_transitive"
    assert rep.coverage_score > 1.0  # orbit stays in the sphere block


def test_closure_never_flips_transitive_to_non():
    mats = [rot2(2 * np.pi * k / 64) for k in range(1, 64)]
    s = synthetic_sample(mats)
    before = transitivity_test(s, 150, 0.1, seed=1)
    after = transitivity_test(group_closure(s, 2, max_elements=256), 150, 0.1, seed=1)
    assert before.verdict == "transitive"
    assert after.verdict == "transitive"
    assert after.coverage_score <= before.coverage_score + 1e-12


def test_transitivity_rejects_empty():
    s = synthetic_sample([])
    s.elements = []
    with pytest.raises(ValueError):
        transitivity_test(s, 10, 0.1)


# ---------------------------------------------------------------------------
# Invariant subspaces


def test_identity_only_splitting_is_whole_space():
    rep = invariant_subspaces(synthetic_sample([], dim=3))
    assert rep.block_dims == [3]
    assert rep.fixed_dim == 3


def test_s2xr_splitting(s2xr_sample):
    _, s = s2xr_sample
    rep = invariant_subspaces(s)
    assert rep.block_dims == [2, 1]
    assert rep.fixed_dim == 1
    assert rep.invariance_residual <= 1e-4


def test_s2xs2_splitting(s2xs2_sample):
    rep = invariant_subspaces(s2xs2_sample)
    assert rep.block_dims == [2, 2]
    assert rep.fixed_dim == 0
    assert rep.invariance_residual <= 1e-4


def test_splitting_blocks_are_invariant(s2xs2_sample):
    rep = invariant_subspaces(s2xs2_sample)
    for basis in rep.subspace_bases:
        proj = np.eye(4) - basis @ basis.T
        for a in s2xs2_sample.elements:
            assert np.linalg.norm(proj @ a @ basis, 2) <= 1e-4


def test_splitting_bases_orthogonal_and_complete(s2xr_sample):
    _, s = s2xr_sample
    rep = invariant_subspaces(s)
    stacked = np.hstack(rep.subspace_bases)
    assert stacked.shape == (3, 3)
    assert np.max(np.abs(stacked.T @ stacked - np.eye(3))) < 1e-8


def test_splitting_serialization(s2xr_sample):
    _, s = s2xr_sample
    d = invariant_subspaces(s).to_dict()
    assert set(d) == {"block_dims", "fixed_dim", "invariance_residual", "warning"}
