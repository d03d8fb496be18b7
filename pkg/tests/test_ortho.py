import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerkit import (
    Basis,
    DimensionMismatch,
    Euclidean,
    IsotropicPivot,
    NotOrthogonalSet,
    NotOrthonormalBasis,
    PseudoEuclidean,
    SingularInput,
    check_linear_independence,
    evaluate_F2,
    is_orthogonal,
    metric_profile,
    normalize,
    orthogonalize,
    orthonormalize,
)
from finslerkit.ortho import scalar_product, span_defect

from helpers import POSITIVE, classical_gram_schmidt, fd_metric_oracle, random_basis, randers2, randers3


def test_euclidean_example():
    out = orthogonalize(Euclidean(2), [[1, 1], [0, 1]])
    np.testing.assert_allclose(out.vectors, [[1, 1], [-0.5, 0.5]], atol=1e-15)


def test_pseudo_example():
    out = orthogonalize(PseudoEuclidean((-1, 1)), [[1, 0], [1, 1]])
    np.testing.assert_allclose(out.vectors, [[1, 0], [0, 1]], atol=1e-15)
    unit = normalize(PseudoEuclidean((-1, 1)), out)
    assert unit.signature == (-1, 1)


def test_orthogonality_is_not_symmetric():
    m = randers2()
    v1, v2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert scalar_product(m, v1, v1, v2) == pytest.approx(0.0, abs=1e-15)
    assert scalar_product(m, v2, v2, v1) == pytest.approx(0.5, abs=1e-15)
    assert is_orthogonal(m, v1, v2)
    assert not is_orthogonal(m, v2, v1)
    # same conclusion from an oracle that shares no code with the metric routines
    assert abs(v1 @ fd_metric_oracle(m, v1) @ v2) < 1e-6
    assert abs(v2 @ fd_metric_oracle(m, v2) @ v1 - 0.5) < 1e-6


def test_asymmetric_pairs_are_common_for_randers():
    m = randers3()
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(20):
        b = orthonormalize(m, random_basis(rng, 3))
        for k in range(3):
            for l in range(k + 1, 3):
                if abs(scalar_product(m, b[l], b[l], b[k])) > 1e-4:
                    hits += 1
    assert hits > 0


def test_randers_standard_basis_profile():
    m = randers2()
    b = orthonormalize(m, Basis.standard(2))
    np.testing.assert_allclose(b.vectors, [[2 / 3, 0], [0, 1]], atol=1e-14)
    prof = metric_profile(m, b)
    np.testing.assert_allclose(prof.G, [[1, 0], [1 / 3, 1]], atol=1e-14)
    assert prof.is_orthonormal()
    assert prof.lower_entries[0] == pytest.approx(1 / 3)


@pytest.mark.parametrize("name", sorted(POSITIVE))
def test_round_trip(name):
    model = POSITIVE[name]()
    n = model.dimension
    rng = np.random.default_rng(100)
    for _ in range(25):
        raw = random_basis(rng, n)
        b = orthonormalize(model, raw)
        prof = metric_profile(model, b)
        assert prof.upper_defect <= 1e-8
        assert prof.diagonal_defect <= 1e-8
        assert span_defect(raw, b.vectors) <= 1e-8


def test_euclidean_matches_classical_gram_schmidt():
    rng = np.random.default_rng(3)
    for n in (2, 3, 5):
        for _ in range(20):
            raw = random_basis(rng, n)
            ours = orthonormalize(Euclidean(n), raw).vectors
            np.testing.assert_allclose(ours, classical_gram_schmidt(raw), atol=1e-12, rtol=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_deterministic(seed):
    raw = random_basis(np.random.default_rng(seed), 3)
    a = orthonormalize(randers3(), raw).vectors
    b = orthonormalize(randers3(), raw).vectors
    assert np.array_equal(a, b)


def test_linear_independence_positive():
    b = orthonormalize(randers3(), random_basis(np.random.default_rng(0), 3))
    assert check_linear_independence(randers3(), b.vectors)
    assert check_linear_independence(randers3(), b.vectors[:2])


def test_linear_independence_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonalSet):
        check_linear_independence(Euclidean(2), [[1, 0], [1, 1]])
    # reversed order breaks orthogonality for an asymmetric pair
    with pytest.raises(NotOrthogonalSet):
        check_linear_independence(randers2(), [[0, 1], [1, 0]])
    with pytest.raises(DimensionMismatch):
        check_linear_independence(Euclidean(2), [[1, 0], [0, 1], [1, 1]])


def test_linear_independence_detects_null_vector():
    # isotropic vector in Minkowski plane is orthogonal to itself
    assert not check_linear_independence(PseudoEuclidean((-1, 1)), [[1, 1]])


def test_isotropic_pivot_raises():
    with pytest.raises(IsotropicPivot):
        orthogonalize(PseudoEuclidean((-1, 1)), [[1, 1], [1, 0]])


def test_reorder_swaps_in_another_vector():
    out = orthogonalize(PseudoEuclidean((-1, 1)), [[1, 1], [1, 0]], reorder=True)
    assert out.order == (1, 0)
    np.testing.assert_allclose(out.vectors[0], [1, 0])
    assert abs(evaluate_F2(PseudoEuclidean((-1, 1)), out.vectors[1])) > 1e-6


def test_singular_input_rejected():
    with pytest.raises(SingularInput):
        Basis([[1, 2], [2, 4]])
    with pytest.raises(SingularInput):
        Basis([[1, 0, 0], [0, 1, 0]])


def test_profile_of_standard_basis():
    prof = metric_profile(Euclidean(3), Basis.standard(3))
    np.testing.assert_array_equal(prof.G, np.eye(3))
    lor = metric_profile(PseudoEuclidean((-1, 1, 1, 1)), Basis.standard(4))
    assert lor.indefinite and lor.signature == (-1, 1, 1, 1)
    assert lor.is_orthonormal()


def test_profile_rejects_non_orthonormal():
    prof = metric_profile(Euclidean(2), [[1, 0], [1, 1]])
    assert prof.upper_defect == pytest.approx(1.0)
    with pytest.raises(NotOrthonormalBasis):
        prof.require_orthonormal()


def test_span_defect_detects_reordering():
    a = np.eye(3)
    assert span_defect(a, a[[1, 0, 2]]) > 0.5
    assert span_defect(a, 2 * a) == 0.0
