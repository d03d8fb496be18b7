import numpy as np
import pytest

from finslerkit import (
    Basis,
    DimensionMismatch,
    Euclidean,
    NotOrthonormalBasis,
    PseudoEuclidean,
    assemble_motion_constraints,
    assemble_quasimotion_constraints,
    bracket,
    compare_algebras,
    orthonormalize,
    solve_lie_algebra,
    verify_additive_closure,
    verify_first_order_preservation,
)
from finslerkit.motion import (
    ConstraintSystem,
    bracket_table,
    coordinate_generator,
    generator_to_ambient,
    structure_constants,
)

from helpers import ALL, antisymmetry_rows, exact_rank, random_basis, randers2, randers3

SIGNATURES = [(1, 1), (-1, 1), (-1, 1, 1), (-1, 1, 1, 1), (-1, -1, 1, 1)]


def _E(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def so3_basis():
    jx = _E(3, 2, 1) - _E(3, 1, 2)
    jy = _E(3, 0, 2) - _E(3, 2, 0)
    jz = _E(3, 1, 0) - _E(3, 0, 1)
    return [jx, jy, jz]


def so13_basis():
    """J_x, J_y, J_z on indices 1..3 and boosts K_i = E_0i + E_i0."""
    js = []
    for r in so3_basis():
        m = np.zeros((4, 4))
        m[1:, 1:] = r
        js.append(m)
    ks = [_E(4, 0, i) + _E(4, i, 0) for i in (1, 2, 3)]
    return js + ks


def levi(i, j, k):
    return float(np.linalg.det(np.eye(3)[[i, j, k]]))


def so3_table():
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                c[i, j, k] = levi(i, j, k)
    return c


def so13_table():
    # [J_i,J_j] = e_ijk J_k, [J_i,K_j] = e_ijk K_k, [K_i,K_j] = -e_ijk J_k
    c = np.zeros((6, 6, 6))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                e = levi(i, j, k)
                c[i, j, k] = e
                c[i, 3 + j, 3 + k] = e
                c[3 + j, i, 3 + k] = -e
                c[3 + i, 3 + j, k] = -e
    return c


def test_hand_tables_match_hand_matrices():
    for basis, table in ((so3_basis(), so3_table()), (so13_basis(), so13_table())):
        for i, x in enumerate(basis):
            for j, y in enumerate(basis):
                expected = sum(table[i, j, k] * z for k, z in enumerate(basis))
                np.testing.assert_array_equal(x @ y - y @ x, expected)


def test_boost_rotation_commutator_example():
    j = so13_basis()
    # [K_x, J_z] = -K_y
    np.testing.assert_array_equal(bracket(j[3], j[2]).commutator, -j[4])


@pytest.mark.parametrize("sig", SIGNATURES)
def test_diagonal_metric_rows_match_hand_system(sig):
    model = PseudoEuclidean(sig)
    system = assemble_motion_constraints(model, Basis.standard(len(sig)))
    np.testing.assert_array_equal(system.M, np.array(antisymmetry_rows(sig), dtype=float))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_euclidean_dimensions(n):
    system = assemble_motion_constraints(Euclidean(n), Basis.standard(n))
    alg = solve_lie_algebra(system)
    assert alg.dimension == n * (n - 1) // 2
    assert n * n - exact_rank(antisymmetry_rows((1,) * n)) == alg.dimension
    for g in alg.generators:
        np.testing.assert_allclose(g, -g.T, atol=1e-14)


@pytest.mark.parametrize("sig", SIGNATURES[1:])
def test_pseudo_dimensions(sig):
    n = len(sig)
    alg = solve_lie_algebra(assemble_motion_constraints(PseudoEuclidean(sig), Basis.standard(n)))
    assert alg.dimension == n * (n - 1) // 2 == n * n - exact_rank(antisymmetry_rows(sig))


def test_randers_plane_has_one_motion():
    m = randers2()
    basis = orthonormalize(m, Basis.standard(2))
    system = assemble_motion_constraints(m, basis)
    assert system.rank == 3
    alg = solve_lie_algebra(system)
    assert alg.dimension == 1
    expected = np.array([[0.0, -2.0], [3.0, -1.0]])
    expected /= np.linalg.norm(expected)
    g = alg.generators[0]
    assert min(np.abs(g - expected).max(), np.abs(g + expected).max()) <= 1e-10
    assert system.cartan_magnitude <= 1e-10


def test_generators_are_canonical():
    a = solve_lie_algebra(assemble_motion_constraints(Euclidean(3), Basis.standard(3)))
    b = solve_lie_algebra(assemble_motion_constraints(Euclidean(3), Basis.standard(3)))
    for x, y in zip(a.generators, b.generators):
        assert np.array_equal(x, y)
    np.testing.assert_allclose(a.matrix @ a.matrix.T, np.eye(3), atol=1e-14)
    for g in a.generators:
        first = g.ravel()[np.flatnonzero(np.abs(g.ravel()) > 1e-12)[0]]
        assert first > 0


def test_identity_generator_negative_control():
    system = assemble_motion_constraints(Euclidean(3), Basis.standard(3))
    res = system.row_residuals(np.eye(3))
    for r, (k, l) in enumerate(system.pairs):
        assert res[r] == (2.0 if k == l else 0.0)
    assert system.residual(np.eye(3)) == 2.0


@pytest.mark.parametrize("name", sorted(ALL))
def test_additive_closure(name):
    model = ALL[name]()
    basis = orthonormalize(model, Basis.standard(model.dimension))
    system = assemble_motion_constraints(model, basis)
    gens = solve_lie_algebra(system).generators
    rng = np.random.default_rng(8)
    for _ in range(50):
        i, j = rng.integers(len(gens), size=2)
        rep = verify_additive_closure(system, gens[i], gens[j], tol=1e-12)
        assert rep.passed, rep
    f = gens[0]
    assert verify_additive_closure(system, f, 2 * f, tol=1e-12).passed
    bad = verify_additive_closure(system, f, np.eye(model.dimension))
    assert not bad.passed and bad.residual_sum == pytest.approx(2.0, rel=1e-8)


def test_rotation_drift_is_quadratic():
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
    rep = verify_first_order_preservation(Euclidean(2), Basis.standard(2), rot)
    np.testing.assert_allclose(rep.deviations, np.array(rep.eps) ** 2, rtol=1e-6)
    assert rep.order == pytest.approx(2.0, abs=1e-6)


def test_boost_drift_is_quadratic():
    boost = np.array([[0.0, 1.0], [1.0, 0.0]])
    rep = verify_first_order_preservation(PseudoEuclidean((-1, 1)), Basis.standard(2), boost)
    np.testing.assert_allclose(rep.deviations, np.array(rep.eps) ** 2, rtol=1e-6)
    assert rep.passed


def test_non_motion_drift_is_linear():
    shear = np.array([[0.0, 1.0], [0.0, 0.0]])
    rep = verify_first_order_preservation(Euclidean(2), Basis.standard(2), shear)
    assert rep.order == pytest.approx(1.0, abs=1e-3)
    assert not rep.passed


@pytest.mark.parametrize("name", ["randers2", "randers3", "quartic3", "pseudo_p2"])
def test_solved_generators_drift_at_second_order(name):
    model = ALL[name]()
    basis = orthonormalize(model, random_basis(np.random.default_rng(4), model.dimension))
    system = assemble_motion_constraints(model, basis)
    for g in solve_lie_algebra(system).generators:
        rep = verify_first_order_preservation(model, basis, g)
        assert rep.order >= 1.9, rep


def test_drift_requires_orthonormal_basis():
    with pytest.raises(NotOrthonormalBasis):
        verify_first_order_preservation(Euclidean(2), [[1, 0], [1, 1]], np.zeros((2, 2)))
    with pytest.raises(NotOrthonormalBasis):
        assemble_motion_constraints(Euclidean(2), [[2, 0], [0, 1]])


@pytest.mark.parametrize("name", sorted(ALL))
def test_motions_equal_quasimotions(name):
    model = ALL[name]()
    basis = orthonormalize(model, random_basis(np.random.default_rng(6), model.dimension))
    motion = assemble_motion_constraints(model, basis)
    quasi = assemble_quasimotion_constraints(model, basis)
    cmp = compare_algebras(motion, quasi)
    assert cmp.dimension_a == cmp.dimension_b
    assert cmp.max_angle <= 1e-6
    assert cmp.equivalent


def test_quasimotion_fd_route_agrees():
    model = randers3()
    basis = orthonormalize(model, Basis.standard(3))
    cmp = compare_algebras(assemble_motion_constraints(model, basis),
                           assemble_quasimotion_constraints(model, basis, method="fd", tol=1e-5))
    assert cmp.dimension_a == cmp.dimension_b == 3
    assert cmp.max_angle <= 1e-4


def test_compare_detects_different_algebras():
    system = assemble_motion_constraints(Euclidean(2), Basis.standard(2))
    other = ConstraintSystem(M=np.random.default_rng(0).standard_normal((4, 4)), pairs=[], dimension=2,
                             kind="random", basis=np.eye(2))
    cmp = compare_algebras(system, other)
    assert (cmp.dimension_a, cmp.dimension_b) == (1, 0)
    assert not cmp.equivalent


def test_dimension_mismatch():
    a = assemble_motion_constraints(Euclidean(2), Basis.standard(2))
    b = assemble_motion_constraints(Euclidean(3), Basis.standard(3))
    with pytest.raises(DimensionMismatch):
        compare_algebras(a, b)
    with pytest.raises(DimensionMismatch):
        a.residual(np.eye(3))


def test_coordinate_and_ambient_forms():
    a = np.array([[0.0, 2.0], [-1.0, 0.5]])
    np.testing.assert_array_equal(coordinate_generator(a), -a.T)
    E = np.array([[2.0, 0.0], [1.0, 1.0]])
    L = generator_to_ambient(a, E)
    eps = 1e-3
    moved = (np.eye(2) + eps * a) @ E
    np.testing.assert_allclose(((np.eye(2) + eps * L) @ E.T).T, moved, atol=1e-14)


def _check_table(alg, system, hand, table):
    """Express solved generators in the hand basis and compare every bracket."""
    H = np.array([h.ravel() for h in hand]).T
    coords = [np.linalg.lstsq(H, g.ravel(), rcond=None)[0] for g in alg.generators]
    for c, g in zip(coords, alg.generators):
        np.testing.assert_allclose(H @ c, g.ravel(), atol=1e-12)
    worst = 0.0
    for ci, gi in zip(coords, alg.generators):
        for cj, gj in zip(coords, alg.generators):
            predicted = np.einsum("a,b,abc,cij->ij", ci, cj, table, np.array(hand))
            br = bracket(gi, gj, system)
            worst = max(worst, np.abs(br.commutator - predicted).max())
            assert br.residual <= 1e-12
    return worst


def test_so3_brackets():
    system = assemble_motion_constraints(Euclidean(3), Basis.standard(3))
    alg = solve_lie_algebra(system)
    assert _check_table(alg, system, so3_basis(), so3_table()) <= 1e-12
    _, fit = structure_constants(alg)
    assert fit <= 1e-12


def test_so13_brackets():
    system = assemble_motion_constraints(PseudoEuclidean((-1, 1, 1, 1)), Basis.standard(4))
    alg = solve_lie_algebra(system)
    assert alg.dimension == 6
    assert _check_table(alg, system, so13_basis(), so13_table()) <= 1e-12
    assert bracket_table(alg, system).max() <= 1e-12


def test_self_bracket_vanishes():
    f = solve_lie_algebra(assemble_motion_constraints(randers3(), orthonormalize(randers3(), np.eye(3)))).generators[0]
    assert not bracket(f, f).commutator.any()


def test_randers_brackets_are_only_measured():
    model = randers3()
    basis = orthonormalize(model, Basis.standard(3))
    system = assemble_motion_constraints(model, basis)
    table = bracket_table(solve_lie_algebra(system), system)
    assert table.shape == (3, 3)
    assert np.all(np.isfinite(table))
