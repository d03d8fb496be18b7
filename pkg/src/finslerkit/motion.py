"""Infinitesimal motions and quasimotions at an orthonormal basis.

A generator is an n x n matrix ``a`` acting on the basis labels,
``e'_k = e_k + eps * sum_m a[k, m] e_m``.  Requiring the perturbed basis to
stay orthonormal to first order in eps gives one linear equation per pair
``k <= l``; pairs ``k > l`` are free because the profile is only triangular.
The solutions form the motion algebra.

Unknowns are flattened row-major: column ``k * n + m`` holds ``a[k, m]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from .derivatives import cartans_at, derivatives
from .errors import DimensionMismatch, NotOrthonormalBasis
from .norms import NormModel
from .ortho import Basis, MetricProfile, metric_profile

RANK_TOL = 1e-8
ANGLE_TOL = 1e-6
RESIDUAL_TOL = 1e-8
EPS_LADDER = (1e-2, 1e-3, 1e-4)
MIN_ORDER = 1.9


@dataclass
class ConstraintSystem:
    """Rows indexed by pairs (k, l), k <= l; columns by flattened a[k, m]."""

    M: np.ndarray
    pairs: list[tuple[int, int]]
    dimension: int
    kind: str
    basis: np.ndarray = field(repr=False)
    cartan_magnitude: float = 0.0
    cartan_scale: float = 0.0
    coordinate_matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.M, tol=_rank_cut(self.M)))

    @property
    def nullity(self) -> int:
        return self.dimension**2 - self.rank

    def row_residuals(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.dimension, self.dimension):
            raise DimensionMismatch(f"generator must be {self.dimension}x{self.dimension}, got {a.shape}")
        return self.M @ a.ravel()

    def residual(self, a) -> float:
        """max over rows of |row · a|."""
        return float(np.abs(self.row_residuals(a)).max())


def _rank_cut(M: np.ndarray, rel: float = RANK_TOL) -> float:
    if M.size == 0:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return rel * s[0] if s.size and s[0] > 0 else 0.0


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(k, l) for k in range(n) for l in range(k, n)]


def _orthonormal_profile(model: NormModel, basis, method: str, tol: float | None) -> MetricProfile:
    b = basis if isinstance(basis, Basis) else Basis(basis)
    if b.dimension != model.dimension:
        raise DimensionMismatch(f"basis dimension {b.dimension} != norm dimension {model.dimension}")
    prof = metric_profile(model, b, method)
    prof.require_orthonormal(tol)
    return prof


def assemble_motion_constraints(model: NormModel, basis, method: str = "auto",
                                tol: float | None = None) -> ConstraintSystem:
    """First-order orthonormality preservation, active viewpoint.

    Row (k, l):  sum_m a[k,m] g(e_k)(e_m, e_l) + a[l,m] g(e_k)(e_k, e_m)
                 + sum_m a[k,m] 2 C(e_k)(e_k, e_l, e_m) = 0.
    The Cartan part vanishes analytically (v^i C_ijk(v) = 0); its assembled
    size is kept as ``cartan_magnitude``.
    """
    prof = _orthonormal_profile(model, basis, method, tol)
    E = prof.basis
    n = model.dimension
    B = np.einsum("mi,kij,lj->kml", E, prof.P, E)  # B[k] = g(e_k) in basis frame
    if model.constant_metric and method in ("auto", "analytic"):
        C = np.zeros((n, n, n, n))
    else:
        C = cartans_at(model, E, "fd" if method == "fd" else "hyperdual")
    cart = 2.0 * np.einsum("kijp,ki,lj,mp->klm", C, E, E, E)  # cart[k, l, m]
    pairs = _pairs(n)
    M = np.zeros((len(pairs), n * n))
    for r, (k, l) in enumerate(pairs):
        M[r, k * n:(k + 1) * n] += B[k][:, l] + cart[k, l]
        M[r, l * n:(l + 1) * n] += B[k][k, :]
    return ConstraintSystem(
        M=M, pairs=pairs, dimension=n, kind="motion", basis=E,
        cartan_magnitude=float(np.abs(cart[[k for k, _ in pairs], [l for _, l in pairs]]).max()),
        cartan_scale=float(np.abs(C).max()),
    )


class _BasisFrame(NormModel):
    """F² pulled back to coordinates relative to a basis: x -> F²(x @ E)."""

    def __init__(self, model: NormModel, E: np.ndarray):
        self.model = model
        self.E = np.asarray(E, dtype=float)
        self.dimension = model.dimension
        self.kind = f"{model.kind}@basis"

    def f2(self, x):
        return self.model.f2(x @ self.E)


def assemble_quasimotion_constraints(model: NormModel, basis, method: str = "auto",
                                     tol: float | None = None) -> ConstraintSystem:
    """First-order orthonormality preservation, passive viewpoint.

    Coordinates relative to the basis change as x' = x + eps q x and the
    metric components transform as a tensor, so at the direction e_k
    (coordinates delta_k):

        dg_kl = -(q[m,k] g_ml + q[m,l] g_km) - (d g_kl / d x^m) q[m,k].

    The derivative of the component functions is taken on F² composed with
    the change of frame.  Rows are returned in the motion unknowns via the
    induced basis change a = -q^T, so both systems share columns; the raw
    coordinate-form matrix is kept as ``coordinate_matrix``.
    """
    prof = _orthonormal_profile(model, basis, method, tol)
    E = prof.basis
    n = model.dimension
    frame = _BasisFrame(model, E)
    route = "fd" if method == "fd" else "hyperdual"
    d = derivatives(frame, np.eye(n), route, order=3)
    ghat = 0.5 * d.hess  # ghat[k] = metric components at delta_k
    dghat = 0.5 * d.third  # dghat[k, i, j, m] = d ghat_ij / d x^m at delta_k
    pairs = _pairs(n)
    Mq = np.zeros((len(pairs), n * n))  # column m * n + k holds q[m, k]
    for r, (k, l) in enumerate(pairs):
        g = ghat[k]
        for m in range(n):
            Mq[r, m * n + k] -= g[m, l] + dghat[k, k, l, m]
            Mq[r, m * n + l] -= g[k, m]
    # q[m, k] = -a[k, m]
    M = -Mq.reshape(len(pairs), n, n).transpose(0, 2, 1).reshape(len(pairs), n * n)
    return ConstraintSystem(M=M, pairs=pairs, dimension=n, kind="quasimotion", basis=E,
                            coordinate_matrix=Mq)


def coordinate_generator(a) -> np.ndarray:
    """Coordinate-transformation matrix q induced by the basis generator a."""
    return -np.asarray(a, dtype=float).T


def generator_to_ambient(a, basis) -> np.ndarray:
    """Ambient linear map L with e'_k = (I + eps L) e_k, i.e. L = E^T a^T E^{-T}."""
    E = basis.vectors if isinstance(basis, Basis) else np.asarray(basis, dtype=float)
    return E.T @ np.asarray(a, dtype=float).T @ np.linalg.inv(E.T)


# ---------------------------------------------------------------------------
# nullspace


@dataclass
class LieAlgebraBasis:
    generators: list[np.ndarray]
    singular_values: np.ndarray
    rank: int

    @property
    def dimension(self) -> int:
        return len(self.generators)

    @property
    def matrix(self) -> np.ndarray:
        """Generators flattened as rows, shape (dimension, n^2)."""
        if not self.generators:
            return np.zeros((0, 0))
        return np.array([g.ravel() for g in self.generators])


def _rref(rows: np.ndarray, tol: float) -> np.ndarray:
    r = rows.copy()
    lead = 0
    nrows, ncols = r.shape
    for col in range(ncols):
        if lead >= nrows:
            break
        piv = lead + int(np.argmax(np.abs(r[lead:, col])))
        if abs(r[piv, col]) <= tol:
            continue
        r[[lead, piv]] = r[[piv, lead]]
        r[lead] /= r[lead, col]
        others = np.arange(nrows) != lead
        r[others] -= np.outer(r[others, col], r[lead])
        lead += 1
    return r[:lead]


def _sign_fix(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > tol)
    return -v if nz.size and v[nz[0]] < 0 else v


def nullspace(M: np.ndarray, rank_tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray, int]:
    """Orthonormal nullspace columns of M by SVD with a relative singular cutoff."""
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols), np.zeros(0), 0
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:].T, s, rank


def solve_lie_algebra(system: ConstraintSystem, rank_tol: float = RANK_TOL) -> LieAlgebraBasis:
    """Nullspace of the constraint system as an orthonormal set of generators.

    The SVD nullspace is brought to a canonical basis (reduced row echelon
    form, then Gram-Schmidt in pivot order, first nonzero entry positive) so
    that reports do not depend on how LAPACK rotates a degenerate nullspace.
    """
    n = system.dimension
    N, s, rank = nullspace(system.M, rank_tol)
    if N.shape[1] == 0:
        return LieAlgebraBasis(generators=[], singular_values=s, rank=rank)
    canon = _rref(N.T, tol=1e-10)
    q, _ = np.linalg.qr(canon.T)
    gens = []
    for col in q.T:
        col = _sign_fix(col)
        col = np.where(np.abs(col) < 1e-15, 0.0, col)
        gens.append(col.reshape(n, n))
    return LieAlgebraBasis(generators=gens, singular_values=s, rank=rank)


# ---------------------------------------------------------------------------
# checks


@dataclass
class ClosureReport:
    residual_f: float
    residual_g: float
    residual_sum: float
    tolerance: float = RESIDUAL_TOL

    @property
    def passed(self) -> bool:
        return self.residual_sum <= self.tolerance


def verify_additive_closure(system: ConstraintSystem, f, g, tol: float = RESIDUAL_TOL) -> ClosureReport:
    """Residual of f + g, the first-order coefficient of the composition of two motions."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    return ClosureReport(system.residual(f), system.residual(g), system.residual(f + g), tol)


@dataclass
class DriftReport:
    eps: tuple[float, ...]
    deviations: tuple[float, ...]
    order: float
    constant: float
    min_order: float = MIN_ORDER

    @property
    def passed(self) -> bool:
        return self.order >= self.min_order


def orthonormal_deviation(profile: MetricProfile, signature) -> float:
    G = profile.G
    n = G.shape[0]
    upper = np.abs(G[np.triu_indices(n, 1)]).max()
    diag = np.abs(np.diag(G) - np.asarray(signature, dtype=float)).max()
    return float(max(upper, diag))


def verify_first_order_preservation(model: NormModel, basis, gen, eps=EPS_LADDER,
                                    method: str = "auto", tol: float | None = None,
                                    min_order: float = MIN_ORDER) -> DriftReport:
    """Drift of the orthonormal pattern under e'_k = e_k + eps sum_m a[k,m] e_m.

    The fitted order is the least-squares slope of log(deviation) against
    log(eps); an exactly preserved pattern (all deviations below 1e-14)
    reports order inf.
    """
    prof = _orthonormal_profile(model, basis, method, tol)
    E = prof.basis
    a = np.asarray(gen, dtype=float)
    n = model.dimension
    if a.shape != (n, n):
        raise DimensionMismatch(f"generator must be {n}x{n}, got {a.shape}")
    ladder = tuple(float(e) for e in np.atleast_1d(eps))
    devs = []
    for e in ladder:
        moved = (np.eye(n) + e * a) @ E
        devs.append(orthonormal_deviation(metric_profile(model, moved, method), prof.signature))
    devs_arr = np.array(devs)
    eps_arr = np.array(ladder)
    if np.all(devs_arr <= 1e-14):
        return DriftReport(ladder, tuple(devs), float("inf"), 0.0, min_order)
    constant = float((devs_arr / eps_arr**2).max())
    if len(ladder) < 2:
        return DriftReport(ladder, tuple(devs), float("nan"), constant, min_order)
    keep = devs_arr > 0
    slope = np.polyfit(np.log(eps_arr[keep]), np.log(devs_arr[keep]), 1)[0] if keep.sum() >= 2 else float("inf")
    return DriftReport(ladder, tuple(devs), float(slope), constant, min_order)


@dataclass
class EquivalenceReport:
    dimension_a: int
    dimension_b: int
    max_angle: float
    tolerance: float = ANGLE_TOL

    @property
    def equivalent(self) -> bool:
        return self.dimension_a == self.dimension_b and self.max_angle <= self.tolerance


def compare_algebras(sys_a: ConstraintSystem, sys_b: ConstraintSystem,
                     angle_tol: float = ANGLE_TOL, rank_tol: float = RANK_TOL) -> EquivalenceReport:
    """Nullspace dimensions and largest principal angle between the nullspaces."""
    if sys_a.dimension != sys_b.dimension:
        raise DimensionMismatch(f"systems of dimension {sys_a.dimension} and {sys_b.dimension}")
    na, _, _ = nullspace(sys_a.M, rank_tol)
    nb, _, _ = nullspace(sys_b.M, rank_tol)
    da, db = na.shape[1], nb.shape[1]
    if da == 0 or db == 0:
        angle = 0.0 if da == db else float(np.pi / 2)
    else:
        angle = float(np.max(subspace_angles(na, nb)))
        if da != db:
            angle = float(np.pi / 2)
    return EquivalenceReport(da, db, angle, angle_tol)


@dataclass
class BracketResult:
    commutator: np.ndarray
    residual: float | None


def bracket(f, g, system: ConstraintSystem | None = None) -> BracketResult:
    """Matrix commutator fg - gf and, if a system is given, its constraint residual."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    c = f @ g - g @ f
    return BracketResult(c, None if system is None else system.residual(c))


def bracket_table(algebra: LieAlgebraBasis, system: ConstraintSystem) -> np.ndarray:
    """Residuals of all pairwise brackets, shape (d, d)."""
    d = algebra.dimension
    out = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            r = bracket(algebra.generators[i], algebra.generators[j], system).residual
            out[i, j] = out[j, i] = r
    return out


def structure_constants(algebra: LieAlgebraBasis) -> tuple[np.ndarray, float]:
    """Coefficients of [X_i, X_j] in the generator basis and the worst fit residual."""
    X = algebra.matrix.T
    d = algebra.dimension
    c = np.zeros((d, d, d))
    worst = 0.0
    for i in range(d):
        for j in range(d):
            b = bracket(algebra.generators[i], algebra.generators[j]).commutator.ravel()
            coef, *_ = np.linalg.lstsq(X, b, rcond=None)
            c[i, j] = coef
            worst = max(worst, float(np.abs(X @ coef - b).max()))
    return c, worst
