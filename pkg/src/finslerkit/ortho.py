"""Noncommutative orthogonality, orthogonalization and metric profiles.

Orthogonality is taken with the metric evaluated at the FIRST vector:
``v1 ⊥ v2`` iff ``g(v1)(v1, v2) = 0``.  A list ``e_1..e_m`` is an orthogonal
set iff ``g(e_i)(e_i, e_j) = 0`` for all ``i < j``; with this convention the
contracted profile ``G_kl = g(e_k)(e_k, e_l)`` of an orthonormal basis is
lower triangular with unit (absolute) diagonal, and the entries below the
diagonal are unconstrained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .derivatives import metric_at, metrics_at
from .errors import (
    DimensionMismatch,
    IsotropicPivot,
    NotOrthogonalSet,
    NotOrthonormalBasis,
    SingularInput,
)
from .norms import NormModel, as_vector, evaluate_F2

PIVOT_TOL = 1e-10
ORTHO_TOL = 1e-8
PROFILE_TOL = {"analytic": 1e-8, "hyperdual": 1e-8, "fd": 1e-5}


@dataclass(frozen=True, eq=False)
class Basis:
    """Ordered basis, one vector per row."""

    vectors: np.ndarray
    signature: tuple[int, ...] | None = None
    order: tuple[int, ...] | None = None

    def __post_init__(self):
        e = np.array(self.vectors, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 2:
            raise SingularInput(f"basis must be an n x n matrix with n >= 2, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise SingularInput("basis has non-finite entries")
        scale = float(np.prod(np.linalg.norm(e, axis=1)))
        if scale == 0.0 or abs(np.linalg.det(e)) <= 1e-10 * scale:
            raise SingularInput("basis vectors are linearly dependent")
        e.setflags(write=False)
        object.__setattr__(self, "vectors", e)

    @classmethod
    def standard(cls, n: int) -> "Basis":
        return cls(np.eye(n))

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return self.dimension

    def __getitem__(self, k: int) -> np.ndarray:
        return self.vectors[k]

    def __iter__(self):
        return iter(self.vectors)


def _as_basis(basis) -> Basis:
    return basis if isinstance(basis, Basis) else Basis(basis)


def scalar_product(model: NormModel, direction, x, y, method: str = "auto") -> float:
    """g(direction)(x, y)."""
    g = metric_at(model, direction, method).g
    return float(np.asarray(x, dtype=float) @ g @ np.asarray(y, dtype=float))


def is_orthogonal(model: NormModel, v1, v2, tol: float = ORTHO_TOL, method: str = "auto") -> bool:
    """True iff |g(v1)(v1, v2)| <= tol·(1 + |v1||v2|); not symmetric in its arguments."""
    v1 = as_vector(v1, model.dimension)
    v2 = as_vector(v2, model.dimension)
    value = scalar_product(model, v1, v1, v2, method)
    return abs(value) <= tol * (1.0 + np.linalg.norm(v1) * np.linalg.norm(v2))


def _is_isotropic(model: NormModel, v: np.ndarray, pivot_tol: float) -> tuple[bool, float]:
    f2 = evaluate_F2(model, v)
    return abs(f2) <= pivot_tol * float(v @ v), f2


def orthogonalize(model: NormModel, basis, reorder: bool = False, method: str = "auto",
                  pivot_tol: float = PIVOT_TOL) -> Basis:
    """Orthogonalize in input order: e_{m+1} = e'_{m+1} + sum_{s<=m} a^s e_s.

    The coefficients make every earlier e_k orthogonal to e_{m+1}.  Their
    system has matrix g(e_k)(e_k, e_s), lower triangular with diagonal F²(e_k),
    so it is solved by forward substitution.  Isotropic pivots raise
    :class:`IsotropicPivot` unless ``reorder`` is set, in which case the
    remaining input vector whose projection has the largest |F²| relative to
    its Euclidean length is swapped in.
    """
    src = _as_basis(basis)
    n = src.dimension
    if n != model.dimension:
        raise DimensionMismatch(f"basis dimension {n} != norm dimension {model.dimension}")
    remaining = list(range(n))
    out: list[np.ndarray] = []
    covectors: list[np.ndarray] = []  # g(e_k) e_k
    order: list[int] = []

    def project(w: np.ndarray) -> np.ndarray:
        if not out:
            return w.copy()
        E = np.array(out)
        C = np.array(covectors)
        lower = C @ E.T
        coeff = solve_triangular(lower, -(C @ w), lower=True, check_finite=True)
        return w + coeff @ E

    for m in range(n):
        cand = project(src.vectors[remaining[0]])
        iso, _ = _is_isotropic(model, cand, pivot_tol)
        pick = 0
        if iso and reorder:
            best = -1.0
            for pos, j in enumerate(remaining):
                c = cand if pos == 0 else project(src.vectors[j])
                ratio = abs(evaluate_F2(model, c)) / float(c @ c)
                if ratio > best:
                    best, pick, best_vec = ratio, pos, c
            cand = best_vec
            iso, _ = _is_isotropic(model, cand, pivot_tol)
        if iso:
            raise IsotropicPivot(
                f"vector {m} of the orthogonalized basis is isotropic (F² ~ 0); "
                "enable pivot reordering or change the input order"
            )
        order.append(remaining.pop(pick))
        out.append(cand)
        covectors.append(metric_at(model, cand, method).g @ cand)
    return Basis(np.array(out), order=tuple(order) if reorder else None)


def normalize(model: NormModel, basis, pivot_tol: float = PIVOT_TOL) -> Basis:
    """Scale each vector to |F²| = 1, keeping and reporting the sign of F²."""
    src = _as_basis(basis)
    rows, signs = [], []
    for k, e in enumerate(src.vectors):
        iso, f2 = _is_isotropic(model, e, pivot_tol)
        if iso:
            raise IsotropicPivot(f"cannot normalize isotropic vector {k}")
        rows.append(e / np.sqrt(abs(f2)))
        signs.append(1 if f2 > 0 else -1)
    return Basis(np.array(rows), signature=tuple(signs), order=src.order)


def orthonormalize(model: NormModel, basis, reorder: bool = False, method: str = "auto") -> Basis:
    return normalize(model, orthogonalize(model, basis, reorder=reorder, method=method))


@dataclass
class MetricProfile:
    """Metric matrices at every basis direction and their contraction G."""

    P: np.ndarray
    G: np.ndarray
    method: str
    basis: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.G.shape[0]

    @property
    def signature(self) -> tuple[int, ...]:
        return tuple(1 if d > 0 else -1 for d in np.diag(self.G))

    @property
    def indefinite(self) -> bool:
        return any(s < 0 for s in self.signature)

    @property
    def upper_defect(self) -> float:
        """max_{k<l} |G_kl|."""
        iu = np.triu_indices(self.dimension, 1)
        return float(np.abs(self.G[iu]).max())

    @property
    def diagonal_defect(self) -> float:
        """max_k ||G_kk| - 1|; equals max_k |G_kk - 1| for positive diagonals."""
        return float(np.abs(np.abs(np.diag(self.G)) - 1.0).max())

    @property
    def lower_entries(self) -> np.ndarray:
        return self.G[np.tril_indices(self.dimension, -1)]

    def default_tol(self) -> float:
        return PROFILE_TOL.get(self.method, 1e-8)

    def is_orthonormal(self, tol: float | None = None) -> bool:
        tol = self.default_tol() if tol is None else tol
        return self.upper_defect <= tol and self.diagonal_defect <= tol

    def require_orthonormal(self, tol: float | None = None) -> None:
        tol = self.default_tol() if tol is None else tol
        if not self.is_orthonormal(tol):
            raise NotOrthonormalBasis(
                f"profile is not orthonormal: upper defect {self.upper_defect:.3e}, "
                f"diagonal defect {self.diagonal_defect:.3e}, tolerance {tol:.1e}"
            )


def metric_profile(model: NormModel, basis, method: str = "auto") -> MetricProfile:
    """P[k] = g(e_k) and G_kl = g(e_k)(e_k, e_l)."""
    e = _as_basis(basis).vectors
    if e.shape[1] != model.dimension:
        raise DimensionMismatch(f"basis dimension {e.shape[1]} != norm dimension {model.dimension}")
    for k, v in enumerate(e):
        metric_at(model, v, method)  # admissibility and rank check per direction
    P = metrics_at(model, e, method)
    G = np.einsum("ki,kij,lj->kl", e, P, e)
    route = method if method != "auto" else ("analytic" if model.has_analytic_metric else "hyperdual")
    return MetricProfile(P=P, G=G, method=route, basis=e)


def check_linear_independence(model: NormModel, vectors, tol: float = ORTHO_TOL,
                              method: str = "auto", pivot_tol: float = PIVOT_TOL) -> bool:
    """Independence of an orthogonal set by successive contraction.

    Contracting sum a^k e_k = 0 with g(e_1)(e_1, .) isolates a^1, then a^2,
    and so on; the set is independent iff every diagonal entry g(e_k)(e_k, e_k)
    of that triangular system is nonzero.
    """
    vecs = [as_vector(v, model.dimension) for v in vectors]
    if not vecs:
        return True
    if len(vecs) > model.dimension:
        raise DimensionMismatch(f"{len(vecs)} vectors cannot be independent in dimension {model.dimension}")
    rows = np.array(vecs)
    cov = np.array([metric_at(model, v, method).g @ v for v in rows])
    G = cov @ rows.T
    norms = np.linalg.norm(rows, axis=1)
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if abs(G[i, j]) > tol * (1.0 + norms[i] * norms[j]):
                raise NotOrthogonalSet(
                    f"vector {i} is not orthogonal to vector {j}: g(e_{i})(e_{i}, e_{j}) = {G[i, j]:.3e}"
                )
    return bool(np.all(np.abs(np.diag(G)) > pivot_tol * norms**2))


def span_defect(original, derived) -> float:
    """Largest relative residual of projecting each leading block onto the other's span."""
    a = np.asarray(original, dtype=float)
    b = np.asarray(derived, dtype=float)
    worst = 0.0
    for m in range(1, a.shape[0] + 1):
        for x, y in ((a[:m], b[:m]), (b[:m], a[:m])):
            q, _ = np.linalg.qr(x.T)
            resid = y.T - q @ (q.T @ y.T)
            rel = np.linalg.norm(resid, axis=0) / np.linalg.norm(y.T, axis=0)
            worst = max(worst, float(rel.max()))
    return worst
