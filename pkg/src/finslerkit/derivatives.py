"""Derivatives of F², the metric tensor g and the Cartan tensor C.

Two independent derivative routes are provided:

* ``"hyperdual"``: exact truncated-Taylor arithmetic (:mod:`finslerkit.jet`);
* ``"fd"``: central finite differences of F² evaluated on plain floats.

Constant-metric and Randers norms additionally have an ``"analytic"`` metric.
``"auto"`` picks analytic when available and hyperdual otherwise.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NonAdmissibleDirection, SingularMetric
from .jet import Jet
from .norms import NormModel, as_vector

log = logging.getLogger(__name__)

METHODS = ("auto", "analytic", "hyperdual", "fd")

#: relative singular-value floor for the nonsingularity check
RANK_TOL = 1e-8
#: default identity tolerances per derivative route
IDENTITY_TOL = {"analytic": 1e-10, "hyperdual": 1e-10, "fd": 1e-6}

# Finite-difference steps, relative to max(1, |v|).
FD_STEP_FIRST = 1e-5
FD_STEP_SECOND = 1e-4
FD_STEP_THIRD = 2e-3


@dataclass
class Derivatives:
    """F² and its derivative tensors at a batch of points (leading axis)."""

    points: np.ndarray
    f2: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray | None = None
    method: str = "hyperdual"


@dataclass
class MetricTensor:
    direction: np.ndarray
    g: np.ndarray
    source: str
    asymmetry: float = 0.0

    @property
    def dimension(self) -> int:
        return self.g.shape[0]

    def __call__(self, x, y) -> float:
        """Bilinear form g(direction)(x, y)."""
        return float(np.asarray(x) @ self.g @ np.asarray(y))


@dataclass
class CartanTensor:
    direction: np.ndarray
    C: np.ndarray
    source: str
    asymmetry: float = 0.0

    def contraction_residual(self) -> float:
        """max_{j,k} |v^i C_ijk(v)|."""
        return float(np.abs(np.einsum("i,ijk->jk", self.direction, self.C)).max())


@dataclass
class IdentityReport:
    name: str
    max_residual: float
    samples: int
    tolerance: float
    method: str
    passed: bool = field(init=False)
    worst_sample: int = -1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.max_residual <= self.tolerance)


# ---------------------------------------------------------------------------
# helpers


def _resolve(model: NormModel, method: str, need_third: bool = False) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown derivative method {method!r}; expected one of {METHODS}")
    if method == "auto":
        return "analytic" if model.has_analytic_metric and not need_third else "hyperdual"
    return method


def _batch(model: NormModel, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != model.dimension:
        raise NonAdmissibleDirection(
            f"expected points of dimension {model.dimension}, got shape {pts.shape}"
        )
    if not np.all(np.isfinite(pts)):
        raise NonAdmissibleDirection("non-finite coordinates")
    if np.any(~pts.any(axis=1)):
        raise NonAdmissibleDirection("zero vector is not an admissible direction")
    return pts


def _symmetrize3(t: np.ndarray) -> tuple[np.ndarray, float]:
    perms = list(itertools.permutations(range(3)))
    axes = [tuple(t.ndim - 3 + p for p in perm) for perm in perms]
    lead = tuple(range(t.ndim - 3))
    stacked = [np.transpose(t, lead + ax) for ax in axes]
    avg = sum(stacked) / len(stacked)
    asym = max(float(np.abs(s - avg).max()) for s in stacked) if t.size else 0.0
    return avg, asym


def _symmetrize2(m: np.ndarray) -> tuple[np.ndarray, float]:
    mt = np.swapaxes(m, -1, -2)
    return 0.5 * (m + mt), float(np.abs(m - mt).max()) if m.size else 0.0


def _steps(points: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(1.0, np.linalg.norm(points, axis=1))


# ---------------------------------------------------------------------------
# derivative routes


def hyperdual_derivatives(model: NormModel, points, order: int = 3) -> Derivatives:
    """Exact derivatives of F² up to ``order`` via truncated Taylor arithmetic."""
    pts = _batch(model, points)
    out = model.f2(Jet.seed(pts, order=order))
    if not isinstance(out, Jet) or out.shape != pts.shape[:1]:
        raise TypeError("F² must be built from jet-aware arithmetic to use the hyperdual route")
    f2 = out.c0
    if not np.all(np.isfinite(f2)):
        raise NonAdmissibleDirection("F² is not finite at some sample point")
    return Derivatives(
        points=pts,
        f2=f2,
        grad=out.c1,
        hess=out.c2 if order >= 2 else None,
        third=out.c3 if order >= 3 else None,
        method="hyperdual",
    )


def _eval_f2(model: NormModel, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(model.f2(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonAdmissibleDirection("F² is not finite inside the finite-difference stencil")
    return vals


def fd_gradient(model: NormModel, pts: np.ndarray, rel: float = FD_STEP_FIRST) -> np.ndarray:
    b, n = pts.shape
    h = _steps(pts, rel)
    eye = np.eye(n)
    shifts = h[:, None, None] * eye[None, :, :]  # (b, n, n)
    plus = _eval_f2(model, (pts[:, None, :] + shifts).reshape(-1, n)).reshape(b, n)
    minus = _eval_f2(model, (pts[:, None, :] - shifts).reshape(-1, n)).reshape(b, n)
    return (plus - minus) / (2.0 * h[:, None])


def fd_hessian(model: NormModel, pts: np.ndarray, rel: float = FD_STEP_SECOND) -> np.ndarray:
    """Composition of two central differences; symmetric by construction of the stencil."""
    b, n = pts.shape
    h = _steps(pts, rel)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=2)))  # (4, 2)
    eye = np.eye(n)
    # offsets[s, i, j] = s0 e_i + s1 e_j
    offsets = signs[:, 0, None, None, None] * eye[None, :, None, :] + signs[:, 1, None, None, None] * eye[None, None, :, :]
    pts_all = pts[:, None, None, None, :] + h[:, None, None, None, None] * offsets[None]
    vals = _eval_f2(model, pts_all.reshape(-1, n)).reshape(b, 4, n, n)
    weights = signs.prod(axis=1)
    return np.einsum("s,bsij->bij", weights, vals) / (4.0 * h[:, None, None] ** 2)


def _fd_third_raw(model: NormModel, pts: np.ndarray, h: np.ndarray) -> np.ndarray:
    b, n = pts.shape
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=3)))  # (8, 3)
    triples = [t for t in itertools.combinations_with_replacement(range(n), 3)]
    eye = np.eye(n)
    offs = np.array([[s[0] * eye[i] + s[1] * eye[j] + s[2] * eye[k] for (i, j, k) in triples] for s in signs])
    pts_all = pts[:, None, None, :] + h[:, None, None, None] * offs[None]
    vals = _eval_f2(model, pts_all.reshape(-1, n)).reshape(b, len(signs), len(triples))
    d = np.einsum("s,bst->bt", signs.prod(axis=1), vals) / (8.0 * h[:, None] ** 3)
    out = np.empty((b, n, n, n))
    for t, (i, j, k) in enumerate(triples):
        for p in set(itertools.permutations((i, j, k))):
            out[(slice(None),) + p] = d[:, t]
    return out


def fd_third(model: NormModel, pts: np.ndarray, rel: float = FD_STEP_THIRD) -> np.ndarray:
    """Third derivatives of F² from a cubic central stencil, Richardson-extrapolated."""
    h = _steps(pts, rel)
    coarse = _fd_third_raw(model, pts, 2.0 * h)
    fine = _fd_third_raw(model, pts, h)
    return (4.0 * fine - coarse) / 3.0


def fd_derivatives(model: NormModel, points, order: int = 3,
                   steps: tuple[float, float, float] | None = None) -> Derivatives:
    """Central finite-difference derivatives of F² up to ``order``."""
    pts = _batch(model, points)
    s1, s2, s3 = steps or (FD_STEP_FIRST, FD_STEP_SECOND, FD_STEP_THIRD)
    return Derivatives(
        points=pts,
        f2=_eval_f2(model, pts),
        grad=fd_gradient(model, pts, s1),
        hess=fd_hessian(model, pts, s2) if order >= 2 else None,
        third=fd_third(model, pts, s3) if order >= 3 else None,
        method="fd",
    )


def derivatives(model: NormModel, points, method: str = "hyperdual", order: int = 3) -> Derivatives:
    method = _resolve(model, method, need_third=True)
    if method == "fd":
        return fd_derivatives(model, points, order)
    if method == "analytic":
        raise ValueError("analytic route only provides metrics; use hyperdual or fd")
    return hyperdual_derivatives(model, points, order)


# ---------------------------------------------------------------------------
# metric and Cartan tensors


def check_nonsingular(g: np.ndarray, rank_tol: float = RANK_TOL) -> None:
    s = np.linalg.svd(g, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= rank_tol * s[0]:
        raise SingularMetric(
            f"metric is numerically singular: smallest/largest singular value = "
            f"{(s[-1] / s[0]) if s[0] else 0.0:.3e}"
        )


def metric_at(model: NormModel, v, method: str = "auto", rank_tol: float = RANK_TOL) -> MetricTensor:
    """g_ij(v) = ½ ∂²F²/∂v^i∂v^j."""
    vec = as_vector(v, model.dimension)
    if not np.any(vec):
        raise NonAdmissibleDirection("metric is undefined at the zero vector")
    route = _resolve(model, method)
    if route == "analytic":
        g = model.analytic_metric(vec)
        if g is None:
            raise ValueError(f"{model.kind} norm has no analytic metric")
        raw = np.asarray(g, dtype=float)
    elif route == "hyperdual":
        raw = 0.5 * hyperdual_derivatives(model, vec, order=2).hess[0]
    else:
        raw = 0.5 * fd_hessian(model, _batch(model, vec))[0]
    g, asym = _symmetrize2(raw)
    if asym > 1e-12 * max(1.0, float(np.abs(raw).max())):
        log.debug("metric asymmetry %.3e before symmetrization at %s", asym, vec)
    if not np.all(np.isfinite(g)):
        raise NonAdmissibleDirection(f"metric is not finite at {vec}")
    check_nonsingular(g, rank_tol)
    return MetricTensor(direction=vec, g=g, source=route, asymmetry=asym)


def metrics_at(model: NormModel, points, method: str = "auto") -> np.ndarray:
    """Stack of metric matrices at several directions (no rank check)."""
    pts = _batch(model, points)
    route = _resolve(model, method)
    if route == "analytic":
        return np.array([model.analytic_metric(p) for p in pts])
    if route == "hyperdual":
        raw = 0.5 * hyperdual_derivatives(model, pts, order=2).hess
    else:
        raw = 0.5 * fd_hessian(model, pts)
    return _symmetrize2(raw)[0]


def cartan_at(model: NormModel, v, method: str = "auto") -> CartanTensor:
    """C_ijk(v) = ½ ∂g_ij/∂v^k = ¼ ∂³F²/∂v^i∂v^j∂v^k."""
    vec = as_vector(v, model.dimension)
    if not np.any(vec):
        raise NonAdmissibleDirection("Cartan tensor is undefined at the zero vector")
    route = _resolve(model, method)
    n = model.dimension
    if route == "analytic":
        if not model.constant_metric:
            route = "hyperdual"
        else:
            return CartanTensor(direction=vec, C=np.zeros((n, n, n)), source="analytic")
    if route == "hyperdual":
        raw = 0.25 * hyperdual_derivatives(model, vec, order=3).third[0]
    else:
        raw = 0.25 * fd_third(model, _batch(model, vec))[0]
    c, asym = _symmetrize3(raw)
    return CartanTensor(direction=vec, C=c, source=route, asymmetry=asym)


def cartans_at(model: NormModel, points, method: str = "auto") -> np.ndarray:
    pts = _batch(model, points)
    route = _resolve(model, method, need_third=True)
    if route == "fd":
        raw = 0.25 * fd_third(model, pts)
    else:
        raw = 0.25 * hyperdual_derivatives(model, pts, order=3).third
    return _symmetrize3(raw)[0]


# ---------------------------------------------------------------------------
# Euler identities

IDENTITY_NAMES = (
    "euler_degree2",
    "gradient_degree1",
    "metric_contraction",
    "metric_degree0",
)


def identity_residuals(d: Derivatives) -> dict[str, np.ndarray]:
    """Per-sample residuals of the four homogeneity identities."""
    v = d.points
    res = {
        "euler_degree2": np.abs(np.einsum("bi,bi->b", v, d.grad) - 2.0 * d.f2),
        "gradient_degree1": np.abs(np.einsum("bij,bj->bi", d.hess, v) - d.grad).max(axis=1),
        "metric_contraction": np.abs(0.5 * np.einsum("bij,bi,bj->b", d.hess, v, v) - d.f2),
    }
    if d.third is not None:
        # v^k ∂g_ij/∂v^k with g = ½ ∂²F²
        res["metric_degree0"] = np.abs(0.5 * np.einsum("bijk,bk->bij", d.third, v)).reshape(len(v), -1).max(axis=1)
    return res


def check_euler_identities(model: NormModel, samples, method: str = "hyperdual",
                           tol: float | dict | None = None) -> list[IdentityReport]:
    """Evaluate the homogeneity identities on every sample; failures are reported, not raised."""
    route = _resolve(model, method, need_third=True)
    if route == "analytic":
        route = "hyperdual"
    d = derivatives(model, samples, route, order=3)
    res = identity_residuals(d)
    reports = []
    for name in IDENTITY_NAMES:
        r = res[name]
        if isinstance(tol, dict):
            t = float(tol.get(name, IDENTITY_TOL[route]))
        else:
            t = float(IDENTITY_TOL[route] if tol is None else tol)
        worst = int(np.argmax(r))
        rep = IdentityReport(name=name, max_residual=float(r[worst]), samples=len(r),
                             tolerance=t, method=route, worst_sample=worst)
        if name == "euler_degree2":
            # F-level form v^i ∂F/∂v^i − F = (v·∇F² − 2F²) / (2F)
            f = np.sign(d.f2) * np.sqrt(np.abs(d.f2))
            with np.errstate(divide="ignore", invalid="ignore"):
                f_level = np.abs(np.einsum("bi,bi->b", d.points, d.grad) - 2.0 * d.f2) / (2.0 * np.abs(f))
            rep.extra["f_level_max_residual"] = float(np.nanmax(f_level)) if f_level.size else 0.0
        reports.append(rep)
    return reports
