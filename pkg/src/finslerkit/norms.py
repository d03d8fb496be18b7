"""Minkowski norms represented through their square F²(v).

Every model exposes :meth:`NormModel.f2`, which accepts either a float array
whose last axis holds the coordinates (any leading batch shape) or a
:class:`~finslerkit.jet.Jet` with the same layout.  Working with F² instead of
F keeps indefinite norms smooth across the light cone.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionMismatch, InvalidNorm, NonAdmissibleDirection
from .jet import Jet


def as_vector(v, n: int | None = None) -> np.ndarray:
    """Validate a single coordinate vector and return it as a float array."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise NonAdmissibleDirection(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.size < 2:
        raise NonAdmissibleDirection("vectors must have dimension >= 2")
    if n is not None and arr.size != n:
        raise DimensionMismatch(f"expected dimension {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NonAdmissibleDirection(f"non-finite coordinates: {arr}")
    return arr


def _value(x) -> np.ndarray:
    return x.c0 if isinstance(x, Jet) else np.asarray(x)


class NormModel:
    """Base class for a positively homogeneous squared norm on R^n."""

    kind: str = "abstract"
    dimension: int
    #: whether F² is defined (and returned) at the origin
    defined_at_zero: bool = True

    def f2(self, v):
        raise NotImplementedError

    #: whether :meth:`analytic_metric` is implemented
    has_analytic_metric: bool = False

    def analytic_metric(self, v: np.ndarray) -> np.ndarray:
        """Closed-form g(v)."""
        raise NotImplementedError(f"{self.kind} norm has no analytic metric")

    @property
    def constant_metric(self) -> bool:
        return False

    def to_config(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Euclidean(NormModel):
    dimension: int
    has_analytic_metric = True
    kind: str = field(default="euclidean", init=False)

    def __post_init__(self):
        if self.dimension < 2:
            raise InvalidNorm("dimension must be >= 2")

    def f2(self, v):
        return (v * v).sum(-1)

    def analytic_metric(self, v):
        return np.eye(self.dimension)

    @property
    def constant_metric(self) -> bool:
        return True

    def to_config(self):
        return {"kind": self.kind, "dimension": self.dimension}


@dataclass(frozen=True)
class PseudoEuclidean(NormModel):
    """Diagonal quadratic form with entries ±1."""

    signature: tuple[float, ...]
    has_analytic_metric = True
    kind: str = field(default="pseudo_euclidean", init=False)

    def __post_init__(self):
        sig = tuple(float(s) for s in self.signature)
        if len(sig) < 2:
            raise InvalidNorm("signature must have at least 2 entries")
        if any(s not in (-1.0, 1.0) for s in sig):
            raise InvalidNorm(f"signature entries must be +1 or -1, got {sig}")
        object.__setattr__(self, "signature", sig)

    @property
    def dimension(self) -> int:
        return len(self.signature)

    def f2(self, v):
        return (v * v * np.array(self.signature)).sum(-1)

    def analytic_metric(self, v):
        return np.diag(self.signature)

    @property
    def constant_metric(self) -> bool:
        return True

    def to_config(self):
        return {"kind": self.kind, "signature": list(self.signature)}


@dataclass(frozen=True, eq=False)
class Randers(NormModel):
    """F(v) = sqrt(v·A·v) + b·v with A positive definite and |b|_A < 1."""

    alpha: np.ndarray
    beta: np.ndarray
    has_analytic_metric = True
    kind: str = field(default="randers", init=False)

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        b = np.array(self.beta, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise InvalidNorm(f"alpha must be a square matrix of size >= 2, got {a.shape}")
        if b.shape != (a.shape[0],):
            raise InvalidNorm(f"beta must have shape ({a.shape[0]},), got {b.shape}")
        if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
            raise InvalidNorm("alpha must be symmetric")
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise InvalidNorm("alpha must be positive definite") from exc
        b_norm = float(np.sqrt(b @ np.linalg.solve(a, b)))
        if b_norm >= 1.0:
            raise InvalidNorm(f"alpha-norm of beta must be < 1, got {b_norm:.17g}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def dimension(self) -> int:
        return self.alpha.shape[0]

    @property
    def beta_norm(self) -> float:
        return float(np.sqrt(self.beta @ np.linalg.solve(self.alpha, self.beta)))

    def f2(self, v):
        a2 = (v * (v @ self.alpha)).sum(-1)
        f = np.sqrt(a2) + v @ self.beta
        return f * f

    def analytic_metric(self, v):
        v = np.asarray(v, dtype=float)
        av = self.alpha @ v
        a = float(np.sqrt(v @ av))
        ell = av / a
        f = a + float(self.beta @ v)
        w = ell + self.beta
        return (f / a) * (self.alpha - np.outer(ell, ell)) + np.outer(w, w)

    def to_config(self):
        return {"kind": self.kind, "alpha": self.alpha.tolist(), "beta": self.beta.tolist()}


class MthRoot(NormModel):
    """F(v) = (T_{i1..im} v^i1 ... v^im)^(1/m) for a coefficient tensor T.

    The tensor is stored as a list of monomials (coefficient, sorted index
    tuple) so that symmetric tensors and sparse term lists give the same model.
    Directions where the contraction is not positive are rejected.
    """

    kind = "mth_root"
    defined_at_zero = False

    def __init__(self, order: int, dimension: int, terms):
        if int(order) != order or order < 3:
            raise InvalidNorm(f"root order must be an integer >= 3, got {order}")
        if dimension < 2:
            raise InvalidNorm("dimension must be >= 2")
        self.order = int(order)
        self.dimension = int(dimension)
        merged: dict[tuple[int, ...], float] = {}
        for coeff, idx in terms:
            idx = tuple(sorted(int(i) for i in idx))
            if len(idx) != self.order:
                raise InvalidNorm(f"monomial {idx} does not have degree {self.order}")
            if any(i < 0 or i >= self.dimension for i in idx):
                raise InvalidNorm(f"monomial {idx} has an index outside 0..{self.dimension - 1}")
            merged[idx] = merged.get(idx, 0.0) + float(coeff)
        self.terms = tuple((c, idx) for idx, c in sorted(merged.items()) if c != 0.0)
        if not self.terms:
            raise InvalidNorm("coefficient tensor is identically zero")

    @classmethod
    def from_tensor(cls, tensor) -> "MthRoot":
        t = np.asarray(tensor, dtype=float)
        n = t.shape[0]
        if t.ndim < 3 or any(s != n for s in t.shape):
            raise InvalidNorm(f"coefficient tensor must be n x ... x n with order >= 3, got {t.shape}")
        terms = [(t[idx], idx) for idx in itertools.product(range(n), repeat=t.ndim) if t[idx] != 0.0]
        return cls(t.ndim, n, terms)

    def contraction(self, v):
        total = 0.0
        for coeff, idx in self.terms:
            term = v[..., idx[0]]
            for i in idx[1:]:
                term = term * v[..., i]
            total = term * coeff + total
        return total

    def f2(self, v):
        p = self.contraction(v)
        pv = _value(p)
        if np.any(~(pv > 0)):
            raise NonAdmissibleDirection(
                "coefficient contraction must be positive; direction outside the norm's domain"
            )
        return p ** (2.0 / self.order)

    def to_config(self):
        return {
            "kind": self.kind,
            "order": self.order,
            "dimension": self.dimension,
            "terms": [[c, list(idx)] for c, idx in self.terms],
        }

    def __repr__(self):
        return f"MthRoot(order={self.order}, dimension={self.dimension}, terms={len(self.terms)})"


class Custom(NormModel):
    """User-supplied F² callback.

    The callback receives the coordinates with the component axis FIRST, so
    ``v[0]`` is the first coordinate (possibly an array over a batch or a
    :class:`Jet`).  It must be built from arithmetic and numpy ufuncs
    (``np.sqrt``, ``np.exp``, ...) to support the exact-derivative path.
    """

    kind = "custom"
    defined_at_zero = False

    def __init__(self, dimension: int, func: Callable[[Any], Any], name: str = "custom",
                 source: str | None = None):
        if dimension < 2:
            raise InvalidNorm("dimension must be >= 2")
        self.dimension = int(dimension)
        self.func = func
        self.name = name
        self.source = source

    def f2(self, v):
        if isinstance(v, Jet):
            return self.func(v.moveaxis(-1, 0))
        arr = np.asarray(v, dtype=float)
        out = self.func(np.moveaxis(arr, -1, 0))
        return np.broadcast_to(np.asarray(out, dtype=float), arr.shape[:-1])

    def to_config(self):
        cfg = {"kind": self.kind, "dimension": self.dimension, "name": self.name}
        if self.source is not None:
            cfg["expression"] = self.source
        return cfg

    def __repr__(self):
        return f"Custom(name={self.name!r}, dimension={self.dimension})"


_EXPR_NAMESPACE = {
    "sqrt": np.sqrt, "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
    "abs": np.absolute, "square": np.square, "pi": np.pi,
}


def custom_from_expression(dimension: int, expression: str, name: str = "custom") -> Custom:
    """Build a Custom norm from an arithmetic expression in ``v[i]`` or ``x1..xn``.

    Only arithmetic, the functions sqrt/exp/log/sin/cos/abs/square and the
    constant pi are available; builtins are disabled.
    """
    code = compile(expression, f"<{name}>", "eval")
    allowed = set(_EXPR_NAMESPACE) | {"v"} | {f"x{i + 1}" for i in range(dimension)}
    unknown = set(code.co_names) - allowed
    if unknown:
        raise InvalidNorm(f"expression uses unknown names: {sorted(unknown)}")

    def func(v):
        scope = dict(_EXPR_NAMESPACE)
        scope["v"] = v
        for i in range(dimension):
            scope[f"x{i + 1}"] = v[i]
        return eval(code, {"__builtins__": {}}, scope)

    return Custom(dimension, func, name=name, source=expression)


def _check_direction(model: NormModel, v, allow_zero: bool) -> np.ndarray:
    arr = as_vector(v, model.dimension)
    if not allow_zero and not np.any(arr):
        raise NonAdmissibleDirection("zero vector is not an admissible direction")
    return arr


def evaluate_F2(model: NormModel, v) -> float:
    """Squared norm of a single vector; may be negative for indefinite norms."""
    arr = _check_direction(model, v, allow_zero=model.defined_at_zero)
    value = float(model.f2(arr))
    if not np.isfinite(value):
        raise NonAdmissibleDirection(f"F² is not finite at {arr}")
    return value


def signed_length(model: NormModel, v) -> float:
    """sign(F²)·sqrt(|F²|)."""
    f2 = evaluate_F2(model, v)
    return float(np.sign(f2) * np.sqrt(abs(f2)))


def homogeneity_residual(model: NormModel, v, lam: float) -> float:
    """|F²(λv) − λ²F²(v)| / max(1, |F²(v)|) for λ > 0."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    arr = _check_direction(model, v, allow_zero=False)
    base = evaluate_F2(model, arr)
    scaled = evaluate_F2(model, lam * arr)
    return abs(scaled - lam * lam * base) / max(1.0, abs(base))


def sample_directions(model: NormModel, count: int, rng: np.random.Generator,
                      min_abs_f2: float = 1e-6, max_tries: int = 10000) -> np.ndarray:
    """Uniform unit-sphere directions, rejecting near-isotropic or out-of-domain ones."""
    n = model.dimension
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"could not draw {count} admissible directions in {max_tries} tries")
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            continue
        v = v / norm
        try:
            f2 = evaluate_F2(model, v)
        except NonAdmissibleDirection:
            continue
        if abs(f2) < min_abs_f2:
            continue
        out.append(v)
    return np.array(out).reshape(count, n)
