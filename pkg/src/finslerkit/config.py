"""JSON space configuration: norm block, basis block, tolerances, sweep settings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .derivatives import IDENTITY_TOL, METHODS
from .errors import FinslerError
from .norms import (
    Euclidean,
    MthRoot,
    NormModel,
    PseudoEuclidean,
    Randers,
    custom_from_expression,
)
from .ortho import Basis

DEFAULT_TOLERANCES = {
    "identity_hyperdual": IDENTITY_TOL["hyperdual"],
    "identity_fd": IDENTITY_TOL["fd"],
    "homogeneity": 1e-10,
    "orthonormal": 1e-8,
    "span": 1e-8,
    "rank": 1e-8,
    "residual": 1e-8,
    "cartan": 1e-6,
    "angle": 1e-6,
    "min_order": 1.9,
    "bracket": 1e-10,
}


class ConfigError(Exception):
    """Configuration problem, addressed by line/column or by field path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


@dataclass
class SpaceConfig:
    norm: NormModel
    basis: Basis
    method: str = "auto"
    seed: int = 0
    samples: int = 100
    directions: np.ndarray | None = None
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    orthonormalize: bool = False
    reorder: bool = False
    raw: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return self.norm.dimension


def _matrix(value, where: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"expected a numeric array ({exc})") from None
    if shape is not None and arr.shape != shape:
        raise ConfigError(where, f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(where, "entries must be finite")
    return arr


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"{where}.{key}", "missing required field")
    return block[key]


def parse_norm(block: Any, dimension: int | None) -> NormModel:
    where = "norm"
    if not isinstance(block, dict):
        raise ConfigError(where, "expected an object with a 'kind' field")
    kind = _require(block, "kind", where)
    n = block.get("dimension", dimension)
    try:
        if kind == "euclidean":
            if n is None:
                raise ConfigError(f"{where}.dimension", "missing required field")
            return Euclidean(int(n))
        if kind == "pseudo_euclidean":
            sig = _matrix(_require(block, "signature", where), f"{where}.signature")
            if sig.ndim != 1:
                raise ConfigError(f"{where}.signature", "expected a list of +1/-1")
            return PseudoEuclidean(tuple(sig))
        if kind == "randers":
            beta = _matrix(_require(block, "beta", where), f"{where}.beta")
            if beta.ndim != 1:
                raise ConfigError(f"{where}.beta", "expected a vector")
            m = beta.size
            alpha = _matrix(block.get("alpha", np.eye(m).tolist()), f"{where}.alpha", (m, m))
            return Randers(alpha, beta)
        if kind == "mth_root":
            if "tensor" in block:
                return MthRoot.from_tensor(_matrix(block["tensor"], f"{where}.tensor"))
            order = _require(block, "order", where)
            if n is None:
                raise ConfigError(f"{where}.dimension", "missing required field")
            terms = _require(block, "terms", where)
            if not isinstance(terms, list):
                raise ConfigError(f"{where}.terms", "expected a list of [coefficient, [indices]]")
            parsed = []
            for i, t in enumerate(terms):
                if not (isinstance(t, list) and len(t) == 2 and isinstance(t[1], list)):
                    raise ConfigError(f"{where}.terms[{i}]", "expected [coefficient, [indices]]")
                parsed.append((float(t[0]), t[1]))
            return MthRoot(int(order), int(n), parsed)
        if kind == "custom":
            expr = _require(block, "expression", where)
            if n is None:
                raise ConfigError(f"{where}.dimension", "missing required field")
            return custom_from_expression(int(n), str(expr), name=str(block.get("name", "custom")))
    except FinslerError as exc:
        raise ConfigError(where, str(exc)) from None
    except SyntaxError as exc:
        raise ConfigError(f"{where}.expression", f"invalid expression: {exc.msg}") from None
    raise ConfigError(f"{where}.kind", f"unknown norm kind {kind!r}")


def parse_config(data: Any) -> SpaceConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    dimension = data.get("dimension")
    if dimension is not None and (not isinstance(dimension, int) or dimension < 2):
        raise ConfigError("dimension", "expected an integer >= 2")
    norm = parse_norm(_require(data, "norm", "<root>"), dimension)
    n = norm.dimension
    if dimension is not None and dimension != n:
        raise ConfigError("dimension", f"declared {dimension} but the norm has dimension {n}")
    if "basis" in data:
        rows = _matrix(data["basis"], "basis", (n, n))
        try:
            basis = Basis(rows)
        except FinslerError as exc:
            raise ConfigError("basis", str(exc)) from None
    else:
        basis = Basis.standard(n)
    method = data.get("method", "auto")
    if method not in METHODS:
        raise ConfigError("method", f"expected one of {METHODS}, got {method!r}")
    tolerances = dict(DEFAULT_TOLERANCES)
    tol_block = data.get("tolerances", {})
    if not isinstance(tol_block, dict):
        raise ConfigError("tolerances", "expected an object")
    for key, value in tol_block.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}", f"unknown tolerance; expected one of {sorted(DEFAULT_TOLERANCES)}")
        if not isinstance(value, (int, float)) or value < 0:
            raise ConfigError(f"tolerances.{key}", "expected a non-negative number")
        tolerances[key] = float(value)
    directions = None
    if "directions" in data:
        directions = _matrix(data["directions"], "directions")
        if directions.ndim != 2 or directions.shape[1] != n:
            raise ConfigError("directions", f"expected a list of {n}-vectors")
    seed = data.get("seed", 0)
    samples = data.get("samples", 100)
    for key, value in (("seed", seed), ("samples", samples)):
        if not isinstance(value, int) or value < 0:
            raise ConfigError(key, "expected a non-negative integer")
    return SpaceConfig(
        norm=norm, basis=basis, method=method, seed=seed, samples=samples,
        directions=directions, tolerances=tolerances,
        orthonormalize=bool(data.get("orthonormalize", False)),
        reorder=bool(data.get("reorder", False)), raw=data,
    )


def load_config(path: str | Path) -> SpaceConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return parse_config(data)
