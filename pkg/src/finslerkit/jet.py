"""Truncated multivariate Taylor arithmetic up to third order.

A :class:`Jet` carries a value together with its exact first, second and
third derivative tensors with respect to ``d`` seed variables.  Values may be
batched: ``c0`` has an arbitrary leading shape ``S`` and the derivative
tensors have shapes ``S + (d,)``, ``S + (d, d)`` and ``S + (d, d, d)``.

Arithmetic follows numpy broadcasting over ``S``, so the same expression can
be evaluated on plain arrays or on jets.  ``np.sqrt(jet)`` and friends are
routed through ``__array_ufunc__``.
"""

from __future__ import annotations

import numpy as np

_MAX_ORDER = 3


def _sym3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a_i B_jk + a_j B_ik + a_k B_ij for a of shape (..., d), B of shape (..., d, d)."""
    t = a[..., :, None, None] * b[..., None, :, :]
    return t + np.swapaxes(t, -3, -2) + np.moveaxis(t, -3, -1)


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


class Jet:
    """Value plus exact derivative tensors, truncated at ``order``."""

    __array_priority__ = 1000

    def __init__(self, c0, c1, c2=None, c3=None):
        self.c0 = np.asarray(c0, dtype=float)
        self.c1 = np.asarray(c1, dtype=float)
        self.c2 = None if c2 is None else np.asarray(c2, dtype=float)
        self.c3 = None if c3 is None else np.asarray(c3, dtype=float)
        if self.c3 is not None and self.c2 is None:
            raise ValueError("third-order part requires a second-order part")

    # construction ---------------------------------------------------------

    @classmethod
    def seed(cls, x, order: int = 2) -> "Jet":
        """Independent variables at ``x``; the last axis of ``x`` indexes them.

        ``x`` may be batched with shape ``B + (d,)``; every batch row is seeded
        with its own identity gradient.
        """
        if not 1 <= order <= _MAX_ORDER:
            raise ValueError(f"order must be 1..{_MAX_ORDER}, got {order}")
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        c1 = np.broadcast_to(np.eye(d), x.shape + (d,)).copy()
        c2 = np.zeros(x.shape + (d, d)) if order >= 2 else None
        c3 = np.zeros(x.shape + (d, d, d)) if order >= 3 else None
        return cls(x, c1, c2, c3)

    @classmethod
    def constant(cls, value, d: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        shape = value.shape
        return cls(
            value,
            np.zeros(shape + (d,)),
            np.zeros(shape + (d, d)) if order >= 2 else None,
            np.zeros(shape + (d, d, d)) if order >= 3 else None,
        )

    # introspection --------------------------------------------------------

    @property
    def order(self) -> int:
        if self.c3 is not None:
            return 3
        return 2 if self.c2 is not None else 1

    @property
    def nvars(self) -> int:
        return self.c1.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.c0.shape

    @property
    def ndim(self) -> int:
        return self.c0.ndim

    def __len__(self) -> int:
        return len(self.c0)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order})"

    def _parts(self):
        return [c for c in (self.c0, self.c1, self.c2, self.c3) if c is not None]

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.nvars, self.order)

    @staticmethod
    def _common_order(a: "Jet", b: "Jet") -> int:
        return min(a.order, b.order)

    # indexing / reductions ------------------------------------------------

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is None for k in key):
            raise IndexError("newaxis indexing is not supported on jets")
        parts = [self.c0[key]]
        for extra in range(1, self.order + 1):
            parts.append(getattr(self, f"c{extra}")[key + (slice(None),) * extra])
        return Jet(*parts)

    def sum(self, axis=None) -> "Jet":
        nd = self.ndim
        axes = tuple(range(nd)) if axis is None else tuple(
            a % nd for a in np.atleast_1d(axis)
        )
        return Jet(*(c.sum(axis=axes) for c in self._parts()))

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        shape = np.empty(self.shape).reshape(shape).shape
        d = self.nvars
        return Jet(*(c.reshape(shape + (d,) * k) for k, c in enumerate(self._parts())))

    def moveaxis(self, source: int, destination: int) -> "Jet":
        """Move a batch axis; derivative axes stay trailing."""
        nd = self.ndim
        src, dst = source % nd, destination % nd
        return Jet(*(np.moveaxis(c, src, dst) for c in self._parts()))

    def __matmul__(self, other) -> "Jet":
        """Contract the last batch axis with a constant vector or matrix."""
        if isinstance(other, Jet):
            return (self * other).sum(axis=-1)
        m = np.asarray(other, dtype=float)
        if m.ndim not in (1, 2):
            raise ValueError("jet @ constant supports 1-D or 2-D constants only")
        ax = self.ndim - 1
        out = []
        for c in self._parts():
            moved = np.moveaxis(c, ax, -1) @ m
            out.append(moved if m.ndim == 1 else np.moveaxis(moved, -1, ax))
        return Jet(*out)

    def __rmatmul__(self, other) -> "Jet":
        m = np.asarray(other, dtype=float)
        if m.ndim == 2:
            return self @ m.T
        return self @ m

    # arithmetic -----------------------------------------------------------

    def __neg__(self) -> "Jet":
        return Jet(*(-c for c in self._parts()))

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        k = self._common_order(self, other)
        a, b = self._parts(), other._parts()
        return Jet(*(a[i] + b[i] for i in range(k + 1)))

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(*(c[(...,) + (None,) * k] * p for k, p in enumerate(self._parts())))
        f, g = self, other
        k = self._common_order(f, g)
        f0, g0 = f.c0[..., None], g.c0[..., None]
        h0 = f.c0 * g.c0
        h1 = f0 * g.c1 + g0 * f.c1
        h2 = h3 = None
        if k >= 2:
            f00, g00 = f0[..., None], g0[..., None]
            h2 = f00 * g.c2 + g00 * f.c2 + _outer(f.c1, g.c1) + _outer(g.c1, f.c1)
        if k >= 3:
            f000, g000 = f0[..., None, None], g0[..., None, None]
            h3 = f000 * g.c3 + g000 * f.c3 + _sym3(f.c1, g.c2) + _sym3(g.c1, f.c2)
        return Jet(h0, h1, h2, h3)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, p) -> "Jet":
        if isinstance(p, Jet):
            raise TypeError("jet ** jet is not supported")
        p = float(p)
        if p == 2.0:
            return self * self
        if p == 1.0:
            return self
        if p == 0.0:
            return Jet.constant(np.ones(self.shape), self.nvars, self.order)
        return self.power(p)

    # elementary functions -------------------------------------------------

    def compose(self, d0, d1, d2=None, d3=None) -> "Jet":
        """Chain rule for an elementwise function with derivatives d0..d3 at c0."""
        k = self.order
        f1 = self.c1
        h1 = d1[..., None] * f1
        h2 = h3 = None
        if k >= 2:
            h2 = d2[..., None, None] * _outer(f1, f1) + d1[..., None, None] * self.c2
        if k >= 3:
            h3 = (
                d3[..., None, None, None] * f1[..., :, None, None] * _outer(f1, f1)[..., None, :, :]
                + d2[..., None, None, None] * _sym3(f1, self.c2)
                + d1[..., None, None, None] * self.c3
            )
        return Jet(d0, h1, h2, h3)

    def _term(self, coeff: float, expo: float) -> np.ndarray:
        if coeff == 0.0:
            return np.zeros(self.shape)
        return coeff * self.c0**expo

    def power(self, p: float) -> "Jet":
        x = self.c0
        return self.compose(
            x**p,
            self._term(p, p - 1),
            self._term(p * (p - 1), p - 2),
            self._term(p * (p - 1) * (p - 2), p - 3),
        )

    def sqrt(self) -> "Jet":
        r = np.sqrt(self.c0)
        return self.compose(r, 0.5 / r, -0.25 / r**3, 0.375 / r**5)

    def reciprocal(self) -> "Jet":
        x = self.c0
        return self.compose(1.0 / x, -1.0 / x**2, 2.0 / x**3, -6.0 / x**4)

    def exp(self) -> "Jet":
        e = np.exp(self.c0)
        return self.compose(e, e, e, e)

    def log(self) -> "Jet":
        x = self.c0
        return self.compose(np.log(x), 1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def sin(self) -> "Jet":
        s, c = np.sin(self.c0), np.cos(self.c0)
        return self.compose(s, c, -s, -c)

    def cos(self) -> "Jet":
        s, c = np.sin(self.c0), np.cos(self.c0)
        return self.compose(c, -s, -c, s)

    def __abs__(self) -> "Jet":
        s = np.sign(self.c0)
        z = np.zeros(self.shape)
        return self.compose(np.abs(self.c0), s, z, z)

    # numpy interop --------------------------------------------------------

    _UNARY = {
        np.sqrt: "sqrt",
        np.exp: "exp",
        np.log: "log",
        np.sin: "sin",
        np.cos: "cos",
        np.absolute: "__abs__",
        np.negative: "__neg__",
        np.reciprocal: "reciprocal",
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs.get("out") is not None:
            return NotImplemented
        if ufunc in self._UNARY and len(inputs) == 1:
            return getattr(inputs[0], self._UNARY[ufunc])()
        if ufunc is np.square:
            return inputs[0] * inputs[0]
        if len(inputs) == 2:
            a, b = inputs
            if ufunc is np.add:
                return a + b if isinstance(a, Jet) else b + a
            if ufunc is np.multiply:
                return a * b if isinstance(a, Jet) else b * a
            if ufunc is np.subtract:
                return a - b if isinstance(a, Jet) else b.__rsub__(a)
            if ufunc is np.true_divide:
                return a / b if isinstance(a, Jet) else b.__rtruediv__(a)
            if ufunc is np.power and isinstance(a, Jet):
                return a**b
            if ufunc is np.matmul:
                return a @ b if isinstance(a, Jet) else b.__rmatmul__(a)
        return NotImplemented

    # derivative extraction ------------------------------------------------

    def gradient(self) -> np.ndarray:
        return self.c1

    def hessian(self) -> np.ndarray:
        if self.c2 is None:
            raise ValueError("jet was not seeded to second order")
        return self.c2

    def third(self) -> np.ndarray:
        if self.c3 is None:
            raise ValueError("jet was not seeded to third order")
        return self.c3
