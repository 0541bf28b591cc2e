"""Second-order forward-mode (hyper-dual style) scalars.

A ``Jet2`` carries a value together with its exact gradient and Hessian with
respect to the chart coordinates.  Evaluating a user-supplied metric or field
formula on seeded coordinate jets therefore yields machine-exact first and
second coordinate derivatives, with no truncation error.  Values may be numpy
arrays, so a single evaluation can cover a whole batch of chart points.
"""
from __future__ import annotations

import numpy as np

__all__ = ["Jet2", "seed", "constant", "sin", "cos", "exp", "log", "sqrt"]


class Jet2:
    """Truncated second-order Taylor scalar: value, gradient, Hessian.

    ``v`` has any broadcastable shape, ``g`` appends one axis of length
    ``dim`` and ``h`` two.  Arithmetic follows the usual product/chain rules;
    the Hessian axis pair is kept symmetric by construction.
    """

    __slots__ = ("v", "g", "h")

    def __init__(self, v, g, h):
        self.v = np.asarray(v, dtype=float)
        self.g = np.asarray(g, dtype=float)
        self.h = np.asarray(h, dtype=float)

    @property
    def dim(self) -> int:
        return self.g.shape[-1]

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return constant(other, self.dim, np.shape(np.asarray(other, dtype=float)))

    def __add__(self, other):
        o = self._coerce(other)
        return Jet2(self.v + o.v, self.g + o.g, self.h + o.h)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.v, -self.g, -self.h)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        v = self.v * o.v
        g = self.g * o.v[..., None] + o.g * self.v[..., None]
        cross = self.g[..., :, None] * o.g[..., None, :]
        h = (
            self.h * o.v[..., None, None]
            + o.h * self.v[..., None, None]
            + cross
            + np.swapaxes(cross, -1, -2)
        )
        return Jet2(v, g, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o ** (-1.0)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, p: float):
        u = self.v
        return self._chain(u**p, p * u ** (p - 1.0), p * (p - 1.0) * u ** (p - 2.0))

    def _chain(self, f0, f1, f2) -> "Jet2":
        """Compose with a scalar function given f(u), f'(u), f''(u)."""
        f0, f1, f2 = (np.asarray(x, dtype=float) for x in (f0, f1, f2))
        g = f1[..., None] * self.g
        outer = self.g[..., :, None] * self.g[..., None, :]
        h = f2[..., None, None] * outer + f1[..., None, None] * self.h
        return Jet2(f0, g, h)

    def __repr__(self):
        return f"Jet2(v={self.v!r})"


def constant(value, dim: int, batch_shape=()) -> Jet2:
    v = np.broadcast_to(np.asarray(value, dtype=float), batch_shape).copy()
    g = np.zeros(v.shape + (dim,))
    h = np.zeros(v.shape + (dim, dim))
    return Jet2(v, g, h)


def seed(points: np.ndarray) -> list[Jet2]:
    """Seed coordinate variables at ``points`` of shape (..., dim)."""
    points = np.asarray(points, dtype=float)
    dim = points.shape[-1]
    batch = points.shape[:-1]
    out = []
    for i in range(dim):
        g = np.zeros(batch + (dim,))
        g[..., i] = 1.0
        out.append(Jet2(points[..., i], g, np.zeros(batch + (dim, dim))))
    return out


def _lift(x, f0, f1, f2):
    if isinstance(x, Jet2):
        return x._chain(f0(x.v), f1(x.v), f2(x.v))
    x = np.asarray(x, dtype=float)
    return f0(x)


def sin(x):
    return _lift(x, np.sin, np.cos, lambda u: -np.sin(u))


def cos(x):
    return _lift(x, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u))


def exp(x):
    return _lift(x, np.exp, np.exp, np.exp)


def log(x):
    return _lift(x, np.log, lambda u: 1.0 / u, lambda u: -1.0 / u**2)


def sqrt(x):
    return _lift(
        x,
        np.sqrt,
        lambda u: 0.5 / np.sqrt(u),
        lambda u: -0.25 * u**-1.5,
    )
