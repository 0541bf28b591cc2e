"""Exact univariate polynomial arithmetic over rationals.

The profile layer works with exact coefficients (``fractions.Fraction``), so
boundary conditions and ODE identities hold as identities of coefficient
lists, not merely to rounding.  Floats are converted exactly; only the tensor
layer ever rounds.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = ["Polynomial"]


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class Polynomial:
    """Polynomial with exact rational coefficients, ascending order."""

    __slots__ = ("coeffs", "_float_coeffs")

    def __init__(self, coeffs: Iterable):
        c = [_rat(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [Fraction(0)]
        self.coeffs: tuple[Fraction, ...] = tuple(c)
        self._float_coeffs = np.array([float(x) for x in self.coeffs])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        """Horner evaluation; floats in, floats out (arrays allowed)."""
        t = np.asarray(t, dtype=float)
        acc = np.full(t.shape, self._float_coeffs[-1])
        for ck in self._float_coeffs[-2::-1]:
            acc = acc * t + ck
        return acc if acc.shape else float(acc)

    def at(self, t) -> Fraction:
        """Exact evaluation at a rational point."""
        t = _rat(t)
        acc = Fraction(0)
        for ck in reversed(self.coeffs):
            acc = acc * t + ck
        return acc

    def deriv(self, order: int = 1) -> "Polynomial":
        c = list(self.coeffs)
        for _ in range(order):
            c = [k * ck for k, ck in enumerate(c)][1:] or [Fraction(0)]
        return Polynomial(c)

    def __add__(self, other):
        other = self._as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    def __neg__(self):
        return Polynomial([-x for x in self.coeffs])

    def __sub__(self, other):
        return self + (-self._as_poly(other))

    def __mul__(self, other):
        other = self._as_poly(other)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return self.coeffs == self._as_poly(other).coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return self.coeffs == (Fraction(0),)

    @staticmethod
    def _as_poly(x) -> "Polynomial":
        return x if isinstance(x, Polynomial) else Polynomial([x])

    @classmethod
    def monomial(cls, n: int, coeff=1) -> "Polynomial":
        return cls([0] * n + [coeff])

    def __repr__(self):
        terms = [f"{c}*t^{k}" for k, c in enumerate(self.coeffs) if c != 0]
        return " + ".join(terms) if terms else "0"


def _selftest() -> None:  # quick import-time sanity in interactive use
    p = Polynomial([1, 2, 3])
    assert p(2.0) == 17.0 and p.deriv()(2.0) == 14.0


if __name__ == "__main__":
    _selftest()
