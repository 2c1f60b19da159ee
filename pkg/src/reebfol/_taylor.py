"""Order-3 Taylor jet arithmetic.

A ``Jet`` carries the truncated Taylor expansion (value plus three derivatives,
stored as Taylor coefficients) of a smooth function at one point.  Arithmetic
and a handful of elementary functions are enough to differentiate the
closed-form reference curves used by the twist constructions exactly, without
finite differencing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ORDER = 4  # coefficients 0..3


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(_ORDER)
    for i in range(_ORDER):
        for j in range(_ORDER - i):
            out[i + j] += a[i] * b[j]
    return out


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor series c0 + c1 e + c2 e^2 + c3 e^3."""

    c: np.ndarray

    @staticmethod
    def variable(x0: float) -> "Jet":
        return Jet(np.array([float(x0), 1.0, 0.0, 0.0]))

    @staticmethod
    def constant(v: float) -> "Jet":
        return Jet(np.array([float(v), 0.0, 0.0, 0.0]))

    def __add__(self, other):
        o = other if isinstance(other, Jet) else Jet.constant(other)
        return Jet(self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other):
        o = other if isinstance(other, Jet) else Jet.constant(other)
        return Jet(self.c - o.c)

    def __rsub__(self, other):
        return Jet.constant(other) - self

    def __neg__(self):
        return Jet(-self.c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(_mul(self.c, other.c))
        return Jet(self.c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / float(other))

    def reciprocal(self) -> "Jet":
        a0 = self.c[0]
        if a0 == 0.0:
            raise ZeroDivisionError("jet with zero value")
        return _apply(self, [1.0 / a0, -1.0 / a0**2, 2.0 / a0**3, -6.0 / a0**4])

    def power(self, n: int) -> "Jet":
        out = Jet.constant(1.0)
        for _ in range(n):
            out = out * self
        return out

    @property
    def value(self) -> float:
        return float(self.c[0])

    def derivatives(self) -> np.ndarray:
        """[value, f', f'', f'''] from the Taylor coefficients."""
        return self.c * np.array([1.0, 1.0, 2.0, 6.0])


def _apply(j: Jet, derivs) -> Jet:
    """Compose F with the jet, given [F, F', F'', F'''] at the jet's value."""
    e = Jet(np.array([0.0, *j.c[1:]]))
    acc = Jet.constant(derivs[0])
    term = Jet.constant(1.0)
    fact = 1.0
    for k in range(1, _ORDER):
        term = term * e
        fact *= k
        acc = acc + term * (derivs[k] / fact)
    return acc


def sin(j: Jet) -> Jet:
    a = j.value
    return _apply(j, [np.sin(a), np.cos(a), -np.sin(a), -np.cos(a)])


def cos(j: Jet) -> Jet:
    a = j.value
    return _apply(j, [np.cos(a), -np.sin(a), -np.cos(a), np.sin(a)])


def sqrt(j: Jet) -> Jet:
    a = j.value
    if a <= 0:
        raise ValueError("sqrt of non-positive jet")
    r = np.sqrt(a)
    return _apply(j, [r, 0.5 / r, -0.25 / (a * r), 0.375 / (a**2 * r)])


def arctan(j: Jet) -> Jet:
    a = j.value
    d = 1.0 + a * a
    return _apply(j, [np.arctan(a), 1.0 / d, -2.0 * a / d**2, (6.0 * a * a - 2.0) / d**3])
