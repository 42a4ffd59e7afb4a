"""Truncated Taylor arithmetic for exact derivatives of closed-form profiles.

A ``Jet`` holds normalized Taylor coefficients ``c[j] = f^(j)(t) / j!`` for a
vector of base points at once. Arithmetic follows the usual recurrences, so
derivatives of smooth compositions (bumps, weights, cutoffs) come out to
rounding error without symbolic algebra.
"""

from __future__ import annotations

from math import factorial

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 1:
            self.c = self.c[:, None]

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, t, order: int) -> "Jet":
        t = np.atleast_1d(np.asarray(t, dtype=float))
        c = np.zeros((order + 1, t.size))
        c[0] = t
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, like: "Jet") -> "Jet":
        c = np.zeros_like(like.c)
        c[0] = value
        return cls(c)

    def derivatives(self) -> np.ndarray:
        """Rows are f, f', f'', ... at each base point."""
        scale = np.array([factorial(j) for j in range(self.order + 1)], dtype=float)
        return self.c * scale[:, None]

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self)

    def __add__(self, other):
        return Jet(self.c + self._coerce(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._coerce(other).c)

    def __rsub__(self, other):
        return Jet(self._coerce(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float))
        a, b = self.c, other.c
        out = np.zeros_like(a)
        for j in range(a.shape[0]):
            out[j] = np.einsum("ik,ik->k", a[: j + 1], b[j::-1])
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        f = self.c
        h = np.zeros_like(f)
        h[0] = 1.0 / f[0]
        for j in range(1, f.shape[0]):
            h[j] = -np.einsum("ik,ik->k", f[1 : j + 1], h[j - 1 :: -1]) / f[0]
        return Jet(h)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def exp(self) -> "Jet":
        f = self.c
        h = np.zeros_like(f)
        h[0] = np.exp(f[0])
        for j in range(1, f.shape[0]):
            i = np.arange(1, j + 1, dtype=float)[:, None]
            h[j] = np.sum(i * f[1 : j + 1] * h[j - 1 :: -1], axis=0) / j
        return Jet(h)

    def log(self) -> "Jet":
        """Natural log of |f|; derivatives are those of log f on each sign branch."""
        f = self.c
        h = np.zeros_like(f)
        h[0] = np.log(np.abs(f[0]))
        for j in range(1, f.shape[0]):
            i = np.arange(1, j, dtype=float)[:, None]
            acc = np.sum(i * h[1:j] * f[j - 1 : 0 : -1], axis=0) if j > 1 else 0.0
            h[j] = (f[j] - acc / j) / f[0]
        return Jet(h)

    def __pow__(self, p: float):
        f = self.c
        h = np.zeros_like(f)
        h[0] = f[0] ** p
        for j in range(1, f.shape[0]):
            i = np.arange(1, j + 1, dtype=float)[:, None]
            h[j] = np.sum((p * i - (j - i)) * f[1 : j + 1] * h[j - 1 :: -1], axis=0) / (j * f[0])
        return Jet(h)

    def sincos(self) -> tuple["Jet", "Jet"]:
        f = self.c
        s = np.zeros_like(f)
        c = np.zeros_like(f)
        s[0], c[0] = np.sin(f[0]), np.cos(f[0])
        for j in range(1, f.shape[0]):
            i = np.arange(1, j + 1, dtype=float)[:, None]
            s[j] = np.sum(i * f[1 : j + 1] * c[j - 1 :: -1], axis=0) / j
            c[j] = -np.sum(i * f[1 : j + 1] * s[j - 1 :: -1], axis=0) / j
        return Jet(s), Jet(c)

    def sin(self) -> "Jet":
        return self.sincos()[0]

    def cos(self) -> "Jet":
        return self.sincos()[1]
