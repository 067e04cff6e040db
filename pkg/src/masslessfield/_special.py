"""Generalized exponential integral for complex arguments."""

from __future__ import annotations

import cmath

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

_EPS = 1e-16
_TINY = 1e-300


def expint(n: int, z: complex) -> complex:
    r"""``E_n(z) = \int_1^\infty e^{-zt} t^{-n} dt`` for ``Re z >= 0``.

    Continued fraction for ``|z| > 1``, power series otherwise.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    z = complex(z)
    if n == 0:
        return cmath.exp(-z) / z
    if z == 0:
        if n == 1:
            raise ZeroDivisionError("E_1 is singular at 0")
        return 1.0 / (n - 1)
    if abs(z) > 1.0:
        b = z + n
        c = 1.0 / _TINY
        d = 1.0 / b
        h = d
        for i in range(1, 5000):
            an = -i * (n - 1 + i)
            b += 2.0
            d = an * d + b
            if d == 0:
                d = _TINY
            d = 1.0 / d
            c = b + an / c
            if c == 0:
                c = _TINY
            delta = c * d
            h *= delta
            if abs(delta - 1.0) < _EPS:
                return h * cmath.exp(-z)
        raise ArithmeticError(f"E_{n}({z}) continued fraction did not converge")
    ans = 1.0 / (n - 1) if n != 1 else -cmath.log(z) - EULER_GAMMA
    fact = 1.0 + 0j
    for i in range(1, 5000):
        fact *= -z / i
        if i != n - 1:
            delta = -fact / (i - n + 1)
        else:
            psi = -EULER_GAMMA + sum(1.0 / j for j in range(1, n))
            delta = fact * (-cmath.log(z) + psi)
        ans += delta
        if abs(delta) < abs(ans) * _EPS:
            return ans
    raise ArithmeticError(f"E_{n}({z}) series did not converge")


def expint_array(n: int, z) -> np.ndarray:
    """Vectorized :func:`expint` over an array of arguments."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=complex)
    big = np.abs(flat) > 1.0
    if np.any(big):
        out[big] = _expint_cf(n, flat[big])
    for j in np.flatnonzero(~big):
        out[j] = expint(n, complex(flat[j]))
    return out.reshape(z.shape)


def _expint_cf(n: int, z: np.ndarray) -> np.ndarray:
    """Modified Lentz evaluation of the continued fraction, vectorized."""
    if n == 0:
        return np.exp(-z) / z
    b = z + n
    c = np.full(z.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(z.shape, dtype=bool)
    for i in range(1, 5000):
        an = -i * (n - 1 + i)
        b = b + 2.0
        d = an * d + b
        d = np.where(d == 0, _TINY, d)
        d = 1.0 / d
        c = b + an / c
        c = np.where(c == 0, _TINY, c)
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            return h * np.exp(-z)
    raise ArithmeticError(f"E_{n} continued fraction did not converge")


def power_tail_fourier(m: int, start: float, k) -> np.ndarray:
    r"""``\int_{start}^\infty s^{-m} e^{-iks} ds`` for ``start > 0``, ``m >= 1``."""
    k = np.asarray(k, dtype=float)
    if m == 1 and np.any(k == 0):
        raise ZeroDivisionError("1/s tail diverges at k = 0")
    z = 1j * k * start
    return start ** (1 - m) * expint_array(m, z)


__all__ = ["EULER_GAMMA", "expint", "expint_array", "power_tail_fourier"]
