r"""Bilinear and sesquilinear forms on test functions.

The regularized form is

.. math:: (g_1|g_2) = \frac{1}{2\pi}\Big[\int_0^\kappa \frac{h(k)-h(0)}{k}\,dk
          + \int_\kappa^\infty \frac{h(k)}{k}\,dk + \ln\frac{\kappa}{\mu}\,h(0)\Big],
          \qquad h = \overline{\hat g_1}\,\hat g_2,

which is independent of the split point ``kappa`` and equals the
``eps -> 0`` limit of ``(1/2pi)[int_eps^inf h dk/k + ln(eps/mu) h(0)]``.
Its position-space kernel is
``W(t) = (1/2pi)(-gamma - ln|mu t| + (i pi/2) sgn t)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as spi

from ._quad import QuadratureError, integrate
from ._special import EULER_GAMMA
from .testfn import (
    MoverPair,
    SpacetimeFunction,
    TestFunction,
    convolve,
    evaluate,
    fourier,
    from_spacetime,
)

__all__ = [
    "MassScale",
    "FormValue",
    "reg_form",
    "reg_form_raw",
    "kernel_W",
    "reg_form_position",
    "im_form",
    "fermi_form",
    "correlation",
    "sgn_pairing",
    "commutator_value",
    "commutator_spacetime",
    "affine_anomaly",
    "SPACETIME_TO_MOVER",
    "QuadratureError",
]

TWO_PI = 2.0 * math.pi

# commutator_value(from_spacetime(f1), from_spacetime(f2)) equals
# SPACETIME_TO_MOVER * commutator_spacetime(f1, f2).
SPACETIME_TO_MOVER = -0.5


@dataclass(frozen=True)
class MassScale:
    """Infrared scale ``mu > 0`` (inverse time)."""

    mu: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mass scale must be positive, got {self.mu!r}")
        object.__setattr__(self, "mu", float(self.mu))


@dataclass(frozen=True)
class FormValue:
    value: complex
    error_estimate: float
    mu_used: MassScale

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def __complex__(self) -> complex:
        return complex(self.value)


def _scale(mu) -> MassScale:
    return mu if isinstance(mu, MassScale) else MassScale(float(mu))


# ---------------------------------------------------------------------------
# Momentum space


def _cutoff(g1: TestFunction, g2: TestFunction) -> float:
    return min(g1.spectral_cutoff(), g2.spectral_cutoff())


def reg_form(g1: TestFunction, g2: TestFunction, mu=1.0, *, split: float = 1.0,
             epsabs: float = 1e-13, tol: float | None = None) -> FormValue:
    """Regularized form ``(g1|g2)`` in the subtracted momentum representation."""
    scale = _scale(mu)
    if not split > 0:
        raise ValueError("split point must be positive")
    h0 = g1.zero_mode * g2.zero_mode
    worst = [0.0]

    def h(k):
        v1, e1 = fourier(g1, k, tol, with_error=True)
        v2, e2 = fourier(g2, k, tol, with_error=True)
        err = np.abs(v1) * e2 + np.abs(v2) * e1
        worst[0] = max(worst[0], float(np.max(err, initial=0.0)))
        return np.conj(v1) * v2

    K = _cutoff(g1, g2)
    low, e_low = integrate(lambda k: (h(k) - h0) / k, 0.0, split, epsabs=epsabs, epsrel=1e-12)
    if K > split:
        high, e_high = integrate(lambda k: h(k) / k, split, K, epsabs=epsabs, epsrel=1e-12)
    else:
        high, e_high = 0.0, 0.0
    total = low + high + math.log(split / scale.mu) * h0
    # Transform errors enter through dk/k over [0, K].
    err = e_low + e_high + worst[0] * (2.0 + abs(math.log(max(K, split))))
    return FormValue(complex(total) / TWO_PI, float(err) / TWO_PI, scale)


def reg_form_raw(g1: TestFunction, g2: TestFunction, mu=1.0, eps: float = 1e-8) -> FormValue:
    """Direct evaluation of ``int_eps^inf h dk/k + ln(eps/mu) h(0)`` (finite ``eps``).

    Integrates in ``s = ln k`` with QUADPACK; kept as an independent check
    of :func:`reg_form`, which it matches up to ``O(eps)``.
    """
    scale = _scale(mu)
    h0 = g1.zero_mode * g2.zero_mode
    K = _cutoff(g1, g2)

    def part(s, which):
        k = math.exp(s)
        v = complex(np.conj(fourier(g1, k)) * fourier(g2, k))
        return v.real if which == 0 else v.imag

    lo, hi = math.log(eps), math.log(K)
    pts = np.linspace(lo, hi, 12)[1:-1]
    re, e_re = spi.quad(part, lo, hi, args=(0,), limit=400, epsabs=1e-14, epsrel=1e-12, points=pts)
    im, e_im = spi.quad(part, lo, hi, args=(1,), limit=400, epsabs=1e-14, epsrel=1e-12, points=pts)
    total = complex(re, im) + math.log(eps / scale.mu) * h0
    return FormValue(total / TWO_PI, (e_re + e_im) / TWO_PI, scale)


# ---------------------------------------------------------------------------
# Position space


def kernel_W(t, mu=1.0):
    """``W(t) = (1/2pi)(-gamma - ln|mu t| + (i pi/2) sgn t)``; undefined at ``t = 0``."""
    scale = _scale(mu)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr == 0):
        raise ValueError("W(t) has a logarithmic singularity at t = 0")
    out = (-EULER_GAMMA - np.log(np.abs(scale.mu * t_arr)) + 0.5j * math.pi * np.sign(t_arr)) / TWO_PI
    if out.ndim == 0:
        return complex(out)
    return out


def correlation(g1: TestFunction, g2: TestFunction):
    """``c(u) = int g1(s + u) g2(s) ds``.

    Exact (an atom sum) for atom-only inputs.  Otherwise returns a vectorized
    callable built from composite Gauss-Legendre quadrature over the bulk of
    ``g2``, which requires both inputs to decay like Schwartz functions.
    """
    if g1.is_atomic and g2.is_atomic:
        return convolve(g1, g2.reflect())
    if g1.decay != "schwartz" or g2.decay != "schwartz":
        raise TypeError("position-space correlation needs Schwartz-class inputs")
    from .testfn import _bulk
    from ._quad import gauss_legendre_panels

    lo, hi = _bulk(g2)
    nodes, weights = gauss_legendre_panels(np.linspace(lo, hi, 401), order=20)
    fw = weights * evaluate(g2, nodes)

    def c(u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        vals = np.array([np.dot(evaluate(g1, nodes + x), fw) for x in flat])
        return vals.reshape(u.shape) if u.ndim else float(vals[0])

    return c


def _half_line_integral(c, zero_mode: float) -> float:
    """``int_0^inf c``."""
    if isinstance(c, TestFunction):
        return float(c.tail_integral(0.0))
    return integrate(c, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12)[0]


def sgn_pairing(a: TestFunction, b: TestFunction) -> float:
    """``S(a, b) = int int a(t) b(s) sgn(t - s) dt ds``.

    Evaluated in explicitly antisymmetric form so that ``S(a, a)`` and
    ``S(a, -a)`` vanish exactly.
    """
    c0 = a.zero_mode * b.zero_mode
    ab = 2.0 * _half_line_integral(correlation(a, b), c0) - c0
    ba = 2.0 * _half_line_integral(correlation(b, a), c0) - c0
    return 0.5 * (ab - ba)


def _log_moment(c, reach: float) -> tuple[float, float]:
    """``int ln|u| c(u) du`` with an algebraic-log weighted rule near 0."""
    f = (lambda u: float(evaluate(c, u))) if isinstance(c, TestFunction) else (lambda u: float(c(u)))
    sym = lambda u: f(u) + f(-u)
    with warnings.catch_warnings():
        warnings.simplefilter("error", spi.IntegrationWarning)
        try:
            near, e1 = spi.quad(sym, 0.0, reach, weight="alg-loga", wvar=(0.0, 0.0),
                                epsabs=1e-14, epsrel=1e-12, limit=400)
            far, e2 = spi.quad(lambda u: math.log(u) * sym(u), reach, np.inf,
                               epsabs=1e-14, epsrel=1e-12, limit=400)
        except spi.IntegrationWarning as exc:
            raise QuadratureError(f"log-weighted quadrature: {exc}") from exc
    return near + far, e1 + e2


def _reach(g1: TestFunction, g2: TestFunction) -> float:
    from .testfn import _bulk

    a1, b1 = _bulk(g1)
    a2, b2 = _bulk(g2)
    return max(abs(b1 - a2), abs(a1 - b2), 1.0)


def reg_form_position(g1: TestFunction, g2: TestFunction, mu=1.0) -> FormValue:
    """``(g1|g2) = int int g1(t) W(t - s) g2(s) dt ds`` in position space.

    The double integral is reduced to ``int W(u) c(u) du`` over the
    correlation ``c``; the logarithmic singularity at ``u = 0`` is handled by
    a log-weighted QUADPACK rule.
    """
    scale = _scale(mu)
    c = correlation(g1, g2)
    c0 = g1.zero_mode * g2.zero_mode
    log_part, err = _log_moment(c, _reach(g1, g2))
    re = -((EULER_GAMMA + math.log(scale.mu)) * c0 + log_part) / TWO_PI
    im = 0.25 * (2.0 * _half_line_integral(c, c0) - c0)
    return FormValue(complex(re, im), err / TWO_PI, scale)


def im_form(g1: TestFunction, g2: TestFunction, method: str = "auto") -> float:
    """``Im(g1|g2) = (1/4) S(g1, g2)``, independent of ``mu``.

    ``method`` is ``"position"`` (exact for atoms), ``"momentum"`` (via
    :func:`reg_form`) or ``"auto"``.
    """
    if method == "auto":
        method = "position" if (g1.is_atomic and g2.is_atomic) else "momentum"
    if method == "position":
        return 0.25 * sgn_pairing(g1, g2)
    if method == "momentum":
        return reg_form(g1, g2).imag
    raise ValueError(f"unknown method {method!r}")


def fermi_form(g1: TestFunction, g2: TestFunction) -> complex:
    r"""``int g1(t) g2(t) dt = int dk/(2 pi) conj(g1^) g2^``."""
    if g1.is_atomic and g2.is_atomic:
        return complex(float(evaluate(correlation(g1, g2), 0.0)))
    pts = sorted({s for g in (g1, g2) for w in g.wrappers for s in w.singular})
    val, _ = integrate(lambda t: evaluate(g1, t) * evaluate(g2, t), -np.inf, np.inf,
                       epsabs=1e-13, epsrel=1e-12, points=pts)
    return complex(val)


# ---------------------------------------------------------------------------
# Commutators


def commutator_value(p1: MoverPair, p2: MoverPair, method: str = "auto") -> complex:
    """Scalar ``c`` in ``[phi(p1), phi(p2)] = c``: ``2i[Im(gR1|gR2) + Im(gL1|gL2)]``."""
    im = im_form(p1.g_R, p2.g_R, method) + im_form(p1.g_L, p2.g_L, method)
    return complex(0.0, 2.0 * im)


def commutator_spacetime(f1: SpacetimeFunction, f2: SpacetimeFunction) -> complex:
    """``i int f1 f2 [sgn(dt + dx) + sgn(dt - dx)]`` over both spacetime points.

    The sign kernels only see ``t + x`` and ``t - x``, so the fourfold
    integral factorizes through the light-cone densities of each factor.
    """
    plus1, minus1 = f1.light_cone_densities()
    plus2, minus2 = f2.light_cone_densities()
    return complex(0.0, sgn_pairing(plus1, plus2) + sgn_pairing(minus1, minus2))


def affine_anomaly(g1: TestFunction, g2: TestFunction, a: float) -> float:
    """Predicted ``(r_{a,b} g1 | r_{a,b} g2) - (g1|g2) = -ln(a) g1^(0) g2^(0) / (2 pi)``."""
    if not a > 0:
        raise ValueError("dilation must be positive")
    return -math.log(a) * g1.zero_mode * g2.zero_mode / TWO_PI


def mover_commutator_from_spacetime(f1: SpacetimeFunction, f2: SpacetimeFunction) -> complex:
    """``commutator_value`` of the mover pairs of two spacetime functions."""
    return commutator_value(from_spacetime(f1), from_spacetime(f2))
