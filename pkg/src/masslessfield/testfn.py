r"""Test functions on the line and the group actions on them.

A :class:`TestFunction` is a finite sum of Hermite-Gaussian atoms plus an
optional list of pointwise wrappers.  An atom with center ``c``, width ``w``
and coefficients ``p`` is

.. math:: g(t) = \frac{1}{w}\sum_n p_n \mathrm{He}_n(u)\,\varphi(u),
          \qquad u = (t-c)/w,\quad \varphi(u) = e^{-u^2/2}/\sqrt{2\pi},

so that, with :math:`\hat g(k) = \int g(t) e^{-ikt}\,dt`,

.. math:: \hat g(k) = e^{-ikc}\sum_n p_n (-iwk)^n e^{-w^2k^2/2}.

Atoms are closed under translation, dilation, reflection, differentiation and
convolution, so every operation that stays inside the family is exact.
Mobius and diffeomorphism images leave the family; they become wrappers,
whose transforms are computed by QUADPACK Fourier quadrature.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import hermite_e as He
from scipy import integrate as spi
from scipy.special import ndtr

from ._quad import QuadratureError, adaptive_partition, integrate, refine_panels
from ._special import expint_array

__all__ = [
    "Atom",
    "Wrapper",
    "TestFunction",
    "MoverPair",
    "SpacetimeFunction",
    "Affine",
    "Mobius",
    "Diffeo",
    "gaussian",
    "atom",
    "evaluate",
    "fourier",
    "zero_mode",
    "from_spacetime",
    "affine_pull",
    "mobius_boson",
    "mobius_fermion",
    "diffeo_pull",
    "derivative",
    "convolve",
    "QuadratureError",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Decay classes ordered from weakest to strongest.
DECAY_RANK = {"t1": 1, "t2": 2, "schwartz": 3}

ATOM_TOL = 1e-10
WRAPPER_TOL = 1e-8


@dataclass(frozen=True)
class Atom:
    """Hermite-Gaussian atom ``(1/w) sum_n p_n He_n((t-c)/w) phi((t-c)/w)``."""

    center: float
    width: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"atom width must be positive, got {self.width}")
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def __call__(self, t):
        u = (np.asarray(t, dtype=float) - self.center) / self.width
        return He.hermeval(u, self.coeffs) * np.exp(-0.5 * u * u) * (_INV_SQRT_2PI / self.width)

    def fourier(self, k):
        k = np.asarray(k, dtype=float)
        z = -1j * self.width * k
        poly = np.zeros_like(z)
        for c in reversed(self.coeffs):
            poly = poly * z + c
        return np.exp(-1j * k * self.center - 0.5 * (self.width * k) ** 2) * poly

    @property
    def zero_mode(self) -> float:
        return self.coeffs[0] if self.coeffs else 0.0

    def tail_integral(self, x):
        """Integral of the atom over ``[x, inf)``."""
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        out = self.zero_mode * ndtr(-z)
        if len(self.coeffs) > 1:
            phi = np.exp(-0.5 * z * z) * _INV_SQRT_2PI
            # He_n phi = -(He_{n-1} phi)', hence int_z^inf He_n phi = He_{n-1}(z) phi(z).
            out = out + He.hermeval(z, self.coeffs[1:]) * phi
        return out

    def derivative(self) -> "Atom":
        # d/dt [He_n(u) phi(u) / w] = -He_{n+1}(u) phi(u) / w^2
        return Atom(self.center, self.width, (0.0,) + tuple(-c / self.width for c in self.coeffs))

    def affine(self, a: float, b: float) -> "Atom":
        return Atom(a * self.center + b, a * self.width, self.coeffs)

    def reflect(self) -> "Atom":
        return Atom(-self.center, self.width, tuple(c * (-1) ** n for n, c in enumerate(self.coeffs)))

    def scaled(self, s: float) -> "Atom":
        return Atom(self.center, self.width, tuple(s * c for c in self.coeffs))

    def taylor(self, x0: float, order: int) -> np.ndarray:
        """Coefficients ``a_j`` with ``g(x0 + u) = sum_j a_j u^j`` up to ``order``."""
        z0 = (x0 - self.center) / self.width
        phi = math.exp(-0.5 * z0 * z0) * _INV_SQRT_2PI / self.width
        out = np.zeros(order + 1)
        # d^j/dz^j [He_n phi] = (-1)^j He_{n+j} phi
        fact = 1.0
        for j in range(order + 1):
            if j:
                fact *= j
            total = 0.0
            for n, c in enumerate(self.coeffs):
                basis = np.zeros(n + j + 1)
                basis[-1] = 1.0
                total += c * He.hermeval(z0, basis)
            out[j] = (-1) ** j * total * phi / (fact * self.width**j)
        return out

    def envelope(self, k):
        """Upper bound for ``|fourier(k)|``."""
        k = np.abs(np.asarray(k, dtype=float))
        z = self.width * k
        return np.exp(-0.5 * z * z) * sum(abs(c) * z**n for n, c in enumerate(self.coeffs))


def _convolve_atoms(x: Atom, y: Atom) -> Atom:
    width = math.hypot(x.width, y.width)
    out = np.zeros(len(x.coeffs) + len(y.coeffs) - 1)
    for m, p in enumerate(x.coeffs):
        for n, q in enumerate(y.coeffs):
            out[m + n] += p * q * x.width**m * y.width**n / width ** (m + n)
    return Atom(x.center + y.center, width, tuple(out))


@dataclass(frozen=True, eq=False)
class MobiusChart:
    r"""Closed description ``w(t) = s (r t + u)^{-m} g((p t + q)/(r t + u))``.

    ``base`` is atom-only, so the Laurent expansion of ``w`` about the pole
    ``t* = -u/r`` is exact and the Fourier tails reduce to exponential
    integrals.  ``matrix`` is ``(p, q, r, u)`` with nonzero determinant.
    """

    base: "TestFunction"
    matrix: tuple[float, float, float, float]
    weight: int
    scale: float = 1.0

    @property
    def det(self) -> float:
        p, q, r, u = self.matrix
        return p * u - q * r

    @property
    def pole(self) -> float | None:
        p, q, r, u = self.matrix
        return None if r == 0.0 else -u / r

    def __call__(self, t):
        p, q, r, u = self.matrix
        t = np.asarray(t, dtype=float)
        den = r * t + u
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self.scale * den ** (-self.weight) * evaluate(self.base, (p * t + q) / den)
        return np.where(den == 0.0, 0.0, out)

    def then(self, matrix, scale: float = 1.0) -> "MobiusChart":
        """Chart of ``scale * j(N, t)^{-m} w(N t)`` for argument matrix ``N``."""
        P = np.array(self.matrix, dtype=float).reshape(2, 2) @ np.array(matrix, dtype=float).reshape(2, 2)
        return MobiusChart(self.base, tuple(float(x) for x in P.ravel()), self.weight, self.scale * scale)

    def zero_mode_exact(self) -> float | None:
        if self.weight != 2:
            return None
        return self.scale * self.base.zero_mode / abs(self.det)

    def truncation(self) -> tuple[float, bool]:
        """Central half-width ``T`` and whether Laurent tails are needed beyond it."""
        t_star = self.pole
        p, q, r, u = self.matrix
        tau0 = p / r
        wmin = min(a.width for a in self.base.atoms)
        lever = abs(self.det) / (r * r)
        # Beyond T the argument stays within lever/(T - |t*|) of tau0.
        t_series = abs(t_star) + 0.5 * lever / wmin
        gap = min(abs(tau0 - a.center) - 10.0 * a.width for a in self.base.atoms)
        if gap > 0:
            t_far = abs(t_star) + lever / gap
            if t_far < t_series:
                return max(t_far, abs(t_star) + 1.0), False
        return max(t_series, abs(t_star) + 1.0), True

    def laurent(self, reference: float, max_order: int = 110) -> np.ndarray:
        """Scaled tail coefficients.

        Returns ``B`` with ``w(t) = sum_n B_n reference^n (t - t*)^{-(m+n)}``
        for ``|t|`` beyond the truncation; the scaling keeps ``B`` finite.
        """
        key = (reference, max_order)
        cache = self.__dict__.setdefault("_laurent", {})
        if key not in cache:
            p, q, r, u = self.matrix
            tau0 = p / r
            taylor = sum((a.taylor(tau0, max_order) for a in self.base.atoms), np.zeros(max_order + 1))
            ratio = -self.det / (r * r * reference)
            powers = ratio ** np.arange(max_order + 1, dtype=float)
            cache[key] = self.scale * r ** (-self.weight) * powers * taylor
        return cache[key]


@dataclass(frozen=True, eq=False)
class Wrapper:
    """Pointwise-evaluable component of a test function.

    ``func`` must accept arrays.  ``decay`` is one of ``"schwartz"``, ``"t2"``,
    ``"t1"`` or ``None`` (undeclared).  ``singular`` lists points where the
    formula is only defined as a limit; quadrature splits panels there.
    ``radius`` is the half-width of the region holding the bulk of the
    function.  ``chart`` is set for Mobius images of atom sums and enables
    exact tail handling.
    """

    func: Callable
    decay: str | None = None
    singular: tuple[float, ...] = ()
    radius: float = 20.0
    known_zero_mode: float | None = None
    label: str = "wrapper"
    chart: MobiusChart | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_chart(cls, chart: MobiusChart, label: str) -> "Wrapper":
        pole = chart.pole
        decay = {2: "t2", 1: "t1"}[chart.weight] if pole is not None else "schwartz"
        T, _ = chart.truncation() if pole is not None else (20.0, False)
        return cls(chart, decay, () if pole is None else (pole,), T,
                   chart.zero_mode_exact(), label, chart)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.asarray(self.func(t), dtype=float)
        return np.where(np.isfinite(out), out, 0.0)

    def transformed(self, func, decay=None, singular=None, radius=None,
                    known_zero_mode=None, label=None) -> "Wrapper":
        return Wrapper(
            func,
            self.decay if decay is None else decay,
            self.singular if singular is None else tuple(singular),
            self.radius if radius is None else radius,
            known_zero_mode,
            self.label if label is None else label,
        )

    def scaled(self, s: float) -> "Wrapper":
        if self.chart is not None:
            return Wrapper.from_chart(self.chart.then((1.0, 0.0, 0.0, 1.0), s), self.label)
        known = None if self.known_zero_mode is None else s * self.known_zero_mode
        return self.transformed(lambda t: s * self(t), known_zero_mode=known)

    def reflected(self) -> "Wrapper":
        if self.chart is not None:
            return Wrapper.from_chart(self.chart.then((-1.0, 0.0, 0.0, 1.0)), self.label)
        return self.transformed(lambda t: self(-np.asarray(t)),
                                singular=[-x for x in self.singular],
                                known_zero_mode=self.known_zero_mode)

    def pulled(self, a: float, b: float) -> "Wrapper":
        """``w((t - b)/a) / a``."""
        if self.chart is not None:
            m = self.chart.weight
            return Wrapper.from_chart(self.chart.then((1.0, -b, 0.0, a), a ** (m - 1)), self.label)
        return self.transformed(lambda t: self((np.asarray(t) - b) / a) / a,
                                singular=[a * x + b for x in self.singular],
                                radius=a * self.radius + abs(b),
                                known_zero_mode=self.known_zero_mode)


def _chart_atoms(chart: MobiusChart) -> list[Atom]:
    """Atoms of a chart without a pole: ``s u^{-m} g(alpha t + beta)``."""
    p, q, r, u = chart.matrix
    alpha, beta = p / u, q / u
    amp = chart.scale * u ** (-chart.weight) / abs(alpha)
    A = 1.0 / abs(alpha)
    if alpha > 0:
        return [x.affine(A, -beta * A).scaled(amp) for x in chart.base.atoms]
    return [x.reflect().affine(A, beta * A).scaled(amp) for x in chart.base.atoms]


def _normalize_atoms(atoms: Sequence[Atom]) -> tuple[Atom, ...]:
    merged: dict[tuple[float, float], list[float]] = {}
    for a in atoms:
        acc = merged.setdefault((a.center, a.width), [])
        for n, c in enumerate(a.coeffs):
            if n < len(acc):
                acc[n] += c
            else:
                acc.append(c)
    out = []
    for (center, width), coeffs in merged.items():
        while coeffs and coeffs[-1] == 0.0:
            coeffs.pop()
        if coeffs:
            out.append(Atom(center, width, tuple(coeffs)))
    out.sort(key=lambda a: (a.center, a.width, a.coeffs))
    return tuple(out)


@dataclass(frozen=True)
class TestFunction:
    """Real test function: Hermite-Gaussian atoms plus pointwise wrappers.

    Values are immutable; cached quantities are pure functions of the value.
    """

    __test__ = False  # keep pytest from collecting this class

    atoms: tuple[Atom, ...] = ()
    # Wrappers compare by identity.
    wrappers: tuple[Wrapper, ...] = ()

    def __post_init__(self):
        atoms = list(self.atoms)
        wrappers = []
        for w in self.wrappers:
            if w.chart is not None and w.chart.pole is None:
                atoms.extend(_chart_atoms(w.chart))
            else:
                wrappers.append(w)
        object.__setattr__(self, "atoms", _normalize_atoms(atoms))
        object.__setattr__(self, "wrappers", tuple(wrappers))

    # -- structure ---------------------------------------------------------
    @property
    def is_atomic(self) -> bool:
        return not self.wrappers

    @property
    def decay(self) -> str | None:
        ranks = [DECAY_RANK.get(w.decay, 0) for w in self.wrappers]
        if not ranks:
            return "schwartz"
        worst = min(ranks)
        if worst == 0:
            return None
        return {v: k for k, v in DECAY_RANK.items()}[worst]

    def key(self):
        """Canonical key; analytically equal but differently represented functions differ."""
        if self.wrappers:
            wkey = tuple(id(w) for w in self.wrappers)
        else:
            wkey = ()
        akey = tuple(
            (f"{a.center:.12g}", f"{a.width:.12g}", tuple(f"{c:.12g}" for c in a.coeffs))
            for a in self.atoms
        )
        return akey, wkey

    def is_zero(self) -> bool:
        return not self.atoms and not self.wrappers

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "TestFunction") -> "TestFunction":
        if not isinstance(other, TestFunction):
            return NotImplemented
        return TestFunction(self.atoms + other.atoms, self.wrappers + other.wrappers)

    def __mul__(self, s: float) -> "TestFunction":
        s = float(s)
        if s == 0.0:
            return TestFunction()
        return TestFunction(tuple(a.scaled(s) for a in self.atoms),
                            tuple(w.scaled(s) for w in self.wrappers))

    __rmul__ = __mul__

    def __neg__(self) -> "TestFunction":
        return self * -1.0

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return self + (-other)

    def __call__(self, t):
        return evaluate(self, t)

    # -- cached numerics ---------------------------------------------------
    @cached_property
    def zero_mode(self) -> float:
        total = sum(a.zero_mode for a in self.atoms)
        for w in self.wrappers:
            total += _wrapper_zero_mode(w)
        return float(total)

    def fourier(self, k, tol: float | None = None):
        return fourier(self, k, tol)

    def reflect(self) -> "TestFunction":
        return TestFunction(tuple(a.reflect() for a in self.atoms),
                            tuple(w.reflected() for w in self.wrappers))

    def envelope(self, k):
        if self.wrappers:
            raise TypeError("envelope is only available for atom-only functions")
        return self.envelope_atoms(k)

    def envelope_atoms(self, k):
        return sum((a.envelope(k) for a in self.atoms), np.zeros_like(np.asarray(k, dtype=float)))

    def spectral_cutoff(self, threshold: float = 1e-18) -> float:
        """A momentum beyond which the transform stays below ``threshold``."""
        k = 1.0
        if self.atoms:
            while np.max(self.envelope_atoms(np.linspace(k, 2 * k, 64))) > threshold:
                k *= 2.0
            k *= 2.0
        for w in self.wrappers:
            k = max(k, _wrapper_cutoff(w, max(threshold, 1e-13)))
        return k

    def tail_integral(self, x):
        """Integral over ``[x, inf)`` (atoms only)."""
        if self.wrappers:
            raise TypeError("tail_integral is only available for atom-only functions")
        return sum((a.tail_integral(x) for a in self.atoms), np.zeros_like(np.asarray(x, dtype=float)))

    def odd_primitive(self, t):
        r"""The primitive with antisymmetric asymptotes, ``(1/2) \int g(s) sgn(t-s) ds``."""
        if self.wrappers:
            return _quad_odd_primitive(self, t)
        return 0.5 * self.zero_mode - self.tail_integral(t)

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        if self.wrappers:
            raise TypeError("functions with pointwise wrappers are not serializable")
        return {
            "atoms": [{"center": a.center, "width": a.width, "coeffs": list(a.coeffs)} for a in self.atoms],
            "decay": "schwartz",
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TestFunction":
        if not isinstance(data, dict) or "atoms" not in data:
            raise ValueError("test function document needs an 'atoms' list")
        decay = data.get("decay", "schwartz")
        if decay not in DECAY_RANK:
            raise ValueError(f"unknown decay class {decay!r}")
        atoms = []
        for item in data["atoms"]:
            atoms.append(Atom(float(item["center"]), float(item["width"]),
                              tuple(float(c) for c in item["coeffs"])))
        return cls(tuple(atoms))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TestFunction":
        return cls.from_dict(json.loads(text))


def atom(center: float = 0.0, width: float = 1.0, coeffs: Sequence[float] = (1.0,)) -> TestFunction:
    return TestFunction((Atom(center, width, tuple(coeffs)),))


def gaussian(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0) -> TestFunction:
    """Gaussian of integral ``amplitude``; ``gaussian()`` has transform ``exp(-k^2/2)``."""
    return atom(center, width, (amplitude,))


# ---------------------------------------------------------------------------
# Core operations


def evaluate(g: TestFunction, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for a in g.atoms:
        out = out + a(t)
    for w in g.wrappers:
        out = out + w(t)
    if out.ndim == 0:
        return float(out)
    return out


def fourier(g: TestFunction, k, tol: float | None = None, *, with_error: bool = False):
    """Fourier transform ``int g(t) exp(-ikt) dt`` at ``k`` (scalar or array).

    Atoms use the closed form.  Wrappers use composite Gauss-Legendre panels
    on ``[-T, T]`` plus tail terms; a :class:`QuadratureError` is raised when
    the error estimate exceeds ``tol``.  With ``with_error`` the pair
    ``(value, error_estimate)`` is returned.
    """
    k_arr = np.asarray(k, dtype=float)
    out = np.zeros(k_arr.shape, dtype=complex)
    err = np.zeros(k_arr.shape)
    for a in g.atoms:
        out = out + a.fourier(k_arr)
    if g.wrappers:
        tol = WRAPPER_TOL if tol is None else tol
        flat = k_arr.ravel()
        ak = np.abs(flat)
        vals = np.zeros(len(flat), dtype=complex)
        errs = np.zeros(len(flat))
        for w in g.wrappers:
            v, e = _wrapper_fourier_batch(w, ak, tol)
            vals += v
            errs += e
        # Real functions have conjugate-symmetric transforms.
        vals = np.where(flat < 0, np.conj(vals), vals)
        if np.max(errs, initial=0.0) > tol:
            j = int(np.argmax(errs))
            raise QuadratureError(f"wrapper Fourier transform at k={flat[j]!r}",
                                  out.ravel()[j] + vals[j], float(errs[j]))
        out = out + vals.reshape(k_arr.shape)
        err = errs.reshape(k_arr.shape)
    if out.ndim == 0:
        out, err = complex(out), float(err)
    return (out, err) if with_error else out


def zero_mode(g: TestFunction) -> float:
    """``g^(0)``, the integral of ``g``; cached on the instance."""
    return g.zero_mode


def derivative(g: TestFunction, step: float = 1e-3) -> TestFunction:
    """Exact for atoms; wrappers get a fourth-order central difference with ``step``."""
    atoms = tuple(a.derivative() for a in g.atoms)
    wrappers = []
    h = float(step)
    for w in g.wrappers:
        def fd(t, w=w, h=h):
            return (w(t - 2 * h) - 8 * w(t - h) + 8 * w(t + h) - w(t + 2 * h)) / (12 * h)
        wrappers.append(w.transformed(fd, decay=w.decay, known_zero_mode=0.0, label=f"d({w.label})"))
    return TestFunction(atoms, tuple(wrappers))


def convolve(f: TestFunction, g: TestFunction) -> TestFunction:
    """Convolution of atom-only functions (exact)."""
    if f.wrappers or g.wrappers:
        raise TypeError("convolution is only available for atom-only functions")
    return TestFunction(tuple(_convolve_atoms(x, y) for x in f.atoms for y in g.atoms))


# ---------------------------------------------------------------------------
# Group elements


@dataclass(frozen=True)
class Affine:
    """``t -> a t + b`` with ``a > 0``."""

    a: float
    b: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"affine dilation must be positive, got {self.a}")

    def __matmul__(self, other: "Affine") -> "Affine":
        # (self o other)(t) = a1 (a2 t + b2) + b1
        return Affine(self.a * other.a, self.a * other.b + self.b)

    def __call__(self, t):
        return self.a * np.asarray(t) + self.b

    def inverse(self) -> "Affine":
        return Affine(1.0 / self.a, -self.b / self.a)

    def as_mobius(self) -> "Mobius":
        """Embedding of the affine group into SL(2,R)."""
        s = math.sqrt(self.a)
        return Mobius(((s, self.b / s), (0.0, 1.0 / s)))


@dataclass(frozen=True)
class Mobius:
    """SL(2,R) element ``((a, b), (c, d))`` acting by ``t -> (a t + b)/(c t + d)``."""

    matrix: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("Mobius element needs a 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1.0) > 1e-10:
            raise ValueError(f"SL(2,R) element must have unit determinant, got {det}")
        object.__setattr__(self, "matrix", tuple(tuple(float(x) for x in row) for row in m))

    @property
    def abcd(self):
        (a, b), (c, d) = self.matrix
        return a, b, c, d

    def __matmul__(self, other: "Mobius") -> "Mobius":
        m = np.asarray(self.matrix) @ np.asarray(other.matrix)
        return Mobius(tuple(map(tuple, m)))

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(((1.0, 0.0), (0.0, 1.0)))

    @classmethod
    def random(cls, rng: np.random.Generator, spread: float = 0.4) -> "Mobius":
        a = 1.0 + rng.uniform(-spread, spread)
        b = rng.uniform(-spread, spread)
        c = rng.uniform(-spread, spread)
        d = (1.0 + b * c) / a
        return cls(((a, b), (c, d)))

    def __call__(self, t):
        a, b, c, d = self.abcd
        t = np.asarray(t, dtype=float)
        return (a * t + b) / (c * t + d)

    def inverse_map(self, t):
        a, b, c, d = self.abcd
        t = np.asarray(t, dtype=float)
        return (d * t - b) / (-c * t + a)


class Diffeo:
    """Orientation-preserving diffeomorphism of the line.

    ``inverse`` is optional; without it the inverse is found by bracketed
    Newton iteration, which is safe because ``F`` is strictly increasing.
    """

    def __init__(self, func: Callable, deriv: Callable, inverse: Callable | None = None,
                 check_grid: Sequence[float] | None = None):
        self.func = func
        self.deriv = deriv
        self._inverse = inverse
        grid = np.linspace(-50, 50, 2001) if check_grid is None else np.asarray(check_grid, dtype=float)
        if np.any(np.asarray(deriv(grid)) <= 0):
            raise ValueError("diffeomorphism derivative must be strictly positive")

    @classmethod
    def from_affine(cls, g: Affine) -> "Diffeo":
        return cls(lambda t: g.a * np.asarray(t) + g.b,
                   lambda t: np.full_like(np.asarray(t, dtype=float), g.a),
                   lambda t: (np.asarray(t) - g.b) / g.a)

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self._inverse is not None:
            return self._inverse(y)
        x = y.copy()
        for _ in range(60):
            step = (self.func(x) - y) / self.deriv(x)
            x = x - step
            if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(x))):
                break
        return x


# ---------------------------------------------------------------------------
# Actions on test functions


def affine_pull(g: TestFunction, a: float, b: float) -> TestFunction:
    """``(r_{a,b} g)(t) = g((t - b)/a) / a``; exact on atoms."""
    if not a > 0:
        raise ValueError(f"dilation must be positive, got {a}")
    atoms = tuple(x.affine(a, b) for x in g.atoms)
    return TestFunction(atoms, tuple(w.pulled(a, b) for w in g.wrappers))


def _require_decay(g: TestFunction, needed: str, what: str):
    decay = g.decay
    if decay is None or DECAY_RANK[decay] < DECAY_RANK[needed]:
        raise ValueError(f"{what} needs decay class {needed!r} or better, got {decay!r}")


def _mobius_image(g: TestFunction, C: Mobius, weight: int) -> TestFunction:
    a, b, c, d = C.abcd
    # Argument matrix of t -> (dt - b)/(-ct + a), whose cocycle is -ct + a.
    N = (d, -b, -c, a)
    label = "mobius_boson" if weight == 2 else "mobius_fermion"
    parts = []
    if g.atoms:
        parts.append(Wrapper.from_chart(MobiusChart(TestFunction(g.atoms), N, weight), label))
    for w in g.wrappers:
        if w.chart is not None and w.chart.weight == weight:
            parts.append(Wrapper.from_chart(w.chart.then(N), label))
        else:
            parts.append(_generic_mobius(w, C, weight, label))
    return TestFunction((), tuple(parts))


def _generic_mobius(w: Wrapper, C: Mobius, weight: int, label: str) -> Wrapper:
    a, b, c, d = C.abcd

    def func(t):
        t = np.asarray(t, dtype=float)
        den = -c * t + a
        with np.errstate(divide="ignore", invalid="ignore"):
            out = den ** (-weight) * w((d * t - b) / den)
        return np.where(den == 0.0, 0.0, out)

    if c == 0.0:
        decay = w.decay
        singular: tuple[float, ...] = ()
    else:
        decay = "t2" if weight == 2 else "t1"
        singular = (a / c,)
    singular = singular + tuple(float(C(s)) for s in w.singular if c * s + d != 0)
    edges = [float(C(x)) for x in (-w.radius, w.radius) if c * x + d != 0]
    radius = min(max([10.0, *(abs(e) for e in edges), *(2 * abs(s) + 1 for s in singular)]), 500.0)
    known = w.known_zero_mode if weight == 2 else None
    return Wrapper(func, decay, singular, radius, known, label)


def mobius_boson(g: TestFunction, C: Mobius) -> TestFunction:
    """Weight-two action ``(r_C g)(t) = (-ct+a)^{-2} g((dt-b)/(-ct+a))``."""
    _require_decay(g, "t2", "mobius_boson")
    return _mobius_image(g, C, 2)


def mobius_fermion(g: TestFunction, C: Mobius) -> TestFunction:
    """Weight-one action ``(r^f_C g)(t) = (-ct+a)^{-1} g((dt-b)/(-ct+a))``."""
    _require_decay(g, "t1", "mobius_fermion")
    return _mobius_image(g, C, 1)


def diffeo_pull(g: TestFunction, F: Diffeo) -> TestFunction:
    """Push ``g`` forward as a density: ``(r_F g)(t) = g(F^{-1}(t)) / F'(F^{-1}(t))``."""

    def func(t):
        s = F.inverse(t)
        return evaluate(g, s) / F.deriv(s)

    lo, hi = _bulk(g)
    radius = max(abs(float(F(lo))), abs(float(F(hi))), 10.0)
    singular = tuple(float(F(s)) for s in _singular_points(g))
    known = g.zero_mode if g.is_atomic else None
    return TestFunction((), (Wrapper(func, g.decay, singular, radius, known, "diffeo"),))


# ---------------------------------------------------------------------------
# Mover pairs and spacetime functions


@dataclass(frozen=True)
class MoverPair:
    """Right/left mover data ``(g_R, g_L)`` with a shared zero mode."""

    g_R: TestFunction
    g_L: TestFunction
    tol: float = field(default=WRAPPER_TOL, compare=False)

    def __post_init__(self):
        zr, zl = self.g_R.zero_mode, self.g_L.zero_mode
        if abs(zr - zl) > self.tol:
            raise ValueError(f"mover zero modes differ: {zr!r} vs {zl!r}")

    @property
    def zero_mode(self) -> float:
        return 0.5 * (self.g_R.zero_mode + self.g_L.zero_mode)

    def __add__(self, other: "MoverPair") -> "MoverPair":
        return MoverPair(self.g_R + other.g_R, self.g_L + other.g_L)

    def __neg__(self) -> "MoverPair":
        return MoverPair(-self.g_R, -self.g_L)

    def __mul__(self, s: float) -> "MoverPair":
        return MoverPair(self.g_R * s, self.g_L * s)

    __rmul__ = __mul__

    def key(self):
        return self.g_R.key(), self.g_L.key()

    def is_zero(self) -> bool:
        return self.g_R.is_zero() and self.g_L.is_zero()

    @classmethod
    def zero(cls) -> "MoverPair":
        return cls(TestFunction(), TestFunction())

    def to_dict(self) -> dict:
        return {"g_R": self.g_R.to_dict(), "g_L": self.g_L.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "MoverPair":
        return cls(TestFunction.from_dict(data["g_R"]), TestFunction.from_dict(data["g_L"]))


@dataclass(frozen=True)
class SpacetimeFunction:
    """Finite sum of tensor products ``u_i(t) v_i(x)`` of atom-only factors."""

    terms: tuple[tuple[TestFunction, TestFunction], ...]

    def __post_init__(self):
        for u, v in self.terms:
            if u.wrappers or v.wrappers:
                raise TypeError("spacetime factors must be atom-only")

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return sum(evaluate(u, t) * evaluate(v, x) for u, v in self.terms)

    def fourier(self, E, p):
        """``f^(E,p) = int f(t,x) exp(iEt - ipx) dt dx``."""
        return sum(np.conj(u.fourier(E)) * v.fourier(p) for u, v in self.terms)

    def integral(self) -> float:
        return float(sum(u.zero_mode * v.zero_mode for u, v in self.terms))

    def light_cone_densities(self):
        """Densities of ``t+x`` and ``t-x`` under ``f`` (as atom sums)."""
        plus = TestFunction()
        minus = TestFunction()
        for u, v in self.terms:
            plus = plus + convolve(u, v)
            minus = minus + convolve(u, v.reflect())
        return plus, minus


def from_spacetime(f: SpacetimeFunction) -> MoverPair:
    """Movers with ``g_R^(k) = f^(k,k)`` and ``g_L^(k) = f^(k,-k)``.

    ``g_R`` is the density of ``x - t`` and ``g_L`` the density of
    ``-(t + x)`` under ``f``.
    """
    plus, minus = f.light_cone_densities()
    return MoverPair(minus.reflect(), plus.reflect(), tol=ATOM_TOL)


# ---------------------------------------------------------------------------
# Wrapper quadrature


def _bulk(g: TestFunction) -> tuple[float, float]:
    lo, hi = [], []
    for a in g.atoms:
        lo.append(a.center - 12 * a.width)
        hi.append(a.center + 12 * a.width)
    for w in g.wrappers:
        lo.append(-w.radius)
        hi.append(w.radius)
    if not lo:
        return -1.0, 1.0
    return min(lo), max(hi)


def _singular_points(g: TestFunction) -> list[float]:
    return sorted({s for w in g.wrappers for s in w.singular})


def _wrapper_zero_mode(w: Wrapper) -> float:
    if w.known_zero_mode is not None:
        return w.known_zero_mode
    if "zero_mode" in w._cache:
        return w._cache["zero_mode"]
    if w.chart is not None:
        value = float(np.real(_chart_fourier(w, np.zeros(1))[0][0]))
    elif w.decay == "t1":
        # 1/t tails are odd at leading order; integrate them symmetrically.
        pts = sorted({abs(x) for x in w.singular})
        value = integrate(lambda u: w(u) + w(-u), 0.0, np.inf, epsabs=1e-13,
                          epsrel=1e-12, points=pts)[0]
    else:
        value = integrate(w, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, points=w.singular)[0]
    w._cache["zero_mode"] = value
    return value


# GL orders for the value and the error estimate; panel phase ``k h`` capped.
_GL_HI, _GL_LO = 20, 14
_MAX_PHASE = 8.0
_GL = {n: np.polynomial.legendre.leggauss(n) for n in (_GL_HI, _GL_LO)}


def _central_rule(w: Wrapper, T: float, kmax: float):
    """Nodes, high/low-order weights and samples of ``w`` on ``[-T, T]``."""
    bucket = 2.0 ** math.ceil(math.log2(max(kmax, 1.0)))
    key = ("central", T, bucket)
    if key in w._cache:
        return w._cache[key]
    pkey = ("partition", T)
    if pkey not in w._cache:
        pts = [x for x in w.singular if -T < x < T]
        scale = float(np.max(np.abs(w(np.linspace(-T, T, 4001))))) or 1.0
        edges = adaptive_partition(lambda t: np.abs(w(t)), -T, T,
                                   epsabs=1e-14 * scale * T, epsrel=1e-13, points=pts)
        # Drop panels on which w is negligible; their mass goes to the error.
        x, wt = _GL[_GL_HI]
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        mass = np.abs(w((mid[:, None] + half[:, None] * x).ravel())).reshape(len(mid), -1) @ wt * half
        keep = mass > 1e-18 * max(float(np.sum(mass)), 1e-300)
        w._cache[pkey] = ([(a, b) for a, b, k in zip(edges[:-1], edges[1:], keep) if k],
                          float(np.sum(mass[~keep])))
    panels, dropped = w._cache[pkey]
    pieces = [refine_panels([a, b], _MAX_PHASE / bucket) for a, b in panels]
    lo = np.concatenate([p[:-1] for p in pieces])
    hi = np.concatenate([p[1:] for p in pieces])
    if len(lo) > 200_000:
        raise QuadratureError(f"wrapper transform at k={kmax!r} needs {len(lo)} panels", None, None)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    rules = []
    for n in (_GL_HI, _GL_LO):
        x, wt = _GL[n]
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * wt[None, :]).ravel()
        rules.append((nodes, weights * w(nodes)))
    w._cache[key] = (rules, dropped)
    return w._cache[key]


def _panel_transform(rule, ks):
    rules, dropped = rule
    vals = []
    for nodes, fw in rules:
        out = np.empty(len(ks), dtype=complex)
        step = max(1, 4_000_000 // max(len(nodes), 1))
        for j in range(0, len(ks), step):
            kk = ks[j:j + step]
            out[j:j + step] = np.exp(-1j * np.outer(kk, nodes)) @ fw
        vals.append(out)
    return vals[0], np.abs(vals[0] - vals[1]) + dropped


def _chart_tails(chart: MobiusChart, T: float, ks: np.ndarray):
    """Exact tail integrals beyond ``|t| = T`` from the Laurent series."""
    t_star = chart.pole
    m = chart.weight
    S_right, S_left = T - t_star, T + t_star
    S0 = min(S_right, S_left)
    B = chart.laurent(S0)
    out = np.zeros(len(ks), dtype=complex)
    last = 0.0
    zero = ks == 0
    nz = ~zero
    for n, coef in enumerate(B):
        j = m + n
        # S0^n S^{1-j} = S^{1-m} (S0/S)^n
        wr = S_right ** (1 - m) * (S0 / S_right) ** n
        wl = S_left ** (1 - m) * (S0 / S_left) ** n
        if abs(coef) * max(wr, wl) < 1e-22:
            continue
        right = np.empty(len(ks), dtype=complex)
        left = np.empty(len(ks), dtype=complex)
        if j == 1:
            # Principal-value pairing of the 1/t tails at k = 0.
            right[zero] = math.log(S_left / S_right)
            left[zero] = 0.0
        else:
            right[zero] = 1.0 / (j - 1)
            left[zero] = (-1) ** j / (j - 1)
        right[nz] = expint_array(j, 1j * ks[nz] * S_right)
        left[nz] = (-1) ** j * expint_array(j, -1j * ks[nz] * S_left)
        out += coef * (wr * right + wl * left)
        last = abs(coef) * (wr + wl)
    return np.exp(-1j * ks * t_star) * out, last


def _chart_fourier(w: Wrapper, ks: np.ndarray):
    ks = np.asarray(ks, dtype=float)
    T, need_tails = w.chart.truncation()
    value, err = _panel_transform(_central_rule(w, T, float(np.max(ks, initial=1.0))), ks)
    if need_tails:
        tail, bound = _chart_tails(w.chart, T, ks)
        value = value + tail
        err = err + bound
    return value, err


def _schwartz_fourier(w: Wrapper, ks: np.ndarray):
    T = w.radius
    if ("tail_mass", T) not in w._cache:
        f = lambda t: np.abs(w(t))
        mass = integrate(f, T, np.inf, epsabs=1e-15)[0] + integrate(f, -np.inf, -T, epsabs=1e-15)[0]
        w._cache[("tail_mass", T)] = mass
    value, err = _panel_transform(_central_rule(w, T, float(np.max(ks, initial=1.0))), ks)
    return value, err + w._cache[("tail_mass", T)]


def _wrapper_fourier_batch(w: Wrapper, ks: np.ndarray, tol: float):
    """Transform of one wrapper at non-negative ``ks``; returns ``(value, error)``."""
    if w.chart is not None:
        return _chart_fourier(w, ks)
    if w.decay == "schwartz":
        return _schwartz_fourier(w, ks)
    vals = np.empty(len(ks), dtype=complex)
    for j, k in enumerate(ks):
        vals[j] = _wrapper_fourier_qawf(w, float(k), tol)
    return vals, np.full(len(ks), tol)


def _quad(func, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", spi.IntegrationWarning)
        try:
            return spi.quad(func, a, b, **kw)
        except spi.IntegrationWarning as exc:
            raise QuadratureError(f"QUADPACK: {exc}", None, None) from exc


def _wrapper_fourier_qawf(w: Wrapper, k: float, tol: float) -> complex:
    """Per-frequency QUADPACK fallback for wrappers without a tail model."""
    if k == 0.0:
        return complex(_wrapper_zero_mode(w))
    f = lambda t: float(w(t))
    T = w.radius
    cuts = sorted({-T, T, *(x for x in w.singular if -T < x < T)})
    cos_part = sin_part = err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        c, ec = _quad(f, lo, hi, weight="cos", wvar=k, limit=800, epsabs=tol)
        s, es = _quad(f, lo, hi, weight="sin", wvar=k, limit=800, epsabs=tol)
        cos_part += c
        sin_part += s
        err += ec + es
    fneg = lambda u: float(w(-u))
    c1, e1 = _quad(f, T, np.inf, weight="cos", wvar=k, limlst=200, epsabs=tol)
    s1, e2 = _quad(f, T, np.inf, weight="sin", wvar=k, limlst=200, epsabs=tol)
    c2, e3 = _quad(fneg, T, np.inf, weight="cos", wvar=k, limlst=200, epsabs=tol)
    s2, e4 = _quad(fneg, T, np.inf, weight="sin", wvar=k, limlst=200, epsabs=tol)
    cos_part += c1 + c2
    sin_part += s1 - s2
    err += e1 + e2 + e3 + e4
    if err > 100 * tol:
        raise QuadratureError("wrapper Fourier transform", complex(cos_part, -sin_part), err)
    return complex(cos_part, -sin_part)


def _wrapper_cutoff(w: Wrapper, threshold: float) -> float:
    """Momentum beyond which ``|w^(k)|`` stays below ``threshold * int |w|``."""
    key = ("cutoff", threshold)
    if key in w._cache:
        return w._cache[key]
    T = w.radius if w.chart is None else w.chart.truncation()[0]
    grid = np.linspace(-T, T, 20001)
    mass = float(np.sum(np.abs(w(grid))) * (grid[1] - grid[0])) or 1.0
    k = 1.0
    below = 0
    while k < 1e4:
        ks = k * np.array([1.0, 1.1, 1.25, 1.4])
        val, _ = _wrapper_fourier_batch(w, ks, WRAPPER_TOL)
        if np.max(np.abs(val)) < threshold * mass:
            below += 1
            if below == 2:
                break
        else:
            below = 0
        k *= 1.5
    w._cache[key] = k
    return k


def _quad_odd_primitive(g: TestFunction, t):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t_arr)
    total = g.zero_mode
    f = lambda s: evaluate(g, s)
    pts = _singular_points(g)
    for j, tj in enumerate(t_arr):
        right = integrate(f, tj, np.inf, epsabs=1e-13, epsrel=1e-12, points=pts)[0]
        out[j] = 0.5 * total - right
    if np.ndim(t) == 0:
        return float(out[0])
    return out
