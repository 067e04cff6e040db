r"""Classical solutions of the 1+1 dimensional wave equation.

A solution ``phi(t, x) = phi_R(t - x) + phi_L(t + x)`` is stored through the
mover derivatives ``g_R = phi_R'`` and ``g_L = phi_L'``.  The movers and the
initial position ``f_0`` are bounded functions with Schwartz derivative and
antisymmetric asymptotes; they are held as :class:`OddPrimitive` values,
which keep the derivative and recover the function as

.. math:: F(t) = \tfrac12 \int F'(s)\,\mathrm{sgn}(t-s)\,ds,
          \qquad F(\pm\infty) = \pm\tfrac12 \int F'.

The Poisson bracket ``P = int f01 f12 - int f02 f11`` is computed from the
initial data, from the double sign integral
``-S(g_R1, g_R2) - S(g_L1, g_L2)`` with
``S(a, b) = int int a(t) b(s) sgn(t - s)``, and from the movers as
``-2 int (g_R1 phi_R2 + g_L1 phi_L2)``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._quad import integrate
from .forms import sgn_pairing
from .testfn import MoverPair, TestFunction, _bulk, _singular_points, evaluate

__all__ = [
    "OddPrimitive",
    "ClassicalSolution",
    "SpaceClass",
    "CLASS_TOL",
    "MOVERS_DISPLAY_FACTOR",
    "COMMUTATOR_PER_BRACKET",
    "from_initial",
    "to_initial",
    "from_movers",
    "movers",
    "mover_by_quadrature",
    "evaluate_solution",
    "poisson",
    "classify",
]

CLASS_TOL = 1e-8

# poisson(...) = MOVERS_DISPLAY_FACTOR * (1/2) int (phi_R1' phi_R2 + phi_L1' phi_L2).
MOVERS_DISPLAY_FACTOR = -4.0
# commutator_value(p1, p2) = COMMUTATOR_PER_BRACKET * poisson(sol1, sol2).
COMMUTATOR_PER_BRACKET = -0.5j


@dataclass(frozen=True)
class OddPrimitive:
    """Bounded function with Schwartz derivative and ``F(inf) = -F(-inf)``."""

    derivative: TestFunction

    @property
    def asymptote(self) -> float:
        """``F(+inf)``."""
        return 0.5 * self.derivative.zero_mode

    def __call__(self, t):
        return self.derivative.odd_primitive(t)

    def reflect(self) -> "OddPrimitive":
        """``t -> F(-t)``; its derivative is ``-F'(-t)``."""
        return OddPrimitive(-self.derivative.reflect())

    def __add__(self, other: "OddPrimitive") -> "OddPrimitive":
        return OddPrimitive(self.derivative + other.derivative)

    def __mul__(self, s: float) -> "OddPrimitive":
        return OddPrimitive(self.derivative * s)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"derivative": self.derivative.to_dict(), "asymptote": self.asymptote}


class SpaceClass(str, enum.Enum):
    F00 = "F00"
    F10 = "F10"
    F01 = "F01"
    F11 = "F11"


@dataclass(frozen=True)
class ClassicalSolution:
    """Wave-equation solution given by its mover derivatives ``(g_R, g_L)``."""

    g_R: TestFunction
    g_L: TestFunction

    @cached_property
    def c0(self) -> float:
        """``lim_{t -> inf} phi(t, x)``."""
        return 0.5 * (self.g_R.zero_mode + self.g_L.zero_mode)

    @cached_property
    def c1(self) -> float:
        """``lim_{x -> inf} phi(t, x)``."""
        return 0.5 * (self.g_L.zero_mode - self.g_R.zero_mode)

    @property
    def pair(self) -> MoverPair:
        """The mover pair; requires equal integrals (class F10 or F00)."""
        return MoverPair(self.g_R, self.g_L)

    def to_dict(self) -> dict:
        return {"g_R": self.g_R.to_dict(), "g_L": self.g_L.to_dict(), "c0": self.c0, "c1": self.c1}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ClassicalSolution":
        unknown = set(data) - {"g_R", "g_L", "c0", "c1"}
        if unknown:
            raise ValueError(f"unknown solution keys {sorted(unknown)}")
        sol = cls(TestFunction.from_dict(data["g_R"]), TestFunction.from_dict(data["g_L"]))
        for name in ("c0", "c1"):
            if name in data and abs(float(data[name]) - getattr(sol, name)) > CLASS_TOL:
                raise ValueError(f"stored {name} disagrees with the mover integrals")
        return sol

    @classmethod
    def from_json(cls, text: str) -> "ClassicalSolution":
        return cls.from_dict(json.loads(text))


def _as_primitive(f0) -> OddPrimitive:
    if isinstance(f0, OddPrimitive):
        return f0
    if isinstance(f0, TestFunction):
        # A Schwartz f0 is the odd primitive of its own derivative.
        from .testfn import derivative

        return OddPrimitive(derivative(f0))
    raise TypeError("initial position must be an OddPrimitive or a TestFunction")


def from_initial(f0, f1: TestFunction) -> ClassicalSolution:
    """``g_R(t) = -f0'(-t)/2 + f1(-t)/2`` and ``g_L(t) = f0'(t)/2 + f1(t)/2``."""
    d0 = _as_primitive(f0).derivative
    g_R = (f1 - d0).reflect() * 0.5
    g_L = (f1 + d0) * 0.5
    return ClassicalSolution(g_R, g_L)


def to_initial(sol: ClassicalSolution) -> tuple[OddPrimitive, TestFunction]:
    """``f0(x) = phi_R(-x) + phi_L(x)`` and ``f1(x) = g_R(-x) + g_L(x)``."""
    f0 = OddPrimitive(sol.g_L - sol.g_R.reflect())
    f1 = sol.g_R.reflect() + sol.g_L
    return f0, f1


def movers(sol: ClassicalSolution) -> tuple[OddPrimitive, OddPrimitive]:
    """``phi_X(t) = (1/2) int g_X(t - u) sgn(u) du``."""
    return OddPrimitive(sol.g_R), OddPrimitive(sol.g_L)


def from_movers(phi_R: OddPrimitive, phi_L: OddPrimitive) -> ClassicalSolution:
    return ClassicalSolution(phi_R.derivative, phi_L.derivative)


def _points(*fs: TestFunction) -> list[float]:
    pts = set()
    for g in fs:
        lo, hi = _bulk(g)
        pts.update(np.linspace(lo, hi, 9))
        pts.update(_singular_points(g))
    return sorted(pts)


def mover_by_quadrature(g: TestFunction, t: float) -> float:
    """``(1/2) int g(t - u) sgn(u) du`` by adaptive quadrature (an independent check)."""
    pts = _points(g)
    left, _ = integrate(lambda s: evaluate(g, s), -np.inf, t, epsabs=1e-14, epsrel=1e-12,
                        points=[p for p in pts if p < t])
    right, _ = integrate(lambda s: evaluate(g, s), t, np.inf, epsabs=1e-14, epsrel=1e-12,
                         points=[p for p in pts if p > t])
    return 0.5 * (left - right)


def evaluate_solution(sol: ClassicalSolution, t, x):
    """``phi(t, x) = phi_R(t - x) + phi_L(t + x)``."""
    phi_R, phi_L = movers(sol)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    out = phi_R(t - x) + phi_L(t + x)
    return float(out) if np.ndim(out) == 0 else out


def _line_integral(f, pts) -> float:
    return integrate(f, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-11, points=pts)[0]


def poisson(sol1: ClassicalSolution, sol2: ClassicalSolution, method: str = "sgn") -> float:
    """Poisson bracket of two solutions.

    ``method`` is ``"initial"`` (``int f01 f12 - int f02 f11``), ``"sgn"``
    (double sign integrals of the mover derivatives) or ``"movers"``
    (``-2 int (g_R1 phi_R2 + g_L1 phi_L2)``).
    """
    if method == "sgn":
        return -sgn_pairing(sol1.g_R, sol2.g_R) - sgn_pairing(sol1.g_L, sol2.g_L)
    if method == "initial":
        f01, f11 = to_initial(sol1)
        f02, f12 = to_initial(sol2)
        pts = _points(f01.derivative, f11, f02.derivative, f12)
        a = _line_integral(lambda x: f01(x) * evaluate(f12, x), pts)
        b = _line_integral(lambda x: f02(x) * evaluate(f11, x), pts)
        return a - b
    if method == "movers":
        display = 0.0
        for g1, g2 in ((sol1.g_R, sol2.g_R), (sol1.g_L, sol2.g_L)):
            if g1.is_zero() or g2.is_zero():
                continue
            pts = _points(g1, g2)
            phi1, phi2 = OddPrimitive(g1), OddPrimitive(g2)
            one = _line_integral(lambda t: evaluate(g1, t) * phi2(t), pts)
            two = _line_integral(lambda t: evaluate(g2, t) * phi1(t), pts)
            # (1/2) int phi_1' phi_2, antisymmetrized so that P(s, s) = 0 exactly.
            display += 0.25 * (one - two)
        return MOVERS_DISPLAY_FACTOR * display
    raise ValueError(f"unknown Poisson bracket method {method!r}")


def classify(sol: ClassicalSolution, tol: float = CLASS_TOL) -> SpaceClass:
    """F00: ``c0 = c1 = 0``; F10: ``c1 = 0``; F01: ``c0 = 0``; otherwise F11."""
    z0, z1 = abs(sol.c0) <= tol, abs(sol.c1) <= tol
    if z0 and z1:
        return SpaceClass.F00
    if z1:
        return SpaceClass.F10
    if z0:
        return SpaceClass.F01
    return SpaceClass.F11

