r"""Vertex operators built from delta insertions.

A vertex ``V = :exp(i phi(g_R, g_L)):`` with ``g_R = sum_i beta_i delta_{t_i}``
(and likewise for left movers) has no meaning on its own, but products of
vertices with vanishing total amplitude have the vacuum value

.. math:: \omega(V_1 \cdots V_n) = \prod_{a<b}\prod_{i\in a, j\in b}
          e^{-\beta_i\beta_j W(t_i - t_j)}

per chirality, where ``W`` is the position-space kernel.  Equivalently each
factor is ``(mu e^gamma (t_i - t_j) / i)^{beta_i beta_j / 2pi}`` on the
principal branch.  Gaussian smearing of each delta gives honest Weyl elements
whose values converge to this expression.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Sequence

from ._special import EULER_GAMMA
from .forms import MassScale, kernel_W
from .testfn import Atom, MoverPair, TestFunction
from .weyl import WeylElement, generator, normal_order

__all__ = [
    "Insertion",
    "VertexSpec",
    "BALANCE_TOL",
    "omega_vertex",
    "product_prefactor",
    "power_form",
    "omega_vertex_product",
    "gaussian_regularized_vertex",
]

BALANCE_TOL = 1e-12


@dataclass(frozen=True)
class Insertion:
    time: float
    amplitude: float

    def __post_init__(self):
        if not (math.isfinite(self.time) and math.isfinite(self.amplitude)):
            raise ValueError("insertion time and amplitude must be finite")


@dataclass(frozen=True)
class VertexSpec:
    """Right and left insertions with equal total amplitude."""

    right: tuple[Insertion, ...] = ()
    left: tuple[Insertion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "right", tuple(_insertion(x) for x in self.right))
        object.__setattr__(self, "left", tuple(_insertion(x) for x in self.left))
        if abs(self.charge - sum(x.amplitude for x in self.left)) > BALANCE_TOL:
            raise ValueError("vertex is unbalanced: right and left amplitudes must have equal sums")

    @property
    def charge(self) -> float:
        return sum(x.amplitude for x in self.right)

    def translated(self, c: float) -> "VertexSpec":
        shift = lambda xs: tuple(Insertion(x.time + c, x.amplitude) for x in xs)
        return VertexSpec(shift(self.right), shift(self.left))

    def to_dict(self) -> dict:
        return {
            "right": [[x.time, x.amplitude] for x in self.right],
            "left": [[x.time, x.amplitude] for x in self.left],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VertexSpec":
        if not isinstance(data, dict):
            raise ValueError("vertex spec must be an object with 'right' and 'left'")
        unknown = set(data) - {"right", "left"}
        if unknown:
            raise ValueError(f"unknown vertex spec keys {sorted(unknown)}")
        return cls(tuple(data.get("right", ())), tuple(data.get("left", ())))

    @classmethod
    def from_json(cls, text: str) -> "VertexSpec":
        return cls.from_dict(json.loads(text))


def _insertion(x) -> Insertion:
    if isinstance(x, Insertion):
        return x
    t, beta = x
    return Insertion(float(t), float(beta))


def omega_vertex(V: VertexSpec) -> float:
    """Vacuum value of a single vertex: 1 if its charge vanishes, else 0."""
    return 1.0 if abs(V.charge) <= BALANCE_TOL else 0.0


def _cross_pairs(Vs: Sequence[VertexSpec], side: str):
    for a in range(len(Vs)):
        for b in range(a + 1, len(Vs)):
            for x in getattr(Vs[a], side):
                for y in getattr(Vs[b], side):
                    if x.time == y.time:
                        raise ValueError(f"coincident {side} insertion times {x.time!r}")
                    yield x, y


def _check_distinct(Vs: Sequence[VertexSpec]):
    for side in ("right", "left"):
        times = [x.time for V in Vs for x in getattr(V, side)]
        if len(set(times)) != len(times):
            raise ValueError(f"coincident {side} insertion times")


def product_prefactor(Vs: Sequence[VertexSpec], mu=1.0) -> complex:
    """``exp(-sum beta_i beta_j W(t_i - t_j))`` over pairs from distinct vertices, ``i`` left of ``j``."""
    scale = mu if isinstance(mu, MassScale) else MassScale(float(mu))
    _check_distinct(Vs)
    exponent = 0j
    for side in ("right", "left"):
        for x, y in _cross_pairs(Vs, side):
            exponent -= x.amplitude * y.amplitude * kernel_W(x.time - y.time, scale)
    return cmath.exp(exponent)


def power_form(Vs: Sequence[VertexSpec], mu=1.0) -> complex:
    """The same prefactor as a product of principal-branch complex powers."""
    scale = mu if isinstance(mu, MassScale) else MassScale(float(mu))
    _check_distinct(Vs)
    out = 1.0 + 0j
    for side in ("right", "left"):
        for x, y in _cross_pairs(Vs, side):
            base = scale.mu * math.exp(EULER_GAMMA) * (x.time - y.time) / 1j
            out *= cmath.exp(x.amplitude * y.amplitude / (2 * math.pi) * cmath.log(base))
    return out


def omega_vertex_product(Vs: Sequence[VertexSpec], mu=1.0) -> complex:
    """Vacuum value of ``V_1 ... V_n``: prefactor times the total-charge indicator."""
    prefactor = product_prefactor(Vs, mu)
    total = sum(V.charge for V in Vs)
    return prefactor if abs(total) <= BALANCE_TOL * max(1, len(Vs)) else 0j


def _smear(insertions: Sequence[Insertion], eps: float) -> TestFunction:
    return TestFunction(tuple(Atom(x.time, eps, (x.amplitude,)) for x in insertions))


def gaussian_regularized_vertex(V: VertexSpec, eps: float, mu=1.0) -> WeylElement:
    """``:exp(i phi(g_R, g_L)):`` with each delta replaced by a width-``eps`` Gaussian."""
    if not eps > 0:
        raise ValueError("regularization width must be positive")
    pair = MoverPair(_smear(V.right, eps), _smear(V.left, eps), tol=BALANCE_TOL * 10)
    return normal_order(generator(pair), mu)

