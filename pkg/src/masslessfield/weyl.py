r"""Weyl algebra over mover pairs and its quasi-free vacuum state.

Generators are ``e^{i phi(p)}`` for mover pairs ``p = (g_R, g_L)``.  With
``[phi(p1), phi(p2)] = c(p1, p2)`` (a number, see
:func:`masslessfield.forms.commutator_value`) the product law is

.. math:: e^{i\phi(p_1)} e^{i\phi(p_2)} = e^{-c(p_1,p_2)/2}\, e^{i\phi(p_1+p_2)},

and the state is ``omega(e^{i phi(p)}) = exp(-(1/2)[(g_R|g_R) + (g_L|g_L)])``
when ``p`` has zero mode 0, and ``0`` otherwise.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .forms import commutator_value, reg_form
from .testfn import MoverPair, affine_pull

__all__ = [
    "WeylElement",
    "ZERO_MODE_THRESHOLD",
    "identity",
    "generator",
    "product",
    "adjoint",
    "omega",
    "normal_order",
    "normal_order_prefactor",
    "gram_matrix",
    "poincare",
]

ZERO_MODE_THRESHOLD = 1e-8


@dataclass(frozen=True)
class WeylElement:
    """Finite combination ``sum_j c_j e^{i phi(p_j)}``.

    ``terms`` maps the canonical key of ``p_j`` to ``(p_j, c_j)``; zero
    coefficients are never stored.
    """

    terms: dict = field(default_factory=dict)
    error: float = 0.0

    def __post_init__(self):
        clean = {k: (p, complex(c)) for k, (p, c) in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_pairs(cls, items: Iterable[tuple[MoverPair, complex]], error: float = 0.0) -> "WeylElement":
        terms: dict = {}
        for pair, coef in items:
            key = pair.key()
            if key in terms:
                terms[key] = (terms[key][0], terms[key][1] + coef)
            else:
                terms[key] = (pair, complex(coef))
        return cls(terms, error)

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        return [(p, c) for p, c in self.terms.values()]

    def coefficient(self, pair: MoverPair) -> complex:
        return self.terms.get(pair.key(), (None, 0j))[1]

    def __add__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement.from_pairs(self.items() + other.items(), self.error + other.error)

    def __sub__(self, other: "WeylElement") -> "WeylElement":
        return self + other.scale(-1.0)

    def scale(self, s: complex) -> "WeylElement":
        return WeylElement.from_pairs([(p, s * c) for p, c in self.items()], abs(s) * self.error)

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def close_to(self, other: "WeylElement", tol: float) -> bool:
        keys = set(self.terms) | set(other.terms)
        get = lambda e, k: e.terms.get(k, (None, 0j))[1]
        return all(abs(get(self, k) - get(other, k)) <= tol for k in keys)

    def to_dict(self) -> list:
        return [
            {"coefficient": [c.real, c.imag], "pair": p.to_dict()}
            for p, c in sorted(self.items(), key=lambda pc: repr(pc[0].key()))
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "WeylElement":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError("Weyl element document must be a list of terms")
        return cls.from_pairs(
            (MoverPair.from_dict(item["pair"]), complex(*item["coefficient"])) for item in data
        )


def identity() -> WeylElement:
    return generator(MoverPair.zero())


def generator(pair: MoverPair, coefficient: complex = 1.0) -> WeylElement:
    return WeylElement.from_pairs([(pair, coefficient)])


def product(A: WeylElement, B: WeylElement) -> WeylElement:
    """Bilinear extension of the Weyl product law."""
    items = []
    for p1, c1 in A.items():
        for p2, c2 in B.items():
            if p1.is_zero() or p2.is_zero():
                phase = 1.0
            else:
                phase = cmath.exp(-0.5 * commutator_value(p1, p2))
            items.append((p1 + p2, c1 * c2 * phase))
    return WeylElement.from_pairs(items, A.error + B.error)


def adjoint(A: WeylElement) -> WeylElement:
    return WeylElement.from_pairs([(-p, c.conjugate()) for p, c in A.items()], A.error)


def _self_form(pair: MoverPair, mu) -> complex:
    return reg_form(pair.g_R, pair.g_R, mu).value + reg_form(pair.g_L, pair.g_L, mu).value


def _omega_generator(pair: MoverPair) -> float:
    if pair.is_zero():
        return 1.0
    if abs(pair.zero_mode) > ZERO_MODE_THRESHOLD:
        return 0.0
    # With zero mode 0 the form is the plain convergent integral, mu-free.
    return math.exp(-0.5 * _self_form(pair, 1.0).real)


def omega(A: WeylElement) -> complex:
    """Vacuum expectation value of a Weyl combination."""
    return complex(sum(c * _omega_generator(p) for p, c in A.items()))


def normal_order_prefactor(pair: MoverPair, mu=1.0) -> float:
    """``exp((1/2)(g_R|g_R) + (1/2)(g_L|g_L))`` with the forms at ``mu``."""
    if pair.is_zero():
        return 1.0
    return math.exp(0.5 * _self_form(pair, mu).real)


def normal_order(A: WeylElement, mu=1.0) -> WeylElement:
    """``:e^{i phi(p)}:``, generator by generator."""
    return WeylElement.from_pairs([(p, c * normal_order_prefactor(p, mu)) for p, c in A.items()], A.error)


def gram_matrix(elements: Sequence[WeylElement]) -> np.ndarray:
    """``M_ij = omega(adjoint(W_i) W_j)``."""
    n = len(elements)
    M = np.empty((n, n), dtype=complex)
    for i in range(n):
        Ai = adjoint(elements[i])
        for j in range(i, n):
            M[i, j] = omega(product(Ai, elements[j]))
            M[j, i] = M[i, j].conjugate()
    return M


def poincare(A: WeylElement, a: float, b_R: float = 0.0, b_L: float = 0.0) -> WeylElement:
    """Apply the dilation/translation ``(a, b_R)`` to right and ``(1/a, b_L)`` to left movers."""
    items = []
    for p, c in A.items():
        q = MoverPair(affine_pull(p.g_R, a, b_R), affine_pull(p.g_L, 1.0 / a, b_L))
        items.append((q, c))
    return WeylElement.from_pairs(items, A.error)

