"""Seeded random test-function families used by the invariant suites."""

from __future__ import annotations

import numpy as np

from .testfn import Atom, MoverPair, TestFunction

__all__ = ["random_function", "random_pair", "random_weyl_pairs"]


def random_function(rng: np.random.Generator, atoms: int = 2, degree: int = 2,
                    zero_mode: float | None = None) -> TestFunction:
    """Sum of Hermite-Gaussian atoms; ``zero_mode`` pins the integral exactly.

    Only the ``He_0`` coefficients carry integral, so pinning rescales those.
    """
    parts = []
    for _ in range(atoms):
        coeffs = rng.normal(size=degree + 1) * 0.6 ** np.arange(degree + 1)
        parts.append(Atom(float(rng.uniform(-1.5, 1.5)), float(rng.uniform(0.5, 1.5)), tuple(coeffs)))
    if zero_mode is not None:
        total = sum(a.coeffs[0] for a in parts)
        shift = (zero_mode - total) / len(parts)
        parts = [Atom(a.center, a.width, (a.coeffs[0] + shift,) + tuple(a.coeffs[1:])) for a in parts]
    return TestFunction(tuple(parts))


def random_pair(rng: np.random.Generator, zero_mode: float | None = None, **kw) -> MoverPair:
    """Mover pair with a shared integral (random unless given)."""
    z = float(rng.normal()) if zero_mode is None else zero_mode
    return MoverPair(random_function(rng, zero_mode=z, **kw), random_function(rng, zero_mode=z, **kw))


def random_weyl_pairs(rng: np.random.Generator, count: int, charged: bool = True) -> list[MoverPair]:
    """Pairs for Weyl-algebra experiments, integrals in ``{-1, 0, 1}`` when ``charged``."""
    out = []
    for _ in range(count):
        z = float(rng.integers(-1, 2)) if charged else 0.0
        out.append(random_pair(rng, zero_mode=z, atoms=1, degree=1))
    return out
