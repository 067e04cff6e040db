"""Invariant suites behind ``masslessfield verify``.

Each suite returns a list of :class:`Check` records; thresholds are pinned
here and may be overridden per check name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import classical as cl
from . import fock as fk
from . import forms as fm
from . import vertex as vx
from . import weyl as wy
from ._special import EULER_GAMMA
from .samples import random_function, random_pair, random_weyl_pairs
from .testfn import (
    Mobius,
    MoverPair,
    SpacetimeFunction,
    affine_pull,
    derivative,
    fourier,
    gaussian,
    mobius_boson,
)

__all__ = ["Check", "FockSettings", "SUITES", "run_suite"]


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "threshold": self.threshold,
                "passed": self.passed, "detail": self.detail}


def _check(name, residual, threshold, overrides, **detail) -> Check:
    threshold = overrides.get(name, threshold)
    residual = float(residual)
    return Check(name, residual, float(threshold), bool(residual <= threshold), detail)


@dataclass(frozen=True)
class FockSettings:
    grid: fk.ModeGrid = field(default_factory=lambda: fk.ModeGrid.geometric(0.1, 2.0, 3))
    truncation: fk.Truncation = fk.Truncation(4)
    chis: tuple[float, ...] = (0.0, 1.3)


GAUSSIAN_SELF_FORM = -EULER_GAMMA / (4 * math.pi)


def forms_suite(rng, mu=1.0, overrides=None) -> list[Check]:
    o = overrides or {}
    G = gaussian()
    out = [_check("gaussian_self_form", abs(fm.reg_form(G, G, 1.0).value - GAUSSIAN_SELF_FORM), 1e-8, o)]
    raw = pos = split = 0.0
    for _ in range(4):
        g1, g2 = random_function(rng), random_function(rng)
        v = fm.reg_form(g1, g2, mu).value
        raw = max(raw, abs(v - fm.reg_form_raw(g1, g2, mu).value))
        pos = max(pos, abs(v - fm.reg_form_position(g1, g2, mu).value))
        split = max(split, abs(v - fm.reg_form(g1, g2, mu, split=3.0).value))
    out.append(_check("raw_oracle", raw, 1e-6, o))
    out.append(_check("position_duality", pos, 1e-6, o))
    out.append(_check("split_independence", split, 1e-10, o))
    g1, g2 = random_function(rng), random_function(rng)
    a = math.e
    shift = (fm.reg_form(affine_pull(g1, a, 0.3), affine_pull(g2, a, 0.3), mu).value
             - fm.reg_form(g1, g2, mu).value)
    # The shift in units of 2 pi is -ln(a) g1^(0) g2^(0).
    predicted = -math.log(a) * g1.zero_mode * g2.zero_mode
    out.append(_check("affine_anomaly", abs(2 * math.pi * shift - predicted), 1e-6, o))
    p1, p2 = random_pair(rng), random_pair(rng)

    def sym(p, q):
        return fm.reg_form(p.g_R, q.g_R, mu).value + fm.reg_form(p.g_L, q.g_L, mu).value

    def boost(p, a, bR, bL):
        return MoverPair(affine_pull(p.g_R, a, bR), affine_pull(p.g_L, 1 / a, bL))

    out.append(_check("poincare_invariance",
                      abs(sym(boost(p1, 1.7, 0.4, -0.2), boost(p2, 1.7, 0.4, -0.2)) - sym(p1, p2)),
                      1e-6, o))
    h1, h2 = derivative(random_function(rng, atoms=1)), derivative(random_function(rng, atoms=1))
    C = Mobius.random(rng, spread=0.3)
    out.append(_check("sl2_invariance",
                      abs(fm.reg_form(mobius_boson(h1, C), mobius_boson(h2, C), mu).value
                          - fm.reg_form(h1, h2, mu).value), 1e-5, o))
    return out


def weyl_suite(rng, mu=1.0, overrides=None) -> list[Check]:
    o = overrides or {}
    ps = random_weyl_pairs(rng, 3)
    W = [wy.generator(p, complex(*rng.normal(size=2))) + wy.generator(q) for p, q in zip(ps, ps[1:] + ps[:1])]
    lhs, rhs = (W[0] * W[1]) * W[2], W[0] * (W[1] * W[2])
    resid = max(abs(lhs.coefficient(p) - rhs.coefficient(p)) for p, _ in lhs.items() + rhs.items())
    out = [_check("associativity", resid, 1e-9, o)]
    worst = math.inf
    for _ in range(10):
        n = int(rng.integers(2, 7))
        els = [wy.generator(p) for p in random_weyl_pairs(rng, n)]
        worst = min(worst, float(np.linalg.eigvalsh(wy.gram_matrix(els)).min()))
    out.append(_check("gram_positivity", max(0.0, -worst), 1e-7, o, min_eigenvalue=worst))
    charged = random_pair(rng, zero_mode=1.0)
    out.append(_check("superselection", abs(wy.omega(wy.generator(charged))), 0.0, o))
    p = random_pair(rng, zero_mode=0.0)
    A = wy.generator(p)
    out.append(_check("poincare_state", abs(wy.omega(wy.poincare(A, 1.6, 0.5, -0.3)) - wy.omega(A)), 1e-6, o))
    return out


def vertex_suite(rng, mu=1.0, overrides=None) -> list[Check]:
    o = overrides or {}
    beta = 1.1
    V1 = vx.VertexSpec(((0.0, beta),), ((0.3, beta),))
    V2 = vx.VertexSpec(((1.0, -beta),), ((-0.5, -beta),))
    V3 = vx.VertexSpec(((2.0, 0.5),), ((1.5, 0.5),))
    indicator = (abs(vx.omega_vertex_product([V1, V3], mu)) + abs(vx.omega_vertex(V1))
                 + abs(vx.omega_vertex(vx.VertexSpec())) - 1.0)
    out = [_check("indicator_law", abs(indicator), 0.0, o)]
    Vs = [V1, V2]
    out.append(_check("power_form", abs(vx.power_form(Vs, mu) - vx.product_prefactor(Vs, mu)), 1e-8, o))
    eps = 0.05
    smeared = wy.omega(vx.gaussian_regularized_vertex(V1, eps, mu) * vx.gaussian_regularized_vertex(V2, eps, mu))
    exact = vx.omega_vertex_product(Vs, mu)
    out.append(_check("gaussian_regularization", abs(smeared - exact) / abs(exact), 0.01, o, eps=eps))
    return out


def fock_suite(rng, settings: FockSettings | None = None, overrides=None) -> list[Check]:
    o = overrides or {}
    s = settings or FockSettings()
    sigma = fk.CompensatingPair(gaussian(), gaussian(0.3, 0.8))
    space = fk.FockSpace(s.grid, s.truncation, sides=("R",), fermions=True)
    safe = space.safe_mask()
    H = fk.hamiltonians(space)
    out = []
    A = space.boson("R", 0)
    out.append(_check("ccr_safe_subspace", fk.restricted_norm(fk.commutator(A, A.dag) - space.identity(), safe,
                                                               columns_only=True), 1e-12, o))
    B = space.fermion("R", 0)
    out.append(_check("car_exact", abs((fk.anticommutator(B, B.dag) - space.identity()).matrix).max(), 0.0, o))
    for chi in s.chis:
        Q = fk.susy_charges(space, sigma, chi)["Q_R"]
        Hs = fk.sector_hamiltonian(space, chi, sigma)
        R = fk.anticommutator(Q, Q) - 2 * (Hs + H["Hf_R"])
        out.append(_check(f"susy_anticommutator_chi={chi:g}", fk.restricted_norm(R, safe, columns_only=True),
                          1e-10, o))
        e0 = fk.sector_ground_state(fk.sector_hamiltonian(fk.FockSpace(s.grid, s.truncation, sides=("R",)),
                                                          chi, sigma))[0]
        out.append(_check(f"sector_nonnegative_chi={chi:g}", max(0.0, -e0), 1e-10, o, ground_energy=e0))
    both = fk.FockSpace(fk.ModeGrid(s.grid.momenta[:2], s.grid.weights[:2]),
                        fk.Truncation(min(s.truncation.max_occupation, 3)), fermions=True)
    Qs = fk.susy_charges(both, sigma, 1.3)
    out.append(_check("susy_chiral_split", abs(fk.anticommutator(Qs["Q_R"], Qs["Q_L"]).matrix).max(), 0.0, o))
    # Gauge conjugation needs room below the edge; use at least four levels.
    gspace = fk.FockSpace(s.grid, fk.Truncation(max(s.truncation.max_occupation, 4)), sides=("R",))
    sigma2 = fk.CompensatingPair(gaussian(0.02, 1.05), sigma.sigma_L)
    xi = sigma2.sigma_R - sigma.sigma_R
    chi = 1.3
    U = fk.gauge_unitary(gspace, xi, None, chi, sigma)
    low = gspace.low_mask()
    resid = fk.restricted_norm(U @ fk.sector_hamiltonian(gspace, chi, sigma) @ U.dag
                               - fk.sector_hamiltonian(gspace, chi, sigma2), low)
    xh = fourier(xi, gspace.grid.k)
    ops = fk.build_boson_ops(gspace, "R")
    for i, a in enumerate(ops.a):
        resid = max(resid, fk.restricted_norm(U @ a @ U.dag - (a - 1j * chi * xh[i] * gspace.identity()), low))
    out.append(_check("gauge_conjugation", resid, 1e-7, o,
                      max_occupation=gspace.truncation.max_occupation))
    slopes = fk.overlap_log_slope(1.0, sigma, [1e-2, 1e-4, 1e-6])
    target = 1 / (2 * math.pi)
    out.append(_check("overlap_log_slope", abs(slopes[-1] - target) / target, 0.05, o, slopes=slopes))
    return out


def classical_suite(rng, mu=1.0, overrides=None) -> list[Check]:
    o = overrides or {}
    p1, p2 = random_pair(rng), random_pair(rng)
    s1, s2 = cl.ClassicalSolution(p1.g_R, p1.g_L), cl.ClassicalSolution(p2.g_R, p2.g_L)
    P = [cl.poisson(s1, s2, m) for m in ("initial", "sgn", "movers")]
    out = [_check("poisson_three_way", max(P) - min(P), 1e-6, o, values=P)]
    out.append(_check("poisson_antisymmetry", abs(cl.poisson(s1, s2) + cl.poisson(s2, s1)), 1e-8, o))
    f0, f1 = cl.to_initial(s1)
    back = cl.from_initial(f0, f1)
    x = np.linspace(-6, 6, 49)
    rt = max(np.max(np.abs(back.g_R(x) - s1.g_R(x))), np.max(np.abs(back.g_L(x) - s1.g_L(x))),
             np.max(np.abs(cl.evaluate_solution(s1, 0.0, x) - f0(x))))
    out.append(_check("round_trip", rt, 1e-7, o))
    cv = fm.commutator_value(p1, p2)
    out.append(_check("quantum_bridge", abs(cv - cl.COMMUTATOR_PER_BRACKET * P[1]), 1e-8, o))
    bump = lambda t0, x0: SpacetimeFunction(((gaussian(t0, 0.3), gaussian(x0, 0.3)),))
    out.append(_check("causality", abs(fm.commutator_spacetime(bump(0.0, -4.0), bump(0.0, 4.0))), 1e-6, o))
    return out


SUITES = ("forms", "weyl", "vertex", "fock", "classical")


def run_suite(name: str, seed: int = 0, mu: float = 1.0, fock: FockSettings | None = None,
              overrides: dict | None = None) -> dict[str, list[Check]]:
    """Run one suite (or ``"all"``) with a seeded generator per suite."""
    names = SUITES if name == "all" else (name,)
    out = {}
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}")
        rng = np.random.default_rng([seed, SUITES.index(n)])
        if n == "fock":
            out[n] = fock_suite(rng, fock, overrides)
        else:
            out[n] = globals()[f"{n}_suite"](rng, mu, overrides)
    return out
