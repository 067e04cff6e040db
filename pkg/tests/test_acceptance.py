"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (the lines print even under capture)
or ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from masslessfield import classical as cl
from masslessfield import fock as fk
from masslessfield import forms as fm
from masslessfield import vertex as vx
from masslessfield import weyl as wy
from masslessfield._special import EULER_GAMMA
from masslessfield.samples import random_function, random_pair, random_weyl_pairs
from masslessfield.testfn import (
    Mobius,
    MoverPair,
    SpacetimeFunction,
    TestFunction,
    affine_pull,
    derivative,
    fourier,
    gaussian,
    mobius_boson,
)

# Pinned tolerances.
RAW_TOL, GAUSS_TOL, C1_SECONDS = 1e-6, 1e-8, 10.0
DUALITY_TOL, C2_SECONDS = 1e-6, 60.0
ANOMALY_TOL, POINCARE_TOL, SL2_TOL = 1e-6, 1e-6, 1e-5
ASSOC_TOL, GRAM_TOL, OMEGA_POINCARE_TOL = 1e-9, 1e-7, 1e-6
POWER_TOL, SMEAR_REL, C5_SECONDS = 1e-8, 0.01, 120.0
SUSY_TOL, SECTOR_TOL, GAUGE_TOL, SLOPE_REL, C6_SECONDS = 1e-10, 1e-10, 1e-7, 0.05, 300.0
BRACKET_TOL, ROUND_TRIP_TOL, CAUSAL_TOL = 1e-6, 1e-7, 1e-6
BRIDGE_REL = 0.02

SEED = 7


def _emit(line, capsys=None):
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


def report(number, title, passed, detail, capsys=None):
    _emit(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail}", capsys)
    return passed


def criterion_1():
    rng = np.random.default_rng([SEED, 1])
    fam = [random_function(rng) for _ in range(20)]
    start = time.perf_counter()
    worst = 0.0
    for i, g in enumerate(fam):
        h = fam[(i + 1) % len(fam)]
        for a, b in ((g, g), (g, h)):
            worst = max(worst, abs(fm.reg_form(a, b).value - fm.reg_form_raw(a, b, eps=1e-8).value))
    gauss = abs(fm.reg_form(gaussian(), gaussian(), 1.0).value - (-EULER_GAMMA / 2) / (2 * math.pi))
    elapsed = time.perf_counter() - start
    ok = worst <= RAW_TOL and gauss <= GAUSS_TOL and elapsed < C1_SECONDS
    return ok, f"raw max {worst:.2e} <= {RAW_TOL:g}; gaussian {gauss:.2e} <= {GAUSS_TOL:g}; {elapsed:.2f}s"


def criterion_2():
    rng = np.random.default_rng([SEED, 2])
    start = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        g1, g2 = random_function(rng), random_function(rng)
        mu = float(rng.uniform(0.5, 2.0))
        worst = max(worst, abs(fm.reg_form(g1, g2, mu).value - fm.reg_form_position(g1, g2, mu).value))
    elapsed = time.perf_counter() - start
    return worst <= DUALITY_TOL and elapsed < C2_SECONDS, f"max {worst:.2e} <= {DUALITY_TOL:g}; {elapsed:.2f}s"


def criterion_3():
    rng = np.random.default_rng([SEED, 3])
    anomaly = 0.0
    for _ in range(5):
        g1, g2 = random_function(rng), random_function(rng)
        b = float(rng.normal())
        shift = fm.reg_form(affine_pull(g1, math.e, b), affine_pull(g2, math.e, b)).value - fm.reg_form(g1, g2).value
        # Measured in units of 1/(2 pi): -ln(a) g1^(0) g2^(0).
        anomaly = max(anomaly, abs(2 * math.pi * shift + g1.zero_mode * g2.zero_mode))
    G = gaussian()
    unit = 2 * math.pi * (fm.reg_form(affine_pull(G, math.e, 0), affine_pull(G, math.e, 0)).value
                          - fm.reg_form(G, G).value)
    anomaly = max(anomaly, abs(unit + 1.0))

    def sym(p, q):
        return fm.reg_form(p.g_R, q.g_R).value + fm.reg_form(p.g_L, q.g_L).value

    poinc = 0.0
    for _ in range(5):
        p1, p2 = random_pair(rng), random_pair(rng)
        a, bR, bL = float(rng.uniform(0.5, 2.0)), float(rng.normal()), float(rng.normal())
        boost = lambda p: MoverPair(affine_pull(p.g_R, a, bR), affine_pull(p.g_L, 1 / a, bL))
        poinc = max(poinc, abs(sym(boost(p1), boost(p2)) - sym(p1, p2)))
    sl2 = 0.0
    h1, h2 = derivative(random_function(rng, atoms=1)), derivative(random_function(rng, atoms=1))
    base = fm.reg_form(h1, h2).value
    for _ in range(5):
        C = Mobius.random(rng, spread=0.3)
        sl2 = max(sl2, abs(fm.reg_form(mobius_boson(h1, C), mobius_boson(h2, C)).value - base))
    ok = anomaly <= ANOMALY_TOL and poinc <= POINCARE_TOL and sl2 <= SL2_TOL
    return ok, (f"anomaly {anomaly:.2e} (a=e unit shift {unit.real:+.10f}); poincare {poinc:.2e}; "
                f"sl2 {sl2:.2e} over 5 elements")


def criterion_4():
    rng = np.random.default_rng([SEED, 4])
    assoc = 0.0
    for _ in range(5):
        ps = random_weyl_pairs(rng, 3)
        W = [wy.generator(p, complex(*rng.normal(size=2))) + wy.generator(q)
             for p, q in zip(ps, ps[1:] + ps[:1])]
        lhs, rhs = wy.product(wy.product(W[0], W[1]), W[2]), wy.product(W[0], wy.product(W[1], W[2]))
        assoc = max(assoc, max(abs(lhs.coefficient(p) - rhs.coefficient(p)) for p, _ in lhs.items() + rhs.items()))
    worst = math.inf
    for _ in range(50):
        els = [wy.generator(p) for p in random_weyl_pairs(rng, int(rng.integers(2, 7)))]
        worst = min(worst, float(np.linalg.eigvalsh(wy.gram_matrix(els)).min()))
    zeros = [wy.omega(wy.generator(random_pair(rng, zero_mode=z))) for z in (1.0, -1.0, 0.5)]
    exact = all(z == 0 for z in zeros)
    poinc = 0.0
    for _ in range(5):
        A = wy.generator(random_pair(rng, zero_mode=0.0))
        a = float(rng.uniform(0.5, 2.0))
        poinc = max(poinc, abs(wy.omega(wy.poincare(A, a, float(rng.normal()), float(rng.normal()))) - wy.omega(A)))
    ok = assoc <= ASSOC_TOL and worst >= -GRAM_TOL and exact and poinc <= OMEGA_POINCARE_TOL
    return ok, (f"assoc {assoc:.2e}; gram min eig {worst:.3e} over 50 draws; superselection exact={exact}; "
                f"omega poincare {poinc:.2e}")


def criterion_5():
    start = time.perf_counter()
    beta = 1.1
    V1 = vx.VertexSpec(((0.0, beta),), ((0.3, beta),))
    V2 = vx.VertexSpec(((1.0, -beta),), ((-0.5, -beta),))
    V3 = vx.VertexSpec(((2.0, 0.5),), ((1.5, 0.5),))
    indicator = (vx.omega_vertex_product([V1, V3]) == 0 and vx.omega_vertex(V1) == 0
                 and vx.omega_vertex(vx.VertexSpec()) == 1 and vx.omega_vertex_product([V1, V2]) != 0)
    power = max(abs(vx.power_form(Vs, mu) - vx.product_prefactor(Vs, mu))
                for Vs in ([V1, V2], [V1, V2, V3], [V1, V3]) for mu in (0.5, 1.0, 2.0))
    exact = vx.omega_vertex_product([V1, V2])
    eps = 0.05
    smeared = wy.omega(wy.product(vx.gaussian_regularized_vertex(V1, eps), vx.gaussian_regularized_vertex(V2, eps)))
    rel = abs(smeared - exact) / abs(exact)
    elapsed = time.perf_counter() - start
    ok = indicator and power <= POWER_TOL and rel <= SMEAR_REL and elapsed < C5_SECONDS
    return ok, f"indicator exact={indicator}; power-form {power:.2e}; eps=0.05 rel err {rel:.2e}; {elapsed:.2f}s"


def criterion_6():
    start = time.perf_counter()
    grid = fk.ModeGrid.geometric(0.1, 2.0, 4)
    trunc = fk.Truncation(4)
    sigma = fk.CompensatingPair(gaussian(), gaussian(0.3, 0.8))
    space = fk.FockSpace(grid, trunc, sides=("R",), fermions=True)
    safe = space.safe_mask()
    Hf = fk.hamiltonians(space)["Hf_R"]
    susy, e_min = 0.0, math.inf
    bosons = fk.FockSpace(grid, trunc, sides=("R",))
    for chi in (0.0, 1.3):
        Q = fk.susy_charges(space, sigma, chi)["Q_R"]
        R = fk.anticommutator(Q, Q) - 2 * (fk.sector_hamiltonian(space, chi, sigma) + Hf)
        susy = max(susy, fk.restricted_norm(R, safe, columns_only=True))
        e_min = min(e_min, fk.sector_ground_state(fk.sector_hamiltonian(bosons, chi, sigma))[0])
    both = fk.FockSpace(fk.ModeGrid.geometric(0.1, 2.0, 2), fk.Truncation(3), fermions=True)
    Qs = fk.susy_charges(both, sigma, 1.3)
    split = float(abs(fk.anticommutator(Qs["Q_R"], Qs["Q_L"]).matrix).max())
    sigma2 = fk.CompensatingPair(gaussian(0.02, 1.05), sigma.sigma_L)
    xi = sigma2.sigma_R - sigma.sigma_R
    U = fk.gauge_unitary(bosons, xi, None, 1.3, sigma)
    low = bosons.low_mask()
    gauge = fk.restricted_norm(U @ fk.sector_hamiltonian(bosons, 1.3, sigma) @ U.dag
                               - fk.sector_hamiltonian(bosons, 1.3, sigma2), low)
    xh = fourier(xi, grid.k)
    for i, a in enumerate(fk.build_boson_ops(bosons, "R").a):
        gauge = max(gauge, fk.restricted_norm(U @ a @ U.dag - (a - 1j * 1.3 * xh[i] * bosons.identity()), low))
    slopes = fk.overlap_log_slope(1.0, sigma, [1e-2, 1e-4, 1e-6])
    target = 1 / (2 * math.pi)
    slope_err = max(abs(s - target) / target for s in slopes)
    elapsed = time.perf_counter() - start
    ok = (susy <= SUSY_TOL and split == 0.0 and e_min >= -SECTOR_TOL and gauge <= GAUGE_TOL
          and slope_err <= SLOPE_REL and elapsed < C6_SECONDS)
    return ok, (f"M={grid.size} N={trunc.max_occupation}: susy {susy:.2e}; {{Q_R,Q_L}} max {split:g}; "
                f"min eig {e_min:.2e}; gauge {gauge:.2e}; slopes {', '.join(f'{s:.5f}' for s in slopes)} "
                f"vs {target:.5f}; {elapsed:.2f}s")


def criterion_7():
    rng = np.random.default_rng([SEED, 7])
    three = rt = 0.0
    x = np.linspace(-6, 6, 49)
    for _ in range(4):
        s1 = cl.ClassicalSolution(random_function(rng), random_function(rng))
        s2 = cl.ClassicalSolution(random_function(rng), random_function(rng))
        P = [cl.poisson(s1, s2, m) for m in ("initial", "sgn", "movers")]
        three = max(three, max(P) - min(P))
        f0, f1 = cl.to_initial(s1)
        back = cl.from_initial(f0, f1)
        rt = max(rt, np.max(np.abs(back.g_R(x) - s1.g_R(x))), np.max(np.abs(back.g_L(x) - s1.g_L(x))),
                 np.max(np.abs(cl.evaluate_solution(s1, 0.0, x) - f0(x))))
        mv = cl.from_movers(*cl.movers(s1))
        rt = max(rt, np.max(np.abs(mv.g_R(x) - s1.g_R(x))))
    bump = lambda t0, x0: SpacetimeFunction(((gaussian(t0, 0.3), gaussian(x0, 0.3)),))
    causal = max(abs(fm.commutator_spacetime(bump(0.0, -4.0), bump(0.0, 4.0))),
                 abs(fm.commutator_spacetime(bump(1.0, -5.0), bump(-0.5, 3.0))))
    ok = three <= BRACKET_TOL and rt <= ROUND_TRIP_TOL and causal <= CAUSAL_TOL
    return ok, f"three-way {three:.2e}; round trip {rt:.2e}; spacelike commutator {causal:.2e}"


def criterion_8():
    g1, g2 = derivative(gaussian(0.0, 1.0)), derivative(gaussian(0.7, 0.8))
    p1, p2 = MoverPair(g1, TestFunction()), MoverPair(g2, TestFunction())
    sigma = fk.CompensatingPair(gaussian(), gaussian())
    ref = fm.commutator_value(p1, p2)
    errors = []
    for M in (4, 8, 16):
        space = fk.FockSpace(fk.ModeGrid.uniform(6.0, M), fk.Truncation(1), sides=("R",))
        v = fk.vacuum_commutator(space, fk.field_operator(space, p1, sigma), fk.field_operator(space, p2, sigma))
        errors.append(abs(v - ref) / abs(ref))
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    ok = monotone and errors[-1] < BRIDGE_REL
    return ok, f"relative errors M=4,8,16: {', '.join(f'{e:.2e}' for e in errors)}; monotone={monotone}"


CRITERIA = [
    (1, "regularized-form oracle equivalence", criterion_1),
    (2, "momentum/position duality", criterion_2),
    (3, "symmetry suite", criterion_3),
    (4, "Weyl algebra and state", criterion_4),
    (5, "vertex operators", criterion_5),
    (6, "truncated Fock suite", criterion_6),
    (7, "classical solutions", criterion_7),
    (8, "field-operator bridge", criterion_8),
]


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, detail = fn()
    assert report(number, title, ok, detail, capsys), detail


if __name__ == "__main__":
    results = [report(n, t, *fn()) for n, t, fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
