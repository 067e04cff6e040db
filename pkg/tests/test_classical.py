import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import functions, pairs
from masslessfield import classical as cl
from masslessfield import forms as fm
from masslessfield.testfn import affine_pull, derivative, evaluate, gaussian


@st.composite
def solutions(draw):
    return cl.ClassicalSolution(draw(functions()), draw(functions()))


@settings(max_examples=10)
@given(solutions(), solutions())
def test_three_way_bracket(s1, s2):
    P = [cl.poisson(s1, s2, m) for m in ("initial", "sgn", "movers")]
    assert max(P) - min(P) < 1e-6


@given(solutions(), solutions())
def test_bracket_antisymmetric(s1, s2):
    assert cl.poisson(s1, s2) == pytest.approx(-cl.poisson(s2, s1), abs=1e-12)
    assert cl.poisson(s1, s1, "movers") == 0.0


@given(solutions(), solutions(), solutions(), st.floats(-2, 2))
def test_bracket_bilinear(s1, s2, s3, a):
    combo = cl.ClassicalSolution(s1.g_R + s2.g_R * a, s1.g_L + s2.g_L * a)
    assert cl.poisson(combo, s3) == pytest.approx(cl.poisson(s1, s3) + a * cl.poisson(s2, s3), abs=1e-10)


@settings(max_examples=10)
@given(solutions(), solutions(), st.floats(-2, 2))
def test_bracket_time_translation(s1, s2, tau):
    shift = lambda s: cl.ClassicalSolution(affine_pull(s.g_R, 1.0, -tau), affine_pull(s.g_L, 1.0, -tau))
    assert cl.poisson(shift(s1), shift(s2)) == pytest.approx(cl.poisson(s1, s2), abs=1e-10)


def test_sgn_pairing_oracle(oracles):
    row = oracles["sgn_pairing_gaussians"]
    a, b = gaussian(*row["a"]), gaussian(*row["b"])
    s1, s2 = cl.ClassicalSolution(a, gaussian() * 0.0), cl.ClassicalSolution(b, gaussian() * 0.0)
    for method in ("initial", "sgn", "movers"):
        assert cl.poisson(s1, s2, method) == pytest.approx(-row["value"], abs=1e-9)


@given(solutions())
def test_round_trip(s):
    f0, f1 = cl.to_initial(s)
    back = cl.from_initial(f0, f1)
    x = np.linspace(-5, 5, 21)
    assert np.allclose(back.g_R(x), s.g_R(x), atol=1e-12)
    assert np.allclose(back.g_L(x), s.g_L(x), atol=1e-12)
    assert np.allclose(cl.evaluate_solution(s, 0.0, x), f0(x), atol=1e-12)
    # d/dt phi at t = 0 is f1.
    h = 1e-4
    dt = (cl.evaluate_solution(s, h, x) - cl.evaluate_solution(s, -h, x)) / (2 * h)
    assert np.allclose(dt, evaluate(f1, x), atol=1e-6)


@given(functions(), functions())
def test_schwartz_initial_position(f0, f1):
    s = cl.from_initial(f0, f1)
    x = np.linspace(-4, 4, 17)
    assert np.allclose(cl.evaluate_solution(s, 0.0, x), evaluate(f0, x), atol=1e-12)
    assert cl.classify(s) in (cl.SpaceClass.F00, cl.SpaceClass.F10)


@given(solutions(), st.floats(-2, 2), st.floats(-2, 2))
def test_wave_equation(s, t, x):
    h = 1e-3
    phi = lambda tt, xx: cl.evaluate_solution(s, tt, xx)
    box = (phi(t + h, x) - 2 * phi(t, x) + phi(t - h, x)) - (phi(t, x + h) - 2 * phi(t, x) + phi(t, x - h))
    assert abs(box) / h ** 2 < 1e-4


@given(functions(), st.floats(-3, 3))
def test_mover_quadrature(g, t):
    assert cl.OddPrimitive(g)(t) == pytest.approx(cl.mover_by_quadrature(g, t), abs=1e-10)


def test_asymptotic_constants():
    s = cl.ClassicalSolution(gaussian(0, 1, 1.0), gaussian(0, 1, 3.0))
    assert s.c0 == pytest.approx(2.0)
    assert s.c1 == pytest.approx(1.0)
    assert cl.evaluate_solution(s, 40.0, 0.0) == pytest.approx(s.c0, abs=1e-12)
    assert cl.evaluate_solution(s, 0.0, 40.0) == pytest.approx(s.c1, abs=1e-12)
    assert cl.classify(s) is cl.SpaceClass.F11
    assert cl.classify(cl.ClassicalSolution(gaussian(), -gaussian())) is cl.SpaceClass.F01
    assert cl.classify(cl.ClassicalSolution(gaussian(), gaussian(0.5))) is cl.SpaceClass.F10
    assert cl.classify(cl.ClassicalSolution(derivative(gaussian()), derivative(gaussian()))) is cl.SpaceClass.F00


@given(pairs(), pairs())
def test_quantum_bridge(p1, p2):
    s1, s2 = cl.ClassicalSolution(p1.g_R, p1.g_L), cl.ClassicalSolution(p2.g_R, p2.g_L)
    assert fm.commutator_value(p1, p2) == pytest.approx(cl.COMMUTATOR_PER_BRACKET * cl.poisson(s1, s2), abs=1e-10)


def test_json_round_trip():
    s = cl.ClassicalSolution(gaussian(0.3, 0.8, 0.5), derivative(gaussian(-0.2)))
    back = cl.ClassicalSolution.from_json(s.to_json())
    assert back.g_R.key() == s.g_R.key() and back.g_L.key() == s.g_L.key()
    doc = s.to_dict()
    doc["c0"] = 9.0
    with pytest.raises(ValueError):
        cl.ClassicalSolution.from_dict(doc)
    with pytest.raises(ValueError):
        cl.ClassicalSolution.from_dict({**s.to_dict(), "extra": 1})


def test_unknown_method():
    s = cl.ClassicalSolution(gaussian(), gaussian())
    with pytest.raises(ValueError):
        cl.poisson(s, s, "bogus")


def test_gaussian_initial_slope_is_F01():
    # f0 with derivative a unit Gaussian tends to +-1/2, and f1 = 0 gives c0 = 0.
    s = cl.from_initial(cl.OddPrimitive(gaussian()), gaussian() * 0.0)
    assert s.c0 == pytest.approx(0.0, abs=1e-15)
    assert s.c1 == pytest.approx(0.5, abs=1e-15)
    assert cl.classify(s) is cl.SpaceClass.F01
