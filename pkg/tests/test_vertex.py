import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import cpx
from masslessfield import vertex as vx
from masslessfield import weyl as wy
from masslessfield._special import EULER_GAMMA

BETA = math.sqrt(2 * math.pi)


def pm_pair(s=1.0, beta=BETA):
    return [vx.VertexSpec(((0.0, beta),), ((0.0, beta),)), vx.VertexSpec(((s, -beta),), ((s, -beta),))]


def test_pm_beta_closed_form(oracles):
    got = vx.omega_vertex_product(pm_pair())
    assert got == pytest.approx(cpx(oracles["vertex_pm_beta"]), abs=1e-14)
    assert got == pytest.approx(-math.exp(-2 * EULER_GAMMA), abs=1e-14)


def test_indicator_law():
    V = vx.VertexSpec(((0.0, 1.0),), ((0.5, 1.0),))
    assert vx.omega_vertex(V) == 0.0
    assert vx.omega_vertex(vx.VertexSpec()) == 1.0
    assert vx.omega_vertex(vx.VertexSpec(((0.0, 1.0), (1.0, -1.0)), ((0.2, 0.5), (0.4, -0.5)))) == 1.0
    assert vx.omega_vertex_product([V, V.translated(1.0)]) == 0


def test_unbalanced_vertex_rejected():
    with pytest.raises(ValueError):
        vx.VertexSpec(((0.0, 1.0),), ((0.0, 0.5),))


def test_coincident_times_rejected():
    V = vx.VertexSpec(((0.0, 1.0),), ((0.0, 1.0),))
    with pytest.raises(ValueError):
        vx.product_prefactor([V, V])


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.3, 2.0), st.floats(0.3, 3.0),
       st.floats(-3, 3).filter(lambda s: abs(s) > 0.05))
def test_power_form_agrees(b1, b2, mu, s, shift):
    Vs = [vx.VertexSpec(((0.0, b1),), ((0.1, b1),)), vx.VertexSpec(((s, b2),), ((shift, b2),))]
    assert vx.power_form(Vs, mu) == pytest.approx(vx.product_prefactor(Vs, mu), rel=1e-10)


@given(st.floats(0.2, 3.0), st.floats(0.1, 2.0), st.floats(-3, 3))
def test_pm_modulus_power_law(s, beta, c):
    # |omega| = (mu e^gamma s)^{-2 beta^2/2pi}, translation invariant.
    Vs = [V.translated(c) for V in pm_pair(s, beta)]
    expected = (math.exp(EULER_GAMMA) * s) ** (-2 * beta ** 2 / (2 * math.pi))
    assert abs(vx.omega_vertex_product(Vs)) == pytest.approx(expected, rel=1e-10)


def test_gaussian_regularization_converges():
    Vs = [vx.VertexSpec(((0.0, 1.1),), ((0.3, 1.1),)), vx.VertexSpec(((1.0, -1.1),), ((-0.5, -1.1),))]
    exact = vx.omega_vertex_product(Vs)
    errors = []
    for eps in (0.2, 0.1, 0.05):
        smeared = wy.omega(wy.product(vx.gaussian_regularized_vertex(Vs[0], eps),
                                      vx.gaussian_regularized_vertex(Vs[1], eps)))
        errors.append(abs(smeared - exact) / abs(exact))
    assert errors[-1] < 0.01
    assert errors == sorted(errors, reverse=True)


def test_json_round_trip():
    V = vx.VertexSpec(((0.0, 1.0), (1.0, 0.5)), ((0.3, 1.5),))
    assert vx.VertexSpec.from_json(__import__("json").dumps(V.to_dict())) == V
    with pytest.raises(ValueError):
        vx.VertexSpec.from_dict({"right": [], "middle": []})
