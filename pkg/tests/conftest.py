import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from masslessfield.testfn import Atom, MoverPair, TestFunction, derivative, gaussian

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ORACLES = json.loads((Path(__file__).parent / "data" / "oracles.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cpx(pair):
    return complex(pair[0], pair[1])


@st.composite
def atoms(draw, max_degree=2):
    center = draw(st.floats(-1.5, 1.5))
    width = draw(st.floats(0.5, 1.5))
    n = draw(st.integers(0, max_degree))
    coeffs = draw(st.lists(st.floats(-1, 1), min_size=n + 1, max_size=n + 1))
    return Atom(center, width, tuple(coeffs))


@st.composite
def functions(draw, max_atoms=2, max_degree=2):
    parts = draw(st.lists(atoms(max_degree), min_size=1, max_size=max_atoms))
    return TestFunction(tuple(parts))


@st.composite
def neutral_functions(draw, max_atoms=2):
    """Functions with zero integral."""
    return derivative(draw(functions(max_atoms, 1)))


@st.composite
def pairs(draw):
    """Mover pairs with a shared, possibly nonzero, integral."""
    z = draw(st.floats(-1, 1))
    g_R = draw(neutral_functions()) + gaussian(draw(st.floats(-1, 1)), 1.0, z)
    g_L = draw(neutral_functions()) + gaussian(0.2, 0.9, z)
    return MoverPair(g_R, g_L)
