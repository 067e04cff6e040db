"""Tour of the main quantities: forms, Weyl state, vertex values, sectors and brackets."""

import math

from masslessfield import classical as cl
from masslessfield import fock as fk
from masslessfield import forms as fm
from masslessfield import vertex as vx
from masslessfield import weyl as wy
from masslessfield.testfn import MoverPair, derivative, gaussian


def main():
    G = gaussian()
    print("(G|G) at mu=1          ", fm.reg_form(G, G).value)
    print("W(1)                   ", fm.kernel_W(1.0))
    print("fermionic <G, G>       ", fm.fermi_form(G, G).real)

    d = derivative(G)
    print("omega(e^{i phi(G', G')})", wy.omega(wy.generator(MoverPair(d, d))).real,
          " closed form", math.exp(-1 / (4 * math.pi)))

    b = math.sqrt(2 * math.pi)
    Vs = [vx.VertexSpec(((0.0, b),), ((0.0, b),)), vx.VertexSpec(((1.0, -b),), ((1.0, -b),))]
    print("omega(V_+ V_-)          ", vx.omega_vertex_product(Vs), " closed form", -math.exp(-2 * 0.5772156649015329))

    sigma = fk.CompensatingPair(G, G)
    for chi in (0.5, 1.0, 2.0):
        slope = fk.overlap_log_slope(chi, sigma, [1e-4, 1e-6])[0]
        print(f"overlap slope chi={chi:<4}", slope, " expected", chi * chi / (2 * math.pi))

    s1 = cl.ClassicalSolution(gaussian(0.3, 0.9), gaussian(-0.2, 1.1))
    s2 = cl.ClassicalSolution(derivative(gaussian(0.5)), gaussian(0.1, 0.7))
    for m in ("initial", "sgn", "movers"):
        print(f"Poisson bracket ({m:<7})", cl.poisson(s1, s2, m))


if __name__ == "__main__":
    main()
