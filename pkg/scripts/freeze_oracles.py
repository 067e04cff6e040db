"""Compute reference values with mpmath and freeze them in tests/data/oracles.json.

Every value here comes from direct high-precision quadrature or special
functions, independent of the package's own numerics.
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"


def gauss(c, w, amp=1):
    return lambda t: amp * mp.exp(-((t - c) / w) ** 2 / 2) / (w * mp.sqrt(2 * mp.pi))


def dgauss(c, w):
    return lambda t: -(t - c) / w ** 2 * gauss(c, w)(t)


def ft(f, k, lo=-mp.inf, hi=mp.inf, pts=()):
    nodes = [lo, *pts, hi]
    re = mp.quad(lambda t: f(t) * mp.cos(k * t), nodes)
    im = mp.quad(lambda t: -f(t) * mp.sin(k * t), nodes)
    return mp.mpc(re, im)


def cpx(z):
    z = mp.mpc(z)
    return [float(z.real), float(z.imag)]


def kernel(u, mu=1):
    return (-mp.euler - mp.log(abs(mu * u)) + 1j * mp.pi / 2 * mp.sign(u)) / (2 * mp.pi)


def position_form(c1, w1, c2, w2, mu=1):
    # c(u) = int g1(s + u) g2(s) ds is a Gaussian of mean c1 - c2 and width sqrt(w1^2 + w2^2).
    c = gauss(c1 - c2, mp.sqrt(w1 ** 2 + w2 ** 2))
    m = c1 - c2
    return mp.quad(lambda u: kernel(u, mu) * c(u), [-mp.inf, m - 8, 0, m + 8, mp.inf])


def mobius_image(f, C):
    (a, b), (c, d) = C

    def g(t):
        den = -c * t + a
        return den ** -2 * f((d * t - b) / den)

    return g


def main():
    out = {}
    out["gaussian_transform_k1"] = cpx(ft(gauss(0, 1), 1))
    out["derivative_transform_k2"] = cpx(ft(dgauss(0, 1), 2))
    out["derivative_transform_k1_5_shifted"] = cpx(ft(dgauss(0.4, 0.7), mp.mpf("1.5")))
    out["gaussian_self_form"] = float(
        (mp.quad(lambda k: (mp.exp(-k ** 2) - 1) / k, [0, 1])
         + mp.quad(lambda k: mp.exp(-k ** 2) / k, [1, mp.inf])) / (2 * mp.pi))
    out["kernel_W_1"] = cpx(kernel(1))
    out["kernel_zero_real_t"] = float(mp.exp(-mp.euler))
    out["fermi_gaussian"] = float(mp.quad(lambda t: gauss(0, 1)(t) ** 2, [-mp.inf, mp.inf]))
    out["omega_derivative_gaussian"] = float(
        mp.exp(-mp.quad(lambda k: k * mp.exp(-k ** 2), [0, mp.inf]) / (2 * mp.pi)))
    out["position_form_gaussians"] = [
        {"c1": c1, "w1": w1, "c2": c2, "w2": w2, "mu": mu, "value": cpx(position_form(c1, w1, c2, w2, mu))}
        for (c1, w1, c2, w2, mu) in [(0, 1, 0, 1, 1), (0.3, 0.8, -0.5, 1.2, 1), (0, 1, 3, 1, 2.0)]
    ]
    out["expint"] = [
        {"n": n, "z": cpx(z), "value": cpx(mp.expint(n, z))}
        for n, z in [(1, 0.5j), (1, 3j), (2, 0.2 + 0.7j), (3, 12j), (1, 40j), (5, 0.01j)]
    ]
    C = ((1.1, 0.2), (0.3, (1 + 0.2 * 0.3) / 1.1))
    img = mobius_image(dgauss(0.2, 0.8), C)
    pole = C[0][0] / C[1][0]
    mob = []
    for k in (0.5, 1.7, 4.0):
        body = ft(img, k, -60, 60, pts=(-5, 0, pole - 0.5, pole, pole + 0.5, 10))
        tails = (mp.quadosc(lambda t: img(t) * mp.exp(-1j * k * t), [60, mp.inf], omega=k)
                 + mp.quadosc(lambda t: img(t) * mp.exp(-1j * k * t), [-mp.inf, -60], omega=k))
        mob.append({"k": k, "value": cpx(body + tails)})
    out["mobius_boson_transform"] = {"matrix": [list(r) for r in C], "center": 0.2, "width": 0.8,
                                     "values": mob}
    beta2 = 2 * mp.pi
    out["vertex_pm_beta"] = cpx(mp.exp(2 * beta2 * kernel(-1)))
    out["coherent_log_overlap"] = [
        {"kmin": float(k), "value": float(-mp.quad(lambda q: 2 * mp.exp(-q ** 2) / q, [k, 1, mp.inf])
                                         / (4 * mp.pi))}
        for k in (mp.mpf("1e-2"), mp.mpf("1e-4"), mp.mpf("1e-6"))
    ]
    # P = -S(a, b) with S = int int a(t) b(s) sgn(t - s), for unit Gaussians.
    a, b = gauss(0.3, 0.9), gauss(-0.4, 1.3)
    S = mp.quad(lambda t: a(t) * (mp.quad(b, [-mp.inf, t]) - mp.quad(b, [t, mp.inf])), [-mp.inf, 0.3, mp.inf])
    out["sgn_pairing_gaussians"] = {"a": [0.3, 0.9], "b": [-0.4, 1.3], "value": float(S)}
    OUT.write_text(json.dumps(out, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
