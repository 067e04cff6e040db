"""Command-line driver: ``masslessfield <subcommand> [options]``.

Exit codes: 0 success, 1 verification failure, 2 parse or input error,
3 quadrature failure.  CSV output carries a header row and 17 significant
digits; JSON output is UTF-8 with sorted keys.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import classical as cl
from . import fock as fk
from . import forms as fm
from . import vertex as vx
from . import weyl as wy
from ._quad import QuadratureError
from .samples import random_pair, random_weyl_pairs
from .suites import SUITES, FockSettings, run_suite
from .testfn import TestFunction, gaussian

__all__ = ["RunConfig", "ConfigError", "parse_config", "main"]

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_QUADRATURE = 0, 1, 2, 3


class ConfigError(ValueError):
    """Malformed configuration or input document."""


@dataclass(frozen=True)
class RunConfig:
    mu: float = 1.0
    tol: float | None = None
    seed: int = 0
    out: str | None = None
    grid: dict = field(default_factory=lambda: {"kind": "geometric", "kmin": 0.1, "ratio": 2.0, "size": 3})
    max_occupation: int = 4
    zero_mode_dim: int = 0
    chi: tuple[float, ...] = (0.0, 1.3)
    sides: str = "R"
    sigma: dict | None = None
    kmins: tuple[float, ...] = (1e-2, 1e-4, 1e-6)
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ConfigError("mu must be a positive number")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.max_occupation < 1 or self.zero_mode_dim < 0:
            raise ConfigError("max_occupation must be >= 1 and zero_mode_dim >= 0")
        if self.sides not in ("R", "L", "RL"):
            raise ConfigError("sides must be R, L or RL")
        if any(not k > 0 for k in self.kmins):
            raise ConfigError("kmins must be positive")
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or v < 0:
                raise ConfigError(f"tolerance for {k!r} must be a non-negative number")

    # -- derived objects ---------------------------------------------------
    def mode_grid(self) -> fk.ModeGrid:
        return _grid(self.grid)

    def truncation(self) -> fk.Truncation:
        return fk.Truncation(self.max_occupation, self.zero_mode_dim)

    def compensating(self) -> fk.CompensatingPair:
        if self.sigma is None:
            return fk.CompensatingPair(gaussian(), gaussian())
        return _sigma(self.sigma)


_PAYLOAD_KEYS = {"grid", "sigma", "tolerances"}


def _grid(spec: dict) -> fk.ModeGrid:
    if not isinstance(spec, dict):
        raise ConfigError("grid must be a JSON object")
    spec = dict(spec)
    kind = spec.pop("kind", "explicit" if "momenta" in spec else "geometric")
    allowed = {"geometric": {"kmin", "ratio", "size"}, "uniform": {"kmax", "size"},
               "explicit": {"momenta", "weights"}}
    if kind not in allowed:
        raise ConfigError(f"unknown grid kind {kind!r}")
    unknown = set(spec) - allowed[kind]
    if unknown:
        raise ConfigError(f"unknown grid keys {sorted(unknown)}")
    try:
        if kind == "geometric":
            return fk.ModeGrid.geometric(float(spec["kmin"]), float(spec["ratio"]), int(spec["size"]))
        if kind == "uniform":
            return fk.ModeGrid.uniform(float(spec["kmax"]), int(spec["size"]))
        return fk.ModeGrid(tuple(spec["momenta"]), tuple(spec["weights"]))
    except KeyError as exc:
        raise ConfigError(f"grid spec missing {exc}") from exc


def _sigma(doc: dict) -> fk.CompensatingPair:
    if not isinstance(doc, dict) or set(doc) != {"sigma_R", "sigma_L"}:
        raise ConfigError("sigma document needs exactly 'sigma_R' and 'sigma_L'")
    return fk.CompensatingPair(TestFunction.from_dict(doc["sigma_R"]), TestFunction.from_dict(doc["sigma_L"]))


def _load_json(value: str, base: Path | None = None) -> Any:
    """Inline JSON (starting with ``{`` or ``[``) or a path to a JSON file."""
    text = value.strip()
    if not text.startswith(("{", "[")):
        path = Path(text)
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_config(text: str, base: Path | None = None) -> dict:
    """Parse ``key=value`` lines into :class:`RunConfig` field values.

    Blank lines and ``#`` comments are skipped; unknown keys are rejected.
    ``grid``, ``sigma`` and ``tolerances`` take inline JSON or a JSON file path.
    """
    names = {f.name for f in fields(RunConfig)}
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in names:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = _convert(key, value, base)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return out


def _convert(key: str, value: str, base: Path | None):
    if key in _PAYLOAD_KEYS:
        return _load_json(value, base)
    if key in ("mu", "tol"):
        return float(value)
    if key in ("seed", "max_occupation", "zero_mode_dim"):
        return int(value)
    if key in ("chi", "kmins"):
        return _floats(value)
    return value


# ---------------------------------------------------------------------------
# Output


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) if isinstance(x, (float, int, np.floating)) and not isinstance(x, bool) else x
                    for x in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands


def _function(value: str | None) -> TestFunction | None:
    if value is None:
        return None
    return TestFunction.from_dict(_load_json(value))


def cmd_form(args, cfg: RunConfig) -> int:
    f1 = _function(args.f1)
    f2 = _function(args.f2)
    rows = []
    if f1 is not None or not args.kernel:
        f1 = gaussian() if f1 is None else f1
        f2 = f1 if f2 is None else f2
        r = fm.reg_form(f1, f2, cfg.mu, tol=cfg.tol)
        rows.append(["reg_form", r.real, r.imag, r.error_estimate])
        ff = fm.fermi_form(f1, f2)
        rows.append(["fermi_form", ff.real, ff.imag, 0.0])
    for t in args.kernel:
        w = fm.kernel_W(t, cfg.mu)
        rows.append([f"kernel_W({_fmt(t)})", w.real, w.imag, 0.0])
    _emit(_csv(["quantity", "real", "imag", "error_estimate"], rows), cfg)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    settings = FockSettings(cfg.mode_grid(), cfg.truncation(), tuple(cfg.chi))
    results = run_suite(args.suite, seed=cfg.seed, mu=cfg.mu, fock=settings, overrides=cfg.tolerances)
    passed = all(c.passed for checks in results.values() for c in checks)
    report = {"passed": passed, "seed": cfg.seed,
              "suites": {n: [c.to_dict() for c in checks] for n, checks in results.items()}}
    _emit(_json(report), cfg)
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_weyl_gram(args, cfg: RunConfig) -> int:
    if args.elements:
        docs = _load_json(args.elements)
        if not isinstance(docs, list):
            raise ConfigError("elements document must be a list of Weyl elements")
        els = [wy.WeylElement.from_json(json.dumps(d)) for d in docs]
    else:
        rng = np.random.default_rng(cfg.seed)
        els = [wy.generator(p) for p in random_weyl_pairs(rng, args.count)]
    G = wy.gram_matrix(els)
    eig = np.linalg.eigvalsh(G)
    _emit(_json({"gram": G, "eigenvalues": eig, "min_eigenvalue": float(eig.min()), "size": len(els)}), cfg)
    return EXIT_OK


def cmd_vertex(args, cfg: RunConfig) -> int:
    doc = _load_json(args.spec)
    docs = doc if isinstance(doc, list) else [doc]
    Vs = [vx.VertexSpec.from_dict(d) for d in docs]
    total = sum(V.charge for V in Vs)
    report = {
        "charges": [V.charge for V in Vs],
        "indicator": 1 if abs(total) <= vx.BALANCE_TOL * max(1, len(Vs)) else 0,
        "omega": vx.omega_vertex_product(Vs, cfg.mu) if len(Vs) > 1 else vx.omega_vertex(Vs[0]),
    }
    if len(Vs) > 1:
        report["prefactor"] = vx.product_prefactor(Vs, cfg.mu)
        report["power_form"] = vx.power_form(Vs, cfg.mu)
    _emit(_json(report), cfg)
    return EXIT_OK


_EXPERIMENT_KEYS = {"grid", "truncation", "sigma", "chi", "kmins", "sides"}


def cmd_fock_run(args, cfg: RunConfig) -> int:
    if args.experiment:
        exp = _load_json(args.experiment)
        if not isinstance(exp, dict) or set(exp) - _EXPERIMENT_KEYS:
            raise ConfigError(f"experiment keys must be a subset of {sorted(_EXPERIMENT_KEYS)}")
        trunc = exp.get("truncation", {})
        if not isinstance(trunc, dict) or set(trunc) - {"max_occupation", "zero_mode_dim"}:
            raise ConfigError("truncation must hold max_occupation and/or zero_mode_dim")
        cfg = replace(cfg, grid=exp.get("grid", cfg.grid),
                      max_occupation=int(trunc.get("max_occupation", cfg.max_occupation)),
                      zero_mode_dim=int(trunc.get("zero_mode_dim", cfg.zero_mode_dim)),
                      sigma=exp.get("sigma", cfg.sigma), chi=tuple(exp.get("chi", cfg.chi)),
                      kmins=tuple(exp.get("kmins", cfg.kmins)), sides=exp.get("sides", cfg.sides))
    grid, trunc, sigma = cfg.mode_grid(), cfg.truncation(), cfg.compensating()
    sides = tuple(cfg.sides)
    bosons = fk.FockSpace(grid, trunc, sides=sides)
    full = fk.FockSpace(grid, trunc, sides=sides, fermions=True)
    safe = full.safe_mask()
    H = fk.hamiltonians(full)
    runs = []
    for chi in cfg.chi:
        e0, _ = fk.sector_ground_state(fk.sector_hamiltonian(bosons, chi, sigma))
        Q = fk.susy_charges(full, sigma, chi)
        susy = {}
        for side in sides:
            energy = fk.sector_hamiltonian(full, chi, sigma, (side,)) + H[f"Hf_{side}"]
            R = fk.anticommutator(Q[f"Q_{side}"], Q[f"Q_{side}"]) - 2 * energy
            susy[side] = fk.restricted_norm(R, safe, columns_only=True)
        kmins = list(cfg.kmins)
        logC = [math.log(fk.coherent_overlap(chi, sigma, k)) for k in kmins]
        slopes = fk.overlap_log_slope(chi, sigma, kmins) if chi != 0 and len(kmins) > 1 else []
        runs.append({"chi": chi, "ground_energy": e0, "susy_residual": susy,
                     "overlap": {"kmins": kmins, "log_C": logC, "slopes": slopes}})
    report = {"grid": grid.to_dict(), "truncation": {"max_occupation": trunc.max_occupation,
                                                     "zero_mode_dim": trunc.zero_mode_dim},
              "dimension": full.dimension, "sides": cfg.sides, "runs": runs,
              "reference_slope": 1 / (2 * math.pi)}
    _emit(_json(report), cfg)
    return EXIT_OK


def _solution(value: str | None, rng) -> cl.ClassicalSolution:
    if value is None:
        p = random_pair(rng)
        return cl.ClassicalSolution(p.g_R, p.g_L)
    return cl.ClassicalSolution.from_dict(_load_json(value))


def cmd_classical_check(args, cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    s1, s2 = _solution(args.sol1, rng), _solution(args.sol2, rng)
    brackets = {m: cl.poisson(s1, s2, m) for m in ("initial", "sgn", "movers")}
    report = {
        "poisson": brackets,
        "spread": max(brackets.values()) - min(brackets.values()),
        "classes": [cl.classify(s).value for s in (s1, s2)],
        "constants": [{"c0": s.c0, "c1": s.c1} for s in (s1, s2)],
    }
    if all(abs(s.c1) <= cl.CLASS_TOL for s in (s1, s2)):
        report["commutator_value"] = fm.commutator_value(s1.pair, s2.pair)
        report["commutator_per_bracket"] = cl.COMMUTATOR_PER_BRACKET
    _emit(_json(report), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--mu", type=float, help="infrared mass scale")
    p.add_argument("--tol", type=float, help="quadrature tolerance for wrapper transforms")
    p.add_argument("--seed", type=int, help="seed for random families")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--config", help="key=value configuration file")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masslessfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_common()]

    p = sub.add_parser("form", parents=common, help="regularized, fermionic and kernel values (CSV)")
    p.add_argument("--f1", help="test function JSON (file or inline); default the unit Gaussian")
    p.add_argument("--f2", help="second test function; default f1")
    p.add_argument("--kernel", type=float, action="append", default=[], help="evaluate W(t)")
    p.set_defaults(func=cmd_form)

    p = sub.add_parser("verify", parents=common, help="run an invariant suite (JSON)")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("weyl-gram", parents=common, help="Gram matrix of Weyl elements (JSON)")
    p.add_argument("--elements", help="JSON list of Weyl elements; default random generators")
    p.add_argument("--count", type=int, default=4, help="number of random generators")
    p.set_defaults(func=cmd_weyl_gram)

    p = sub.add_parser("vertex", parents=common, help="vertex-operator vacuum values (JSON)")
    p.add_argument("--spec", required=True, help="vertex spec JSON (object or list)")
    p.set_defaults(func=cmd_vertex)

    p = sub.add_parser("fock-run", parents=common, help="truncated Fock-space sector experiment (JSON)")
    p.add_argument("--experiment", help="experiment descriptor JSON")
    p.set_defaults(func=cmd_fock_run)

    p = sub.add_parser("classical-check", parents=common, help="Poisson brackets of two solutions (JSON)")
    p.add_argument("--sol1", help="solution JSON; default random")
    p.add_argument("--sol2", help="solution JSON; default random")
    p.set_defaults(func=cmd_classical_check)
    return parser


def _config(args) -> RunConfig:
    values: dict = {}
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values = parse_config(text, path.parent)
    for name in ("mu", "tol", "seed", "out"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    return RunConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
