r"""Truncated-mode realization of the boson and fermion algebras.

A mode grid ``(k_i, Delta_i)`` replaces ``int dk`` by ``sum_i Delta_i``.
With the normalized ladders ``[A_i, A_i^dag] = 1`` and ``{B_i, B_i^dag} = 1``,

.. math:: a_i = \sqrt{2\pi k_i/\Delta_i}\,A_i,\qquad
          b_i = \sqrt{2\pi/\Delta_i}\,B_i,

so that ``[a_i, a_j^dag] = (2 pi k_i / Delta_i) delta_ij`` discretizes
``2 pi k delta(k - k')`` and ``H = int (dk/2pi) a^dag a`` becomes
``sum_i k_i A_i^dag A_i``.  Writing ``s_i = sqrt(Delta_i / (2 pi k_i))``, the
compensated ladders are ``A_i - d_i`` with ``d_i = i chi sigma^(k_i) s_i``.

Bosonic modes are truncated at occupation ``N``.  Every canonical identity
used here holds exactly on the *safe subspace* (all bosonic occupations at
most ``N - 1``); :meth:`FockSpace.safe_mask` exposes it.

Tensor factors are ordered: right bosons, left bosons, right fermions, left
fermions (each by increasing ``k``), then the optional zero-mode oscillator.
Jordan-Wigner strings run over the fermion factors in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy import integrate as spi

from ._quad import QuadratureError
from .testfn import MoverPair, TestFunction, fourier

__all__ = [
    "ModeGrid",
    "Truncation",
    "CompensatingPair",
    "SectorLabel",
    "OperatorMatrix",
    "FockSpace",
    "BosonOps",
    "FermiOps",
    "MAX_DIMENSION",
    "build_boson_ops",
    "build_fermi_ops",
    "hamiltonians",
    "sector_hamiltonian",
    "sector_ground_state",
    "displacement_amplitudes",
    "coherent_overlap",
    "overlap_log_slope",
    "gauge_unitary",
    "field_operator",
    "vacuum_commutator",
    "dirac_smeared",
    "dirac_from_coefficients",
    "susy_charges",
    "anticommutator",
    "commutator",
    "restricted_norm",
]

MAX_DIMENSION = 2_000_000
ZERO_MODE_TOL = 1e-8
SIDES = ("R", "L")


# ---------------------------------------------------------------------------
# Configuration types


@dataclass(frozen=True)
class ModeGrid:
    """Positive momenta ``k_i`` with quadrature weights ``Delta_i``."""

    momenta: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        k = np.asarray(self.momenta, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if k.ndim != 1 or k.shape != w.shape or k.size == 0:
            raise ValueError("momenta and weights must be non-empty sequences of equal length")
        if not (np.all(k > 0) and np.all(np.diff(k) > 0)):
            raise ValueError("momenta must be positive and strictly increasing")
        if not np.all(w > 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "momenta", tuple(float(x) for x in k))
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def geometric(cls, kmin: float, ratio: float, size: int) -> "ModeGrid":
        """Log-uniform cells ``[kmin r^i, kmin r^(i+1))`` with geometric-mean nodes."""
        if not (kmin > 0 and ratio > 1 and size >= 1):
            raise ValueError("need kmin > 0, ratio > 1, size >= 1")
        edges = kmin * ratio ** np.arange(size + 1)
        return cls(tuple(np.sqrt(edges[:-1] * edges[1:])), tuple(np.diff(edges)))

    @classmethod
    def uniform(cls, kmax: float, size: int) -> "ModeGrid":
        """Midpoint rule on ``[0, kmax]``."""
        if not (kmax > 0 and size >= 1):
            raise ValueError("need kmax > 0 and size >= 1")
        h = kmax / size
        return cls(tuple(h * (np.arange(size) + 0.5)), (h,) * size)

    @property
    def size(self) -> int:
        return len(self.momenta)

    @property
    def k(self) -> np.ndarray:
        return np.asarray(self.momenta)

    @property
    def delta(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def boson_scale(self) -> np.ndarray:
        """``s_i = sqrt(Delta_i / (2 pi k_i))``."""
        return np.sqrt(self.delta / (2 * math.pi * self.k))

    @property
    def fermion_scale(self) -> np.ndarray:
        """``sqrt(Delta_i / 2 pi)``."""
        return np.sqrt(self.delta / (2 * math.pi))

    def to_dict(self) -> dict:
        return {"momenta": list(self.momenta), "weights": list(self.weights)}


@dataclass(frozen=True)
class Truncation:
    """Bosonic occupation cap ``N`` and zero-mode oscillator dimension (0 = sector picture)."""

    max_occupation: int = 4
    zero_mode_dim: int = 0

    def __post_init__(self):
        if int(self.max_occupation) != self.max_occupation or self.max_occupation < 1:
            raise ValueError("max_occupation must be an integer >= 1")
        if int(self.zero_mode_dim) != self.zero_mode_dim or self.zero_mode_dim < 0:
            raise ValueError("zero_mode_dim must be a non-negative integer")


@dataclass(frozen=True)
class CompensatingPair:
    """Right and left compensating functions, each of unit integral."""

    sigma_R: TestFunction
    sigma_L: TestFunction

    def __post_init__(self):
        for name in ("sigma_R", "sigma_L"):
            z = getattr(self, name).zero_mode
            if abs(z - 1.0) > ZERO_MODE_TOL:
                raise ValueError(f"{name} must have unit integral, got {z!r}")

    def side(self, side: str) -> TestFunction:
        return self.sigma_R if side == "R" else self.sigma_L


@dataclass(frozen=True)
class SectorLabel:
    chi: float = 0.0


def _chi(chi) -> float:
    return float(chi.chi if isinstance(chi, SectorLabel) else chi)


# ---------------------------------------------------------------------------
# Operators and spaces


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Sparse operator on a :class:`FockSpace`."""

    matrix: sp.csr_matrix
    space: "FockSpace" = field(repr=False)
    hermitian: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix)
        d = self.space.dimension
        if m.shape != (d, d):
            raise ValueError(f"operator shape {m.shape} does not match space dimension {d}")
        object.__setattr__(self, "matrix", m)
        if self.hermitian:
            # Hermiticity is claimed; verify it.
            diff = abs(m - m.getH())
            if diff.nnz and diff.max() > 1e-12 * max(1.0, abs(m).max()):
                raise ValueError("operator claimed hermitian but is not")

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.getH().tocsr(), self.space, self.hermitian)

    def _wrap(self, m, hermitian=False):
        return OperatorMatrix(m, self.space, hermitian)

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            return self._wrap(self.matrix + other.matrix, self.hermitian and other.hermitian)
        return self._wrap(self.matrix + other * self.space.identity_matrix)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, s):
        s = complex(s)
        return self._wrap(self.matrix * s, self.hermitian and s.imag == 0)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self._wrap(self.matrix @ other.matrix)
        return self.matrix @ other

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def expectation(self, vec: np.ndarray) -> complex:
        return complex(np.vdot(vec, self.matrix @ vec))


def commutator(X: OperatorMatrix, Y: OperatorMatrix) -> OperatorMatrix:
    return X @ Y - Y @ X


def anticommutator(X: OperatorMatrix, Y: OperatorMatrix) -> OperatorMatrix:
    return X @ Y + Y @ X


def restricted_norm(X, mask: np.ndarray, *, columns_only: bool = False) -> float:
    """Spectral norm of ``P X P`` (or ``X P``) for the basis subset ``mask``."""
    m = X.matrix if isinstance(X, OperatorMatrix) else sp.csr_matrix(X)
    idx = np.flatnonzero(mask)
    sub = m[:, idx] if columns_only else m[idx][:, idx]
    if sub.nnz == 0:
        return 0.0
    if min(sub.shape) <= 2000:
        return float(np.linalg.norm(sub.toarray(), 2))
    from scipy.sparse.linalg import svds

    return float(svds(sub, k=1, return_singular_vectors=False)[0])


def _ladder(n: int) -> sp.csr_matrix:
    """Annihilation matrix on levels ``0..n-1``."""
    return sp.diags(np.sqrt(np.arange(1, n)), 1, shape=(n, n), format="csr", dtype=complex)


_FERMI = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
_PARITY = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))


@dataclass(frozen=True, eq=False)
class FockSpace:
    """Tensor product of truncated bosonic modes, fermionic modes and an optional zero-mode factor."""

    grid: ModeGrid
    truncation: Truncation = Truncation()
    sides: tuple[str, ...] = SIDES
    fermions: bool = False
    bosons: bool = True
    max_dimension: int = MAX_DIMENSION

    def __post_init__(self):
        sides = tuple(self.sides)
        if not sides or any(s not in SIDES for s in sides) or len(set(sides)) != len(sides):
            raise ValueError("sides must be a non-empty subset of ('R', 'L')")
        object.__setattr__(self, "sides", tuple(s for s in SIDES if s in sides))
        if not (self.bosons or self.fermions):
            raise ValueError("space needs bosonic or fermionic factors")
        if self.dimension > self.max_dimension:
            raise ValueError(f"Fock space dimension {self.dimension} exceeds the guard {self.max_dimension}")

    # -- layout ------------------------------------------------------------
    @cached_property
    def factors(self) -> tuple[tuple[str, str, int, int], ...]:
        """``(kind, side, mode, dim)`` per tensor factor, in storage order."""
        M, N = self.grid.size, self.truncation.max_occupation
        out = [("boson", s, i, N + 1) for s in self.sides for i in range(M)] if self.bosons else []
        if self.fermions:
            out += [("fermion", s, i, 2) for s in self.sides for i in range(M)]
        if self.truncation.zero_mode_dim:
            out.append(("zero", "", 0, self.truncation.zero_mode_dim))
        return tuple(out)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f[3] for f in self.factors)

    @property
    def dimension(self) -> int:
        M, N = self.grid.size, self.truncation.max_occupation
        n = len(self.sides)
        d = ((N + 1) ** (n * M) if self.bosons else 1) * (2 ** (n * M) if self.fermions else 1)
        return d * max(1, self.truncation.zero_mode_dim)

    def _index(self, kind: str, side: str, mode: int) -> int:
        for j, f in enumerate(self.factors):
            if f[:3] == (kind, side, mode):
                return j
        raise KeyError(f"no {kind} factor for side {side!r} mode {mode}")

    @cached_property
    def identity_matrix(self) -> sp.csr_matrix:
        return sp.identity(self.dimension, dtype=complex, format="csr")

    def identity(self) -> OperatorMatrix:
        return OperatorMatrix(self.identity_matrix, self, True)

    def zero(self) -> OperatorMatrix:
        return OperatorMatrix(sp.csr_matrix((self.dimension,) * 2, dtype=complex), self, True)

    def embed(self, local: dict[int, sp.spmatrix]) -> sp.csr_matrix:
        """Kronecker product with ``local[j]`` on factor ``j`` and identities elsewhere."""
        out = sp.identity(1, dtype=complex, format="csr")
        run = 1
        for j, d in enumerate(self.dims):
            if j in local:
                if run > 1:
                    out = sp.kron(out, sp.identity(run, dtype=complex), format="csr")
                    run = 1
                out = sp.kron(out, local[j], format="csr")
            else:
                run *= d
        if run > 1:
            out = sp.kron(out, sp.identity(run, dtype=complex), format="csr")
        return out.tocsr()

    # -- elementary operators ----------------------------------------------
    def boson(self, side: str, mode: int) -> OperatorMatrix:
        """Normalized annihilator ``A_i``."""
        j = self._index("boson", side, mode)
        return OperatorMatrix(self.embed({j: _ladder(self.dims[j])}), self)

    def fermion(self, side: str, mode: int) -> OperatorMatrix:
        """Normalized annihilator ``B_i`` with a Jordan-Wigner string."""
        if not self.fermions:
            raise ValueError("space has no fermionic factors")
        j = self._index("fermion", side, mode)
        local = {i: _PARITY for i, f in enumerate(self.factors[:j]) if f[0] == "fermion"}
        local[j] = _FERMI
        return OperatorMatrix(self.embed(local), self)

    def zero_mode_pair(self) -> tuple[OperatorMatrix, OperatorMatrix]:
        """Truncated canonical pair ``(chi, p)`` with ``[chi, p] = i`` on low levels."""
        D = self.truncation.zero_mode_dim
        if not D:
            raise ValueError("space has no zero-mode factor")
        j = self._index("zero", "", 0)
        c = _ladder(D)
        x = (c + c.getH()) / math.sqrt(2)
        p = 1j * (c.getH() - c) / math.sqrt(2)
        return OperatorMatrix(self.embed({j: x}), self, True), OperatorMatrix(self.embed({j: p}), self, True)

    # -- basis bookkeeping -------------------------------------------------
    @cached_property
    def occupations(self) -> np.ndarray:
        """Level of each factor for every basis state, shape ``(dimension, factors)``."""
        return np.stack(np.unravel_index(np.arange(self.dimension), self.dims), axis=1)

    def boson_columns(self) -> list[int]:
        return [j for j, f in enumerate(self.factors) if f[0] == "boson"]

    def safe_mask(self, zero_mode_margin: int = 1) -> np.ndarray:
        """States with every bosonic occupation at most ``N - 1``.

        The zero-mode level is kept at most ``D - 1 - zero_mode_margin``.
        """
        occ = self.occupations
        N = self.truncation.max_occupation
        mask = np.all(occ[:, self.boson_columns()] <= N - 1, axis=1)
        if self.truncation.zero_mode_dim:
            j = self._index("zero", "", 0)
            mask &= occ[:, j] <= self.truncation.zero_mode_dim - 1 - zero_mode_margin
        return mask

    def low_mask(self, level: int | None = None, zero_mode_level: int | None = None) -> np.ndarray:
        """States with bosonic occupations at most ``level`` (default ``N // 2``)."""
        occ = self.occupations
        level = self.truncation.max_occupation // 2 if level is None else level
        mask = np.all(occ[:, self.boson_columns()] <= level, axis=1)
        if self.truncation.zero_mode_dim:
            j = self._index("zero", "", 0)
            zl = self.truncation.zero_mode_dim // 2 if zero_mode_level is None else zero_mode_level
            mask &= occ[:, j] <= zl
        return mask

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=complex)
        v[0] = 1.0
        return v


# ---------------------------------------------------------------------------
# Ladder families


@dataclass(frozen=True, eq=False)
class BosonOps:
    """Scaled ``a_i, a_i^dag`` and normalized ``A_i`` for one chirality."""

    a: tuple[OperatorMatrix, ...]
    a_dag: tuple[OperatorMatrix, ...]
    A: tuple[OperatorMatrix, ...]


@dataclass(frozen=True, eq=False)
class FermiOps:
    """Scaled ``b_i, b_i^dag`` and normalized ``B_i`` for one chirality."""

    b: tuple[OperatorMatrix, ...]
    b_dag: tuple[OperatorMatrix, ...]
    B: tuple[OperatorMatrix, ...]


def _space(grid_or_space, trunc=None, **kw) -> FockSpace:
    if isinstance(grid_or_space, FockSpace):
        return grid_or_space
    return FockSpace(grid_or_space, trunc or Truncation(), **kw)


def build_boson_ops(space: FockSpace, side: str = "R") -> BosonOps:
    """``a_i = sqrt(2 pi k_i / Delta_i) A_i`` on the given chirality."""
    g = space.grid
    scale = np.sqrt(2 * math.pi * g.k / g.delta)
    A = tuple(space.boson(side, i) for i in range(g.size))
    a = tuple(c * x for c, x in zip(scale, A))
    return BosonOps(a, tuple(x.dag for x in a), A)


def build_fermi_ops(space: FockSpace, side: str = "R") -> FermiOps:
    """``b_i = sqrt(2 pi / Delta_i) B_i`` on the given chirality."""
    g = space.grid
    scale = np.sqrt(2 * math.pi / g.delta)
    B = tuple(space.fermion(side, i) for i in range(g.size))
    b = tuple(c * x for c, x in zip(scale, B))
    return FermiOps(b, tuple(x.dag for x in b), B)


def _number_sum(ops: Sequence[OperatorMatrix], k: np.ndarray, space: FockSpace) -> OperatorMatrix:
    out = space.zero().matrix
    for ki, X in zip(k, ops):
        out = out + ki * (X.matrix.getH() @ X.matrix)
    return OperatorMatrix(out, space, True)


def hamiltonians(space: FockSpace) -> dict[str, OperatorMatrix]:
    """``H_R, H_R^f, H_L, H_L^f`` as ``sum_i k_i A^dag A`` and ``sum_i k_i B^dag B``.

    Keys are ``"H_R"``, ``"Hf_R"``, ``"H_L"``, ``"Hf_L"``; absent sectors give zero.
    """
    k = space.grid.k
    out = {}
    for side in SIDES:
        if side in space.sides:
            out[f"H_{side}"] = _number_sum([space.boson(side, i) for i in range(space.grid.size)], k, space)
            out[f"Hf_{side}"] = (
                _number_sum([space.fermion(side, i) for i in range(space.grid.size)], k, space)
                if space.fermions else space.zero()
            )
        else:
            out[f"H_{side}"] = space.zero()
            out[f"Hf_{side}"] = space.zero()
    return out


# ---------------------------------------------------------------------------
# Compensated sectors


def _transform(g: TestFunction, grid: ModeGrid) -> np.ndarray:
    return np.asarray(fourier(g, grid.k), dtype=complex)


def displacement_amplitudes(chi, sigma: CompensatingPair, grid: ModeGrid, side: str = "R") -> np.ndarray:
    """``d_i = i chi sigma^(k_i) s_i``: the normalized shift in ``A_i - d_i``."""
    return 1j * _chi(chi) * _transform(sigma.side(side), grid) * grid.boson_scale


def _compensated(space: FockSpace, side: str, d: np.ndarray) -> list[OperatorMatrix]:
    I = space.identity()
    return [space.boson(side, i) - d[i] * I for i in range(space.grid.size)]


def sector_hamiltonian(space: FockSpace, chi, sigma: CompensatingPair,
                       sides: Sequence[str] | None = None) -> OperatorMatrix:
    r"""``sum_i k_i (A_i - d_i)^dag (A_i - d_i)`` over ``sides`` (default all of ``space``).

    This discretizes ``int (dk/2pi)(a^dag + i chi sigma^*)(a - i chi sigma)``.
    """
    out = space.zero()
    for side in space.sides if sides is None else sides:
        d = displacement_amplitudes(chi, sigma, space.grid, side)
        out = out + _number_sum(_compensated(space, side, d), space.grid.k, space)
    return OperatorMatrix(out.matrix, space, True)


def sector_ground_state(H: OperatorMatrix) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of a hermitian sector Hamiltonian."""
    n = H.shape[0]
    if n <= 4000:
        w, v = np.linalg.eigh(H.dense())
        return float(w[0]), v[:, 0]
    from scipy.sparse.linalg import eigsh

    w, v = eigsh(H.matrix, k=1, which="SA", tol=1e-12)
    return float(w[0]), v[:, 0]


def coherent_overlap(chi, sigma: CompensatingPair, kmin: float, *, epsrel: float = 1e-10) -> float:
    r"""``C = exp(-(chi^2/2) int_{kmin}^inf (dk / 2 pi k)(|sigma_R^|^2 + |sigma_L^|^2))``."""
    chi = _chi(chi)
    if not kmin > 0:
        raise ValueError("kmin must be positive")
    if chi == 0:
        return 1.0
    total = 0.0
    for s in (sigma.sigma_R, sigma.sigma_L):
        K = max(s.spectral_cutoff(), 10 * kmin)

        def f(u, s=s):
            return abs(complex(fourier(s, math.exp(u)))) ** 2

        pts = sorted({math.log(kmin), *([0.0] if kmin < 1 < K else []), math.log(K)})
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, err = spi.quad(f, lo, hi, epsabs=1e-14, epsrel=epsrel, limit=400)
            if err > 1e-8 * max(1.0, abs(val)):
                raise QuadratureError("coherent overlap integral", val, err)
            total += val
    return math.exp(-0.5 * chi * chi * total / (2 * math.pi))


def overlap_log_slope(chi, sigma: CompensatingPair, kmins: Sequence[float]) -> list[float]:
    """Slopes of ``ln C`` against ``ln kmin`` between consecutive ``kmins``."""
    logs = [math.log(coherent_overlap(chi, sigma, k)) for k in kmins]
    return [
        (logs[j + 1] - logs[j]) / (math.log(kmins[j + 1]) - math.log(kmins[j]))
        for j in range(len(kmins) - 1)
    ]


def gauge_unitary(space: FockSpace, xi_R: TestFunction | None, xi_L: TestFunction | None, chi,
                  sigma: CompensatingPair | None = None) -> OperatorMatrix:
    r"""Displacement ``U`` with ``U a_i U^{-1} = a_i - i chi xi^(k_i)`` below the truncation edge.

    Per mode ``U_i = exp(alpha_i A_i^dag - alpha_i^* A_i)`` with
    ``alpha_i = i chi xi^(k_i) s_i``; the exponential of the truncated
    generator is exactly unitary.  With ``sigma`` the c-number phase
    ``exp((chi^2/2) sum_i s_i^2 (xi^* sigma^ - xi^ sigma^*))`` is included.
    """
    chi = _chi(chi)
    g = space.grid
    local: dict[int, sp.spmatrix] = {}
    phase = 0j
    for side, xi in (("R", xi_R), ("L", xi_L)):
        if xi is None or xi.is_zero():
            continue
        if abs(xi.zero_mode) > ZERO_MODE_TOL:
            raise ValueError(f"gauge function for side {side} must have zero integral")
        if side not in space.sides:
            raise ValueError(f"space has no {side} movers")
        xh = _transform(xi, g)
        alpha = 1j * chi * xh * g.boson_scale
        if sigma is not None:
            sh = _transform(sigma.side(side), g)
            phase += 0.5 * chi * chi * np.sum(g.boson_scale ** 2 * (np.conj(xh) * sh - xh * np.conj(sh)))
        for i in range(g.size):
            j = space._index("boson", side, i)
            A = _ladder(space.dims[j]).toarray()
            local[j] = sp.csr_matrix(sla.expm(alpha[i] * A.conj().T - np.conj(alpha[i]) * A))
    U = space.embed(local) * complex(np.exp(phase))
    return OperatorMatrix(U, space)


# ---------------------------------------------------------------------------
# Fields


def field_operator(space: FockSpace, pair: MoverPair, sigma: CompensatingPair, chi=0.0) -> OperatorMatrix:
    r"""Discretized ``phi(g_R, g_L)``.

    In the sector picture (no zero-mode factor) ``chi`` is a number and the
    pair must have zero integral.  With a zero-mode factor ``chi`` and ``p``
    are the truncated canonical pair and the argument ``chi`` is ignored.
    """
    g0 = pair.zero_mode
    g = space.grid
    s = g.boson_scale
    I = space.identity()
    if space.truncation.zero_mode_dim:
        X, P = space.zero_mode_pair()
    else:
        if abs(g0) > ZERO_MODE_TOL:
            raise ValueError("field not defined in the sector picture when the zero mode is nonzero")
        X, P = _chi(chi) * I, None
    out = space.zero()
    for side, gx in (("R", pair.g_R), ("L", pair.g_L)):
        if gx.is_zero() and g0 == 0:
            continue
        if side not in space.sides:
            raise ValueError(f"space has no {side} movers")
        gh = _transform(gx, g)
        sh = _transform(sigma.side(side), g)
        u = gh - g0 * sh
        for i in range(g.size):
            A = space.boson(side, i)
            # a_sigma^dag = sqrt(2 pi k / Delta) (A^dag + i sigma^* s chi)
            Ad = A.dag + (1j * np.conj(sh[i]) * s[i]) * X
            term = (s[i] * u[i]) * Ad
            out = out + term + term.dag
    if P is not None and g0 != 0:
        out = out + g0 * P
    return OperatorMatrix(out.matrix, space, True)


def vacuum_commutator(space: FockSpace, phi1: OperatorMatrix, phi2: OperatorMatrix,
                      state: np.ndarray | None = None) -> complex:
    """``<psi|[phi1, phi2]|psi>`` for hermitian fields, from two matrix-vector products."""
    psi = space.vacuum() if state is None else state
    v1, v2 = phi1.apply(psi), phi2.apply(psi)
    return complex(np.vdot(v1, v2) - np.vdot(v2, v1))


def dirac_from_coefficients(space: FockSpace, coeffs: np.ndarray, side: str = "R"):
    """``sum_i sqrt(Delta_i/2pi)(c_i^* B_i + c_i B_i^dag)`` and its adjoint."""
    r = space.grid.fermion_scale
    out = space.zero()
    for i, c in enumerate(np.asarray(coeffs, dtype=complex)):
        B = space.fermion(side, i)
        out = out + (r[i] * np.conj(c)) * B + (r[i] * c) * B.dag
    return out, out.dag


def dirac_smeared(space: FockSpace, g: TestFunction, side: str = "R"):
    r"""``lambda(g) = int (dk/2pi)(g^* b + g^ b^dag)`` discretized, with its adjoint.

    For real ``g`` the field is hermitian, so both entries coincide and
    ``{lambda(g1), lambda(g2)}`` discretizes ``int g1 g2 dt``.
    """
    return dirac_from_coefficients(space, _transform(g, space.grid), side)


def susy_charges(space: FockSpace, sigma: CompensatingPair, chi=0.0) -> dict[str, OperatorMatrix]:
    r"""``Q_X = sum_i sqrt(k_i)((A_i - d_i)^dag B_i + (A_i - d_i) B_i^dag)`` per chirality."""
    if not space.fermions:
        raise ValueError("supersymmetry charges need fermionic factors")
    out = {}
    for side in SIDES:
        if side not in space.sides:
            out[f"Q_{side}"] = space.zero()
            continue
        d = displacement_amplitudes(chi, sigma, space.grid, side)
        Q = space.zero()
        for i, A in enumerate(_compensated(space, side, d)):
            B = space.fermion(side, i)
            term = math.sqrt(space.grid.k[i]) * (A.dag @ B)
            Q = Q + term + term.dag
        out[f"Q_{side}"] = OperatorMatrix(Q.matrix, space, True)
    return out
