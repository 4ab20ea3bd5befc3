"""Eigenfunction matching on the principal quadrant ``x < 0 < y``.

The quadrant splits into the left channel ``Omega1`` (``x <= -b2``,
``0 < y < a1``), the junction quarter ``Omega2`` (``-b2 < x < 0``,
``0 < y < b1``) and the upper channel ``Omega3`` (``-a2 < x < 0``, ``y >= b1``).
The symmetry lines carry the artificial conditions of a :class:`BCPair`
(condition at ``x = 0`` first, then at ``y = 0``).

Field representation, with ``psi1`` / ``psi3`` the channel bases and ``chi`` /
``tau`` the junction bases in ``y`` / ``x``::

    Omega1: exp(i kp (x+b2)) psi1_p(y) + sum A_n exp(-i kn (x+b2)) psi1_n(y)
    Omega2: sum B_n X_n(x) chi_n(y) + sum C_n Y_n(y) tau_n(x)
    Omega3: sum D_n exp(i hn (y-b1)) psi3_n(x)

``X_n`` is ``cos`` (Neumann at ``x = 0``) or ``sin`` (Dirichlet) of the axial
wavenumber, normalised to one at ``x = -b2``; ``Y_n`` likewise in ``y``,
normalised at ``y = b1``.  Pressure is projected on the channel bases and
normal velocity on the junction bases, which gives the 4x4 block system of
:func:`assemble_system`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import IllConditioned, OutOfDomain, SingularDiagonalFactor, DimensionMismatch
from .geometry import (
    Geometry,
    Parity,
    axial_wavenumber,
    eigenvalues,
    mode_count,
    mode_norms,
    propagating_count,
)
from .kernels import KernelName, cot_stable, kernel_table, tan_stable, trig_ratio
from .textfmt import num

COND_LIMIT = 1e12
RESIDUAL_LIMIT = 1e-10


class BCPair(enum.Enum):
    """Artificial conditions ``(x = 0, y = 0)``; N = Neumann, D = Dirichlet."""

    NN = "NN"
    DD = "DD"
    ND = "ND"
    DN = "DN"

    @property
    def x_neumann(self) -> bool:
        return self.value[0] == "N"

    @property
    def y_neumann(self) -> bool:
        return self.value[1] == "N"

    @property
    def channel_parity(self) -> Parity:
        """Family of the left-channel modes (and of the incident wave)."""
        return Parity.EVEN if self.y_neumann else Parity.ODD

    @property
    def vertical_parity(self) -> Parity:
        """Family of the upper-channel modes."""
        return Parity.EVEN if self.x_neumann else Parity.ODD

    @property
    def kernels(self) -> tuple[KernelName, KernelName, KernelName, KernelName]:
        """(left/B, left/C, upper/B, upper/C) coupling kernels."""
        return _KERNELS[self]

    def transposed(self) -> "BCPair":
        """Pair seen after the reflection ``(x, y) -> (-y, -x)``."""
        return BCPair(self.value[::-1])


_KERNELS = {
    BCPair.NN: (KernelName.H, KernelName.V, KernelName.O, KernelName.E),
    BCPair.DD: (KernelName.R, KernelName.Q, KernelName.W, KernelName.K),
    BCPair.ND: (KernelName.R, KernelName.Vp, KernelName.Wp, KernelName.E),
    BCPair.DN: (KernelName.H, KernelName.Qp, KernelName.Op, KernelName.K),
}


@dataclass(frozen=True)
class QuadrantProblem:
    geometry: Geometry
    k: float
    bc: BCPair
    p: int
    N: int = 100

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("truncation N must be >= 1")
        if self.k <= 0:
            raise ValueError("k must be positive")
        parity = self.bc.channel_parity
        if not 0 <= self.p < mode_count(parity, self.N):
            raise ValueError(f"incident index p={self.p} outside the retained modes")
        mu = eigenvalues(parity, self.N, self.geometry.a1)[self.p]
        if not mu < self.k:
            raise ValueError(
                f"incident mode p={self.p} ({parity.value}) is evanescent at k={self.k}"
            )

    @cached_property
    def bases(self) -> "QuadrantBases":
        return QuadrantBases.build(self.geometry, self.k, self.bc, self.N)


@dataclass(frozen=True)
class QuadrantBases:
    """Eigenvalues, axial wavenumbers and norms of the four expansions."""

    # channel modes, Omega1 (y on [0, a1]) and Omega3 (x on [-a2, 0])
    left_eig: np.ndarray
    left_kz: np.ndarray
    left_norm: np.ndarray
    up_eig: np.ndarray
    up_kz: np.ndarray
    up_norm: np.ndarray
    # junction series: B (transverse in y on [0, b1]) and C (transverse in x on [-b2, 0])
    b_eig: np.ndarray
    b_kz: np.ndarray
    b_norm: np.ndarray
    c_eig: np.ndarray
    c_kz: np.ndarray
    c_norm: np.ndarray
    bc: BCPair

    @classmethod
    def build(cls, g: Geometry, k: float, bc: BCPair, N: int) -> "QuadrantBases":
        py, px = bc.channel_parity, bc.vertical_parity
        parts = {}
        for key, parity, L in (
            ("left", py, g.a1),
            ("up", px, g.a2),
            ("b", py, g.b1),
            ("c", px, g.b2),
        ):
            eig = eigenvalues(parity, N, L)
            parts[f"{key}_eig"] = eig
            parts[f"{key}_kz"] = axial_wavenumber(k, eig)
            parts[f"{key}_norm"] = mode_norms(parity, N, L)
        return cls(bc=bc, **parts)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return len(self.left_eig), len(self.b_eig), len(self.c_eig), len(self.up_eig)


def _derivative_factors(bases: QuadrantBases, g: Geometry, bc: BCPair):
    """``X_m'(-b2)`` and ``Y_m'(b1) / Y_m(b1)`` for the junction series."""
    a, c = bases.b_kz, bases.c_kz
    if bc.x_neumann:
        # X = cos(a x)/cos(a b2)  ->  X'(-b2) = a tan(a b2)
        dx = a * tan_stable(a * g.b2)
        singular = (a.imag == 0) & (np.abs(np.cos(a.real * g.b2)) < 1e-12)
    else:
        # X = sin(a x)/sin(-a b2)  ->  X'(-b2) = -a cot(a b2), limit -1/b2
        with np.errstate(invalid="ignore"):
            dx = np.where(a == 0, -1.0 / g.b2, -a * cot_stable(a * g.b2))
        singular = (a.imag == 0) & (a != 0) & (np.abs(np.sin(a.real * g.b2)) < 1e-12)
    if np.any(singular):
        raise SingularDiagonalFactor("x-velocity (tan/cot of b2)", int(np.flatnonzero(singular)[0]))
    if bc.y_neumann:
        dy = -c * tan_stable(c * g.b1)
        singular = (c.imag == 0) & (np.abs(np.cos(c.real * g.b1)) < 1e-12)
    else:
        with np.errstate(invalid="ignore"):
            dy = np.where(c == 0, 1.0 / g.b1, c * cot_stable(c * g.b1))
        singular = (c.imag == 0) & (c != 0) & (np.abs(np.sin(c.real * g.b1)) < 1e-12)
    if np.any(singular):
        raise SingularDiagonalFactor("y-velocity (tan/cot of b1)", int(np.flatnonzero(singular)[0]))
    return dx, dy


@dataclass(frozen=True)
class AssembledSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    sizes: tuple[int, int, int, int]
    kernels: dict[str, np.ndarray] = field(repr=False)


def assemble_system(problem: QuadrantProblem) -> AssembledSystem:
    """Block system ``M [A; B; C; D] = rhs`` for one sub-problem.

    Rows: pressure on ``x = -b2`` (projected on the left-channel modes),
    pressure on ``y = b1`` (upper-channel modes), x-velocity on ``x = -b2``
    (junction ``y``-basis) and y-velocity on ``y = b1`` (junction ``x``-basis).
    """
    g, k, bc, N, p = problem.geometry, problem.k, problem.bc, problem.N, problem.p
    bases = problem.bases
    kb1, kc1, kb3, kc3 = bc.kernels
    P = kernel_table(kb1, g, k, N).entries  # (left, B)
    V = kernel_table(kc1, g, k, N).entries  # (left, C)
    O = kernel_table(kb3, g, k, N).entries  # (up, B)
    E = kernel_table(kc3, g, k, N).entries  # (up, C)
    dx, dy = _derivative_factors(bases, g, bc)

    nA, nB, nC, nD = bases.sizes
    n = nA + nB + nC + nD
    M = np.zeros((n, n), dtype=complex)
    sA = slice(0, nA)
    sB = slice(nA, nA + nB)
    sC = slice(nA + nB, nA + nB + nC)
    sD = slice(nA + nB + nC, n)
    r1, r2, r3, r4 = sA, slice(nA, nA + nD), slice(nA + nD, nA + nD + nB), slice(nA + nD + nB, n)

    M[r1, sA] = -np.diag(bases.left_norm)
    M[r1, sB] = P
    M[r1, sC] = V
    M[r2, sB] = O
    M[r2, sC] = E
    M[r2, sD] = -np.diag(bases.up_norm)
    M[r3, sA] = P.T * (1j * bases.left_kz)[None, :]
    M[r3, sB] = np.diag(dx * bases.b_norm)
    M[r4, sC] = np.diag(dy * bases.c_norm)
    M[r4, sD] = -E.T * (1j * bases.up_kz)[None, :]

    rhs = np.zeros(n, dtype=complex)
    rhs[p] = bases.left_norm[p]
    rhs[r3] = 1j * bases.left_kz[p] * P[p, :]
    return AssembledSystem(M, rhs, (nA, nB, nC, nD), {"left_B": P, "left_C": V, "up_B": O, "up_C": E})


@dataclass(frozen=True)
class QuadrantSolution:
    problem: QuadrantProblem
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    condition_estimate: float
    residual: float

    @property
    def bases(self) -> QuadrantBases:
        return self.problem.bases

    def with_coefficients(self, A, B, C, D) -> "QuadrantSolution":
        """Copy carrying different coefficients (used for scaling tests)."""
        return QuadrantSolution(self.problem, A, B, C, D, self.condition_estimate, self.residual)

    def coefficient_rows(self):
        for label, vec in (("A", self.A), ("B", self.B), ("C", self.C), ("D", self.D)):
            for n, v in enumerate(vec):
                yield label, n, complex(v)

    def to_text(self, delimiter: str = ",") -> str:
        """Coefficient dump, columns ``series, n, re, im``."""
        pb = self.problem
        head = [
            f"# bc={pb.bc.value} p={pb.p} N={pb.N} k={num(pb.k)}",
            "# geometry " + " ".join(f"{k}={num(v)}" for k, v in pb.geometry.as_dict().items()),
            delimiter.join(("series", "n", "re", "im")),
        ]
        body = [
            delimiter.join((s, str(n), num(v.real), num(v.imag))) for s, n, v in self.coefficient_rows()
        ]
        return "\n".join(head + body) + "\n"


def parse_coefficients(text: str, delimiter: str = ",") -> dict[str, np.ndarray]:
    series: dict[str, list[complex]] = {"A": [], "B": [], "C": [], "D": []}
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("series"):
            continue
        s, n, re, im = line.split(delimiter)
        if int(n) != len(series[s]):
            raise ValueError(f"coefficient rows out of order at {s}{n}")
        series[s].append(complex(float(re), float(im)))
    return {s: np.array(v, dtype=complex) for s, v in series.items()}


def solve_quadrant(problem: QuadrantProblem, check_condition: bool = True) -> QuadrantSolution:
    """Dense LU solve of the assembled system.

    The 1-norm condition number is estimated from the LU factors (LAPACK
    ``gecon``); estimates above ``1e12`` raise :class:`IllConditioned` unless
    ``check_condition`` is false.
    """
    system = assemble_system(problem)
    M, rhs = system.matrix, system.rhs
    lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    anorm = np.linalg.norm(M, 1)
    (gecon,) = scipy.linalg.get_lapack_funcs(("gecon",), (lu,))
    rcond, _ = gecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if check_condition and cond > COND_LIMIT:
        raise IllConditioned(cond, COND_LIMIT)
    residual = float(np.linalg.norm(M @ x - rhs) / np.linalg.norm(rhs))
    if residual > RESIDUAL_LIMIT:
        # one step of iterative refinement before giving up
        x = x + scipy.linalg.lu_solve((lu, piv), rhs - M @ x)
        residual = float(np.linalg.norm(M @ x - rhs) / np.linalg.norm(rhs))
    nA, nB, nC, nD = system.sizes
    A = x[:nA]
    B = x[nA : nA + nB]
    C = x[nA + nB : nA + nB + nC]
    D = x[nA + nB + nC :]
    for v in (A, B, C, D):
        v.setflags(write=False)
    return QuadrantSolution(problem, A, B, C, D, float(cond), residual)


# --------------------------------------------------------------------------
# field evaluation


def _region(g: Geometry, x, y, tol: float = 1e-12):
    """Region label per point: 1, 2, 3, or 0 outside the closed quadrant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside_x = x <= tol
    inside_y = y >= -tol
    in2 = (x >= -g.b2 - tol) & (y <= g.b1 + tol) & inside_x & inside_y
    in1 = (x <= -g.b2 + tol) & (y <= g.a1 + tol) & inside_y
    in3 = (y >= g.b1 - tol) & (x >= -g.a2 - tol) & inside_x
    out = np.zeros(np.broadcast(x, y).shape, dtype=int)
    out = np.where(in3, 3, out)
    out = np.where(in1, 1, out)
    out = np.where(in2, 2, out)
    return out


def _channel_trig(parity: Parity, eig, s):
    return np.cos(np.multiply.outer(s, eig)) if parity is Parity.EVEN else np.sin(np.multiply.outer(s, eig))


def _channel_dtrig(parity: Parity, eig, s):
    if parity is Parity.EVEN:
        return -eig * np.sin(np.multiply.outer(s, eig))
    return eig * np.cos(np.multiply.outer(s, eig))


def _omega1(sol: QuadrantSolution, x, y, grad: bool):
    b = sol.bases
    g = sol.problem.geometry
    p = sol.problem.p
    par = sol.problem.bc.channel_parity
    s = x + g.b2
    kz = b.left_kz
    inc = np.exp(1j * kz[p] * s)
    ref = np.exp(-1j * np.multiply.outer(s, kz))
    fy = _channel_trig(par, b.left_eig, y)
    if not grad:
        return inc * fy[..., p] + np.sum(sol.A * ref * fy, axis=-1)
    dfy = _channel_dtrig(par, b.left_eig, y)
    gx = 1j * kz[p] * inc * fy[..., p] + np.sum(sol.A * (-1j * kz) * ref * fy, axis=-1)
    gy = inc * dfy[..., p] + np.sum(sol.A * ref * dfy, axis=-1)
    return gx, gy


def _omega3(sol: QuadrantSolution, x, y, grad: bool):
    b = sol.bases
    g = sol.problem.geometry
    par = sol.problem.bc.vertical_parity
    kz = b.up_kz
    prop = np.exp(1j * np.multiply.outer(y - g.b1, kz))
    fx = _channel_trig(par, b.up_eig, x)
    if not grad:
        return np.sum(sol.D * prop * fx, axis=-1)
    dfx = _channel_dtrig(par, b.up_eig, x)
    gx = np.sum(sol.D * prop * dfx, axis=-1)
    gy = np.sum(sol.D * (1j * kz) * prop * fx, axis=-1)
    return gx, gy


def _profile(neumann: bool, kz, s, edge: float, sign: float):
    """``f(kz s) / f(kz * sign * edge)`` with ``f`` = cos (Neumann) or sin."""
    s = np.asarray(s, dtype=float)
    if neumann:
        return trig_ratio("cos", "cos", kz, np.multiply.outer(s, np.ones_like(kz.real)), edge)
    # sin(kz s) / sin(-kz edge) for the x-profile (sign = -1), sin(kz s)/sin(kz edge) otherwise
    return sign * trig_ratio("sin", "sin", kz, np.multiply.outer(s, np.ones_like(kz.real)), edge)


def _dprofile(neumann: bool, kz, s, edge: float, sign: float):
    s = np.asarray(s, dtype=float)
    ss = np.multiply.outer(s, np.ones_like(kz.real))
    if neumann:
        # d/ds cos(kz s)/cos(kz e) = -kz sin(kz s)/cos(kz e)
        return -kz * trig_ratio("sin", "cos", kz, ss, edge)
    with np.errstate(invalid="ignore"):
        val = kz * trig_ratio("cos", "sin", kz, ss, edge)
    val = np.where(kz == 0, 1.0 / edge, val)
    return sign * val


def _omega2(sol: QuadrantSolution, x, y, grad: bool):
    b = sol.bases
    g = sol.problem.geometry
    bc = sol.problem.bc
    # B series: X_n(x) chi_n(y)
    X = _profile(bc.x_neumann, b.b_kz, x, g.b2, -1.0)
    chi = _channel_trig(bc.channel_parity, b.b_eig, y)
    # C series: Y_n(y) tau_n(x)
    Y = _profile(bc.y_neumann, b.c_kz, y, g.b1, 1.0)
    tau = _channel_trig(bc.vertical_parity, b.c_eig, x)
    if not grad:
        return np.sum(sol.B * X * chi, axis=-1) + np.sum(sol.C * Y * tau, axis=-1)
    dX = _dprofile(bc.x_neumann, b.b_kz, x, g.b2, -1.0)
    dchi = _channel_dtrig(bc.channel_parity, b.b_eig, y)
    dY = _dprofile(bc.y_neumann, b.c_kz, y, g.b1, 1.0)
    dtau = _channel_dtrig(bc.vertical_parity, b.c_eig, x)
    gx = np.sum(sol.B * dX * chi, axis=-1) + np.sum(sol.C * Y * dtau, axis=-1)
    gy = np.sum(sol.B * X * dchi, axis=-1) + np.sum(sol.C * dY * tau, axis=-1)
    return gx, gy


_EVALUATORS = {1: _omega1, 2: _omega2, 3: _omega3}


def _evaluate(sol: QuadrantSolution, x, y, grad: bool, region: int | None):
    g = sol.problem.geometry
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    labels = _region(g, x, y)
    if region is not None:
        ok = labels > 0
        # honour an explicit region for interface traces
        labels = np.where(ok, region, 0)
    if np.any(labels == 0):
        bad = np.argwhere(labels == 0)[0]
        raise OutOfDomain(f"point ({x[tuple(bad)]}, {y[tuple(bad)]}) is outside the principal quadrant")
    shape = x.shape
    xf, yf, lf = x.ravel(), y.ravel(), labels.ravel()
    if grad:
        gx = np.empty(xf.shape, dtype=complex)
        gy = np.empty(xf.shape, dtype=complex)
    else:
        out = np.empty(xf.shape, dtype=complex)
    for r, fn in _EVALUATORS.items():
        sel = lf == r
        if not np.any(sel):
            continue
        if grad:
            gx[sel], gy[sel] = fn(sol, xf[sel], yf[sel], True)
        else:
            out[sel] = fn(sol, xf[sel], yf[sel], False)
    if grad:
        return gx.reshape(shape), gy.reshape(shape)
    return out.reshape(shape)


def eval_quadrant(sol: QuadrantSolution, x, y, region: int | None = None):
    """Field value at points of the closed principal quadrant.

    ``region`` forces a particular series (1, 2 or 3) on shared interfaces.
    Scalars in give a complex scalar back.
    """
    out = _evaluate(sol, x, y, False, region)
    return complex(out) if np.ndim(out) == 0 else out


def eval_quadrant_gradient(sol: QuadrantSolution, x, y, region: int | None = None):
    gx, gy = _evaluate(sol, x, y, True, region)
    if np.ndim(gx) == 0:
        return complex(gx), complex(gy)
    return gx, gy


def incident_power(sol: QuadrantSolution) -> float:
    b = sol.bases
    p = sol.problem.p
    return float(b.left_kz[p].real * b.left_norm[p])


def outgoing_powers(sol: QuadrantSolution) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode power carried away in the left and upper channels."""
    b = sol.bases
    left = b.left_kz.real * b.left_norm * np.abs(sol.A) ** 2
    up = b.up_kz.real * b.up_norm * np.abs(sol.D) ** 2
    return left, up


def propagating_slices(sol: QuadrantSolution) -> tuple[int, int]:
    pb = sol.problem
    g = pb.geometry
    return (
        propagating_count(pb.bc.channel_parity, pb.k, g.a1),
        propagating_count(pb.bc.vertical_parity, pb.k, g.a2),
    )


def check_same_problem(*solutions: QuadrantSolution) -> None:
    first = solutions[0].problem
    for s in solutions[1:]:
        q = s.problem
        if (q.geometry, q.k, q.p, q.N) != (first.geometry, first.k, first.p, first.N):
            raise DimensionMismatch("quadrant solutions do not share geometry, k, p and N")
