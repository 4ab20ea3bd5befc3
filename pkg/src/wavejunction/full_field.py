"""Full four-channel field from pairs of quadrant solutions.

An incident mode from the left that is even in ``y`` is the superposition of
the NN and DN quadrant problems; an odd one uses ND and DD.  Inside the
principal quadrant the field is half the sum of the two; across ``x = 0`` the
member that is Dirichlet there flips sign, and across ``y = 0`` the whole
field is mirrored (even) or anti-mirrored (odd).

:func:`reconstruct` is the normative evaluator.  :func:`closed_form_check`
writes the same field directly as one series per region of the whole domain
(no folding onto the quadrant) and serves as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OutOfDomain
from .geometry import Geometry, Parity
from .kernels import trig_ratio
from .textfmt import num
from .quadrant import (
    BCPair,
    QuadrantProblem,
    QuadrantSolution,
    check_same_problem,
    eval_quadrant,
    solve_quadrant,
)

PAIRS = {
    Parity.EVEN: (BCPair.NN, BCPair.DN),
    Parity.ODD: (BCPair.ND, BCPair.DD),
}


@dataclass(frozen=True)
class FullSolution:
    """Two quadrant solutions sharing geometry, k, p and N.

    ``xn`` is the member with a Neumann condition on ``x = 0`` (NN or ND),
    ``xd`` the member with a Dirichlet one (DN or DD).
    """

    parity: Parity
    xn: QuadrantSolution
    xd: QuadrantSolution

    def __post_init__(self):
        check_same_problem(self.xn, self.xd)
        want = PAIRS[self.parity]
        got = (self.xn.problem.bc, self.xd.problem.bc)
        if got != want:
            raise DimensionMismatch(
                f"{self.parity.value} incidence pairs {want[0].value} with {want[1].value}, got "
                f"{got[0].value}/{got[1].value}"
            )

    @classmethod
    def from_pair(cls, first: QuadrantSolution, second: QuadrantSolution) -> "FullSolution":
        """Accept the two members in any order."""
        by_bc = {first.problem.bc: first, second.problem.bc: second}
        for parity, (bn, bd) in PAIRS.items():
            if set(by_bc) == {bn, bd}:
                return cls(parity, by_bc[bn], by_bc[bd])
        raise DimensionMismatch(
            f"cannot pair {first.problem.bc.value} with {second.problem.bc.value}"
        )

    @property
    def geometry(self) -> Geometry:
        return self.xn.problem.geometry

    @property
    def k(self) -> float:
        return self.xn.problem.k

    @property
    def p(self) -> int:
        return self.xn.problem.p

    @property
    def N(self) -> int:
        return self.xn.problem.N


def solve_full(geometry: Geometry, k: float, parity: Parity, p: int, N: int = 100,
               check_condition: bool = True) -> FullSolution:
    bn, bd = PAIRS[Parity(parity)]
    xn = solve_quadrant(QuadrantProblem(geometry, k, bn, p, N), check_condition)
    xd = solve_quadrant(QuadrantProblem(geometry, k, bd, p, N), check_condition)
    return FullSolution(Parity(parity), xn, xd)


def in_domain(g: Geometry, x, y, tol: float = 1e-12):
    """Mask of points in the closed cross-shaped domain."""
    ax = np.abs(np.asarray(x, dtype=float))
    ay = np.abs(np.asarray(y, dtype=float))
    return (ay <= g.a1 + tol) | (ax <= g.a2 + tol) | ((ax <= g.b2 + tol) & (ay <= g.b1 + tol))


def _check_domain(g: Geometry, x, y):
    inside = in_domain(g, x, y)
    if not np.all(inside):
        idx = np.argwhere(~np.atleast_1d(inside))[0]
        xs, ys = np.atleast_1d(x), np.atleast_1d(y)
        raise OutOfDomain(f"point ({xs[tuple(idx)]}, {ys[tuple(idx)]}) lies outside the junction domain")


def reconstruct(full: FullSolution, x, y):
    """Field of the full problem at ``(x, y)``; scalars or broadcastable arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    _check_domain(full.geometry, x, y)
    xq, yq = -np.abs(x), np.abs(y)
    fn = eval_quadrant(full.xn, xq, yq)
    fd = eval_quadrant(full.xd, xq, yq)
    sx = np.where(x > 0, -1.0, 1.0)
    out = 0.5 * (fn + sx * fd)
    if full.parity is Parity.ODD:
        out = out * np.where(y < 0, -1.0, 1.0)
    return complex(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# direct piecewise series over the whole domain


def channel_amplitudes(full: FullSolution) -> dict[str, dict[Parity, np.ndarray]]:
    """Outgoing modal amplitudes in each channel, keyed ``L``, ``R``, ``U``, ``D``.

    Horizontal channels use ``cos(beta_n y)`` / ``sin(gamma_n y)``, vertical
    channels ``cos(eta_n x)`` / ``sin(zeta_n x)``, with global coordinates, and
    the amplitude multiplies ``exp(i kz * distance from the junction face)``.
    The incident wave itself is not included.
    """
    n, d = full.xn, full.xd
    if full.parity is Parity.EVEN:
        # NN carries the even vertical family, DN the odd one
        up = {Parity.EVEN: 0.5 * n.D, Parity.ODD: 0.5 * d.D}
        down = up
        empty = np.zeros(0, dtype=complex)
        return {
            "L": {Parity.EVEN: 0.5 * (n.A + d.A), Parity.ODD: empty},
            "R": {Parity.EVEN: 0.5 * (n.A - d.A), Parity.ODD: empty},
            "U": up,
            "D": down,
        }
    empty = np.zeros(0, dtype=complex)
    up = {Parity.EVEN: 0.5 * n.D, Parity.ODD: 0.5 * d.D}
    return {
        "L": {Parity.EVEN: empty, Parity.ODD: 0.5 * (n.A + d.A)},
        "R": {Parity.EVEN: empty, Parity.ODD: 0.5 * (n.A - d.A)},
        "U": up,
        "D": {par: -v for par, v in up.items()},
    }


def _series(coef, kz, dist, trans):
    return np.sum(coef * np.exp(1j * np.multiply.outer(dist, kz)) * trans, axis=-1)


def closed_form_check(full: FullSolution, x, y):
    """Same field as :func:`reconstruct`, summed region by region directly.

    Transverse factors are extended to negative coordinates by their natural
    parity, so only the channel exponentials and the lower-channel sign for
    odd incidence need explicit handling.
    """
    g = full.geometry
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    _check_domain(g, x, y)
    scalar = x.ndim == 0
    shape = x.shape
    x, y = np.atleast_1d(x).ravel(), np.atleast_1d(y).ravel()
    n, d = full.xn, full.xd
    bn, bd = n.bases, d.bases
    amps = channel_amplitudes(full)
    hpar = Parity.EVEN if full.parity is Parity.EVEN else Parity.ODD
    ht = hpar.trig
    out = np.zeros(x.shape, dtype=complex)

    junction = (np.abs(x) <= g.b2) & (np.abs(y) <= g.b1)
    left = (x < -g.b2) & ~junction
    right = (x > g.b2) & ~junction
    up = (y > g.b1) & ~junction
    down = (y < -g.b1) & ~junction

    beta = bn.left_eig
    kzh = bn.left_kz
    if np.any(left):
        xs, ys = x[left], y[left]
        trans = ht(np.multiply.outer(ys, beta))
        p = full.p
        inc = np.exp(1j * kzh[p] * (xs + g.b2)) * trans[:, p]
        out[left] = inc + _series(amps["L"][hpar], kzh, -(xs + g.b2), trans)
    if np.any(right):
        xs, ys = x[right], y[right]
        trans = ht(np.multiply.outer(ys, beta))
        out[right] = _series(amps["R"][hpar], kzh, xs - g.b2, trans)
    for mask, key, dist in ((up, "U", y - g.b1), (down, "D", -y - g.b1)):
        if not np.any(mask):
            continue
        xs = x[mask]
        val = _series(amps[key][Parity.EVEN], bn.up_kz, dist[mask], np.cos(np.multiply.outer(xs, bn.up_eig)))
        val = val + _series(amps[key][Parity.ODD], bd.up_kz, dist[mask], np.sin(np.multiply.outer(xs, bd.up_eig)))
        out[mask] = val
    if np.any(junction):
        xs, ys = x[junction], y[junction]
        total = np.zeros(xs.shape, dtype=complex)
        for sol, weight in ((n, 0.5), (d, 0.5)):
            b = sol.bases
            bc = sol.problem.bc
            ones_b = np.ones_like(b.b_kz.real)
            ones_c = np.ones_like(b.c_kz.real)
            # x-profile normalised at x = -b2; the sin profile is odd in x
            if bc.x_neumann:
                X = trig_ratio("cos", "cos", b.b_kz, np.multiply.outer(xs, ones_b), g.b2)
            else:
                X = -trig_ratio("sin", "sin", b.b_kz, np.multiply.outer(xs, ones_b), g.b2)
            if bc.y_neumann:
                Y = trig_ratio("cos", "cos", b.c_kz, np.multiply.outer(ys, ones_c), g.b1)
            else:
                Y = trig_ratio("sin", "sin", b.c_kz, np.multiply.outer(ys, ones_c), g.b1)
            chi = ht(np.multiply.outer(ys, b.b_eig))
            tau = bc.vertical_parity.trig(np.multiply.outer(xs, b.c_eig))
            total += weight * (np.sum(sol.B * X * chi, axis=-1) + np.sum(sol.C * Y * tau, axis=-1))
        out[junction] = total
    return complex(out[0]) if scalar else out.reshape(shape)


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class FieldGrid:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x)); NaN outside the domain
    mask: np.ndarray
    meta: dict

    def to_text(self, delimiter: str = ",") -> str:
        """Header lines, then ``x, y, Re, Im`` per in-domain point."""
        lines = [f"# {k}={v}" if isinstance(v, (str, int)) else f"# {k}={num(v)}" for k, v in self.meta.items()]
        lines.append(f"# nx={len(self.x)} ny={len(self.y)}")
        lines.append(delimiter.join(("x", "y", "re", "im")))
        vals = np.asarray(self.values)
        for j, yj in enumerate(self.y):
            for i, xi in enumerate(self.x):
                if not self.mask[j, i]:
                    continue
                v = vals[j, i]
                if np.iscomplexobj(vals):
                    lines.append(delimiter.join(map(num, (xi, yj, v.real, v.imag))))
                else:
                    lines.append(delimiter.join(map(num, (xi, yj, v, 0.0))))
        return "\n".join(lines) + "\n"


def parse_field_grid(text: str, delimiter: str = ",") -> FieldGrid:
    """Inverse of :meth:`FieldGrid.to_text` (masked points come back as NaN)."""
    meta: dict = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, val = item.partition("=")
                meta[key] = val
        elif line and not line.startswith("x"):
            rows.append([float(s) for s in line.split(delimiter)])
    data = np.array(rows, dtype=float).reshape(-1, 4)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    values = np.full((len(ys), len(xs)), np.nan + 0j)
    mask = np.zeros((len(ys), len(xs)), dtype=bool)
    ix = np.searchsorted(xs, data[:, 0])
    iy = np.searchsorted(ys, data[:, 1])
    values[iy, ix] = data[:, 2] + 1j * data[:, 3]
    mask[iy, ix] = True
    return FieldGrid(xs, ys, values, mask, meta)


def grid_axes(g: Geometry, nx: int, ny: int, channel_length: float | None = None):
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2 in each direction")
    ell = 2 * max(g.b1, g.b2) if channel_length is None else float(channel_length)
    xs = np.linspace(-g.b2 - ell, g.b2 + ell, nx)
    ys = np.linspace(-g.b1 - ell, g.b1 + ell, ny)
    return xs, ys


def sample_grid(full: FullSolution, nx: int = 121, ny: int = 121,
                channel_length: float | None = None) -> FieldGrid:
    """Field on a rectangular grid covering the junction and channel stubs."""
    g = full.geometry
    xs, ys = grid_axes(g, nx, ny, channel_length)
    X, Y = np.meshgrid(xs, ys)
    mask = in_domain(g, X, Y)
    values = np.full(X.shape, np.nan + 0j)
    values[mask] = reconstruct(full, X[mask], Y[mask])
    meta = dict(g.as_dict(), k=full.k, p=full.p, parity=full.parity.value, N=full.N)
    return FieldGrid(xs, ys, values, mask, meta)


def sample_quadrant(sol: QuadrantSolution, nx: int = 81, ny: int = 81,
                    channel_length: float | None = None) -> FieldGrid:
    """One quadrant solution on a raster of the principal quadrant."""
    g = sol.problem.geometry
    ell = 2 * max(g.b1, g.b2) if channel_length is None else float(channel_length)
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2 in each direction")
    xs = np.linspace(-g.b2 - ell, 0.0, nx)
    ys = np.linspace(0.0, g.b1 + ell, ny)
    X, Y = np.meshgrid(xs, ys)
    mask = in_domain(g, X, Y)
    values = np.full(X.shape, np.nan + 0j)
    values[mask] = eval_quadrant(sol, X[mask], Y[mask])
    pb = sol.problem
    meta = dict(g.as_dict(), k=pb.k, p=pb.p, bc=pb.bc.value, N=pb.N)
    return FieldGrid(xs, ys, values, mask, meta)
