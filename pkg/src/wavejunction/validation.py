"""Randomised and structural checks shared by the CLI ``validate`` mode and tests."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .diagnostics import artificial_boundary_residual, energy_defect_nn, flux_defect
from .full_field import reconstruct, solve_full
from .geometry import Geometry, Parity, axial_wavenumber, eigenvalue, mode_norm, validate_geometry
from .kernels import KERNEL_SPECS, KernelName, kernel, quadrature_oracle
from .quadrant import BCPair, QuadrantProblem, incident_power, outgoing_powers, propagating_slices, solve_quadrant
from .smatrix import CHANNELS, HORIZONTAL, ModeLayout, build_smatrix, flux_normalize, rotation_operator, top_incidence_columns


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (limit {self.limit:.1e}) {self.detail}".rstrip()

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KernelSample:
    name: KernelName
    m: int
    n: int
    geometry: Geometry
    k: float
    tag: str


def _random_geometry(rng: np.random.Generator) -> Geometry:
    a1, a2 = rng.uniform(0.5, 4.0, size=2)
    b1 = a1 * rng.uniform(1.0, 2.0)
    b2 = a2 * rng.uniform(1.0, 2.0)
    return validate_geometry(a1, a2, b1, b2)


def kernel_samples(rng: np.random.Generator, count: int, max_index: int = 12) -> list[KernelSample]:
    """Random kernel evaluations; about a third sit on near-coincident eigenvalues.

    For the plain overlaps the column half-width is set to a rational multiple
    of the row half-width, perturbed by ``~1e-10`` relative; for the
    profile-normalised kernels ``k`` is chosen so that the column's axial
    wavenumber lands within ``~1e-10`` of the row eigenvalue.
    """
    names = list(KernelName)
    out = []
    for i in range(count):
        name = names[i % len(names)]
        spec = KERNEL_SPECS[name]
        g = _random_geometry(rng)
        m, n = (int(v) for v in rng.integers(0, max_index + 1, size=2))
        k = float(rng.uniform(0.2, 10.0))
        tag = "random"
        if rng.random() < 1 / 3:
            tag = "near-coincident"
            row_par, row_attr = spec.row
            col_par, col_attr = spec.col
            delta = float(rng.choice([0.0, 1e-12, 1e-10, 1e-9])) * float(rng.choice([-1, 1]))
            if spec.den is None:
                # pick n so the column eigenvalue matches the row eigenvalue
                L_row = getattr(g, row_attr)
                nu = float(eigenvalue(row_par, m, L_row))
                if nu == 0:
                    n = 0 if col_par is Parity.EVEN else n
                else:
                    n = m + int(rng.integers(0, 3))
                    target = (n * np.pi if col_par is Parity.EVEN else (2 * n + 1) * np.pi / 2) / nu
                    L_col = target * (1 + delta)
                    vals = g.as_dict()
                    vals[col_attr] = L_col
                    # keep the channel inside the junction
                    if vals["a1"] <= vals["b1"] and vals["a2"] <= vals["b2"]:
                        g = Geometry(**vals)
                    else:
                        tag = "random"
            else:
                nu = float(eigenvalue(row_par, m, getattr(g, row_attr)))
                mu = float(eigenvalue(col_par, n, getattr(g, col_attr)))
                k = float(np.hypot(nu, mu) * (1 + delta))
                if k <= 0:
                    k = 0.5
        out.append(KernelSample(name, m, n, g, k, tag))
    return out


def kernel_check(samples: list[KernelSample], rtol: float = 1e-9) -> tuple[Check, list[str]]:
    worst = 0.0
    failures = []
    for s in samples:
        closed = kernel(s.name, s.m, s.n, s.geometry, s.k)
        ref = quadrature_oracle(s.name, s.m, s.n, s.geometry, s.k)
        err = abs(closed - ref) / (1 + abs(ref))
        worst = max(worst, err)
        if not err <= rtol:
            failures.append(
                f"{s.name.value}[{s.m},{s.n}] k={s.k!r} {s.geometry.as_dict()} ({s.tag}): {closed} vs {ref}"
            )
    tags = sum(s.tag == "near-coincident" for s in samples)
    return Check("kernels vs quadrature", worst, rtol, not failures,
                 f"{len(samples)} samples, {tags} near-coincident"), failures


def solution_checks(g: Geometry, k: float, N: int) -> list[Check]:
    checks = []
    for bc in BCPair:
        try:
            sol = solve_quadrant(QuadrantProblem(g, k, bc, 0, N))
        except ValueError:
            continue
        r = artificial_boundary_residual(sol)
        checks.append(Check(f"{bc.value} symmetry-line trace", max(r.values()), 1e-8, max(r.values()) <= 1e-8))
        checks.append(Check(f"{bc.value} solve residual", sol.residual, 1e-10, sol.residual <= 1e-10))
        if bc is BCPair.NN and g.a1 == g.a2:
            e = energy_defect_nn(sol)
            checks.append(Check("NN energy identity", e, 1e-4, e <= 1e-4))
    for parity in Parity:
        try:
            full = solve_full(g, k, parity, 0, N)
        except ValueError:
            continue
        f = flux_defect(full)
        checks.append(Check(f"{parity.value} full-field flux defect", f, 1e-3, f <= 1e-3))
    return checks


def transmission_powers(g: Geometry, k: float, bc: BCPair, N: int) -> np.ndarray:
    """``T[p, q]``: fraction of the power of left mode ``p`` sent into upper mode ``q``."""
    rows = []
    p = 0
    while True:
        try:
            sol = solve_quadrant(QuadrantProblem(g, k, bc, p, N))
        except ValueError:
            break
        _, up = outgoing_powers(sol)
        n_up = propagating_slices(sol)[1]
        rows.append(up[:n_up] / incident_power(sol))
        p += 1
    return np.array(rows).reshape(p, -1)


def transpose_duality(g: Geometry, k: float, bc: BCPair, N: int) -> float:
    """Largest mismatch between ``T`` and the transposed-geometry ``T`` transposed."""
    t = transmission_powers(g, k, bc, N)
    tt = transmission_powers(g.transposed(), k, bc.transposed(), N)
    if t.shape != tt.T.shape:
        raise ValueError(f"propagating counts disagree: {t.shape} vs {tt.shape}")
    return float(np.max(np.abs(t - tt.T))) if t.size else 0.0


def _channel_section(g: Geometry, channel: str, d: float, s: np.ndarray):
    """Points of the cross-section a distance ``d`` down ``channel``."""
    if channel == "L":
        return np.full_like(s, -g.b2 - d), s
    if channel == "R":
        return np.full_like(s, g.b2 + d), s
    if channel == "T":
        return s, np.full_like(s, g.b1 + d)
    return s, np.full_like(s, -g.b1 - d)


def project_waves(field, g: Geometry, k: float, layout: ModeLayout, d1: float = 12.0, d2: float = 13.5,
                  nodes: int = 96) -> tuple[np.ndarray, np.ndarray]:
    """Incoming and outgoing amplitudes read off a field by modal projection.

    The field is projected onto each transverse mode on two cross-sections of
    every channel; the pair of projections separates the ``exp(-i kz d)`` and
    ``exp(+i kz d)`` parts.  Evanescent content must be negligible at ``d1``.
    """
    t, wq = np.polynomial.legendre.leggauss(nodes)
    a = np.zeros(layout.total, dtype=complex)
    b = np.zeros(layout.total, dtype=complex)
    for c in CHANNELS:
        L = g.a1 if c in HORIZONTAL else g.a2
        s = L * t
        w = L * wq
        proj = []
        for d in (d1, d2):
            x, y = _channel_section(g, c, d, s)
            proj.append(field(x, y))
        for par in Parity:
            sl = layout.slice(c, par)
            for n in range(layout.size(par)):
                mu = float(eigenvalue(par, n, L))
                f = par.trig(mu * s)
                norm = 2 * mode_norm(par, n, L)
                c1, c2 = (np.sum(w * f * v) / norm for v in proj)
                kz = axial_wavenumber(k, mu)
                M = np.array([[np.exp(-1j * kz * d1), np.exp(1j * kz * d1)],
                              [np.exp(-1j * kz * d2), np.exp(1j * kz * d2)]])
                a[sl.start + n], b[sl.start + n] = np.linalg.solve(M, [c1, c2])
    return a, b


def top_incidence_field(g: Geometry, k: float, parity: Parity, p: int, N: int):
    """Field of mode ``p`` coming down the top channel of ``g``.

    Built from a left-incidence solve in the transposed geometry evaluated at
    the reflected point ``(-y, -x)``.  The reflection flips odd transverse
    functions, so the odd incident wave needs an overall minus sign.
    """
    full = solve_full(g.transposed(), k, parity, p, N)
    sign = -1.0 if parity is Parity.ODD else 1.0
    return lambda x, y: sign * reconstruct(full, -np.asarray(y), -np.asarray(x))


def projected_top_columns(g: Geometry, k: float, N: int, layout: ModeLayout) -> tuple[np.ndarray, float]:
    """S columns for top incidence read from fields, and the incoming-vector error."""
    cols = []
    err = 0.0
    for par in Parity:
        for p in range(layout.size(par)):
            a, b = project_waves(top_incidence_field(g, k, par, p, N), g, k, layout)
            unit = np.zeros(layout.total)
            unit[layout.slice("T", par).start + p] = 1.0
            err = max(err, float(np.max(np.abs(a - unit))))
            cols.append(b)
    return np.stack(cols, axis=1), err


def smatrix_checks(g: Geometry, k: float, N: int) -> list[Check]:
    s = build_smatrix(g, k, N)
    f = flux_normalize(s)
    U = rotation_operator(s.layout)
    top = top_incidence_columns(g, k, N, s.layout)
    cols = np.hstack([s.matrix[:, s.layout.slice("T", Parity.EVEN)], s.matrix[:, s.layout.slice("T", Parity.ODD)]])
    c4 = float(np.max(np.abs(U @ s.matrix @ U.T - s.matrix)))
    direct = float(np.max(np.abs(top - cols)))
    projected, inc_err = projected_top_columns(g, k, N, s.layout)
    proj = float(np.max(np.abs(projected - cols)))
    return [
        Check("S forbidden blocks", s.forbidden_max(), 0.0, s.forbidden_max() == 0.0),
        Check("S unitarity", f.unitarity_defect(), 1e-3, f.unitarity_defect() <= 1e-3),
        Check("S reciprocity", f.reciprocity_defect(), 1e-3, f.reciprocity_defect() <= 1e-3),
        Check("S quarter-turn invariance", c4, 1e-10, c4 <= 1e-10),
        Check("S top columns vs transposed solve", direct, 1e-10, direct <= 1e-10),
        Check("S top columns vs field projection", proj, 1e-10, proj <= 1e-10,
              f"incoming vector error {inc_err:.1e}"),
    ]
