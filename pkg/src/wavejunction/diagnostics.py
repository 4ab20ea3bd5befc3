"""Quality measures for quadrant and full solutions.

* :func:`energy_defect_nn` -- the NN power identity for equal channel widths,
  written with the same weights as the printed identity.
* :func:`flux_defect` -- modal power balance of a full solution over all four
  channels, valid for any widths.
* :func:`matching_residuals` -- relative L2 jumps of value and normal
  derivative across the two interfaces, plus the normal derivative on the
  rigid wall pieces of the junction faces.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateCutOn, NotApplicable
from .full_field import FullSolution, channel_amplitudes
from .geometry import Geometry, Parity, eigenvalue, mode_norm
from .quadrant import BCPair, QuadrantSolution, eval_quadrant, eval_quadrant_gradient

# |k - mu| below this counts as sitting exactly on a cut-on
CUT_ON_TOL = 1e-9
# flag frequencies this close to a cut-on or internal resonance
NEAR_TOL = 1e-6


def _cut_on_gap(k: float, parity: Parity, L: float) -> float:
    n = np.arange(int(k * L / np.pi) + 3)
    return float(np.min(np.abs(k - eigenvalue(parity, n, L))))


def _require_off_cut_on(k: float, channels):
    for parity, L in channels:
        gap = _cut_on_gap(k, parity, L)
        if gap < CUT_ON_TOL:
            raise DegenerateCutOn(
                f"k={k!r} is within {gap:.1e} of a {parity.value} cut-on of a channel of half-width {L}"
            )


def energy_defect_nn(sol: QuadrantSolution) -> float:
    """``|LHS - 1|`` of the NN power identity (requires ``a1 == a2``)."""
    pb = sol.problem
    g = pb.geometry
    if pb.bc is not BCPair.NN:
        raise NotApplicable(f"energy identity is stated for NN only, got {pb.bc.value}")
    if g.a1 != g.a2:
        raise NotApplicable(f"energy identity needs a1 == a2, got {g.a1} and {g.a2}")
    _require_off_cut_on(pb.k, [(Parity.EVEN, g.a1)])
    q = math.floor(pb.k * g.a1 / math.pi)
    kz = sol.bases.left_kz.real
    both = np.abs(sol.A[: q + 1]) ** 2 + np.abs(sol.D[: q + 1]) ** 2
    p = pb.p
    if p == 0:
        lhs = both[0] + 0.5 * np.sum(kz[1 : q + 1] / kz[0] * both[1:])
    else:
        lhs = (2 * kz[0] / kz[p]) * both[0] + np.sum(kz[1 : q + 1] / kz[p] * both[1:])
    return float(abs(lhs - 1.0))


def _channel_weight(parity: Parity, n: np.ndarray, L: float) -> np.ndarray:
    """Squared norm of a mode over the full channel width ``[-L, L]``."""
    return 2.0 * np.asarray(mode_norm(parity, n, L), dtype=float)


def channel_powers(full: FullSolution) -> dict[str, float]:
    """Outgoing power per channel and the incident power, propagating modes only."""
    g = full.geometry
    k = full.k
    amps = channel_amplitudes(full)
    bases = {Parity.EVEN: None, Parity.ODD: None}
    for sol in (full.xn, full.xd):
        bases[sol.problem.bc.vertical_parity] = sol.bases
    hb = full.xn.bases
    out = {}
    for ch in ("L", "R", "U", "D"):
        total = 0.0
        for parity, coef in amps[ch].items():
            if coef.size == 0:
                continue
            if ch in ("L", "R"):
                kz, L = hb.left_kz, g.a1
            else:
                kz, L = bases[parity].up_kz, g.a2
            n = np.arange(coef.size)
            w = kz.real * _channel_weight(parity, n, L)
            total += float(np.sum(w * np.abs(coef) ** 2))
        out[ch] = total
    p = full.p
    out["incident"] = float(hb.left_kz[p].real * _channel_weight(full.parity, np.array([p]), g.a1)[0])
    return out


def flux_defect(full: FullSolution) -> float:
    """``|1 - outgoing / incident|`` summed over the four channels."""
    g = full.geometry
    _require_off_cut_on(full.k, [(par, L) for par in Parity for L in (g.a1, g.a2)])
    pw = channel_powers(full)
    outgoing = pw["L"] + pw["R"] + pw["U"] + pw["D"]
    return float(abs(1.0 - outgoing / pw["incident"]))


def quadrant_flux_defect(sol: QuadrantSolution) -> float:
    """Power balance of one quadrant problem (any widths)."""
    b = sol.bases
    p = sol.problem.p
    inc = b.left_kz[p].real * b.left_norm[p]
    out = np.sum(b.left_kz.real * b.left_norm * np.abs(sol.A) ** 2)
    out += np.sum(b.up_kz.real * b.up_norm * np.abs(sol.D) ** 2)
    return float(abs(1.0 - out / inc))


def signed_quadrant_flux_defect(sol: QuadrantSolution) -> float:
    b = sol.bases
    p = sol.problem.p
    inc = b.left_kz[p].real * b.left_norm[p]
    out = np.sum(b.left_kz.real * b.left_norm * np.abs(sol.A) ** 2)
    out += np.sum(b.up_kz.real * b.up_norm * np.abs(sol.D) ** 2)
    return float(1.0 - out / inc)


# --------------------------------------------------------------------------
# interface residuals


def _gauss(lo: float, hi: float, n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1), half * w


def _l2(values, w) -> float:
    return float(np.sqrt(np.sum(w * np.abs(values) ** 2)))


def matching_residuals(sol: QuadrantSolution, points: int | None = None) -> dict[str, dict[str, float]]:
    """Relative L2 residuals on ``x = -b2`` and ``y = b1``.

    Each interface jump is measured on the channel opening with ``4N`` Gauss
    points and divided by the norm of the channel-side trace.  Wall entries
    hold the junction-side normal derivative on the rigid parts of each face,
    relative to the same channel-side velocity norm.
    """
    pb = sol.problem
    g = pb.geometry
    n = points or 4 * pb.N
    out = {"pressure": {}, "velocity": {}, "wall": {}}

    # x = -b2, y in (0, a1)
    y, w = _gauss(0.0, g.a1, n)
    x = np.full_like(y, -g.b2)
    p1 = eval_quadrant(sol, x, y, region=1)
    p2 = eval_quadrant(sol, x, y, region=2)
    v1 = eval_quadrant_gradient(sol, x, y, region=1)[0]
    v2 = eval_quadrant_gradient(sol, x, y, region=2)[0]
    vref = _l2(v1, w)
    out["pressure"]["x=-b2"] = _l2(p1 - p2, w) / _l2(p1, w)
    out["velocity"]["x=-b2"] = _l2(v1 - v2, w) / vref
    if g.b1 > g.a1:
        yw, ww = _gauss(g.a1, g.b1, n)
        vw = eval_quadrant_gradient(sol, np.full_like(yw, -g.b2), yw, region=2)[0]
        out["wall"]["x=-b2"] = _l2(vw, ww) / vref
    else:
        out["wall"]["x=-b2"] = 0.0

    # y = b1, x in (-a2, 0)
    x, w = _gauss(-g.a2, 0.0, n)
    y = np.full_like(x, g.b1)
    p3 = eval_quadrant(sol, x, y, region=3)
    p2 = eval_quadrant(sol, x, y, region=2)
    v3 = eval_quadrant_gradient(sol, x, y, region=3)[1]
    v2 = eval_quadrant_gradient(sol, x, y, region=2)[1]
    vref = _l2(v3, w)
    out["pressure"]["y=b1"] = _l2(p3 - p2, w) / _l2(p3, w)
    out["velocity"]["y=b1"] = _l2(v3 - v2, w) / vref
    if g.b2 > g.a2:
        xw, ww = _gauss(-g.b2, -g.a2, n)
        vw = eval_quadrant_gradient(sol, xw, np.full_like(xw, g.b1), region=2)[1]
        out["wall"]["y=b1"] = _l2(vw, ww) / vref
    else:
        out["wall"]["y=b1"] = 0.0
    return out


def artificial_boundary_residual(sol: QuadrantSolution, points: int = 64) -> dict[str, float]:
    """Largest designated trace on ``x = 0`` and ``y = 0`` relative to max |field|."""
    g = sol.problem.geometry
    bc = sol.problem.bc
    ys = np.linspace(0.0, g.b1 + 2 * g.a2, points)
    xs = np.linspace(-g.b2 - 2 * g.a1, 0.0, points)
    on_x0 = (np.zeros_like(ys), ys)
    on_y0 = (xs, np.zeros_like(xs))
    scale = max(np.max(np.abs(eval_quadrant(sol, *on_x0))), np.max(np.abs(eval_quadrant(sol, *on_y0))), 1e-300)
    if bc.x_neumann:
        tx = eval_quadrant_gradient(sol, *on_x0)[0]
    else:
        tx = eval_quadrant(sol, *on_x0)
    if bc.y_neumann:
        ty = eval_quadrant_gradient(sol, *on_y0)[1]
    else:
        ty = eval_quadrant(sol, *on_y0)
    return {"x=0": float(np.max(np.abs(tx)) / scale), "y=0": float(np.max(np.abs(ty)) / scale)}


# --------------------------------------------------------------------------
# report


@dataclass
class DiagnosticReport:
    bc: str
    k: float
    p: int
    N: int
    geometry: dict
    energy_defect: float | None
    quadrant_flux_defect: float
    pressure_residuals: dict = field(default_factory=dict)
    velocity_residuals: dict = field(default_factory=dict)
    wall_residuals: dict = field(default_factory=dict)
    condition_estimate: float = 0.0
    solve_residual: float = 0.0
    flags: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DiagnosticReport":
        return cls(**json.loads(text))


def frequency_flags(k: float, g: Geometry) -> list[str]:
    flags = []
    for parity in Parity:
        for name in ("a1", "a2", "b1", "b2"):
            gap = _cut_on_gap(k, parity, getattr(g, name))
            if gap < NEAR_TOL:
                flags.append(f"near {parity.value} eigenvalue of half-width {name} (gap {gap:.2e})")
    return flags


def diagnose(sol: QuadrantSolution, with_residuals: bool = True) -> DiagnosticReport:
    pb = sol.problem
    g = pb.geometry
    flags = frequency_flags(pb.k, g)
    energy = None
    if pb.bc is BCPair.NN and g.a1 == g.a2:
        try:
            energy = energy_defect_nn(sol)
        except DegenerateCutOn as exc:
            flags.append(str(exc))
    res = matching_residuals(sol) if with_residuals else {"pressure": {}, "velocity": {}, "wall": {}}
    return DiagnosticReport(
        bc=pb.bc.value,
        k=pb.k,
        p=pb.p,
        N=pb.N,
        geometry=g.as_dict(),
        energy_defect=energy,
        quadrant_flux_defect=quadrant_flux_defect(sol),
        pressure_residuals=res["pressure"],
        velocity_residuals=res["velocity"],
        wall_residuals=res["wall"],
        condition_estimate=sol.condition_estimate,
        solve_residual=sol.residual,
        flags=flags,
    )
