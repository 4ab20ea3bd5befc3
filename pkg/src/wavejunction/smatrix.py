"""Scattering matrix of the square junction over propagating modes.

Incoming and outgoing vectors are both ordered by channel ``L, T, R, B`` and,
inside each channel, even modes before odd ones.  Transverse functions use
global coordinates: ``cos(beta_n y)`` / ``sin(gamma_n y)`` in the horizontal
channels and ``cos(eta_n x)`` / ``sin(zeta_n x)`` in the vertical ones.  An
incoming unit amplitude is ``exp(-i kz d) f(s)`` and an outgoing one
``exp(+i kz d) f(s)``, with ``d`` the distance from the junction face.

Columns for incidence from the left come from direct quadrant solves; the
other three directions follow by the quarter-turn symmetry of the square
junction.  :func:`top_incidence_columns` computes the top columns instead from
a solve in the transposed geometry, which is used to check the rotation.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateCutOn, DimensionMismatch, GeometryRestriction
from .full_field import FullSolution, channel_amplitudes, solve_full
from .geometry import Geometry, Parity, axial_wavenumber, eigenvalues, mode_norms, propagating_count, propagating_counts
from .textfmt import num

CHANNELS = ("L", "T", "R", "B")
HORIZONTAL = {"L", "R"}
# counter-clockwise quarter turn (x, y) -> (-y, x)
ROTATE = {"L": "B", "B": "R", "R": "T", "T": "L"}
# reflection (x, y) -> (-y, -x) between a geometry and its transpose
REFLECT = {"L": "T", "T": "L", "R": "B", "B": "R"}
_AMP_KEY = {"L": "L", "T": "U", "R": "R", "B": "D"}


class Normalization(enum.Enum):
    RAW = "raw"
    FLUX = "flux"


class Direction(enum.Enum):
    """Direction of travel of a channel wave."""

    LEFT = "left"
    RIGHT = "right"
    UP = "up"
    DOWN = "down"


# channel a wave occupies, by direction of travel
INCOMING_CHANNEL = {Direction.RIGHT: "L", Direction.DOWN: "T", Direction.LEFT: "R", Direction.UP: "B"}
OUTGOING_CHANNEL = {Direction.LEFT: "L", Direction.UP: "T", Direction.RIGHT: "R", Direction.DOWN: "B"}


@dataclass(frozen=True)
class ChannelWave:
    direction: Direction
    parity: Parity
    amplitudes: np.ndarray


@dataclass(frozen=True)
class ModeLayout:
    """Offsets of the ``(channel, parity)`` blocks in the stacked vectors."""

    n_even: int
    n_odd: int

    @property
    def keys(self):
        return [(c, par) for c in CHANNELS for par in (Parity.EVEN, Parity.ODD)]

    def size(self, parity: Parity) -> int:
        return self.n_even if parity is Parity.EVEN else self.n_odd

    def slice(self, channel: str, parity: Parity) -> slice:
        start = 0
        for key in self.keys:
            if key == (channel, parity):
                return slice(start, start + self.size(parity))
            start += self.size(key[1])
        raise KeyError((channel, parity))

    @property
    def total(self) -> int:
        return 4 * (self.n_even + self.n_odd)

    def entries(self):
        """``(channel, parity, n)`` per position of the stacked vector."""
        for c, par in self.keys:
            for n in range(self.size(par)):
                yield c, par, n

    def forbidden(self):
        """Block pairs that symmetry forces to zero: same axis, different parity."""
        for co, po in self.keys:
            for ci, pi in self.keys:
                if po is not pi and ((co in HORIZONTAL) == (ci in HORIZONTAL)):
                    yield (co, po), (ci, pi)


@dataclass(frozen=True)
class SMatrix:
    geometry: Geometry
    k: float
    N: int
    q: int
    q_tilde: int
    layout: ModeLayout
    matrix: np.ndarray
    normalization: Normalization = Normalization.RAW

    def block(self, out: tuple[str, Parity], inc: tuple[str, Parity]) -> np.ndarray:
        return self.matrix[self.layout.slice(*out), self.layout.slice(*inc)]

    @property
    def blocks(self) -> dict:
        return {(o, i): self.block(o, i) for o in self.layout.keys for i in self.layout.keys}

    def unitarity_defect(self) -> float:
        S = self.matrix
        return float(np.linalg.norm(S.conj().T @ S - np.eye(S.shape[0]), 2))

    def reciprocity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.T, 2))

    def forbidden_max(self) -> float:
        vals = [np.max(np.abs(self.block(o, i)), initial=0.0) for o, i in self.layout.forbidden()]
        return float(max(vals, default=0.0))

    # ---------------------------------------------------------------- io
    def to_json(self) -> str:
        blocks = []
        for (co, po), (ci, pi) in ((o, i) for o in self.layout.keys for i in self.layout.keys):
            b = self.block((co, po), (ci, pi))
            blocks.append({
                "out": [co, po.value],
                "in": [ci, pi.value],
                "re": b.real.tolist(),
                "im": b.imag.tolist(),
            })
        doc = {
            "k": self.k,
            "N": self.N,
            "q": self.q,
            "q_tilde": self.q_tilde,
            "n_even": self.layout.n_even,
            "n_odd": self.layout.n_odd,
            "normalization": self.normalization.value,
            "geometry": self.geometry.as_dict(),
            "channel_order": list(CHANNELS),
            "blocks": blocks,
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SMatrix":
        doc = json.loads(text)
        layout = ModeLayout(doc["n_even"], doc["n_odd"])
        M = np.zeros((layout.total, layout.total), dtype=complex)
        for b in doc["blocks"]:
            so = layout.slice(b["out"][0], Parity(b["out"][1]))
            si = layout.slice(b["in"][0], Parity(b["in"][1]))
            M[so, si] = np.asarray(b["re"], dtype=float).reshape(so.stop - so.start, si.stop - si.start) + 1j * np.asarray(
                b["im"], dtype=float
            ).reshape(so.stop - so.start, si.stop - si.start)
        return cls(
            Geometry(**doc["geometry"]), doc["k"], doc["N"], doc["q"], doc["q_tilde"], layout, M,
            Normalization(doc["normalization"]),
        )

    def to_rows(self, delimiter: str = ",", header: bool = True) -> str:
        """One line per entry: ``k, out_channel, out_parity, m, in_channel, in_parity, n, re, im``."""
        lines = []
        if header:
            lines.append(delimiter.join(("k", "out_channel", "out_parity", "m", "in_channel", "in_parity", "n", "re", "im")))
        ents = list(self.layout.entries())
        for i, (co, po, m) in enumerate(ents):
            for j, (ci, pi, n) in enumerate(ents):
                v = self.matrix[i, j]
                lines.append(delimiter.join(
                    (num(self.k), co, po.value, str(m), ci, pi.value, str(n), num(v.real), num(v.imag))
                ))
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# construction


def _mode_counts(k: float, g: Geometry) -> tuple[int, int]:
    return propagating_count(Parity.EVEN, k, g.a1), propagating_count(Parity.ODD, k, g.a1)


def _check_cut_on(k: float, g: Geometry, tol: float = 1e-9):
    for parity in Parity:
        for L in {g.a1, g.a2}:
            mu = eigenvalues(parity, int(k * L / np.pi) + 2, L)
            gap = float(np.min(np.abs(k - mu)))
            if gap < tol:
                raise DegenerateCutOn(f"k={k!r} lies within {gap:.1e} of a {parity.value} cut-on")


def _left_column(full: FullSolution, layout: ModeLayout) -> np.ndarray:
    amps = channel_amplitudes(full)
    col = np.zeros(layout.total, dtype=complex)
    for c in CHANNELS:
        for par in Parity:
            v = amps[_AMP_KEY[c]][par]
            if v.size == 0:
                continue
            col[layout.slice(c, par)] = v[: layout.size(par)]
    return col


def _signed_map(layout: ModeLayout, mapping: dict, odd_sign) -> tuple[np.ndarray, np.ndarray]:
    """Index permutation and signs carrying vector entries along ``mapping``.

    ``odd_sign(channel)`` is the factor an odd mode picks up leaving ``channel``.
    Returns ``(dest, sign)`` such that ``out[dest[i]] = sign[i] * v[i]``.
    """
    dest = np.empty(layout.total, dtype=int)
    sign = np.empty(layout.total)
    for i, (c, par, n) in enumerate(layout.entries()):
        s = layout.slice(mapping[c], par)
        dest[i] = s.start + n
        sign[i] = odd_sign(c) if par is Parity.ODD else 1.0
    return dest, sign


def rotation_operator(layout: ModeLayout) -> np.ndarray:
    """Signed permutation matrix of the quarter turn acting on mode vectors."""
    dest, sign = _signed_map(layout, ROTATE, lambda c: -1.0 if c in HORIZONTAL else 1.0)
    U = np.zeros((layout.total, layout.total))
    U[dest, np.arange(layout.total)] = sign
    return U


def _solve_left_columns(g: Geometry, k: float, N: int, layout: ModeLayout, jobs: int):
    tasks = [(Parity.EVEN, p) for p in range(layout.n_even)] + [(Parity.ODD, p) for p in range(layout.n_odd)]

    def work(task):
        par, p = task
        return _left_column(solve_full(g, k, par, p, N), layout)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cols = list(pool.map(work, tasks))
    else:
        cols = [work(t) for t in tasks]
    return dict(zip(tasks, cols))


def build_smatrix(geometry: Geometry, k: float, N: int = 100, jobs: int = 1) -> SMatrix:
    """Raw-amplitude scattering matrix of a square junction.

    Left-incidence columns are solved directly; the remaining directions are
    generated by rotating those columns a quarter turn at a time.
    """
    g = geometry
    if g.a1 != g.a2 or g.b1 != g.b2:
        raise GeometryRestriction(
            f"scattering matrix needs a1 == a2 and b1 == b2, got {g.as_dict()}"
        )
    _check_cut_on(k, g)
    n_even, n_odd = _mode_counts(k, g)
    layout = ModeLayout(n_even, n_odd)
    q, q_tilde = propagating_counts(k, g.a1)
    left = _solve_left_columns(g, k, N, layout, jobs)

    U = rotation_operator(layout)
    S = np.zeros((layout.total, layout.total), dtype=complex)
    for (par, p), col in left.items():
        S[:, layout.slice("L", par).start + p] = col
    # S U = U S: the column for incidence from ROTATE[c] is sign * U @ (column from c)
    c = "L"
    for _ in range(3):
        nxt = ROTATE[c]
        for par in Parity:
            src = layout.slice(c, par)
            dst = layout.slice(nxt, par)
            sign = -1.0 if (par is Parity.ODD and c in HORIZONTAL) else 1.0
            S[:, dst] = sign * (U @ S[:, src])
        c = nxt
    return SMatrix(g, float(k), int(N), q, q_tilde, layout, S)


def top_incidence_columns(geometry: Geometry, k: float, N: int = 100, layout: ModeLayout | None = None) -> np.ndarray:
    """Columns for incidence from the top, solved in the transposed geometry.

    The reflection ``(x, y) -> (-y, -x)`` turns a wave coming down the top
    channel into a wave coming from the left of the transposed junction.  Odd
    transverse functions change sign under it, both for the incident mode and
    for every outgoing one.
    """
    g = geometry
    gt = g.transposed()
    if layout is None:
        layout = ModeLayout(*_mode_counts(k, g))
    dest, sign = _signed_map(layout, REFLECT, lambda c: -1.0)
    cols = np.zeros((layout.total, layout.n_even + layout.n_odd), dtype=complex)
    j = 0
    for par in Parity:
        for p in range(layout.size(par)):
            col_t = _left_column(solve_full(gt, k, par, p, N), layout)
            mapped = np.zeros_like(col_t)
            mapped[dest] = sign * col_t
            cols[:, j] = (-1.0 if par is Parity.ODD else 1.0) * mapped
            j += 1
    return cols


def power_weights(s: SMatrix) -> np.ndarray:
    """``Re(kz) * ||mode||^2`` over the full channel width, per stacked entry."""
    g = s.geometry
    w = np.empty(s.layout.total)
    for i, (c, par, n) in enumerate(s.layout.entries()):
        L = g.a1 if c in HORIZONTAL else g.a2
        mu = eigenvalues(par, n + 1, L)[n]
        w[i] = np.real(axial_wavenumber(s.k, mu)) * 2 * mode_norms(par, n + 1, L)[n]
    return w


def flux_normalize(s: SMatrix) -> SMatrix:
    if s.normalization is not Normalization.RAW:
        raise ValueError("matrix is already flux-normalised")
    _check_cut_on(s.k, s.geometry)
    w = power_weights(s)
    if np.any(w <= 0):
        raise DegenerateCutOn("a retained mode carries no power")
    r = np.sqrt(w)
    M = s.matrix * (r[:, None] / r[None, :])
    return replace(s, matrix=M, normalization=Normalization.FLUX)


def stack(s: SMatrix, waves: list[ChannelWave], outgoing: bool = False) -> np.ndarray:
    chan = OUTGOING_CHANNEL if outgoing else INCOMING_CHANNEL
    v = np.zeros(s.layout.total, dtype=complex)
    for w in waves:
        if w.direction not in chan:
            raise DimensionMismatch(f"{w.direction.value} is not an {'outgoing' if outgoing else 'incoming'} direction")
        sl = s.layout.slice(chan[w.direction], w.parity)
        a = np.asarray(w.amplitudes, dtype=complex)
        if a.shape != (sl.stop - sl.start,):
            raise DimensionMismatch(
                f"{w.parity.value} wave travelling {w.direction.value} needs {sl.stop - sl.start} amplitudes, got {a.shape}"
            )
        v[sl] += a
    return v


def unstack(s: SMatrix, v: np.ndarray) -> list[ChannelWave]:
    back = {c: d for d, c in OUTGOING_CHANNEL.items()}
    return [ChannelWave(back[c], par, v[s.layout.slice(c, par)].copy()) for c, par in s.layout.keys]


def apply(s: SMatrix, incoming) -> list[ChannelWave]:
    """Outgoing waves for a list of incoming :class:`ChannelWave` (or a stacked vector)."""
    if isinstance(incoming, np.ndarray):
        if incoming.shape != (s.layout.total,):
            raise DimensionMismatch(f"incoming vector must have length {s.layout.total}")
        a = incoming
    else:
        a = stack(s, list(incoming))
    return unstack(s, s.matrix @ a)
