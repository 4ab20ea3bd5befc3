"""Pulses in the time domain as trapezoidal sums of frequency-domain fields.

For points ``x_i`` and frequencies ``k_j`` the field matrix
``F[i, j] = phi(x_i, k_j)`` is computed once; any spectrum ``f`` then gives

    phi(x_i, t) = Re sum_j F[i, j] w_j exp(-i k_j t) f(k_j)

which is a single matrix-vector product per time.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, FrequencyFailure, NumericalError
from .full_field import FieldGrid, grid_axes, in_domain, reconstruct, solve_full
from .geometry import Geometry, Parity, cut_on_distance, eigenvalue
from .textfmt import num

CUT_ON_HIT = 1e-9
NUDGE = 1e-8


@dataclass(frozen=True)
class QuadratureGrid:
    k: np.ndarray
    w: np.ndarray
    dk: float
    nudged: tuple[int, ...] = ()


def build_quadrature(k_max: float, N_k: int) -> QuadratureGrid:
    """Trapezoid nodes ``k_j = j dk`` for ``j = 1..N_k`` with ``dk = k_max / N_k``."""
    if N_k < 2:
        raise ValueError("N_k must be at least 2")
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    dk = k_max / N_k
    k = dk * np.arange(1, N_k + 1)
    w = np.full(N_k, dk)
    w[0] = w[-1] = dk / 2
    return QuadratureGrid(k, w, dk)


def avoid_cut_ons(grid: QuadratureGrid, geometry: Geometry) -> QuadratureGrid:
    """Shift nodes sitting within ``1e-9`` of any transverse eigenvalue by ``+1e-8 dk``."""
    k = grid.k.copy()
    hit = []
    for j, kj in enumerate(k):
        if cut_on_distance(kj, geometry) < CUT_ON_HIT:
            k[j] = kj + NUDGE * grid.dk
            hit.append(j)
    return QuadratureGrid(k, grid.w, grid.dk, tuple(hit))


@dataclass(frozen=True)
class SpectrumSpec:
    """Either ``scale * exp(-rate (k - center)^2)`` or a tabulated spectrum.

    Tabulated spectra are interpolated linearly and vanish outside the table.
    """

    kind: str = "gaussian"
    center: float = 3.0
    rate: float = 8.0
    scale: float = 1 / math.pi
    k_table: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("gaussian", "tabulated"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == "gaussian" and not self.rate > 0:
            raise ValueError("Gaussian rate must be positive")
        if self.kind == "tabulated":
            kt = np.asarray(self.k_table, dtype=float)
            if kt.size < 2 or len(self.values) != kt.size:
                raise ValueError("tabulated spectrum needs matching k and value lists of length >= 2")
            if np.any(kt < 0) or np.any(np.diff(kt) <= 0):
                raise ValueError("tabulated k grid must be nonnegative and strictly increasing")

    @classmethod
    def gaussian(cls, center: float, rate: float, scale: float = 1 / math.pi) -> "SpectrumSpec":
        return cls("gaussian", float(center), float(rate), float(scale))

    @classmethod
    def tabulated(cls, k, values) -> "SpectrumSpec":
        return cls("tabulated", k_table=tuple(map(float, k)), values=tuple(complex(v) for v in values))

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.kind == "gaussian":
            return self.scale * np.exp(-self.rate * (k - self.center) ** 2) + 0j
        kt = np.asarray(self.k_table)
        v = np.asarray(self.values, dtype=complex)
        out = np.interp(k, kt, v.real, left=0, right=0) + 1j * np.interp(k, kt, v.imag, left=0, right=0)
        return out

    def support_max(self, tol: float = 1e-14) -> float:
        """Smallest ``k`` beyond which ``|f(k)| < tol``.

        For the Gaussian that is ``center + sqrt(ln(|scale| / tol) / rate)``,
        about ``5.6 / sqrt(rate)`` past the centre for the default scale.
        """
        if self.kind == "gaussian":
            if abs(self.scale) <= tol:
                return self.center if self.center > 0 else 1.0
            return self.center + math.sqrt(math.log(abs(self.scale) / tol) / self.rate)
        return float(self.k_table[-1])


@dataclass(frozen=True)
class TimeSynthesis:
    points: np.ndarray  # (N_x, 2)
    field_matrix: np.ndarray  # (N_x, N_k)
    grid: QuadratureGrid
    geometry: Geometry
    parity: Parity
    p: int
    N: int
    # optional raster layout for frames: x axis, y axis, in-domain mask
    raster: tuple | None = field(default=None, compare=False)

    def sampled(self, spectrum: SpectrumSpec) -> np.ndarray:
        return spectrum(self.grid.k)


def incident_cut_on(parity: Parity, p: int, a1: float) -> float:
    return float(eigenvalue(parity, p, a1))


def _column(geometry, parity, p, N, xs, ys, kj, j):
    if kj <= incident_cut_on(parity, p, geometry.a1):
        # below the incident mode's cut-on there is no propagating incident wave
        return np.zeros(xs.shape, dtype=complex)
    try:
        full = solve_full(geometry, kj, parity, p, N)
        return np.asarray(reconstruct(full, xs, ys))
    except NumericalError as exc:
        raise FrequencyFailure(j, float(kj), exc) from exc


def precompute_field_matrix(geometry: Geometry, parity: Parity, p: int, N: int, points, grid: QuadratureGrid,
                            jobs: int = 1, raster=None) -> TimeSynthesis:
    """Field at every point for every quadrature frequency (columns)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(in_domain(geometry, pts[:, 0], pts[:, 1])):
        raise ValueError("some synthesis points lie outside the junction domain")
    grid = avoid_cut_ons(grid, geometry)
    parity = Parity(parity)
    xs, ys = pts[:, 0], pts[:, 1]

    def work(j):
        return _column(geometry, parity, p, N, xs, ys, grid.k[j], j)

    idx = range(len(grid.k))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cols = list(pool.map(work, idx))
    else:
        cols = [work(j) for j in idx]
    F = np.stack(cols, axis=1) if cols else np.zeros((len(xs), 0), dtype=complex)
    F.setflags(write=False)
    return TimeSynthesis(pts, F, grid, geometry, parity, int(p), int(N), raster)


def raster_points(geometry: Geometry, nx: int, ny: int, channel_length: float | None = None):
    """In-domain points of a rectangular raster plus the layout to rebuild frames."""
    xs, ys = grid_axes(geometry, nx, ny, channel_length)
    X, Y = np.meshgrid(xs, ys)
    mask = in_domain(geometry, X, Y)
    return np.column_stack([X[mask], Y[mask]]), (xs, ys, mask)


def synthesize(ts: TimeSynthesis, spectrum, t: float) -> np.ndarray:
    """Real field at time ``t`` for a :class:`SpectrumSpec` or sampled spectrum vector."""
    if isinstance(spectrum, SpectrumSpec):
        f = ts.sampled(spectrum)
    else:
        f = np.asarray(spectrum, dtype=complex)
        if f.shape != ts.grid.k.shape:
            raise DimensionMismatch(f"spectrum has {f.shape} samples, grid has {ts.grid.k.shape}")
    phase = ts.grid.w * np.exp(-1j * ts.grid.k * t) * f
    return np.real(ts.field_matrix @ phase)


@dataclass(frozen=True)
class Frame:
    t: float
    values: np.ndarray  # one real value per synthesis point
    grid: FieldGrid | None = None  # present when the points came from a raster


def snapshot_series(ts: TimeSynthesis, spectrum, times) -> list[Frame]:
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    f = ts.sampled(spectrum) if isinstance(spectrum, SpectrumSpec) else np.asarray(spectrum, dtype=complex)
    # all times at once: (N_x, N_k) @ (N_k, N_t)
    phases = (ts.grid.w * f)[:, None] * np.exp(-1j * np.outer(ts.grid.k, times))
    values = np.real(ts.field_matrix @ phases)
    frames = []
    for i, t in enumerate(times):
        meta = dict(ts.geometry.as_dict(), t=float(t), p=ts.p, parity=ts.parity.value, N=ts.N,
                    N_k=len(ts.grid.k), k_max=float(ts.grid.k[-1]))
        grid = None
        if ts.raster is not None:
            xs, ys, mask = ts.raster
            vals = np.full(mask.shape, np.nan)
            vals[mask] = values[:, i]
            grid = FieldGrid(xs, ys, vals, mask, meta)
        frames.append(Frame(float(t), values[:, i], grid))
    return frames


def write_frames(frames: list[Frame], outdir: str, stem: str = "frame") -> str:
    """One text grid per frame plus ``index.txt`` listing them in time order."""
    os.makedirs(outdir, exist_ok=True)
    names = []
    for i, fr in enumerate(frames):
        if fr.grid is None:
            raise ValueError("frames without a raster layout cannot be written as grids")
        name = f"{stem}_{i:04d}.csv"
        with open(os.path.join(outdir, name), "w") as fh:
            fh.write(fr.grid.to_text())
        names.append((name, fr.t))
    index = os.path.join(outdir, "index.txt")
    with open(index, "w") as fh:
        fh.write("# file,t\n")
        for name, t in names:
            fh.write(f"{name},{num(t)}\n")
    return index


def read_index(path: str) -> list[tuple[str, float]]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            name, t = line.strip().split(",")
            out.append((name, float(t)))
    return out
