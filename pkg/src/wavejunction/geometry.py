"""Junction geometry, transverse eigenvalues and axial wavenumbers.

Two transverse families appear in every channel and in the junction:

* ``Parity.EVEN`` -- ``cos(mu_n s)`` on ``[0, L]``, Neumann at both ends,
  ``mu_n = n pi / L`` for ``n = 0, 1, 2, ...``
* ``Parity.ODD`` -- ``sin(mu_n s)`` on ``[0, L]``, Dirichlet at ``s = 0`` and
  Neumann at ``s = L``, ``mu_n = (2n + 1) pi / (2 L)``.

Axial wavenumbers use the branch ``sqrt(k^2 - mu^2)`` real and non-negative
when ``k >= mu`` and ``+i sqrt(mu^2 - k^2)`` otherwise, so that every outgoing
exponential ``exp(+i kappa s)`` decays for evanescent modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ChannelWiderThanJunction, NonPositiveDimension


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def trig(self):
        return np.cos if self is Parity.EVEN else np.sin


@dataclass(frozen=True)
class Geometry:
    """Half-widths of the four-channel junction.

    ``a1`` -- horizontal channels (``|y| < a1``), ``a2`` -- vertical channels
    (``|x| < a2``), ``b1``/``b2`` -- half-height/half-width of the central
    rectangle.
    """

    a1: float
    a2: float
    b1: float
    b2: float

    def transposed(self) -> "Geometry":
        """Geometry seen after the reflection ``(x, y) -> (-y, -x)``."""
        return Geometry(self.a2, self.a1, self.b2, self.b1)

    @property
    def is_square(self) -> bool:
        return self.a1 == self.a2 and self.b1 == self.b2

    def as_dict(self) -> dict[str, float]:
        return {"a1": self.a1, "a2": self.a2, "b1": self.b1, "b2": self.b2}


def validate_geometry(a1: float, a2: float, b1: float, b2: float) -> Geometry:
    dims = {"a1": a1, "a2": a2, "b1": b1, "b2": b2}
    bad = [name for name, v in dims.items() if not (math.isfinite(v) and v > 0)]
    if bad:
        raise NonPositiveDimension(f"dimensions must be positive and finite: {', '.join(bad)}")
    if a1 > b1:
        raise ChannelWiderThanJunction(f"a1={a1} exceeds b1={b1}")
    if a2 > b2:
        raise ChannelWiderThanJunction(f"a2={a2} exceeds b2={b2}")
    return Geometry(float(a1), float(a2), float(b1), float(b2))


def eigenvalue(parity: Parity, n, L: float):
    """Transverse eigenvalue ``n pi / L`` (even) or ``(2n+1) pi / (2L)`` (odd).

    ``n`` may be an integer or an integer array.
    """
    n = np.asarray(n)
    if parity is Parity.EVEN:
        out = n * np.pi / L
    else:
        out = (2 * n + 1) * np.pi / (2 * L)
    return out if out.ndim else float(out)


def mode_count(parity: Parity, N: int) -> int:
    """Number of retained terms for truncation ``N``.

    Even series keep ``n = 0..N``; odd series keep ``n = 0..N-1``.
    """
    return N + 1 if parity is Parity.EVEN else N


def eigenvalues(parity: Parity, N: int, L: float) -> np.ndarray:
    return np.asarray(eigenvalue(parity, np.arange(mode_count(parity, N)), L), dtype=float)


def mode_norm(parity: Parity, n, L: float):
    """``int_0^L f_n(s)^2 ds`` for the family member ``f_n``."""
    n = np.asarray(n)
    if parity is Parity.EVEN:
        out = np.where(n == 0, L, L / 2)
    else:
        out = np.full(n.shape, L / 2)
    return out if out.ndim else float(out)


def mode_norms(parity: Parity, N: int, L: float) -> np.ndarray:
    return np.asarray(mode_norm(parity, np.arange(mode_count(parity, N)), L), dtype=float)


def axial_wavenumber(k: float, mu):
    """``sqrt(k^2 - mu^2)`` on the outgoing/decaying branch.

    Real and non-negative for ``mu <= k``, positive imaginary otherwise.
    Scalars give a Python complex, arrays a complex array.
    """
    mu = np.asarray(mu, dtype=float)
    d = (k - mu) * (k + mu)
    root = np.sqrt(np.abs(d))
    out = np.where(d >= 0, root + 0j, 1j * root)
    return complex(out) if out.ndim == 0 else out


def propagating_counts(k: float, a1: float) -> tuple[int, int]:
    """``(q, q_tilde)`` from the closed-form floor expressions.

    ``q + 1`` even modes propagate.  ``q_tilde`` is the floor expression
    ``(2 k a1 - pi) / (2 pi)`` clamped at zero; it counts the odd modes with
    index ``n >= 1``.  See :func:`odd_propagating_count` for the number of odd
    modes that actually propagate.
    """
    q = math.floor(k * a1 / math.pi)
    q_tilde = max(0, math.floor((2 * k * a1 - math.pi) / (2 * math.pi)))
    return q, q_tilde


def even_propagating_count(k: float, L: float) -> int:
    return int(np.count_nonzero(eigenvalue(Parity.EVEN, np.arange(int(k * L / np.pi) + 2), L) < k))


def odd_propagating_count(k: float, L: float) -> int:
    """Number of odd modes with ``(2n+1) pi / (2L) < k``."""
    return int(np.count_nonzero(eigenvalue(Parity.ODD, np.arange(int(k * L / np.pi) + 2), L) < k))


def propagating_count(parity: Parity, k: float, L: float) -> int:
    if parity is Parity.EVEN:
        return even_propagating_count(k, L)
    return odd_propagating_count(k, L)


def cut_on_distance(k: float, geometry: Geometry) -> float:
    """Smallest ``|k - mu|`` over every transverse eigenvalue of the problem."""
    best = math.inf
    for L in (geometry.a1, geometry.a2, geometry.b1, geometry.b2):
        for parity in Parity:
            n = np.arange(int(k * L / np.pi) + 3)
            mus = eigenvalue(parity, n, L)
            best = min(best, float(np.min(np.abs(k - mus))))
    return best
