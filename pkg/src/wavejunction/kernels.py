"""Closed-form overlap kernels between the channel and junction bases.

Every coupling matrix of the mode-matching systems is an integral of a product
of two cosines or two sines over ``[0, a1]`` or ``[-a2, 0]``, possibly with one
factor divided by its value at the far edge of the junction.  The primitive is
:func:`trig_overlap`; :func:`kernel_table` assembles the twelve named kernels,
and :func:`quadrature_oracle` integrates the defining integrands numerically
for validation.

Conventions: row index ``m`` labels the projection basis (the channel modes),
column index ``n`` the expanded junction series.  Axial ratios such as
``cos(mu y) / cos(mu b1)`` are evaluated through exponentials with
non-positive real part, so strongly evanescent columns never overflow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Literal

import mpmath
import numpy as np
from scipy import integrate

from .errors import NonConvergence, SingularPrefactor
from .geometry import Geometry, Parity, axial_wavenumber, mode_count, mode_norms
from .textfmt import num

Product = Literal["cos", "sin"]

# |w| L below this uses the confluent limit of sin(wL)/w
CONFLUENT_EPS = 1e-8
# |Im mu| * length above this switches to the exponential-ratio evaluation
_SCALED_SWITCH = 20.0
# |denominator| below this is treated as an internal resonance
SINGULAR_TOL = 1e-12


class KernelName(enum.Enum):
    H = "H"
    V = "V"
    O = "O"
    E = "E"
    R = "R"
    Q = "Q"
    W = "W"
    K = "K"
    Vp = "Vp"
    Wp = "Wp"
    Qp = "Qp"
    Op = "Op"


@dataclass(frozen=True)
class _KernelSpec:
    product: Product
    row: tuple[Parity, str]
    col: tuple[Parity, str]
    span: str
    # half-width at which an axial profile is normalised; None for plain overlaps
    den: str | None = None
    # value of the column basis at the far junction edge is sign * (-1)^n
    sign: int = 1


E_, O_ = Parity.EVEN, Parity.ODD

KERNEL_SPECS: dict[KernelName, _KernelSpec] = {
    KernelName.H: _KernelSpec("cos", (E_, "a1"), (E_, "b1"), "a1"),
    KernelName.V: _KernelSpec("cos", (E_, "a1"), (E_, "b2"), "a1", den="b1", sign=1),
    KernelName.O: _KernelSpec("cos", (E_, "a2"), (E_, "b1"), "a2", den="b2", sign=1),
    KernelName.E: _KernelSpec("cos", (E_, "a2"), (E_, "b2"), "a2"),
    KernelName.R: _KernelSpec("sin", (O_, "a1"), (O_, "b1"), "a1"),
    KernelName.Q: _KernelSpec("sin", (O_, "a1"), (O_, "b2"), "a1", den="b1", sign=-1),
    # the x-profiles are normalised by sin(-mu b2) = -sin(mu b2); folded into sign
    KernelName.W: _KernelSpec("sin", (O_, "a2"), (O_, "b1"), "a2", den="b2", sign=-1),
    KernelName.K: _KernelSpec("sin", (O_, "a2"), (O_, "b2"), "a2"),
    KernelName.Vp: _KernelSpec("sin", (O_, "a1"), (E_, "b2"), "a1", den="b1", sign=1),
    KernelName.Wp: _KernelSpec("cos", (E_, "a2"), (O_, "b1"), "a2", den="b2", sign=1),
    KernelName.Qp: _KernelSpec("cos", (E_, "a1"), (O_, "b2"), "a1", den="b1", sign=-1),
    KernelName.Op: _KernelSpec("sin", (O_, "a2"), (E_, "b1"), "a2", den="b2", sign=-1),
}


def alternating(n) -> np.ndarray:
    """``(-1)^n`` as exact integers."""
    return 1 - 2 * (np.asarray(n) % 2)


# --------------------------------------------------------------------------
# stable trigonometric ratios


def trig_ratio(num: Product, den: Product, mu, a, b):
    """``num(mu a) / den(mu b)`` for ``Im mu >= 0`` and ``|a| <= b``.

    Written with ``exp(i mu (b +- a))`` and ``exp(2 i mu b)`` so no exponent has
    positive real part.  ``mu = 0`` returns the analytic limit (``a / b`` for
    sin/sin, ``inf`` for cos/sin).
    """
    mu = np.asarray(mu, dtype=complex)
    a = np.asarray(a, dtype=float)
    # cos is even and sin odd: work with |a| so every exponent stays bounded
    sgn = np.where(a < 0, -1.0, 1.0) if num == "sin" else 1.0
    a = np.abs(a)
    e2 = np.exp(1j * mu * (b - a))
    dm = np.expm1(2j * mu * b)  # e3 - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        if num == "cos":
            top = e2 * (np.exp(2j * mu * a) + 1)
        else:
            top = e2 * np.expm1(2j * mu * a)
        if den == "cos":
            out = top / (dm + 2)
        else:
            out = top / dm
        if num == "sin" and den == "cos":
            out = -1j * out
        elif num == "cos" and den == "sin":
            out = 1j * out
        if den == "sin":
            zero = mu == 0
            if np.any(zero):
                lim = (a / b) if num == "sin" else np.inf
                out = np.where(zero, lim, out)
    return sgn * out


def tan_stable(z):
    """``tan z`` for ``Im z >= 0`` without overflow."""
    e = np.exp(2j * np.asarray(z, dtype=complex))
    return -1j * (e - 1) / (e + 1)


def cot_stable(z):
    e = np.exp(2j * np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1j * (e + 1) / (e - 1)


# --------------------------------------------------------------------------
# the shared primitive


def _sin_over(w, L: float):
    """``sin(w L) / w`` with the confluent value ``L`` as ``w -> 0``."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) * L < CONFLUENT_EPS
    safe = np.where(small, 1.0, w)
    return np.where(small, L - (w * w) * L**3 / 6, np.sin(safe * L) / safe)


def trig_overlap(mu, nu, L: float, product: Product = "cos"):
    """Exact ``int_0^L f(mu y) f(nu y) dy`` with ``f`` = cos or sin.

    ``mu`` may be complex (cosh/sinh via ``cos(i z) = cosh z``); ``nu`` real.
    Both broadcast.  The three cases of the textbook formula (both zero,
    equal, distinct) collapse into ``(sin((mu -+ nu) L)/(mu -+ nu)) / 2`` with
    the confluent limit switched in below ``|mu - nu| L < 1e-8``.
    """
    plus = _sin_over(np.asarray(mu) + np.asarray(nu), L)
    minus = _sin_over(np.asarray(mu) - np.asarray(nu), L)
    if product == "cos":
        return 0.5 * (minus + plus)
    return 0.5 * (minus - plus)


def normalised_overlap(mu, nu, L: float, c: float, product: Product):
    """``int_0^L f(mu y) f(nu y) dy / f(mu c)`` for ``L <= c``, ``f`` = cos/sin.

    ``mu`` complex on the outgoing branch, ``nu`` real.  Broadcasting as in
    :func:`trig_overlap`.  Real ``mu`` with a vanishing denominator gives
    ``inf``; callers check with :func:`resonant_columns`.
    """
    mu = np.asarray(mu, dtype=complex)
    nu = np.asarray(nu, dtype=float)
    mu, nu = np.broadcast_arrays(mu, nu)
    out = np.empty(mu.shape, dtype=complex)
    big = np.abs(mu.imag) * c > _SCALED_SWITCH
    direct = ~big

    if np.any(direct):
        m, n = mu[direct], nu[direct]
        f = np.cos if product == "cos" else np.sin
        den = f(m * c)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = trig_overlap(m, n, L, product) / den
        if product == "sin":
            zero = m == 0
            if np.any(zero):
                # sin(mu y)/sin(mu c) -> y / c
                nz = n[zero]
                lim = (np.sin(nz * L) - nz * L * np.cos(nz * L)) / (nz * nz * c)
                val[zero] = lim
        out[direct] = val

    if np.any(big):
        m, n = mu[big], nu[big]
        rs = trig_ratio("sin", product, m, L, c)
        rc = trig_ratio("cos", product, m, L, c)
        cn, sn = np.cos(n * L), np.sin(n * L)
        s_plus = (rs * cn + rc * sn) / (m + n)
        s_minus = (rs * cn - rc * sn) / (m - n)
        out[big] = 0.5 * (s_minus + s_plus) if product == "cos" else 0.5 * (s_minus - s_plus)
    return out


def resonant_columns(mu, c: float, product: Product) -> np.ndarray:
    """Indices where ``f(mu c)`` vanishes for real ``mu`` (internal resonance)."""
    mu = np.asarray(mu, dtype=complex)
    real = mu.imag == 0
    f = np.cos if product == "cos" else np.sin
    val = np.abs(f(mu.real * c))
    bad = real & (val < SINGULAR_TOL)
    if product == "sin":
        bad &= mu != 0
    return np.flatnonzero(bad)


# --------------------------------------------------------------------------
# named kernels


@dataclass(frozen=True)
class KernelTable:
    name: KernelName
    entries: np.ndarray
    geometry: Geometry
    k: float
    N: int

    def to_text(self, delimiter: str = ",") -> str:
        """Debug dump: one ``m, n, Re, Im`` row per entry."""
        lines = [delimiter.join(("m", "n", "re", "im"))]
        for (m, n), v in np.ndenumerate(self.entries):
            lines.append(delimiter.join((str(m), str(n), num(v.real), num(v.imag))))
        return "\n".join(lines) + "\n"


def _column_wavenumbers(spec: _KernelSpec, geometry: Geometry, k: float, n: np.ndarray):
    parity, attr = spec.col
    mu = np.asarray(_eig(parity, n, getattr(geometry, attr)))
    if spec.den is None:
        return mu.astype(complex)
    return np.asarray(axial_wavenumber(k, mu), dtype=complex)


def _eig(parity: Parity, n, L: float):
    n = np.asarray(n)
    return n * np.pi / L if parity is Parity.EVEN else (2 * n + 1) * np.pi / (2 * L)


def _kernel_block(name: KernelName, m: np.ndarray, n: np.ndarray, geometry: Geometry, k: float):
    spec = KERNEL_SPECS[name]
    row_parity, row_attr = spec.row
    nu = _eig(row_parity, m, getattr(geometry, row_attr)).astype(float)
    mu = _column_wavenumbers(spec, geometry, k, n)
    L = getattr(geometry, spec.span)
    if spec.den is None:
        return trig_overlap(mu[None, :], nu[:, None], L, spec.product).astype(complex)
    c = getattr(geometry, spec.den)
    bad = resonant_columns(mu, c, spec.product)
    if bad.size:
        j = int(bad[0])
        f = np.cos if spec.product == "cos" else np.sin
        raise SingularPrefactor(name.value, int(n[j]), complex(f(mu[j] * c)))
    vals = normalised_overlap(mu[None, :], nu[:, None], L, c, spec.product)
    return vals * (spec.sign * alternating(n))[None, :]


def kernel(name: KernelName | str, m: int, n: int, geometry: Geometry, k: float) -> complex:
    name = KernelName(name)
    return complex(_kernel_block(name, np.array([m]), np.array([n]), geometry, k)[0, 0])


def kernel_shape(name: KernelName | str, N: int) -> tuple[int, int]:
    spec = KERNEL_SPECS[KernelName(name)]
    return mode_count(spec.row[0], N), mode_count(spec.col[0], N)


def kernel_table(name: KernelName | str, geometry: Geometry, k: float, N: int) -> KernelTable:
    if N < 1:
        raise ValueError("truncation N must be >= 1")
    name = KernelName(name)
    rows, cols = kernel_shape(name, N)
    entries = _kernel_block(name, np.arange(rows), np.arange(cols), geometry, k)
    entries.setflags(write=False)
    return KernelTable(name, entries, geometry, float(k), int(N))


def diagonal_norms(parity: Parity, N: int, L: float) -> np.ndarray:
    """``I_mm(L)`` (even) or ``I^_mm(L)`` (odd) for the retained modes."""
    return mode_norms(parity, N, L)


# --------------------------------------------------------------------------
# numerical oracle


def _literal_profile(product: Product, mu: complex, s: float, d: float) -> complex:
    """``f(mu s) / f(mu d)`` straight from the definition."""
    if abs(mu.imag) * max(abs(s), abs(d)) < 300:
        f = np.cos if product == "cos" else np.sin
        return complex(f(mu * s) / f(mu * d))
    f = mpmath.cos if product == "cos" else mpmath.sin
    return complex(f(mpmath.mpc(mu) * s) / f(mpmath.mpc(mu) * d))


def quadrature_oracle(
    name: KernelName | str,
    m: int,
    n: int,
    geometry: Geometry,
    k: float,
    epsabs: float = 1e-13,
    limit: int = 1000,
) -> complex:
    """Adaptive quadrature of the defining integral of kernel ``name``.

    Works in the physical coordinates: ``y`` over ``[0, a1]`` for the kernels
    on the horizontal interface, ``x`` over ``[-a2, 0]`` on the vertical one,
    with edge values taken from float trig rather than exact signs.
    """
    name = KernelName(name)
    spec = KERNEL_SPECS[name]
    f = np.cos if spec.product == "cos" else np.sin
    row_parity, row_attr = spec.row
    col_parity, col_attr = spec.col
    nu = float(_eig(row_parity, m, getattr(geometry, row_attr)))
    col_eig = float(_eig(col_parity, n, getattr(geometry, col_attr)))
    horizontal = spec.span == "a1"
    lo, hi = (0.0, geometry.a1) if horizontal else (-geometry.a2, 0.0)

    if spec.den is None:
        def integrand(s):
            return complex(f(col_eig * s) * f(nu * s))
    else:
        mu = complex(axial_wavenumber(k, col_eig))
        # column basis: transverse function of the other coordinate, evaluated
        # at the far junction edge (x = -b2 or y = b1)
        ft = np.cos if col_parity is Parity.EVEN else np.sin
        if horizontal:
            edge = float(ft(col_eig * -geometry.b2))
            d = geometry.b1
        else:
            edge = float(ft(col_eig * geometry.b1))
            d = -geometry.b2

        def integrand(s):
            return _literal_profile(spec.product, mu, s, d) * edge * f(nu * s)

    opts = dict(epsabs=epsabs, epsrel=1e-12, limit=limit, full_output=1)
    re = integrate.quad(lambda s: integrand(s).real, lo, hi, **opts)
    im = integrate.quad(lambda s: integrand(s).imag, lo, hi, **opts)
    # quad may warn about round-off while its error estimate is well inside budget
    budget = 1e-12 + 1e-10 * abs(complex(re[0], im[0]))
    for part in (re, im):
        if part[1] > budget:
            raise NonConvergence(
                f"quadrature for {name.value}[{m},{n}] did not converge (err={part[1]:.2e})"
            )
    return complex(re[0], im[0])


def oracle_table(name: KernelName | str, geometry: Geometry, k: float, N: int) -> np.ndarray:
    rows, cols = kernel_shape(name, N)
    out = np.empty((rows, cols), dtype=complex)
    for m in range(rows):
        for n in range(cols):
            out[m, n] = quadrature_oracle(name, m, n, geometry, k)
    return out

