import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavejunction.errors import SingularPrefactor
from wavejunction.geometry import Parity, eigenvalue, validate_geometry
from wavejunction.kernels import (
    KERNEL_SPECS,
    KernelName,
    diagonal_norms,
    kernel,
    kernel_table,
    oracle_table,
    quadrature_oracle,
    trig_overlap,
)

WIDE = validate_geometry(3, 3, 5, 5)
SKEW = validate_geometry(2, 3, 5, 4)

# Defining integrals evaluated once with mpmath.quad at 30 digits, written out
# by hand from the integrands (not through the package).
FROZEN = [
    ("V", 2, 1, WIDE, 5.0, -0.190877584190454477779858041863),
    ("Q", 0, 0, WIDE, 5.0, 0.82790599754436219541814984872),
    ("O", 1, 2, SKEW, 3.7, 1.24752677367491674737895562039),
    ("Op", 0, 3, SKEW, 3.7, 1.90324578744447868337817016786),
    ("R", 1, 1, SKEW, 3.7, 0.0624528027354581566569833570887),
    ("Wp", 2, 1, SKEW, 3.7, -2.36369222071426118476265934692),
    # strongly evanescent column, profile ratio ~ exp(-7.5 * 2)
    ("V", 4, 12, WIDE, 1.0, 3.28617550668227109782005084756e-08),
]


@pytest.mark.parametrize("name, m, n, g, k, ref", FROZEN)
def test_frozen_values(name, m, n, g, k, ref):
    assert kernel(name, m, n, g, k) == pytest.approx(ref, rel=1e-12, abs=1e-20)
    assert quadrature_oracle(name, m, n, g, k) == pytest.approx(ref, rel=1e-11, abs=1e-20)


def test_trig_overlap_cases():
    assert trig_overlap(0.0, 0.0, 3.0, "cos") == pytest.approx(3.0, rel=1e-15)
    z = 3 * math.pi / 6
    assert trig_overlap(z, z, 3.0, "sin") == pytest.approx(1.5, rel=1e-15)
    # int_0^1 cos(pi y / 2) cos(pi y) dy = 2 / (3 pi)
    assert trig_overlap(math.pi / 2, math.pi, 1.0, "cos") == pytest.approx(2 / (3 * math.pi), rel=1e-14)


def test_h_and_e_zero_zero():
    assert kernel("H", 0, 0, WIDE, 5.0) == pytest.approx(3.0, rel=1e-15)
    assert kernel("E", 0, 0, WIDE, 5.0) == pytest.approx(3.0, rel=1e-15)
    assert quadrature_oracle("H", 0, 0, WIDE, 5.0) == pytest.approx(3.0, abs=1e-12)


def test_table_shapes_and_coincident_diagonal():
    h = kernel_table("H", WIDE, 5.0, 4)
    assert h.entries.shape == (5, 5)
    assert h.entries[0, 0] == pytest.approx(3.0)
    k = kernel_table("K", WIDE, 5.0, 4)
    assert k.entries.shape == (4, 4)
    # sin(pi/2 x) on a2=3 and sin(pi/2 x) from b2=5: (2m+1)/3 = (2n+1)/5 at m=1, n=2
    assert k.entries[1, 2] == pytest.approx(1.5, rel=1e-14)
    assert not h.entries.flags.writeable


@pytest.mark.parametrize("name", list(KernelName))
def test_table_matches_oracle(name):
    t = kernel_table(name, SKEW, 3.7, 5).entries
    ref = oracle_table(name, SKEW, 3.7, 5)
    assert np.all(np.abs(t - ref) <= 1e-9 * (1 + np.abs(ref)))


def test_plain_kernels_reduce_to_norms():
    g = validate_geometry(2.0, 3.0, 2.0, 3.0)
    assert np.allclose(kernel_table("H", g, 1.0, 8).entries, np.diag(diagonal_norms(Parity.EVEN, 8, 2.0)), atol=1e-14)
    assert np.allclose(kernel_table("K", g, 1.0, 8).entries, np.diag(diagonal_norms(Parity.ODD, 8, 3.0)), atol=1e-14)


@pytest.mark.parametrize("name", [n for n, s in KERNEL_SPECS.items() if s.den is not None])
def test_continuous_across_cut_on(name):
    spec = KERNEL_SPECS[name]
    par, attr = spec.col
    mu = float(eigenvalue(par, 2, getattr(SKEW, attr)))
    below = kernel(name, 1, 2, SKEW, mu - 1e-6)
    above = kernel(name, 1, 2, SKEW, mu + 1e-6)
    assert abs(below - above) < 1e-4 * (1 + abs(above))


def test_large_tables_finite():
    for name in KernelName:
        assert np.all(np.isfinite(kernel_table(name, WIDE, 5.0, 200).entries))


def test_internal_resonance_raises():
    # cos(mu b1) = 0 for the V column n=0 when k b1 = pi/2
    g = validate_geometry(1, 1, 2, 2)
    with pytest.raises(SingularPrefactor):
        kernel_table("V", g, math.pi / 4, 3)


def test_to_text_rows():
    t = kernel_table("Q", WIDE, 5.0, 2)
    lines = t.to_text().splitlines()
    assert lines[0] == "m,n,re,im"
    m, n, re, im = lines[1].split(",")
    assert complex(float(re), float(im)) == t.entries[0, 0]


@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(0.1, 5.0), st.sampled_from(["cos", "sin"]))
def test_overlap_symmetric(mu, nu, L, product):
    assert trig_overlap(mu, nu, L, product) == pytest.approx(trig_overlap(nu, mu, L, product), rel=1e-12, abs=1e-14)


@given(
    st.sampled_from(list(KernelName)),
    st.integers(0, 12),
    st.integers(0, 12),
    st.floats(0.5, 4.0),
    st.floats(0.5, 4.0),
    st.floats(1.0, 2.0),
    st.floats(1.0, 2.0),
    st.floats(0.2, 10.0),
)
def test_kernel_matches_oracle(name, m, n, a1, a2, r1, r2, k):
    g = validate_geometry(a1, a2, a1 * r1, a2 * r2)
    try:
        val = kernel(name, m, n, g, k)
    except SingularPrefactor:
        return
    ref = quadrature_oracle(name, m, n, g, k)
    assert abs(val - ref) <= 1e-9 * (1 + abs(ref))
