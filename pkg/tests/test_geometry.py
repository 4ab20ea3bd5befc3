import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavejunction.errors import ChannelWiderThanJunction, NonPositiveDimension
from wavejunction.geometry import (
    Parity,
    axial_wavenumber,
    cut_on_distance,
    eigenvalue,
    propagating_count,
    propagating_counts,
    validate_geometry,
)

widths = st.floats(0.1, 10.0)
freqs = st.floats(0.01, 40.0)


def test_valid_geometries():
    assert validate_geometry(3, 3, 5, 5).as_dict() == {"a1": 3.0, "a2": 3.0, "b1": 5.0, "b2": 5.0}
    assert validate_geometry(2, 2, 2, 2).is_square


def test_channel_wider_than_junction():
    with pytest.raises(ChannelWiderThanJunction):
        validate_geometry(5, 3, 2, 5)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_nonpositive_dimension(bad):
    with pytest.raises(NonPositiveDimension):
        validate_geometry(bad, 1, 2, 2)


def test_transposed_swaps_axes():
    g = validate_geometry(2, 3, 5, 4)
    assert g.transposed().as_dict() == {"a1": 3.0, "a2": 2.0, "b1": 4.0, "b2": 5.0}
    assert g.transposed().transposed() == g


def test_eigenvalue_examples():
    assert eigenvalue(Parity.EVEN, 0, 7.3) == 0
    assert eigenvalue(Parity.ODD, 0, 2) == pytest.approx(math.pi / 4, rel=1e-15)
    assert eigenvalue(Parity.EVEN, 3, 3) == pytest.approx(math.pi, rel=1e-15)


def test_axial_wavenumber_examples():
    assert axial_wavenumber(5, 0) == 5 + 0j
    assert axial_wavenumber(3, 5) == pytest.approx(4j, abs=1e-15)
    assert axial_wavenumber(5, 3) == pytest.approx(4 + 0j, abs=1e-15)


@pytest.mark.parametrize("k, a1, expected", [(4, 2, (2, 2)), (0.1, 1, (0, 0)), (5, 3, (4, 4))])
def test_propagating_counts_examples(k, a1, expected):
    assert propagating_counts(k, a1) == expected


def test_odd_count_brute_force():
    # cut-ons of sin((2n+1) pi y / 4): 0.785, 2.356, 3.927, 5.498 -> three below k=4
    assert propagating_count(Parity.ODD, 4.0, 2.0) == 3
    assert propagating_count(Parity.EVEN, 4.0, 2.0) == 3


@given(freqs, st.floats(0.0, 60.0))
def test_axial_branch(k, mu):
    kz = axial_wavenumber(k, mu)
    assert kz.imag >= 0
    if k != mu:
        assert (kz.real == 0) != (kz.imag == 0)
    assert abs(kz * kz + mu * mu - k * k) <= 4e-15 * max(k * k, mu * mu)


@given(freqs, freqs, widths, widths)
def test_counts_monotone(k1, k2, a, b):
    lo, hi = sorted((k1, k2))
    assert all(x <= y for x, y in zip(propagating_counts(lo, a), propagating_counts(hi, a)))
    lo, hi = sorted((a, b))
    assert all(x <= y for x, y in zip(propagating_counts(k1, lo), propagating_counts(k1, hi)))


@given(st.integers(0, 500), widths)
def test_eigenvalues_interlace(n, L):
    assert eigenvalue(Parity.EVEN, n, L) < eigenvalue(Parity.ODD, n, L) < eigenvalue(Parity.EVEN, n + 1, L)


@given(freqs, widths)
def test_count_matches_brute_force(k, L):
    for parity in Parity:
        n = np.arange(int(k * L) + 5)
        brute = int(np.sum(eigenvalue(parity, n, L) < k))
        assert propagating_count(parity, k, L) == brute


def test_cut_on_distance():
    g = validate_geometry(2, 2, 2, 2)
    assert cut_on_distance(math.pi / 2, g) < 1e-15
    # nearest eigenvalue to k=1 is the first odd one, pi/4
    assert cut_on_distance(1.0, g) == pytest.approx(1.0 - math.pi / 4, abs=1e-15)
