import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import WIDE, SKEW, SQUARE2, full
from wavejunction.errors import DegenerateCutOn, DimensionMismatch, GeometryRestriction
from wavejunction.full_field import channel_amplitudes
from wavejunction.geometry import Parity, propagating_count, propagating_counts, validate_geometry
from wavejunction.smatrix import (
    ChannelWave,
    Direction,
    ModeLayout,
    Normalization,
    SMatrix,
    apply,
    build_smatrix,
    flux_normalize,
    rotation_operator,
    top_incidence_columns,
)

_cache = {}


def smat(g=SQUARE2, k=4.0, N=100):
    key = (g, k, N)
    if key not in _cache:
        _cache[key] = build_smatrix(g, k, N)
    return _cache[key]


def test_layout_sizes():
    s = smat()
    assert (s.q, s.q_tilde) == propagating_counts(4.0, 2.0) == (2, 2)
    assert s.layout.n_even == 3
    # every propagating odd mode gets a row, including the one the floor formula misses
    assert s.layout.n_odd == propagating_count(Parity.ODD, 4.0, 2.0) == 3
    assert s.block(("L", Parity.EVEN), ("R", Parity.EVEN)).shape == (3, 3)
    assert s.block(("T", Parity.ODD), ("L", Parity.EVEN)).shape == (3, 3)


def test_forbidden_blocks_are_zero():
    s = smat()
    n = 0
    for out, inc in s.layout.forbidden():
        assert np.all(s.block(out, inc) == 0)
        n += 1
    assert n == 16


def test_first_columns_match_direct_combination():
    s = smat()
    ev = full(SQUARE2, 4.0, Parity.EVEN)
    col = s.block(("L", Parity.EVEN), ("L", Parity.EVEN))[:, 0]
    assert np.max(np.abs(col - 0.5 * (ev.xn.A[:3] + ev.xd.A[:3]))) <= 1e-12
    od = full(SQUARE2, 4.0, Parity.ODD)
    col = s.block(("L", Parity.ODD), ("L", Parity.ODD))[:, 0]
    assert np.max(np.abs(col - 0.5 * (od.xn.A[:3] + od.xd.A[:3]))) <= 1e-12


def test_unitary_and_reciprocal():
    f = flux_normalize(smat())
    assert f.normalization is Normalization.FLUX
    assert f.unitarity_defect() <= 1e-3
    assert f.reciprocity_defect() <= 1e-3


def test_defects_shrink_with_n():
    g = validate_geometry(2, 2, 3, 3)
    u = [flux_normalize(smat(g, 4.0, N)).unitarity_defect() for N in (5, 10, 25)]
    r = [flux_normalize(smat(g, 4.0, N)).reciprocity_defect() for N in (5, 10, 25)]
    assert u[0] > u[1] > u[2] and r[0] > r[1] > r[2]


def test_single_mode_normalisation_is_identity():
    s = smat(SQUARE2, 0.7, 40)
    assert s.layout == ModeLayout(1, 0)
    assert np.array_equal(flux_normalize(s).matrix, s.matrix)


def test_quarter_turn_invariance():
    s = smat()
    U = rotation_operator(s.layout)
    assert np.max(np.abs(U @ s.matrix @ U.T - s.matrix)) <= 1e-10
    assert np.allclose(U @ U.T, np.eye(s.layout.total))


def test_top_columns_from_transposed_solve():
    s = smat(WIDE, 4.0, 60)
    top = top_incidence_columns(WIDE, 4.0, 60, s.layout)
    cols = np.hstack([s.matrix[:, s.layout.slice("T", p)] for p in Parity])
    assert np.max(np.abs(top - cols)) <= 1e-10


def test_apply_left_even_wave():
    s = smat()
    out = apply(s, [ChannelWave(Direction.RIGHT, Parity.EVEN, np.array([1.0, 0, 0]))])
    amps = channel_amplitudes(full(SQUARE2, 4.0, Parity.EVEN))
    got = {(w.direction, w.parity): w.amplitudes for w in out}
    assert np.allclose(got[(Direction.LEFT, Parity.EVEN)], amps["L"][Parity.EVEN][:3], atol=1e-14)
    assert np.allclose(got[(Direction.UP, Parity.ODD)], amps["U"][Parity.ODD][:3], atol=1e-14)
    assert np.all(got[(Direction.LEFT, Parity.ODD)] == 0)


def test_apply_zero_and_errors():
    s = smat()
    assert np.all(s.matrix @ np.zeros(s.layout.total) == 0)
    with pytest.raises(DimensionMismatch):
        apply(s, [ChannelWave(Direction.RIGHT, Parity.EVEN, np.ones(2))])
    with pytest.raises(DimensionMismatch):
        apply(s, np.ones(5))


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=24, max_size=24))
def test_rotation_equivariance(vals):
    s = smat()
    U = rotation_operator(s.layout)
    a = np.array(vals)
    assert np.allclose(s.matrix @ (U @ a), U @ (s.matrix @ a), atol=1e-10 * (1 + np.abs(a).max()))


def test_restrictions():
    with pytest.raises(GeometryRestriction):
        build_smatrix(SKEW, 3.0, 20)
    with pytest.raises(DegenerateCutOn):
        build_smatrix(SQUARE2, math.pi / 2, 20)


def test_serialisation_round_trip():
    s = flux_normalize(smat(SQUARE2, 4.0, 30))
    back = SMatrix.from_json(s.to_json())
    assert np.array_equal(back.matrix, s.matrix)
    assert back.layout == s.layout and back.normalization is s.normalization
    doc = json.loads(s.to_json())
    assert doc["k"] == 4.0
    rows = s.to_rows().splitlines()
    assert len(rows) == 1 + s.layout.total ** 2
