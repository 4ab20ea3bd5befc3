import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import WIDE, SKEW, OFFSET, full, quadrant
from wavejunction.diagnostics import flux_defect
from wavejunction.errors import DimensionMismatch, OutOfDomain
from wavejunction.full_field import (
    FullSolution,
    channel_amplitudes,
    closed_form_check,
    in_domain,
    parse_field_grid,
    reconstruct,
    sample_grid,
    sample_quadrant,
)
from wavejunction.geometry import Parity
from wavejunction.quadrant import BCPair, eval_quadrant
from wavejunction.smatrix import CHANNELS, ModeLayout
from wavejunction.validation import project_waves


def random_points(g, n, seed):
    rng = np.random.default_rng(seed)
    ell = 2 * max(g.b1, g.b2)
    pts = []
    while len(pts) < n:
        x = rng.uniform(-g.b2 - ell, g.b2 + ell, 4 * n)
        y = rng.uniform(-g.b1 - ell, g.b1 + ell, 4 * n)
        keep = in_domain(g, x, y)
        pts.extend(zip(x[keep], y[keep]))
    x, y = np.array(pts[:n]).T
    return x, y


def test_principal_quadrant_is_half_sum():
    f = full(WIDE, 5.0, Parity.EVEN)
    x, y = -6.0, 1.3
    want = 0.5 * (eval_quadrant(quadrant(WIDE, 5.0, BCPair.NN), x, y) + eval_quadrant(quadrant(WIDE, 5.0, BCPair.DN), x, y))
    assert reconstruct(f, x, y) == want


def test_pairing_enforced():
    with pytest.raises(DimensionMismatch):
        FullSolution(Parity.EVEN, quadrant(WIDE, 5.0, BCPair.NN), quadrant(WIDE, 5.0, BCPair.DD))
    f = FullSolution.from_pair(quadrant(WIDE, 5.0, BCPair.DD), quadrant(WIDE, 5.0, BCPair.ND))
    assert f.parity is Parity.ODD


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        reconstruct(full(WIDE, 5.0, Parity.EVEN), 9.0, 9.0)


@pytest.mark.parametrize("parity, sign", [(Parity.EVEN, 1), (Parity.ODD, -1)])
def test_mirror_in_y(parity, sign):
    f = full(SKEW, 3.0, parity)
    x, y = random_points(SKEW, 200, 1)
    assert np.allclose(reconstruct(f, x, -y), sign * reconstruct(f, x, y), rtol=0, atol=1e-14)


@pytest.mark.parametrize("parity", list(Parity))
def test_continuity_across_symmetry_lines(parity):
    f = full(SKEW, 3.0, parity)
    scale = np.max(np.abs(reconstruct(f, *random_points(SKEW, 200, 2))))
    ys = np.linspace(-10, 10, 41)
    xs = np.linspace(-10, 10, 41)
    e = 1e-12
    jump_x = np.abs(reconstruct(f, -e + 0 * ys, ys) - reconstruct(f, e + 0 * ys, ys))
    jump_y = np.abs(reconstruct(f, xs, -e + 0 * xs) - reconstruct(f, xs, e + 0 * xs))
    assert max(jump_x.max(), jump_y.max()) <= 1e-6 * scale


@pytest.mark.parametrize("g, k", [(WIDE, 5.0), (SKEW, 3.0), (OFFSET, 4.0)])
@pytest.mark.parametrize("parity", list(Parity))
def test_closed_form_agrees(g, k, parity):
    f = full(g, k, parity)
    x, y = random_points(g, 1000, 3)
    a = reconstruct(f, x, y)
    b = closed_form_check(f, x, y)
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(a))


@pytest.mark.parametrize("parity", list(Parity))
def test_flux_balance(parity):
    assert flux_defect(full(SKEW, 3.0, parity)) < 1e-3


@pytest.mark.parametrize("parity", list(Parity))
def test_channel_amplitudes_by_projection(parity):
    # read the outgoing waves off the field itself
    g, k = OFFSET, 4.0
    f = full(g, k, parity)
    layout = ModeLayout(3, 3)
    a, b = project_waves(lambda x, y: reconstruct(f, x, y), g, k, layout)
    amps = channel_amplitudes(f)
    key = {"L": "L", "T": "U", "R": "R", "B": "D"}
    for c in CHANNELS:
        for par in Parity:
            want = amps[key[c]][par][:3]
            got = b[layout.slice(c, par)]
            if want.size == 0:
                want = np.zeros(3)
            assert np.allclose(got, want, atol=1e-12)
    unit = np.zeros(layout.total)
    unit[layout.slice("L", parity).start] = 1.0
    assert np.allclose(a, unit, atol=1e-12)


def test_grid_mask_and_round_trip():
    f = full(WIDE, 5.0, Parity.EVEN, 0, 30)
    grid = sample_grid(f, 31, 27)
    X, Y = np.meshgrid(grid.x, grid.y)
    corner = (np.abs(X) > WIDE.b2 + 1e-9) & (np.abs(Y) > WIDE.b1 + 1e-9) & (np.abs(X) > WIDE.a2) & (np.abs(Y) > WIDE.a1)
    assert not np.any(grid.mask & corner)
    assert np.all(np.isnan(grid.values[~grid.mask]))
    back = parse_field_grid(grid.to_text())
    assert back.meta["parity"] == "even" and float(back.meta["k"]) == 5.0
    assert np.array_equal(back.mask, grid.mask)
    assert np.array_equal(back.values[back.mask], grid.values[grid.mask])


def test_quadrant_grid():
    g = sample_quadrant(quadrant(WIDE, 5.0, BCPair.DD, 0, 20), 21, 21)
    assert g.meta["bc"] == "DD"
    assert g.x[-1] == 0.0 and g.y[0] == 0.0


def test_channel_walls_have_zero_normal_derivative():
    g, k = SKEW, 3.0
    f = full(g, k, Parity.EVEN)
    h = 1e-4
    scale = k * np.max(np.abs(reconstruct(f, *random_points(g, 200, 4))))
    xs = np.linspace(-g.b2 - 8, -g.b2 - 0.5, 9)
    top = g.a1 + 0 * xs
    # second-order one-sided difference into the channel
    dy = (3 * reconstruct(f, xs, top) - 4 * reconstruct(f, xs, top - h) + reconstruct(f, xs, top - 2 * h)) / (2 * h)
    ys = np.linspace(g.b1 + 0.5, g.b1 + 8, 9)
    side = g.a2 + 0 * ys
    dx = (3 * reconstruct(f, side, ys) - 4 * reconstruct(f, side - h, ys) + reconstruct(f, side - 2 * h, ys)) / (2 * h)
    assert np.max(np.abs(dy)) < 1e-6 * scale
    assert np.max(np.abs(dx)) < 1e-6 * scale


@given(st.floats(-12.0, 12.0), st.floats(-12.0, 12.0))
def test_reconstruct_equals_closed_form_pointwise(x, y):
    if not in_domain(SKEW, x, y):
        return
    f = full(SKEW, 3.0, Parity.ODD)
    assert abs(reconstruct(f, x, y) - closed_form_check(f, x, y)) < 1e-9
