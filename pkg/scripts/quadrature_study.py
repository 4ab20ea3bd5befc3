"""Frequency-quadrature convergence of a synthesised pulse.

Uses the skew junction (a1=2, a2=3, b1=5, b2=4) with an even mode-0 pulse and
prints the sup-norm change of the t=0 snapshot on a 41x41 raster each time the
number of frequency nodes doubles.  The finest level takes about a minute.

    python3 scripts/quadrature_study.py [N_k ...]
"""

import math
import sys

import numpy as np

from wavejunction import Parity, validate_geometry
from wavejunction.time_domain import SpectrumSpec, build_quadrature, precompute_field_matrix, raster_points, synthesize

g = validate_geometry(2, 3, 5, 4)
spectrum = SpectrumSpec.gaussian(3.0, 8.0, 1 / math.pi)
levels = [int(v) for v in sys.argv[1:]] or [128, 256, 512, 1024]
pts, _ = raster_points(g, 41, 41)
k_max = spectrum.support_max()
print(f"k_max = {k_max:.4f}, {len(pts)} raster points")

prev = None
for N_k in levels:
    ts = precompute_field_matrix(g, Parity.EVEN, 0, 100, pts, build_quadrature(k_max, N_k))
    snap = synthesize(ts, spectrum, 0.0)
    change = "" if prev is None else f"  change {np.max(np.abs(snap - prev)):.3e}"
    print(f"N_k = {N_k:5d}  sup|phi| = {np.max(np.abs(snap)):.6f}{change}")
    prev = snap
