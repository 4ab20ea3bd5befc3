"""Truncation study on the square-channel junction (a=3, b=5, k=5).

Prints, per boundary-condition pair and truncation N, the matching residuals,
the NN energy identity defect and the change in the reflection coefficients
relative to the previous N.

    python3 scripts/truncation_study.py [N ...]
"""

import sys

import numpy as np

from wavejunction import BCPair, QuadrantProblem, solve_quadrant, validate_geometry
from wavejunction.diagnostics import energy_defect_nn, matching_residuals

g = validate_geometry(3, 3, 5, 5)
sizes = [int(v) for v in sys.argv[1:]] or [25, 50, 100, 200]

print(f"{'bc':3} {'N':>5} {'pressure':>10} {'velocity':>10} {'wall':>10} {'energy':>10} {'dA':>10}")
for bc in BCPair:
    prev = None
    for N in sizes:
        sol = solve_quadrant(QuadrantProblem(g, 5.0, bc, 0, N))
        r = matching_residuals(sol)
        press = max(r["pressure"].values())
        vel = max(r["velocity"].values())
        wall = max(r["wall"].values())
        energy = energy_defect_nn(sol) if bc is BCPair.NN else float("nan")
        head = sol.A[:10]
        dA = float("nan") if prev is None else float(np.linalg.norm(head - prev) / np.linalg.norm(head))
        prev = head
        print(f"{bc.value:3} {N:5d} {press:10.2e} {vel:10.2e} {wall:10.2e} {energy:10.2e} {dA:10.2e}")
