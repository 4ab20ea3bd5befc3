"""Batch front end: ``wavejunction {solve,sweep,smatrix,timedomain,validate}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure (or a
failed validation check), 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import MODES, RunConfig, load_config, parse_config
from .diagnostics import channel_powers, diagnose, flux_defect
from .errors import ConfigError, JunctionError, NumericalError
from .full_field import PAIRS, FullSolution, sample_grid, sample_quadrant
from .geometry import propagating_count, propagating_counts, Parity
from .quadrant import BCPair, QuadrantProblem, solve_quadrant
from .smatrix import build_smatrix, flux_normalize
from .textfmt import num
from .time_domain import build_quadrature, precompute_field_matrix, raster_points, snapshot_series, write_frames
from .validation import kernel_check, kernel_samples, smatrix_checks, solution_checks

log = logging.getLogger("wavejunction")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class Run:
    """Output directory bookkeeping for one invocation."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = cfg.out
        self.files: list[str] = []
        self.notes: list[str] = []
        os.makedirs(self.out, exist_ok=True)

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.out, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
        self.files.append(name)
        return path

    def json(self, name: str, obj) -> str:
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _map(fn, items, jobs: int):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# --------------------------------------------------------------------------
# modes


def run_solve(run: Run) -> int:
    cfg = run.cfg
    g = cfg.geometry
    bcs = list(cfg.bc) if cfg.bc else list(PAIRS[cfg.parity])
    if cfg.parity is not None:
        for bc in PAIRS[cfg.parity]:
            if bc not in bcs:
                bcs.append(bc)
    problems = [QuadrantProblem(g, cfg.k, bc, cfg.p, cfg.N) for bc in bcs]
    sols = dict(zip(bcs, _map(solve_quadrant, problems, cfg.jobs)))
    energy = {}
    for bc, sol in sols.items():
        run.write(f"coeffs_{bc.value}.csv", sol.to_text())
        rep = diagnose(sol)
        run.write(f"diagnostics_{bc.value}.json", rep.to_json() + "\n")
        run.write(f"field_{bc.value}.csv", sample_quadrant(sol, cfg.nx, cfg.ny, cfg.channel_length).to_text())
        energy[bc.value] = {
            "energy_defect": rep.energy_defect,
            "quadrant_flux_defect": rep.quadrant_flux_defect,
            "condition_estimate": rep.condition_estimate,
        }
    if cfg.parity is not None:
        n, d = PAIRS[cfg.parity]
        full = FullSolution(cfg.parity, sols[n], sols[d])
        run.write(f"field_full_{cfg.parity.value}.csv", sample_grid(full, cfg.nx, cfg.ny, cfg.channel_length).to_text())
        energy["full"] = {"parity": cfg.parity.value, "flux_defect": flux_defect(full), "powers": channel_powers(full)}
    run.json("energy.json", energy)
    for name, rep in energy.items():
        log.info("%s: %s", name, rep)
    return EXIT_OK


SWEEP_COLUMNS = (
    "k", "bc", "status", "energy_defect", "quadrant_flux_defect", "pressure_x", "pressure_y",
    "velocity_x", "velocity_y", "wall_x", "wall_y", "condition", "flags",
)


def run_sweep(run: Run) -> int:
    cfg = run.cfg
    g = cfg.geometry
    ks = np.linspace(cfg.k_min, cfg.k_max, cfg.N_k)
    bcs = list(cfg.bc) if cfg.bc else list(BCPair)
    square = g.a1 == g.a2 and g.b1 == g.b2

    def one(k):
        rows = []
        for bc in bcs:
            try:
                sol = solve_quadrant(QuadrantProblem(g, float(k), bc, cfg.p, cfg.N))
                r = diagnose(sol)
                rows.append([
                    num(k), bc.value, "ok",
                    "" if r.energy_defect is None else num(r.energy_defect), num(r.quadrant_flux_defect),
                    num(r.pressure_residuals["x=-b2"]), num(r.pressure_residuals["y=b1"]),
                    num(r.velocity_residuals["x=-b2"]), num(r.velocity_residuals["y=b1"]),
                    num(r.wall_residuals["x=-b2"]), num(r.wall_residuals["y=b1"]),
                    num(r.condition_estimate), "; ".join(r.flags),
                ])
            except ValueError as exc:
                rows.append([num(k), bc.value, "skipped", *[""] * 9, str(exc)])
            except NumericalError as exc:
                rows.append([num(k), bc.value, "failed", *[""] * 9, f"{type(exc).__name__}: {exc}"])
        smat = None
        if square:
            try:
                s = flux_normalize(build_smatrix(g, float(k), cfg.N))
                smat = (s.to_rows(header=False), s.unitarity_defect(), s.reciprocity_defect())
            except NumericalError as exc:
                smat = (None, str(exc), None)
        return rows, smat

    results = _map(one, ks, cfg.jobs)
    lines = [",".join(SWEEP_COLUMNS)]
    failed = 0
    smat_rows = ["k,out_channel,out_parity,m,in_channel,in_parity,n,re,im"]
    smat_defects = ["k,unitarity,reciprocity,status"]
    for k, (rows, smat) in zip(ks, results):
        for row in rows:
            failed += row[2] == "failed"
            lines.append(",".join(str(c).replace(",", ";") for c in row))
        if smat is not None:
            if smat[0] is None:
                failed += 1
                smat_defects.append(f"{num(k)},,,{smat[1].replace(',', ';')}")
            else:
                smat_rows.append(smat[0].rstrip("\n"))
                smat_defects.append(f"{num(k)},{num(smat[1])},{num(smat[2])},ok")
    run.write("sweep.csv", "\n".join(lines) + "\n")
    if square:
        run.write("smatrix_sweep.csv", "\n".join(smat_rows) + "\n")
        run.write("smatrix_defects.csv", "\n".join(smat_defects) + "\n")
    if failed:
        run.notes.append(f"{failed} sweep entries failed numerically")
        return EXIT_NUMERICAL
    return EXIT_OK


def run_smatrix(run: Run) -> int:
    cfg = run.cfg
    s = build_smatrix(cfg.geometry, cfg.k, cfg.N, jobs=cfg.jobs)
    f = flux_normalize(s)
    run.write("smatrix_raw.json", s.to_json() + "\n")
    run.write("smatrix_flux.json", f.to_json() + "\n")
    run.write("smatrix_flux.csv", f.to_rows())
    summary = {
        "q": s.q,
        "q_tilde": s.q_tilde,
        "even_modes": s.layout.n_even,
        "odd_modes": s.layout.n_odd,
        "unitarity_defect": f.unitarity_defect(),
        "reciprocity_defect": f.reciprocity_defect(),
        "forbidden_max": s.forbidden_max(),
    }
    run.json("smatrix_summary.json", summary)
    print(f"unitarity defect {summary['unitarity_defect']:.3e}  reciprocity defect {summary['reciprocity_defect']:.3e}")
    return EXIT_OK


def run_timedomain(run: Run) -> int:
    cfg = run.cfg
    g = cfg.geometry
    k_max = cfg.k_max if cfg.k_max is not None else cfg.spectrum.support_max()
    N_k = cfg.N_k if cfg.N_k is not None else 129
    grid = build_quadrature(k_max, N_k)
    pts, raster = raster_points(g, cfg.nx, cfg.ny, cfg.channel_length)
    ts = precompute_field_matrix(g, cfg.parity, cfg.p, cfg.N, pts, grid, jobs=cfg.jobs, raster=raster)
    if ts.grid.nudged:
        run.notes.append(f"nudged quadrature nodes off cut-on: {list(ts.grid.nudged)}")
    frames = snapshot_series(ts, cfg.spectrum, cfg.times)
    index = write_frames(frames, os.path.join(run.out, "frames"))
    run.files.extend(os.path.join("frames", os.path.basename(p)) for p in sorted(os.listdir(os.path.dirname(index))))
    run.json("timedomain.json", {"k_max": k_max, "N_k": N_k, "dk": ts.grid.dk, "points": len(pts),
                                 "nudged": list(ts.grid.nudged), "times": list(cfg.times)})
    return EXIT_OK


def run_validate(run: Run) -> int:
    cfg = run.cfg
    g = cfg.geometry
    k = cfg.k if cfg.k is not None else 4.0
    rng = np.random.default_rng(cfg.seed)
    checks = []
    q, qt = propagating_counts(k, g.a1)
    run.notes.append(
        f"closed-form counts q={q} (q+1 even modes), q_tilde={qt}; modes with real axial wavenumber: "
        f"{propagating_count(Parity.EVEN, k, g.a1)} even, {propagating_count(Parity.ODD, k, g.a1)} odd"
    )
    kc, failures = kernel_check(kernel_samples(rng, cfg.samples))
    checks.append(kc)
    checks.extend(solution_checks(g, k, cfg.N))
    if g.a1 == g.a2 and g.b1 == g.b2:
        checks.extend(smatrix_checks(g, k, cfg.N))
    for c in checks:
        print(c.line())
    run.json("validate.json", {"k": k, "checks": [c.as_dict() for c in checks], "kernel_failures": failures,
                               "notes": run.notes})
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


RUNNERS = {
    "solve": run_solve,
    "sweep": run_sweep,
    "smatrix": run_smatrix,
    "timedomain": run_timedomain,
    "validate": run_validate,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavejunction", description="Wave scattering at a four-channel junction.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--jobs", type=int, help="worker threads (overrides run.jobs)")
    ap.add_argument("--seed", type=int, help="seed for randomised validation (overrides run.seed)")
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override one configuration key; repeatable")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = [f"run.mode={args.mode}"] + list(args.set)
    if args.out is not None:
        overrides.append(f"output.dir={args.out}")
    if args.jobs is not None:
        overrides.append(f"run.jobs={args.jobs}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    try:
        cfg = load_config(args.config, overrides) if args.config else parse_config("", overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_IO
    for note in cfg.overrides:
        if "replaces" in note:
            log.warning(note)

    start = time.perf_counter()
    try:
        run = Run(cfg)
        status = RUNNERS[cfg.mode](run)
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_NUMERICAL
        run.notes.append(f"{type(exc).__name__}: {exc}")
    except (JunctionError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = {
        "tool": "wavejunction",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "mode": cfg.mode,
        "config": cfg.echo(),
        "overrides": cfg.overrides,
        "wall_time_s": time.perf_counter() - start,
        "files": run.files,
        "notes": run.notes,
        "exit_status": status,
    }
    try:
        run.json("manifest.json", manifest)
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
