"""Run configuration: a flat ``key = value`` file with four sections.

Grammar (``#`` or ``;`` start comments, blank lines ignored)::

    [geometry]   a1 a2 b1 b2
    [run]        mode k k_min k_max N_k bc parity p N nx ny channel_length
                 times jobs seed samples
    [spectrum]   kind center rate scale table
    [output]     dir

``bc`` is a comma list of NN, DD, ND, DN; ``times`` a comma list of floats;
``table`` a comma list of ``k:value`` pairs for tabulated spectra.  Keys given
on the command line (``section.key=value``) replace file values and are
recorded as overrides.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, GeometryError
from .geometry import Geometry, Parity, validate_geometry
from .quadrant import BCPair
from .time_domain import SpectrumSpec

MODES = ("solve", "sweep", "smatrix", "timedomain", "validate")

SCHEMA: dict[str, dict[str, type]] = {
    "geometry": {"a1": float, "a2": float, "b1": float, "b2": float},
    "run": {
        "mode": str,
        "k": float,
        "k_min": float,
        "k_max": float,
        "N_k": int,
        "bc": str,
        "parity": str,
        "p": int,
        "N": int,
        "nx": int,
        "ny": int,
        "channel_length": float,
        "times": str,
        "jobs": int,
        "seed": int,
        "samples": int,
    },
    "spectrum": {"kind": str, "center": float, "rate": float, "scale": float, "table": str},
    "output": {"dir": str},
}


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ValidationError(ConfigError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


@dataclass
class RunConfig:
    geometry: Geometry
    mode: str
    k: float | None = None
    k_min: float | None = None
    k_max: float | None = None
    N_k: int | None = None
    bc: tuple[BCPair, ...] = ()
    parity: Parity | None = None
    p: int = 0
    N: int = 100
    nx: int = 121
    ny: int = 121
    channel_length: float | None = None
    times: tuple[float, ...] = ()
    spectrum: SpectrumSpec = field(default_factory=lambda: SpectrumSpec.gaussian(3.0, 8.0))
    out: str = "out"
    jobs: int = 1
    seed: int = 0
    samples: int = 200
    overrides: list[str] = field(default_factory=list)

    def echo(self) -> dict:
        d = asdict(self)
        d["geometry"] = self.geometry.as_dict()
        d["bc"] = [b.value for b in self.bc]
        d["parity"] = self.parity.value if self.parity else None
        d["spectrum"] = {k: v for k, v in asdict(self.spectrum).items()}
        d["spectrum"]["values"] = [[c.real, c.imag] for c in self.spectrum.values]
        return d


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]", line)
        if m:
            current = m.group(1).strip()
            continue
        if current == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return i
    return None


def _section_line(text: str, section: str) -> int | None:
    for i, raw in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[(.+)\]", raw)
        if m and m.group(1).strip() == section:
            return i
    return None


def read_raw(text: str) -> dict[str, dict[str, str]]:
    """Parse the file into ``{section: {key: raw string}}``, rejecting unknown keys."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str  # keep N and N_k distinct from n
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside any [section]", line=exc.lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ParseError("duplicate key", line=exc.lineno, key=exc.option) from exc
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line", line=lineno) from exc
    raw: dict[str, dict[str, str]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ParseError(f"unknown section [{section}]", line=_section_line(text, section))
        for key, val in cp.items(section):
            if key not in SCHEMA[section]:
                raise ParseError("unknown key", line=_line_of(text, section, key), key=f"{section}.{key}")
            raw.setdefault(section, {})[key] = val
    return raw


def apply_overrides(raw: dict, pairs: list[str]) -> list[str]:
    notes = []
    for item in pairs:
        name, sep, val = item.partition("=")
        if not sep or "." not in name:
            raise ParseError(f"override {item!r} must look like section.key=value")
        section, key = name.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ParseError("unknown key", key=name)
        old = raw.get(section, {}).get(key)
        raw.setdefault(section, {})[key] = val.strip()
        if old is not None and old != val.strip():
            notes.append(f"{name}: command line {val.strip()!r} replaces file value {old!r}")
        else:
            notes.append(f"{name}: set from command line to {val.strip()!r}")
    return notes


def _convert(section: str, key: str, text: str, problems: list[str]):
    kind = SCHEMA[section][key]
    try:
        val = kind(text)
    except ValueError:
        problems.append(f"{section}.{key}: cannot read {text!r} as {kind.__name__}")
        return None
    if kind is float and not math.isfinite(val):
        problems.append(f"{section}.{key}: must be finite")
        return None
    return val


def build_config(raw: dict, overrides: list[str] | None = None) -> RunConfig:
    problems: list[str] = []
    vals: dict[str, dict] = {}
    for section, items in raw.items():
        for key, text in items.items():
            v = _convert(section, key, text, problems)
            if v is not None:
                vals.setdefault(section, {})[key] = v
    geo = vals.get("geometry", {})
    missing = [k for k in ("a1", "a2", "b1", "b2") if k not in raw.get("geometry", {})]
    if missing:
        problems.append("geometry: missing " + ", ".join(missing))
    run = vals.get("run", {})
    mode = str(run.get("mode", "")).lower()
    if mode not in MODES:
        problems.append(f"run.mode: expected one of {', '.join(MODES)}, got {mode or 'nothing'}")

    geometry = None
    if not missing and all(k in geo for k in ("a1", "a2", "b1", "b2")):
        try:
            geometry = validate_geometry(geo["a1"], geo["a2"], geo["b1"], geo["b2"])
        except GeometryError as exc:
            problems.append(f"geometry: {exc}")

    bc: tuple[BCPair, ...] = ()
    if "bc" in run:
        try:
            bc = tuple(BCPair(s.strip().upper()) for s in run["bc"].split(",") if s.strip())
        except ValueError:
            problems.append(f"run.bc: expected a list of NN, DD, ND, DN, got {run['bc']!r}")
    parity = None
    if "parity" in run:
        try:
            parity = Parity(run["parity"].strip().lower())
        except ValueError:
            problems.append(f"run.parity: expected even or odd, got {run['parity']!r}")
    times: tuple[float, ...] = ()
    if "times" in run:
        try:
            times = tuple(float(s) for s in run["times"].split(",") if s.strip())
        except ValueError:
            problems.append(f"run.times: cannot read {run['times']!r} as a list of numbers")
        if any(b <= a for a, b in zip(times, times[1:])):
            problems.append("run.times: must be strictly increasing")

    N = run.get("N", 100)
    if N < 1:
        problems.append("run.N: must be >= 1")
    p = run.get("p", 0)
    if p < 0:
        problems.append("run.p: must be >= 0")
    for key in ("k", "k_min", "k_max", "channel_length"):
        if key in run and not run[key] > 0:
            problems.append(f"run.{key}: must be positive")
    for key in ("nx", "ny"):
        if key in run and run[key] < 2:
            problems.append(f"run.{key}: must be at least 2")
    if "N_k" in run and run["N_k"] < 2:
        problems.append("run.N_k: must be at least 2")
    if run.get("jobs", 1) < 1:
        problems.append("run.jobs: must be >= 1")

    # mode-specific requirements
    if mode in ("solve", "smatrix") and "k" not in run:
        problems.append(f"run.k: required for mode {mode}")
    if mode == "solve" and not bc and parity is None:
        problems.append("run.bc or run.parity: required for mode solve")
    if mode == "sweep":
        for key in ("k_min", "k_max", "N_k"):
            if key not in run:
                problems.append(f"run.{key}: required for mode sweep")
        if "k_min" in run and "k_max" in run and run["k_min"] >= run["k_max"]:
            problems.append("run.k_min: must be below run.k_max")
    if mode == "timedomain":
        if parity is None:
            problems.append("run.parity: required for mode timedomain")
        if not times:
            problems.append("run.times: required for mode timedomain")

    spec = vals.get("spectrum", {})
    spectrum = SpectrumSpec.gaussian(3.0, 8.0)
    try:
        kind = spec.get("kind", "gaussian").lower()
        if kind == "gaussian":
            spectrum = SpectrumSpec.gaussian(spec.get("center", 3.0), spec.get("rate", 8.0), spec.get("scale", 1 / math.pi))
        elif kind == "tabulated":
            pairs = [item.split(":") for item in spec.get("table", "").split(",") if item.strip()]
            spectrum = SpectrumSpec.tabulated([float(a) for a, _ in pairs], [complex(b.replace(" ", "")) for _, b in pairs])
        else:
            problems.append(f"spectrum.kind: expected gaussian or tabulated, got {kind!r}")
    except ValueError as exc:
        problems.append(f"spectrum: {exc}")

    if problems:
        raise ValidationError(problems)
    return RunConfig(
        geometry=geometry,
        mode=mode,
        k=run.get("k"),
        k_min=run.get("k_min"),
        k_max=run.get("k_max"),
        N_k=run.get("N_k"),
        bc=bc,
        parity=parity,
        p=p,
        N=N,
        nx=run.get("nx", 121),
        ny=run.get("ny", 121),
        channel_length=run.get("channel_length"),
        times=times,
        spectrum=spectrum,
        out=vals.get("output", {}).get("dir", "out"),
        jobs=run.get("jobs", 1),
        seed=run.get("seed", 0),
        samples=run.get("samples", 200),
        overrides=list(overrides or []),
    )


def parse_config(text: str = "", overrides: list[str] | None = None) -> RunConfig:
    """Validated config from file text plus ``section.key=value`` overrides."""
    raw = read_raw(text) if text.strip() else {}
    notes = apply_overrides(raw, overrides or [])
    return build_config(raw, notes)


def load_config(path: str, overrides: list[str] | None = None) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, overrides)
