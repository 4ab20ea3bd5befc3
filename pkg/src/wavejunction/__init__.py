"""Time-harmonic and transient scattering of scalar waves at a four-channel junction."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateCutOn,
    GeometryError,
    GeometryRestriction,
    JunctionError,
    NumericalError,
)
from .geometry import Geometry, Parity, propagating_counts, validate_geometry  # noqa: E402
from .quadrant import BCPair, QuadrantProblem, QuadrantSolution, eval_quadrant, solve_quadrant  # noqa: E402
from .full_field import FullSolution, channel_amplitudes, reconstruct, sample_grid, solve_full  # noqa: E402
from .diagnostics import diagnose, energy_defect_nn, flux_defect, matching_residuals  # noqa: E402
from .smatrix import SMatrix, build_smatrix, flux_normalize  # noqa: E402
from .time_domain import SpectrumSpec, build_quadrature, precompute_field_matrix, synthesize  # noqa: E402
from .config import RunConfig, load_config, parse_config  # noqa: E402

__all__ = [
    "BCPair", "ConfigError", "DegenerateCutOn", "FullSolution", "Geometry", "GeometryError",
    "GeometryRestriction", "JunctionError", "NumericalError", "Parity", "QuadrantProblem",
    "QuadrantSolution", "RunConfig", "SMatrix", "SpectrumSpec", "build_quadrature", "build_smatrix",
    "channel_amplitudes", "diagnose", "energy_defect_nn", "eval_quadrant", "flux_defect",
    "flux_normalize", "load_config", "matching_residuals", "parse_config", "precompute_field_matrix",
    "propagating_counts", "reconstruct", "sample_grid", "solve_full", "solve_quadrant", "synthesize",
    "validate_geometry",
]
