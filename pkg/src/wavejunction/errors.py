"""Exception hierarchy shared across the package."""

from __future__ import annotations


class JunctionError(Exception):
    """Base class for every error raised by wavejunction."""


class GeometryError(JunctionError, ValueError):
    pass


class NonPositiveDimension(GeometryError):
    pass


class ChannelWiderThanJunction(GeometryError):
    pass


class NumericalError(JunctionError, ArithmeticError):
    """Failures that map to exit code 2 in the CLI."""


class SingularPrefactor(NumericalError):
    def __init__(self, name: str, n: int, value: complex):
        self.name = name
        self.n = n
        self.value = value
        super().__init__(
            f"kernel {name}: normalising denominator vanishes for column n={n} "
            f"(|value|={abs(value):.3e}); k sits on an internal resonance"
        )


class SingularDiagonalFactor(NumericalError):
    def __init__(self, which: str, m: int):
        self.which = which
        self.m = m
        super().__init__(f"{which} derivative factor is singular at mode m={m}")


class IllConditioned(NumericalError):
    def __init__(self, cond: float, limit: float):
        self.cond = cond
        super().__init__(f"condition estimate {cond:.3e} exceeds {limit:.1e}")


class DegenerateCutOn(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class NotApplicable(JunctionError, ValueError):
    pass


class GeometryRestriction(JunctionError, ValueError):
    pass


class OutOfDomain(JunctionError, ValueError):
    pass


class DimensionMismatch(JunctionError, ValueError):
    pass


class ConfigError(JunctionError, ValueError):
    """Configuration could not be parsed or validated (exit code 1)."""


class FrequencyFailure(NumericalError):
    """A solve at one quadrature frequency failed; carries the grid index."""

    def __init__(self, j: int, k: float, cause: Exception):
        self.j = j
        self.k = k
        self.cause = cause
        super().__init__(f"frequency k[{j}]={k!r}: {cause}")
