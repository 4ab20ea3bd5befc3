"""Number formatting shared by every text writer."""


def num(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")
