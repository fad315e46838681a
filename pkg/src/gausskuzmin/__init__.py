"""Numerical laboratory for the Gauss-Kuzmin problem on continued fractions."""

__version__ = "0.1.0"

from gausskuzmin.errors import DomainError, SeedShapeError

__all__ = ["DomainError", "SeedShapeError", "__version__"]
