class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SeedShapeError(ValueError):
    """A distribution seed does not satisfy F(0) = 0 and F(1) = 1."""
