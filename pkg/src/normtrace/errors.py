"""Error types shared across the package."""


class NotPrime(ValueError):
    """Raised when a tower characteristic is not a prime number."""


class TooLarge(ValueError):
    """Raised when an enumeration would exceed the configured search budget."""


class WrongLevel(ValueError):
    """Raised when an element sits at the wrong level of the field tower."""


class DimensionMismatch(ValueError):
    """Raised when a coefficient vector does not match a code's basis."""
