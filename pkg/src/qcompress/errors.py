class ValidationError(ValueError):
    """Input violates a documented invariant."""


class OracleMismatch(RuntimeError):
    """A closed-form result disagrees with its brute-force oracle."""
