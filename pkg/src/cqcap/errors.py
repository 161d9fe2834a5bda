"""Exception and warning types shared across the package."""


class TruncationError(ValueError):
    """A Fock-space cutoff discards more probability than allowed."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is valid."""


class DimensionMismatch(ValueError):
    """Operators or states of different dimensions were combined."""


class NoRoot(ArithmeticError):
    """A bracketing root finder was given endpoints of equal sign."""


class SamplingTimeout(RuntimeError):
    """Rejection sampling accepted too few proposals."""


class DegenerateLevelSet(UserWarning):
    """Entropy is constant over the alphabet, so entropy slicing does nothing."""
