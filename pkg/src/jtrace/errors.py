"""Exception hierarchy shared by all modules."""


class JTraceError(Exception):
    """Base class for library errors."""


class InputError(JTraceError, ValueError):
    """Malformed or inconsistent input (bad indices, shapes, ranks)."""


class DomainError(JTraceError, ValueError):
    """A point lies outside the region where a series converges or is defined."""


class LatticeError(InputError):
    """Gram matrix is not symmetric, not even, or not positive definite."""


class ConditionHError(InputError):
    """A pairing <alpha, h_j> that must be integral is not."""


class VerificationError(JTraceError):
    """A numerical check could not be carried out (ill-conditioned, ambiguous)."""
