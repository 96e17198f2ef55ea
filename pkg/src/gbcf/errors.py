"""Exception types shared by the recursion and simulation modules."""


class GbcfError(Exception):
    """Base class for numerical failures in scheme computations."""


class SingularityError(GbcfError):
    """A denominator vanished or went non-positive (an output covariance
    pi_i^2 - lambda_i^2, or the correlation-update normalizer)."""


class DomainError(GbcfError):
    """A square-root operand or recursion state left the region where the
    update rules are defined."""


class ConvergenceError(GbcfError):
    """A fixed-point search failed: no bracketing sign change on the scan
    grid, or the iteration hit its step limit without settling."""
