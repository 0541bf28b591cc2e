"""Exception types shared across the package."""


class EmverifyError(Exception):
    """Base class for all package errors."""


class SingularMetric(EmverifyError):
    """Metric is not invertible (or not positive definite) at the point."""


class DomainBoundary(EmverifyError):
    """A finite-difference stencil or evaluation left the chart rectangle."""


class NotJInvariant(EmverifyError):
    """A tensor expected to be J-invariant fails the invariance tolerance."""


class NonPositivePotential(EmverifyError):
    """Conformal potential must be strictly positive at the point."""


class ZeroSelfDualPart(EmverifyError):
    """Self-dual part vanishes; potential recovery is undefined."""


class InvalidParams(EmverifyError):
    """Family parameters violate 0 < a < b, or a config value is out of range."""
