"""Exception types raised across the toolkit."""


class OtkitError(Exception):
    """Base class for all toolkit errors."""


class AllZeroError(OtkitError):
    """A density is identically zero and no positive floor was requested."""


class DimensionError(OtkitError):
    """An operation received data of an unsupported ambient dimension."""


class DimensionMismatchError(OtkitError):
    """Two inputs live in different ambient dimensions."""


class RangeError(OtkitError):
    """A scalar argument lies outside its admissible range."""


class InvalidOrderError(OtkitError):
    """The cost exponent p is below 1."""


class ZeroDensityError(OtkitError):
    """A grid density has a zero cell where strict positivity is required."""


class InfeasibleError(OtkitError):
    """Marginals do not balance; the transportation problem has no solution."""


class RefinementInfeasibleError(OtkitError):
    """The support-restricted problem at a refinement level is infeasible."""


class UnequalMassError(OtkitError):
    """The auction solver needs equally many atoms with identical weights."""


class NoConvergenceError(OtkitError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    The partially converged state is attached as ``state`` for diagnosis.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NonMonotoneMapError(OtkitError):
    """A recovered 1-D transport map is not nondecreasing."""


class ReferenceMismatchError(OtkitError):
    """Two transform-domain signals were built against different references."""


class PlanMismatchError(OtkitError):
    """A transport plan does not couple the supplied measures."""


class OutOfBoundsError(OtkitError):
    """Atoms fall outside the rendering grid.

    The offending atom indices are attached as ``clipped``.
    """

    def __init__(self, message, clipped=()):
        super().__init__(message)
        self.clipped = list(clipped)


class FormatError(OtkitError):
    """A file could not be parsed; carries a location diagnostic."""

    def __init__(self, message, path=None, line=None, byte=None):
        parts = [message]
        if path is not None:
            parts.append(f"path={path}")
        if line is not None:
            parts.append(f"line={line}")
        if byte is not None:
            parts.append(f"byte={byte}")
        super().__init__(": ".join(str(p) for p in parts))
        self.path = path
        self.line = line
        self.byte = byte


class EmptyCorpusError(OtkitError):
    """Retrieval was asked to rank an empty corpus."""
