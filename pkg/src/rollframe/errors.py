"""Exception hierarchy shared by every rollframe module."""


class RollframeError(Exception):
    """Base class. ``kind`` is the machine-readable tag used by the CLI."""

    kind = "error"


class NumericalError(RollframeError):
    kind = "numerical"


class DomainError(NumericalError):
    kind = "domain"


class RankError(NumericalError):
    kind = "rank"


class SingularMetricError(NumericalError):
    kind = "singular_metric"


class DegenerateCurveError(NumericalError):
    kind = "degenerate_curve"


class IntervalError(NumericalError):
    kind = "interval"


class GridError(NumericalError):
    kind = "grid"


class SingularSolutionError(NumericalError):
    kind = "singular_solution"


class DegenerateTraceError(NumericalError):
    kind = "degenerate_trace"


class NotClosedError(NumericalError):
    kind = "not_closed"


class DriftError(NumericalError):
    kind = "drift"


class UnknownManifoldError(RollframeError):
    kind = "unknown_manifold"


class ParamError(RollframeError):
    kind = "param"
