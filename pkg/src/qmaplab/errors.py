"""Exception hierarchy shared by all qmaplab modules."""


class GeometryError(Exception):
    """Base class for all errors raised by qmaplab."""


class InvalidPointError(GeometryError):
    """A field was evaluated outside its domain (e.g. log of a non-positive
    argument). Carries the tag of the offending sub-expression."""

    def __init__(self, message, tag=None):
        super().__init__(message if tag is None else f"{message} [{tag}]")
        self.tag = tag


class FrameMismatchError(GeometryError):
    """Tensor operands were sampled in different coordinate frames."""


class DegenerateMetricError(GeometryError):
    """A metric (or frame Jacobian) is numerically singular."""

    def __init__(self, message, condition_number=None):
        if condition_number is not None:
            message = f"{message} (condition number {condition_number:.3e})"
        super().__init__(message)
        self.condition_number = condition_number


class DomainError(GeometryError):
    """A point lies outside a validity domain (PSR cone, one-loop domain,
    or the image of a group action left the chart)."""


class ConsistencyError(GeometryError):
    """Two independent computations of the same object disagree beyond
    tolerance (hard failure: falsifies an assembly assumption)."""


class ModelFormatError(GeometryError):
    """A cubic-model file is malformed."""
