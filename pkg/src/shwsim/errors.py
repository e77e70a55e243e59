"""Exception types shared across the simulator."""


class ShwError(Exception):
    """Base class for all simulator errors."""


class DegenerateString(ShwError):
    """An attachment point coincides with its motor (distance <= 1e-6 m)."""


class NumericalFailure(ShwError):
    """A solve failed for numerical reasons (e.g. ill-conditioned structure matrix)."""

    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


class NoConvergence(ShwError):
    """Iterative pose estimation hit its iteration cap or stalled at a bad fit."""

    def __init__(self, msg, residual_rms=None, iterations=None):
        super().__init__(msg)
        self.residual_rms = residual_rms
        self.iterations = iterations


class RankDeficient(ShwError):
    """The length Jacobian is numerically rank deficient: the pose is ambiguous."""


class ParseError(ShwError):
    """A mesh, seam, script, or config file is malformed."""


class EmptyMesh(ShwError):
    """A mesh file contains no usable triangles."""


class DegenerateLight(ShwError):
    """Shadow light direction is parallel to the projection plane."""


class ScriptError(ShwError):
    """A scenario script is malformed; carries the offending line number."""

    def __init__(self, msg, line=None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


class BindError(ShwError):
    """A service endpoint could not bind its port."""


class ProtocolError(ShwError):
    """A datagram or bridge message failed validation."""
