"""Exception types shared across the package."""


class SwarmSafeError(Exception):
    """Base class for all swarmsafe errors."""


class DimensionError(SwarmSafeError, ValueError):
    """An array length or cell index does not match the grid it is used with."""


class ParameterError(SwarmSafeError, ValueError):
    """A numeric parameter violates its documented range."""


class ScenarioError(SwarmSafeError, ValueError):
    """A scenario file failed to parse or validate; the message names the field."""


class InfeasibleProblem(SwarmSafeError, RuntimeError):
    """The feasible set of a QP is empty.

    Carries the most violated constraint so callers can tell a genuinely
    over-constrained problem from a controller-assembly bug.
    """

    def __init__(self, message, constraint=None, violation=None):
        super().__init__(message)
        self.constraint = constraint
        self.violation = violation


class ControllerError(SwarmSafeError, RuntimeError):
    """A controller failed for a specific robot at a specific step."""

    def __init__(self, message, robot_id=None, step=None):
        super().__init__(message)
        self.robot_id = robot_id
        self.step = step
