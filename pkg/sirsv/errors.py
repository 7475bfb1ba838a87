"""
Error types raised by the simulation library
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for every error raised by sirsv"""


class ConfigurationError(SimulationError, ValueError):
    """Settings that make a run undefined (e.g. c_v = 0 for the control solver)"""


class ControlBoundsError(SimulationError, ValueError):
    """Control value outside [0, u_max]"""


class GridError(SimulationError, ValueError):
    """Time grid that is not uniform and exact"""


class DimensionError(SimulationError, ValueError):
    """Sequence length does not match the time grid"""


class HorizonRangeError(SimulationError, ValueError):
    """Integration bound outside the trajectory"""


class IntegrationInstabilityError(SimulationError, ArithmeticError):
    """
    Integration produced non-finite values or a compartment below the
    allowed negative slack.
    """

    def __init__(self, message: str, node: Optional[int] = None, time: Optional[float] = None):
        self.node = node
        self.time = time
        if node is not None:
            message = f"{message} (node {node}, t={time})"
        super().__init__(message)
