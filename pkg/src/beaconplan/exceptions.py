class BeaconPlanError(Exception):
    """Base class for errors raised by beaconplan."""


class SingularityError(BeaconPlanError, ValueError):
    """A field point coincides with a beacon, where path gain is unbounded."""

    def __init__(self, message, point_index=None, beacon_index=None):
        super().__init__(message)
        self.point_index = point_index
        self.beacon_index = beacon_index


class SolverFailure(BeaconPlanError, RuntimeError):
    """A numeric solver broke down; ``state`` holds the last finite iterate."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class MonotonicityError(BeaconPlanError, RuntimeError):
    """Worst-point power failed to decrease with radius during a coverage search."""


class ConfigError(BeaconPlanError, ValueError):
    """A run configuration is malformed, has unknown keys, or fails validation."""
