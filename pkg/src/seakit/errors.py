"""Exception hierarchy shared by all seakit modules."""


class SeakitError(Exception):
    """Base class for every error raised by seakit."""


class DegenerateInput(SeakitError, ValueError):
    pass


class PoleOnAxis(SeakitError, ValueError):
    """A frequency sample landed on an imaginary-axis pole."""

    def __init__(self, omega: float):
        super().__init__(f"denominator vanishes at omega={omega!r} rad/s")
        self.omega = omega


class ConfigError(SeakitError, ValueError):
    """Config problem located at a dotted ``path`` into the document."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class InvariantError(ConfigError):
    pass


class MissingParameter(ConfigError):
    pass


class ExtraParameter(ConfigError):
    pass


class NegativeParameter(ConfigError):
    pass


class NotPassiveAtLow(SeakitError):
    pass


class SimulationError(SeakitError, RuntimeError):
    pass


class MasslessLoad(SimulationError):
    pass


class Diverged(SimulationError):
    pass


class NonFiniteState(SimulationError):
    pass


class DidNotSettle(SimulationError):
    pass


class EmptyTrajectory(SimulationError, ValueError):
    pass


class NoFeasiblePoint(SeakitError):
    pass
