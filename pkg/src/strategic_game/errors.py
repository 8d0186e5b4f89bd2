"""Exception hierarchy shared by the library and the CLI."""


class StrategicGameError(Exception):
    """Base class for all strategic_game errors"""


class ConfigError(StrategicGameError, ValueError):
    """Invalid config file, scenario record or command-line range"""


class ScenarioError(StrategicGameError, ValueError):
    """A scenario failed validation at an operation gate"""

    def __init__(self, failures: list[str]):
        self.failures = list(failures)
        super().__init__("Scenario failed validation: " + "; ".join(self.failures))


class NumericalError(StrategicGameError, RuntimeError):
    """A numerical routine did not converge"""
