"""Exceptions raised while loading and running scenarios."""


class CliError(Exception):
    """Base class for scenario runner failures."""
    code = "cli-error"


class ScenarioError(CliError):
    """Scenario document does not parse or breaks a schema rule."""
    code = "schema-error"


class ExpectationFailed(CliError):
    """An expect action did not match the observed outcome."""
    code = "expectation-failed"
