"""Scenario documents: a topology reference plus a timestamped action script."""
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from chain.utils import DEFAULT_DIFFICULTY
from cli.errors import ScenarioError
from contracts.jc import DEFAULT_PENALTY_UNIT_SECONDS

SCENARIO_SCHEMA_VERSION = 1

ACTION_KINDS = ("deployJC", "registerMethod", "updateMethod", "deleteMethod", "policyAdd",
                "policyUpdate", "policyDelete", "request", "expect", "updateJC", "rebindJC")

# fields each kind cannot do without
REQUIRED_FIELDS = {
    "registerMethod": ("method", "subject", "object"),
    "updateMethod": ("method",),
    "deleteMethod": ("method",),
    "policyAdd": ("method", "resource", "action", "permission", "min_interval", "threshold"),
    "policyUpdate": ("method", "resource", "action"),
    "policyDelete": ("method", "resource", "action"),
    "request": ("method", "resource", "action"),
    "rebindJC": ("method",),
}

_MODEL_CONFIG = {"populate_by_name": True, "extra": "forbid"}


class JudgeParams(BaseModel):
    """Penalty parameters of a judge contract."""
    base: int = Field(default=2, ge=1)
    interval: int = Field(default=3, ge=1)
    penalty_unit_seconds: int = Field(default=DEFAULT_PENALTY_UNIT_SECONDS, ge=1,
                                      alias="penaltyUnitSeconds")

    model_config = _MODEL_CONFIG


class PolicyRow(BaseModel):
    """A policy seeded into an ACC."""
    resource: str
    action: str
    permission: Literal["allow", "deny"]
    min_interval: int = Field(ge=0, alias="minInterval")
    threshold: int = Field(ge=1)

    model_config = _MODEL_CONFIG


class Action(BaseModel):
    """
    One scripted step.

    ``expect`` actions check the outcome of the latest request and carry no
    time of their own; every other action names the instant it runs at.
    """
    # pylint: disable=R0902
    kind: Literal[ACTION_KINDS]
    at_time: int | None = Field(default=None, ge=0, alias="atTime")
    actor: str | None = None
    method: str | None = None
    subject: str | None = None
    object: str | None = None
    sc_name: str | None = Field(default=None, alias="scName")
    policies: list[PolicyRow] = Field(default_factory=list)
    resource: str | None = None
    action: str | None = None
    permission: Literal["allow", "deny"] | None = None
    min_interval: int | None = Field(default=None, ge=0, alias="minInterval")
    threshold: int | None = Field(default=None, ge=1)
    via: str | None = None
    judge: JudgeParams | None = None
    result: bool | None = None
    penalty: int | None = None
    time_of_unblock: int | None = Field(default=None, alias="timeOfUnblock")
    expect_error: str | None = Field(default=None, alias="expectError")

    model_config = _MODEL_CONFIG

    @model_validator(mode="after")
    def _check_fields(self):
        if self.kind == "expect":
            if self.result is None and self.penalty is None and self.time_of_unblock is None:
                raise ValueError("expect needs result, penalty or timeOfUnblock")
            return self
        if self.at_time is None or self.actor is None:
            raise ValueError(f"{self.kind} needs atTime and actor")
        missing = [name for name in REQUIRED_FIELDS.get(self.kind, ())
                   if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} is missing {', '.join(missing)}")
        return self

    def echo(self):
        """Compact, JSON-friendly description used in run logs."""
        return self.model_dump(by_alias=True, exclude_none=True,
                               exclude={"policies"} if not self.policies else None)

    def declared_min_intervals(self):
        """minInterval values this action puts into an ACC."""
        values = [row.min_interval for row in self.policies]
        if self.min_interval is not None:
            values.append(self.min_interval)
        return values


class Scenario(BaseModel):
    """Validated scenario document."""
    schema_version: int = Field(default=SCENARIO_SCHEMA_VERSION, alias="schemaVersion")
    topology: str
    difficulty: int = Field(default=DEFAULT_DIFFICULTY, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    strict_time: bool = Field(default=False, alias="strictTime")
    jc_params: JudgeParams = Field(default_factory=JudgeParams, alias="jcParams")
    actions: list[Action] = Field(default_factory=list)

    model_config = _MODEL_CONFIG

    @model_validator(mode="after")
    def _check_script(self):
        if self.schema_version != SCENARIO_SCHEMA_VERSION:
            raise ValueError(f"unsupported scenario schemaVersion {self.schema_version}")
        last = None
        for action in self.actions:
            if action.at_time is None:
                continue
            if last is not None and action.at_time <= last:
                raise ValueError(f"action times must strictly increase ({action.at_time} "
                                 f"after {last})")
            last = action.at_time
        # toLR starts at 0, so the first request must already be out of range
        intervals = [value for action in self.actions
                     for value in action.declared_min_intervals()]
        requests = [action.at_time for action in self.actions if action.kind == "request"]
        if requests and intervals and requests[0] <= max(intervals):
            raise ValueError(f"first request at {requests[0]} must come after the largest "
                             f"minInterval {max(intervals)}")
        return self


def load_scenario(path):
    """
    Read and validate a scenario document.

    Returns:
        tuple: (Scenario, topology path resolved against the scenario's folder)

    Raises:
        ScenarioError: unreadable or invalid document
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        scenario = Scenario.model_validate(raw if raw is not None else {})
    except (OSError, yaml.YAMLError, ValidationError) as exc:
        raise ScenarioError(f"bad scenario {path}: {exc}") from exc
    topology_path = Path(scenario.topology)
    if not topology_path.is_absolute():
        topology_path = path.parent / topology_path
    return scenario, topology_path
