"""Drives a scenario through the whole stack and persists what happened."""
import json
from dataclasses import dataclass, field
from pathlib import Path

from loguru import logger

from chain.errors import BlockRejected, ChainError
from chain.node import NodeState
from chain.snapshot import load_snapshot, save_snapshot
from cli.errors import ExpectationFailed
from cli.scenario import load_scenario
from peers.errors import FrameworkError, PendingTimeout
from peers.framework import AccessControlFramework, PolicySpec
from peers.network import Network
from peers.topology import load_topology
from runtime.errors import ContractError
from runtime.types import Address

RUNLOG_NAME = "runlog.jsonl"
SNAPSHOT_NAME = "snapshot.json"


def plain(value):
    """Typed ABI value as plain JSON (addresses as 0x-hex)."""
    if isinstance(value, Address):
        return str(value)
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    return value


@dataclass
class RunReport:
    """Everything a scenario run produced."""
    records: list = field(default_factory=list)
    failure: Exception | None = None
    network: Network | None = None
    runlog_path: Path | None = None
    snapshot_path: Path | None = None

    @property
    def ok(self):
        """True when every action ran and every expectation held."""
        return self.failure is None

    def lines(self):
        """Run log as JSON Lines text."""
        return "".join(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"
                       for record in self.records)


class ScenarioRunner:
    """
    Executes one scenario action by action.

    Every transaction an action causes becomes one run-log record, in the
    order the transactions were submitted.
    """

    def __init__(self, scenario, topology_spec, seed=None, difficulty=None, strict_time=None):
        # pylint: disable=R0913
        self.scenario = scenario
        self.network = Network(
            topology_spec,
            seed=scenario.seed if seed is None else seed,
            difficulty=scenario.difficulty if difficulty is None else difficulty,
            strict_time=scenario.strict_time if strict_time is None else strict_time,
        )
        self.framework = AccessControlFramework(self.network)
        self.registrar = self.network.peer(topology_spec.registrar_id)
        self.last_outcome = None
        self.methods = []
        self.records = []

    @property
    def node(self):
        """Replica the runner reads receipts from."""
        return self.network.reference_node

    # ==================== RECORDS ====================
    def _record(self, index, action, tx, outcome=None, error=None):
        # pylint: disable=R0913
        record = {"index": index, "action": action.echo(), "height": None, "txId": None,
                  "status": None, "events": [], "outcome": outcome, "error": error}
        if tx is not None:
            receipt = self.node.receipt(tx.tx_id)
            record["txId"] = tx.tx_id.hex()
            record["height"] = self.node.height_of(tx.tx_id)
            if receipt is not None:
                record["status"] = receipt.status
                record["events"] = [{"emitter": str(event.emitter), "name": event.name,
                                     "payload": plain(event.payload)}
                                    for event in receipt.events]
        self.records.append(record)

    # ==================== ACTIONS ====================
    def _peer(self, peer_id):
        return self.network.peer(peer_id)

    def _dispatch(self, action):
        """Run one action; returns the access outcome for requests."""
        # pylint: disable=R0911
        fw = self.framework
        actor = self._peer(action.actor)
        time = action.at_time
        jc_params = action.judge or self.scenario.jc_params
        policies = [PolicySpec(row.resource, row.action, row.permission, row.min_interval,
                               row.threshold) for row in action.policies]
        kind = action.kind
        if kind == "deployJC":
            fw.register_judge_method(actor, jc_params.base, jc_params.interval,
                                     jc_params.penalty_unit_seconds, time)
        elif kind == "updateJC":
            fw.update_judge_method(actor, jc_params.base, jc_params.interval,
                                   jc_params.penalty_unit_seconds, time)
        elif kind == "rebindJC":
            fw.rebind_judge(actor, action.method, time)
        elif kind == "registerMethod":
            fw.register_access_control_method(actor, self._peer(action.subject).account,
                                              self._peer(action.object).account,
                                              action.method, policies, action.sc_name, time)
            self.methods.append(action.method)
        elif kind == "updateMethod":
            fw.update_access_control_method(actor, action.method, policies, action.sc_name,
                                            time)
        elif kind == "deleteMethod":
            fw.delete_access_control_method(actor, action.method, time)
        elif kind == "policyAdd":
            fw.add_policy(actor, action.method,
                          PolicySpec(action.resource, action.action, action.permission,
                                     action.min_interval, action.threshold), time)
        elif kind == "policyUpdate":
            fw.update_policy(actor, action.method, action.resource, action.action,
                             action.permission, action.min_interval, action.threshold, time)
        elif kind == "policyDelete":
            fw.delete_policy(actor, action.method, action.resource, action.action, time)
        elif kind == "request":
            via = self._peer(action.via) if action.via is not None else None
            return fw.request_access(actor, action.method, action.resource, action.action,
                                     time, via)
        return None

    def _expect(self, action):
        outcome = self.last_outcome
        if outcome is None:
            raise ExpectationFailed("expect before any request")
        if action.result is not None and action.result != outcome.result:
            raise ExpectationFailed(f"expected result {action.result}, got {outcome.result} "
                                    f"at {outcome.time}")
        if action.penalty is not None and action.penalty != outcome.penalty:
            raise ExpectationFailed(f"expected penalty {action.penalty}, got "
                                    f"{outcome.penalty} at {outcome.time}")
        if action.time_of_unblock is not None:
            address, _ = self.framework.lookup(self.registrar, outcome.method_name)
            unblock = self.node.call_read_only(self.registrar.account, address,
                                               "getTimeOfUnblock", (outcome.resource,))[0]
            if unblock != action.time_of_unblock:
                raise ExpectationFailed(f"expected timeOfUnblock {action.time_of_unblock}, "
                                        f"got {unblock}")

    def run_action(self, index, action):
        """Execute one action and log the transactions it caused."""
        if action.kind == "expect":
            self._expect(action)
            self._record(index, action, None, outcome=self.last_outcome.as_dict())
            return
        first = len(self.network.submissions)
        outcome = None
        error = None
        try:
            outcome = self._dispatch(action)
        except (FrameworkError, ContractError) as exc:
            error = exc
        submitted = [tx for _, tx in self.network.submissions[first:]]
        if error is not None and action.expect_error != error.code:
            for tx in submitted:
                self._record(index, action, tx, error=error.code)
            raise error
        if error is None and action.expect_error is not None:
            raise ExpectationFailed(f"action {index} ({action.kind}) succeeded, expected "
                                    f"{action.expect_error}")
        if outcome is not None:
            self.last_outcome = outcome
        outcome_dict = outcome.as_dict() if outcome is not None else None
        error_code = error.code if error is not None else None
        if not submitted:
            self._record(index, action, None, outcome_dict, error_code)
        for tx in submitted:
            self._record(index, action, tx, outcome_dict, error_code)

    def run(self):
        """
        Bootstrap the register contract, then run every action in order.

        Returns:
            list: Run-log records
        """
        self.framework.bootstrap(self.registrar, self.network.clock)
        for index, action in enumerate(self.scenario.actions):
            self.run_action(index, action)
        dangling = self.framework.dangling_methods(self.registrar, self.methods)
        for name in dangling:
            logger.warning("method {!r} still points at a destroyed contract", name)
        return self.records


def run_scenario(scenario_path, out_dir=None, seed=None, difficulty=None, strict_time=None):
    """
    Load a scenario, run it, and write the run log and final snapshot.

    Outputs are written even when the run stops early, so a failed run can
    still be inspected.

    Args:
        scenario_path: Scenario document
        out_dir: Folder for runlog.jsonl and snapshot.json (nothing is
            written when None)
        seed, difficulty, strict_time: Overrides of the document's values

    Returns:
        RunReport: records and the failure that stopped the run, if any

    Raises:
        ScenarioError: the scenario does not validate
        TopologyError: the referenced topology does not validate
    """
    # pylint: disable=R0913
    scenario, topology_path = load_scenario(scenario_path)
    topology_spec = load_topology(topology_path)
    runner = ScenarioRunner(scenario, topology_spec, seed, difficulty, strict_time)
    report = RunReport(network=runner.network)
    try:
        runner.run()
    except (ExpectationFailed, FrameworkError, ContractError, ChainError) as exc:
        logger.error("scenario {} stopped: {}", scenario_path, exc)
        report.failure = exc
    report.records = runner.records
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.runlog_path = out_dir / RUNLOG_NAME
        report.runlog_path.write_text(report.lines(), encoding="utf-8")
        report.snapshot_path = save_snapshot(runner.node, out_dir / SNAPSHOT_NAME)
    return report


def exit_code(failure):
    """Process exit status for a run's failure (0 when there is none)."""
    if failure is None:
        return 0
    if isinstance(failure, PendingTimeout) or getattr(failure, "code", None) == "pending-timeout":
        return 3
    return 1


def verify_snapshot(path):
    """
    Replay a snapshot on a fresh node.

    Returns:
        bool: True iff every block validates and the final state root matches

    Raises:
        SnapshotError: the snapshot cannot be parsed
    """
    genesis, blocks, state_root = load_snapshot(path)
    node = NodeState(genesis, node_id="verifier")
    for block in blocks:
        try:
            node.accept_block(block)
        except BlockRejected as exc:
            logger.warning("snapshot block {} rejected: {}", block.height, exc.check)
            return False
    if node.state_root != state_root:
        logger.warning("snapshot state root mismatch at height {}", node.height)
        return False
    return True
