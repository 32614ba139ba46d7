"""
The framework functions: method lifecycle, policy management, access control.

Every state change goes through transactions mined into blocks; lookups use
read-only calls against the acting peer's own replica.
"""
from dataclasses import dataclass

from loguru import logger

from contracts.acc import RETURN_RESULT, AccessControlContract
from contracts.jc import JudgeContract
from contracts.rc import JUDGE_METHOD_NAME, MethodEntry
from peers.errors import AgencyViolation, PendingTimeout, StepFailed, TransactionFailed
from peers.network import DEFAULT_MAX_WAIT_ROUNDS
from peers.topology import Role
from runtime.errors import ContractError


@dataclass(frozen=True)
class PolicySpec:
    """Fields of a policy to seed into an ACC."""
    resource: str
    action: str
    permission: str
    min_interval: int
    threshold: int

    def as_args(self):
        """Arguments of the policyAdd ABI."""
        return (self.resource, self.action, self.permission, self.min_interval, self.threshold)


@dataclass(frozen=True)
class AccessOutcome:
    """Result of one access request, as seen from a returnResult event."""
    # pylint: disable=R0902
    method_name: str
    resource: str
    action: str
    time: int
    result: bool
    penalty: int
    tx_id: bytes

    @classmethod
    def from_event(cls, method_name, event, tx):
        """Pair an event with the transaction that caused it."""
        resource, action, time = tx.args
        result, penalty = event.payload
        return cls(method_name, resource, action, time, result, penalty, tx.tx_id)

    def as_dict(self):
        """JSON-friendly form for run logs."""
        return {"method": self.method_name, "resource": self.resource, "action": self.action,
                "time": self.time, "result": self.result, "penalty": self.penalty,
                "txId": self.tx_id.hex()}


@dataclass
class PendingRequest:
    """A submitted accessControl transaction still waiting for its event."""
    method_name: str
    tx: object
    node: object
    subscription: object
    requester: object
    forwarder: object
    buffer: list


class AccessMonitor:
    """
    Watches every returnResult event of one method's ACC.

    Only events from blocks accepted after the monitor started are seen.
    When the observer is an IoT device, its gateway watches and forwards each
    outcome to the device's inbox.
    """

    def __init__(self, framework, observer, method_name):
        self.framework = framework
        self.observer = observer
        self.method_name = method_name
        self.node = framework.network.node_of(observer)
        address, _ = framework.lookup(observer, method_name)
        self.address = address
        self._subscription = self.node.subscribe_events(address, RETURN_RESULT)
        self.outcomes = []

    def poll(self):
        """New outcomes since the last poll, in chain order."""
        fresh = []
        for event in self._subscription.drain():
            tx = self.node.transaction(event.tx_id)
            outcome = AccessOutcome.from_event(self.method_name, event, tx)
            fresh.append(outcome)
            if self.observer.role is Role.IOT_DEVICE:
                self.observer.notify(outcome)
        self.outcomes.extend(fresh)
        return fresh

    def __iter__(self):
        """Yield outcomes delivered so far and not yet consumed."""
        yield from self.poll()

    def close(self):
        """Stop watching."""
        self._subscription.close()


class AccessControlFramework:
    """
    Orchestrates the framework's functions over a peer network.

    Multi-step functions submit one transaction per step and mine it before
    the next; the first failing step aborts the sequence with StepFailed.
    """

    def __init__(self, network, rc_address=None, max_wait_rounds=DEFAULT_MAX_WAIT_ROUNDS):
        self.network = network
        self.rc_address = rc_address
        self.max_wait_rounds = max_wait_rounds

    # ==================== PLUMBING ====================
    def _run_step(self, function, step, actor, account, target, abi_name, args=(), time=None):
        """Submit one transaction, mine it, and return its receipt."""
        # pylint: disable=R0913
        submitter = self.network.submitter_for(actor, account)
        tx = self.network.submit(submitter, account, target, abi_name, args, time)
        self.network.settle(self.max_wait_rounds)
        receipt = self.network.node_of(submitter).receipt(tx.tx_id)
        if receipt is None:
            raise StepFailed(function, step, PendingTimeout.code, "transaction never mined")
        if not receipt.ok:
            logger.error("{} step {} ({}) failed: {}", function, step, abi_name, receipt.status)
            raise StepFailed(function, step, receipt.status, receipt.error)
        logger.debug("{} step {} ({}) done", function, step, abi_name)
        return receipt

    def _lookup_step(self, function, step, actor, method_name):
        try:
            return self.lookup(actor, method_name)
        except ContractError as err:
            raise StepFailed(function, step, err.code, str(err)) from err

    def _entry_step(self, function, step, actor, method_name):
        try:
            return self.method_entry(actor, method_name)
        except ContractError as err:
            raise StepFailed(function, step, err.code, str(err)) from err

    def _read(self, peer, target, abi_name, *args):
        node = self.network.node_of(peer)
        return node.call_read_only(peer.account, target, abi_name, args)

    def lookup(self, peer, method_name):
        """
        Resolve a method through the RC with a read-only call.

        Returns:
            tuple: (scAddress, abiList)
        """
        return self._read(peer, self.rc_address, "getContract", method_name)

    def method_entry(self, peer, method_name):
        """Full lookup-table row of a method."""
        return MethodEntry.from_values(self._read(peer, self.rc_address, "getMethod",
                                                  method_name))

    def read_policy(self, peer, method_name, resource, action):
        """getPolicy on the method's ACC."""
        address, _ = self.lookup(peer, method_name)
        return self._read(peer, address, "getPolicy", resource, action)

    def _acting_account(self, actor, owner):
        """Account an actor signs with when managing something ``owner`` created."""
        return owner if self.network.can_act_for(actor, owner) else actor.account

    # ==================== BOOTSTRAP ====================
    def bootstrap(self, registrar, time=None):
        """Deploy the register contract; its address is public from then on."""
        receipt = self._run_step("bootstrap", 1, registrar, registrar.account, None, "RC",
                                 (), time)
        self.rc_address = receipt.return_values[0]
        logger.info("register contract deployed at {}", self.rc_address)
        return self.rc_address

    # ==================== JUDGING METHOD ====================
    def register_judge_method(self, creator, base, interval, penalty_unit_seconds, time=None):
        """Deploy a JC and register it under the judge method name."""
        # pylint: disable=R0913
        function = "registerJudgeMethod"
        account = creator.account
        receipt = self._run_step(function, 1, creator, account, None, JudgeContract.kind,
                                 (base, interval, penalty_unit_seconds), time)
        jc_address = receipt.return_values[0]
        self._run_step(function, 2, creator, account, self.rc_address, "methodRegister",
                       (JUDGE_METHOD_NAME, None, None, "Judge", account, jc_address,
                        JudgeContract.abi_names()), time)
        return jc_address

    def update_judge_method(self, creator, base, interval, penalty_unit_seconds, time=None):
        """Replace the registered JC with a freshly deployed one."""
        # pylint: disable=R0913
        function = "updateJudgeMethod"
        entry = self._entry_step(function, 1, creator, JUDGE_METHOD_NAME)
        account = self._acting_account(creator, entry.creator)
        receipt = self._run_step(function, 1, creator, account, None, JudgeContract.kind,
                                 (base, interval, penalty_unit_seconds), time)
        jc_address = receipt.return_values[0]
        self._run_step(function, 2, creator, account, self.rc_address, "methodUpdate",
                       (JUDGE_METHOD_NAME, "Judge", jc_address, JudgeContract.abi_names()),
                       time)
        self._run_step(function, 3, creator, account, entry.sc_address, "deleteJC", (), time)
        return jc_address

    def rebind_judge(self, creator, method_name, time=None):
        """Point a method's ACC at the currently registered JC."""
        function = "rebindJudge"
        entry = self._entry_step(function, 1, creator, method_name)
        jc_address, _ = self._lookup_step(function, 1, creator, JUDGE_METHOD_NAME)
        account = self._acting_account(creator, entry.creator)
        self._run_step(function, 1, creator, account, entry.sc_address, "setJC",
                       (jc_address,), time)

    # ==================== ACCESS CONTROL METHODS ====================
    def _deploy_acc(self, function, first_step, creator, subject, obj, policies, time):
        """Deploy an ACC, bind the judge and seed policies; returns (address, next_step)."""
        # pylint: disable=R0913
        receipt = self._run_step(function, first_step, creator, obj, None,
                                 AccessControlContract.kind, (subject, obj), time)
        address = receipt.return_values[0]
        jc_address, _ = self._lookup_step(function, first_step + 1, creator, JUDGE_METHOD_NAME)
        self._run_step(function, first_step + 1, creator, obj, address, "setJC",
                       (jc_address,), time)
        step = first_step + 2
        for policy in policies:
            self._run_step(function, step, creator, obj, address, "policyAdd",
                           policy.as_args(), time)
            step += 1
        return address, step

    def register_access_control_method(self, creator, subject, obj, method_name,
                                       policies=(), sc_name=None, time=None):
        """
        Deploy an ACC for (subject, object), bind the JC and register the method.

        Args:
            creator: The object peer or its gateway
            subject: Subject account
            obj: Object account
            method_name: Name both parties use for the method
            policies: PolicySpec rows added before the method becomes visible

        Raises:
            AgencyViolation: creator can act neither as nor for the object
            StepFailed: a transaction of the sequence failed
        """
        # pylint: disable=R0913
        function = "registerAccessControlMethod"
        if not self.network.can_act_for(creator, obj):
            raise AgencyViolation(f"peer {creator.id!r} is neither the object nor its agent")
        address, step = self._deploy_acc(function, 1, creator, subject, obj, policies, time)
        self._run_step(function, step, creator, obj, self.rc_address, "methodRegister",
                       (method_name, subject, obj, sc_name or f"ACC {method_name}", obj,
                        address, AccessControlContract.abi_names()), time)
        logger.info("method {!r} registered at {}", method_name, address)
        return method_name

    def update_access_control_method(self, creator, method_name, policies=(), sc_name=None,
                                     time=None):
        """
        Swap a method's ACC for a fresh one.

        Order: deploy the new ACC (and prepare it), update the RC, destroy the
        old ACC. Policies do not carry over.
        """
        # pylint: disable=R0913
        function = "updateAccessControlMethod"
        entry = self._entry_step(function, 1, creator, method_name)
        if not self.network.can_act_for(creator, entry.creator):
            raise AgencyViolation(f"peer {creator.id!r} did not create {method_name!r}")
        address, step = self._deploy_acc(function, 1, creator, entry.subject, entry.object,
                                         policies, time)
        self._run_step(function, step, creator, entry.creator, self.rc_address, "methodUpdate",
                       (method_name, sc_name or entry.sc_name, address,
                        AccessControlContract.abi_names()), time)
        self._run_step(function, step + 1, creator, entry.creator, entry.sc_address,
                       "deleteACC", (), time)
        logger.info("method {!r} moved from {} to {}", method_name, entry.sc_address, address)
        return address

    def delete_access_control_method(self, creator, method_name, time=None):
        """Remove a method from the RC, then destroy its ACC."""
        function = "deleteAccessControlMethod"
        entry = self._entry_step(function, 1, creator, method_name)
        account = self._acting_account(creator, entry.creator)
        self._run_step(function, 1, creator, account, self.rc_address, "methodDelete",
                       (method_name,), time)
        self._run_step(function, 2, creator, account, entry.sc_address, "deleteACC", (), time)
        logger.info("method {!r} deleted", method_name)

    # ==================== POLICIES ====================
    def _policy_step(self, function, creator, method_name, abi_name, args, time):
        # pylint: disable=R0913
        entry = self._entry_step(function, 1, creator, method_name)
        account = self._acting_account(creator, entry.creator)
        self._run_step(function, 1, creator, account, entry.sc_address, abi_name, args, time)

    def add_policy(self, creator, method_name, policy, time=None):
        """policyAdd on the method's ACC."""
        self._policy_step("addPolicy", creator, method_name, "policyAdd", policy.as_args(),
                          time)

    def update_policy(self, creator, method_name, resource, action, permission=None,
                      min_interval=None, threshold=None, time=None):
        """policyUpdate on the method's ACC; None fields are left alone."""
        # pylint: disable=R0913
        self._policy_step("updatePolicy", creator, method_name, "policyUpdate",
                          (resource, action, permission, min_interval, threshold), time)

    def delete_policy(self, creator, method_name, resource, action, time=None):
        """policyDelete on the method's ACC."""
        # pylint: disable=R0913
        self._policy_step("deletePolicy", creator, method_name, "policyDelete",
                          (resource, action), time)

    # ==================== ACCESS REQUESTS ====================
    def submit_request(self, subject, method_name, resource, action, time, via=None):
        """
        Send an accessControl transaction without waiting for the result.

        Args:
            subject: Requesting peer
            via: Object peer forwarding the request, or None for a direct call

        Returns:
            PendingRequest: hand it to await_outcome
        """
        # pylint: disable=R0913
        address, _ = self.lookup(subject, method_name)
        sender_peer = via if via is not None else subject
        account = sender_peer.account
        submitter = self.network.submitter_for(sender_peer, account)
        node = self.network.node_of(sender_peer)
        # subscribe before submitting
        subscription = node.subscribe_events(address, RETURN_RESULT)
        tx = self.network.submit(submitter, account, address, "accessControl",
                                 (resource, action, time), time)
        return PendingRequest(method_name, tx, node, subscription, subject, via, [])

    def await_outcome(self, pending):
        """
        Mine until the request's returnResult event shows up.

        Events are matched by transaction id, so concurrent requests never
        swap outcomes.

        Raises:
            TransactionFailed: the transaction was mined with an error
            PendingTimeout: no event within max_wait_rounds
        """
        try:
            for waited in range(self.max_wait_rounds + 1):
                pending.buffer.extend(pending.subscription.drain())
                for event in pending.buffer:
                    if event.tx_id == pending.tx.tx_id:
                        outcome = AccessOutcome.from_event(pending.method_name, event,
                                                           pending.tx)
                        for peer in (pending.requester, pending.forwarder):
                            if peer is not None and peer.role is Role.IOT_DEVICE:
                                peer.notify(outcome)
                        return outcome
                receipt = pending.node.receipt(pending.tx.tx_id)
                if receipt is not None and not receipt.ok:
                    raise TransactionFailed(receipt)
                if waited < self.max_wait_rounds:
                    self.network.run_round()
            raise PendingTimeout(f"no returnResult for {pending.tx.tx_id.hex()[:12]} after "
                                 f"{self.max_wait_rounds} rounds")
        finally:
            pending.subscription.close()

    def request_access(self, subject, method_name, resource, action, time, via=None):
        """
        Run one access request end to end and return its outcome.

        With ``via`` set, the object forwards the subject's request and the
        result back; the decision is the same as for a direct request.
        """
        # pylint: disable=R0913
        pending = self.submit_request(subject, method_name, resource, action, time, via)
        return self.await_outcome(pending)

    def monitor_access(self, observer, method_name):
        """Start watching a method's returnResult events."""
        return AccessMonitor(self, observer, method_name)

    # ==================== HOUSEKEEPING ====================
    def dangling_methods(self, peer, method_names):
        """Registered methods whose contract is no longer alive."""
        node = self.network.node_of(peer)
        dangling = []
        for name in method_names:
            try:
                entry = self.method_entry(peer, name)
            except ContractError:
                continue
            if not node.world.is_alive(entry.sc_address):
                dangling.append(name)
        return dangling
