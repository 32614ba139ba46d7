"""Unit tests for topology, the peer network and the framework functions."""
import sys
import os
import pytest

# add the parent directory to path so imports work from tests/ folder
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from contracts.acc import AccessControlContract
from contracts.rc import JUDGE_METHOD_NAME
from peers.errors import (AgencyViolation, PendingTimeout, StepFailed, TopologyError,
                          TransactionFailed)
from peers.framework import AccessControlFramework, AccessOutcome, PolicySpec
from peers.network import Network
from peers.topology import Peer, Role, TopologySpec, load_topology
from runtime.errors import ContractError
from tests.builders import SCENARIO_DIR

READ_POLICY = PolicySpec("temperature", "read", "allow", 100, 2)

PEERS = [
    {"id": "server", "role": "server"},
    {"id": "laptop", "role": "userDevice"},
    {"id": "gateway", "role": "gateway"},
    {"id": "sensor", "role": "iotDevice", "agent": "gateway"},
    {"id": "phone", "role": "userDevice"},
]


def make_spec(**overrides):
    """Topology document with a server, a laptop, a phone and a gated sensor."""
    document = {"schemaVersion": 1, "peers": PEERS, "miners": ["server", "laptop"],
                "registrar": "server"}
    document.update(overrides)
    return TopologySpec.model_validate(document)


def make_framework(seed=1):
    """Bootstrapped framework with a registered judge; returns (framework, peers)."""
    network = Network(make_spec(), seed=seed, difficulty=4)
    framework = AccessControlFramework(network)
    peers = {peer_id: network.peer(peer_id) for peer_id in
             ("server", "laptop", "gateway", "sensor", "phone")}
    framework.bootstrap(peers["server"])
    framework.register_judge_method(peers["server"], 2, 3, 60, time=1)
    return framework, peers


def register_sensor_method(framework, peers, name="laptop-sensor"):
    """The gateway registers a laptop-to-sensor method with the read policy."""
    framework.register_access_control_method(peers["gateway"], peers["laptop"].account,
                                             peers["sensor"].account, name,
                                             [READ_POLICY], time=2)
    return name


class TestTopology:
    """Test topology validation."""

    def test_valid(self):
        """Test the document parses with roles as enums."""
        spec = make_spec()
        assert spec.peers[3].role is Role.IOT_DEVICE
        assert spec.registrar_id == "server"

    def test_bundled_topology(self):
        """Test the bundled topology document loads."""
        assert load_topology(SCENARIO_DIR / "topology.yaml").registrar_id == "server"

    def test_iot_needs_gateway(self):
        """Test an IoT device without a gateway agent is refused."""
        peers = PEERS[:3] + [{"id": "sensor", "role": "iotDevice", "agent": "laptop"}]
        with pytest.raises(ValueError):
            make_spec(peers=peers)

    def test_iot_cannot_mine(self):
        """Test IoT devices are not miners."""
        with pytest.raises(ValueError):
            make_spec(miners=["sensor"])

    def test_duplicate_ids(self):
        """Test peer ids are unique."""
        with pytest.raises(ValueError):
            make_spec(peers=PEERS + [{"id": "server", "role": "storage"}])

    def test_notify_once_per_transaction(self):
        """Test a device keeps one copy of an outcome reported twice."""
        sensor = Peer("sensor", bytes(20), Role.IOT_DEVICE)
        outcome = AccessOutcome("m", "temperature", "read", 1000, True, 0, b"\x01" * 32)
        assert sensor.notify(outcome)
        assert not sensor.notify(outcome)
        assert sensor.inbox == [outcome]

    def test_missing_file(self, tmp_path):
        """Test an unreadable document raises TopologyError."""
        with pytest.raises(TopologyError):
            load_topology(tmp_path / "absent.yaml")


class TestAgency:
    """Test who may sign for whom."""

    def test_gateway_signs_for_device(self):
        """Test the device's transactions are submitted by its gateway."""
        network = Network(make_spec(), difficulty=0)
        sensor, gateway = network.peer("sensor"), network.peer("gateway")
        assert network.submitter_for(sensor, sensor.account) is gateway
        assert network.submitter_for(gateway, sensor.account) is gateway

    def test_others_cannot(self):
        """Test nobody else signs for the device or for each other."""
        network = Network(make_spec(), difficulty=0)
        sensor, laptop = network.peer("sensor"), network.peer("laptop")
        with pytest.raises(AgencyViolation):
            network.submitter_for(laptop, sensor.account)
        with pytest.raises(AgencyViolation):
            network.submitter_for(sensor, laptop.account)
        with pytest.raises(AgencyViolation):
            network.submit(sensor, sensor.account, None, "RC")

    def test_audit_is_clean(self):
        """Test a full registration leaves no agency violation behind."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        framework.request_access(peers["laptop"], "laptop-sensor", "temperature", "read", 1000,
                                 via=peers["sensor"])
        assert framework.network.audit_agency() == []

    def test_register_needs_object_or_agent(self):
        """Test the laptop cannot register a method for the sensor."""
        framework, peers = make_framework()
        with pytest.raises(AgencyViolation):
            framework.register_access_control_method(peers["laptop"], peers["laptop"].account,
                                                     peers["sensor"].account, "m", [])


class TestNetwork:
    """Test rounds and replicas."""

    def test_rounds_keep_replicas_equal(self):
        """Test every replica has the same state root after each round."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        roots = {node.state_root for node in framework.network.nodes.values()}
        assert len(roots) == 1
        assert "sensor" not in framework.network.nodes

    def test_idle_round(self):
        """Test a round with nothing pending mines nothing."""
        framework, _ = make_framework()
        height = framework.network.reference_node.height
        assert framework.network.run_round() is None
        assert framework.network.reference_node.height == height

    def test_miner_choice_follows_seed(self):
        """Test the same seed picks the same miners."""
        def miners(seed):
            framework, peers = make_framework(seed)
            register_sensor_method(framework, peers)
            return [block.miner for block in framework.network.reference_node.chain[1:]]
        assert miners(4) == miners(4)


class TestMethods:
    """Test registering, updating and deleting access control methods."""

    def test_register(self):
        """Test a registered method resolves to a live ACC with its policy."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        address, abis = framework.lookup(peers["laptop"], "laptop-sensor")
        assert list(abis) == AccessControlContract.abi_names()
        node = framework.network.reference_node
        acc = node.world.contract(address)
        assert acc.subject == peers["laptop"].account
        assert acc.creator == peers["sensor"].account
        jc_address, _ = framework.lookup(peers["laptop"], JUDGE_METHOD_NAME)
        assert acc.jc_address == jc_address
        assert framework.read_policy(peers["laptop"], "laptop-sensor", "temperature",
                                     "read")[2] == "allow"

    def test_step_failure_names_the_step(self):
        """Test registering a taken name fails at the methodRegister step."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        with pytest.raises(StepFailed) as err:
            register_sensor_method(framework, peers)
        assert err.value.code == "duplicate-name"
        assert err.value.step == 4

    def test_update_replaces_contract(self):
        """Test an update moves the method and destroys the old ACC."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        old, _ = framework.lookup(peers["laptop"], "laptop-sensor")
        new = framework.update_access_control_method(peers["gateway"], "laptop-sensor",
                                                      [READ_POLICY], time=3)
        world = framework.network.reference_node.world
        assert framework.lookup(peers["laptop"], "laptop-sensor")[0] == new
        assert not world.is_alive(old)
        assert world.is_alive(new)

    def test_delete(self):
        """Test a deleted method is gone from the RC and its ACC destroyed."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        old, _ = framework.lookup(peers["laptop"], "laptop-sensor")
        framework.delete_access_control_method(peers["gateway"], "laptop-sensor", time=3)
        assert not framework.network.reference_node.world.is_alive(old)
        with pytest.raises(StepFailed) as err:
            framework.delete_access_control_method(peers["gateway"], "laptop-sensor", time=4)
        assert err.value.code == "no-such-method"

    def test_policy_management(self):
        """Test add, update and delete through the creator, and denial for others."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        framework.add_policy(peers["gateway"], "laptop-sensor",
                             PolicySpec("temperature", "write", "deny", 10, 3), time=3)
        framework.update_policy(peers["gateway"], "laptop-sensor", "temperature", "write",
                                permission="allow", time=4)
        assert framework.read_policy(peers["laptop"], "laptop-sensor", "temperature",
                                     "write")[2] == "allow"
        with pytest.raises(StepFailed) as err:
            framework.delete_policy(peers["laptop"], "laptop-sensor", "temperature", "write",
                                    time=5)
        assert err.value.code == "permission-denied"
        framework.delete_policy(peers["gateway"], "laptop-sensor", "temperature", "write",
                                time=6)
        with pytest.raises(StepFailed):
            framework.delete_policy(peers["gateway"], "laptop-sensor", "temperature", "write",
                                    time=7)


class TestAccess:
    """Test access requests and monitoring."""

    def test_case_study_burst(self):
        """Test the third quick request is blocked for a minute."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        outcomes = [framework.request_access(peers["laptop"], "laptop-sensor", "temperature",
                                             "read", time)
                    for time in (1000, 1010, 1020, 1050)]
        assert [(o.result, o.penalty) for o in outcomes] == \
            [(True, 0), (True, 0), (False, 60), (False, 0)]

    def test_concurrent_requests_keep_their_outcomes(self):
        """Test two requests mined in one block each get their own outcome."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        first = framework.submit_request(peers["laptop"], "laptop-sensor", "temperature",
                                         "read", 1000)
        second = framework.submit_request(peers["laptop"], "laptop-sensor", "temperature",
                                          "write", 1001)
        outcome_two = framework.await_outcome(second)
        outcome_one = framework.await_outcome(first)
        assert (outcome_one.action, outcome_one.result) == ("read", True)
        assert (outcome_two.action, outcome_two.result) == ("write", False)

    def test_pending_timeout(self):
        """Test waiting ends when no block is ever mined."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        framework.network.mining_enabled = False
        with pytest.raises(PendingTimeout):
            framework.request_access(peers["laptop"], "laptop-sensor", "temperature", "read",
                                     1000)

    def test_unauthorized_requester(self):
        """Test a peer that is neither subject nor object gets a failed transaction."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        with pytest.raises(TransactionFailed) as err:
            framework.request_access(peers["phone"], "laptop-sensor", "temperature", "read",
                                     1000)
        assert err.value.code == "unauthorized-caller"

    def test_flow_equivalence(self):
        """Test direct and forwarded runs give identical transcripts on both monitors."""
        times = (1000, 1010, 1020, 1050, 1100, 1110, 1120, 1300)

        def transcript(via_sensor):
            framework, peers = make_framework()
            register_sensor_method(framework, peers)
            subject_monitor = framework.monitor_access(peers["laptop"], "laptop-sensor")
            object_monitor = framework.monitor_access(peers["sensor"], "laptop-sensor")
            via = peers["sensor"] if via_sensor else None
            for time in times:
                framework.request_access(peers["laptop"], "laptop-sensor", "temperature",
                                         "read", time, via)
            seen = []
            for monitor in (subject_monitor, object_monitor):
                seen.append([(o.time, o.result, o.penalty) for o in monitor.poll()])
            return seen, peers["sensor"].inbox

        direct, direct_inbox = transcript(False)
        forwarded, forwarded_inbox = transcript(True)
        assert direct == forwarded
        assert direct[0] == direct[1]
        assert [(r, p) for _, r, p in forwarded[0][:3]] == [(True, 0), (True, 0), (False, 60)]
        assert len(forwarded_inbox) == len(times)
        assert [(o.time, o.result, o.penalty) for o in forwarded_inbox] == direct[1]
        assert [(o.time, o.result, o.penalty) for o in direct_inbox] == direct[1]


class TestJudgeMethod:
    """Test the judging method lifecycle."""

    def test_update_and_rebind(self):
        """Test a new JC takes over after a rebind with fresh history."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        for time in (1000, 1010, 1020):
            framework.request_access(peers["laptop"], "laptop-sensor", "temperature", "read",
                                     time)
        old_jc, _ = framework.lookup(peers["server"], JUDGE_METHOD_NAME)
        new_jc = framework.update_judge_method(peers["server"], 3, 1, 10, time=1100)
        world = framework.network.reference_node.world
        assert not world.is_alive(old_jc)
        framework.rebind_judge(peers["gateway"], "laptop-sensor", time=1101)
        acc, _ = framework.lookup(peers["server"], "laptop-sensor")
        assert framework.network.reference_node.world.contract(acc).jc_address == new_jc
        outcomes = [framework.request_access(peers["laptop"], "laptop-sensor", "temperature",
                                             "read", time)
                    for time in (1200, 1210, 1220)]
        assert outcomes[-1].penalty == 30

    def test_only_registrar_updates_judge(self):
        """Test another peer cannot swap the JC."""
        framework, peers = make_framework()
        with pytest.raises(StepFailed) as err:
            framework.update_judge_method(peers["laptop"], 2, 3, 60, time=5)
        assert err.value.code == "permission-denied"

    def test_dangling_methods(self):
        """Test a method whose ACC was destroyed behind the RC's back is reported."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        acc, _ = framework.lookup(peers["server"], "laptop-sensor")
        gateway, sensor = peers["gateway"], peers["sensor"]
        framework.network.submit(gateway, sensor.account, acc, "deleteACC", (), 3)
        framework.network.settle()
        assert framework.dangling_methods(peers["server"], ["laptop-sensor"]) == \
            ["laptop-sensor"]

    def test_policy_on_dangling_method(self):
        """Test managing policies of a destroyed but still registered ACC fails."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        acc, _ = framework.lookup(peers["server"], "laptop-sensor")
        gateway, sensor = peers["gateway"], peers["sensor"]
        framework.network.submit(gateway, sensor.account, acc, "deleteACC", (), 3)
        framework.network.settle()
        with pytest.raises(StepFailed) as err:
            framework.add_policy(gateway, "laptop-sensor", READ_POLICY, time=4)
        assert err.value.code == "contract-destroyed"


class TestBlockOrdering:
    """Test effects that depend on what shares a block."""

    def test_registration_visible_after_mining(self):
        """Test a method resolves only once its registration is mined."""
        framework, peers = make_framework()
        network = framework.network
        gateway, sensor, laptop = peers["gateway"], peers["sensor"], peers["laptop"]
        deployment = network.submit(gateway, sensor.account, None, "ACC",
                                    (laptop.account, sensor.account), 2)
        network.settle()
        acc = network.reference_node.receipt(deployment.tx_id).return_values[0]
        network.submit(gateway, sensor.account, framework.rc_address, "methodRegister",
                       ("late", laptop.account, sensor.account, "ACC late", sensor.account,
                        acc, AccessControlContract.abi_names()), 3)
        with pytest.raises(ContractError):
            framework.lookup(laptop, "late")
        network.run_round()
        assert framework.lookup(laptop, "late")[0] == acc

    def test_request_after_delete_in_same_block(self):
        """Test a request ordered after deleteACC in one block hits a dead contract."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers)
        network = framework.network
        gateway, sensor, laptop = peers["gateway"], peers["sensor"], peers["laptop"]
        acc, _ = framework.lookup(laptop, "laptop-sensor")
        network.submit(gateway, sensor.account, acc, "deleteACC", (), 1000)
        request = network.submit(laptop, laptop.account, acc, "accessControl",
                                 ("temperature", "read", 1000), 1000)
        block = network.run_round()
        assert len(block.transactions) == 2
        assert network.reference_node.receipt(request.tx_id).status == "contract-destroyed"

    def test_siblings_survive_delete(self):
        """Test deleting one method leaves another one alone."""
        framework, peers = make_framework()
        register_sensor_method(framework, peers, "first")
        register_sensor_method(framework, peers, "second")
        framework.delete_access_control_method(peers["gateway"], "first", time=3)
        address, _ = framework.lookup(peers["laptop"], "second")
        assert framework.network.reference_node.world.is_alive(address)
