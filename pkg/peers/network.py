"""In-process peer network driven by a deterministic round scheduler."""
import numpy as np
from loguru import logger

from chain.block import Genesis
from chain.node import NodeState
from chain.utils import DEFAULT_DIFFICULTY, DEFAULT_NONCE_BUDGET
from peers.errors import AgencyViolation
from peers.topology import Role, Topology
from runtime.types import Transaction

# rounds a requester waits for its returnResult event
DEFAULT_MAX_WAIT_ROUNDS = 3


class Network:
    """
    Every ledger client of the topology plus the scheduler driving them.

    Each round runs three phases: transactions already submitted are in
    every mempool, one designated miner seals a block, and every replica
    validates and accepts it (which delivers its events).
    """
    # pylint: disable=R0902

    def __init__(self, topology_spec, seed=0, difficulty=DEFAULT_DIFFICULTY,
                 strict_time=False, allow_empty_blocks=False, genesis_timestamp=0,
                 nonce_budget=DEFAULT_NONCE_BUDGET):
        """
        Build replicas for every non-IoT peer from one shared genesis.

        Args:
            topology_spec: Validated TopologySpec
            seed: Seeds account derivation and miner designation
            difficulty: Leading zero bits per block
            strict_time: Contracts reason with block time
            allow_empty_blocks: Mine a block even with nothing pending
            genesis_timestamp: Simulation clock at genesis
            nonce_budget: Nonces tried per block
        """
        # pylint: disable=R0913
        self.genesis = Genesis(seed=seed, difficulty=difficulty,
                               accounts=topology_spec.account_labels(),
                               timestamp=genesis_timestamp,
                               allow_empty_blocks=allow_empty_blocks,
                               strict_time=strict_time, nonce_budget=nonce_budget)
        self.nodes = {}
        for peer_spec in topology_spec.peers:
            if peer_spec.role is not Role.IOT_DEVICE:
                self.nodes[peer_spec.id] = NodeState(self.genesis, node_id=peer_spec.id)
        reference = next(iter(self.nodes.values()))
        self.topology = Topology(topology_spec, reference.world.accounts)
        self.miners = list(topology_spec.miners)
        self.clock = genesis_timestamp
        self.rounds = 0
        self.mining_enabled = True
        self.submissions = []
        self._nonces = {}
        self._rng = np.random.default_rng(seed)

    # ==================== ACCESSORS ====================
    def peer(self, peer_id):
        """Peer by id."""
        return self.topology.peer(peer_id)

    def node_of(self, peer):
        """Replica a peer reads from (an IoT device reads through its gateway)."""
        if peer.role is Role.IOT_DEVICE:
            peer = self.topology.agent_of(peer)
        return self.nodes[peer.id]

    @property
    def reference_node(self):
        """Any replica; all of them agree after every round."""
        return next(iter(self.nodes.values()))

    def advance_clock(self, timestamp):
        """Move the simulation clock forward (never backward)."""
        self.clock = max(self.clock, timestamp)

    # ==================== SUBMISSION ====================
    def submitter_for(self, actor, account):
        """
        Peer that actually signs and submits for ``account`` when ``actor`` acts.

        An IoT device is always fronted by its gateway; a gateway may sign
        for the devices it fronts.

        Raises:
            AgencyViolation: actor can neither sign for the account itself
                nor through its gateway
        """
        if actor.account == account:
            if actor.role is Role.IOT_DEVICE:
                return self.topology.agent_of(actor)
            return actor
        if actor.role is Role.GATEWAY and account in actor.gateway_of:
            return actor
        raise AgencyViolation(f"peer {actor.id!r} cannot act for {account}")

    def can_act_for(self, actor, account):
        """True when submitter_for would succeed."""
        try:
            self.submitter_for(actor, account)
        except AgencyViolation:
            return False
        return True

    def submit(self, submitter, account, target, abi_name, args=(), supplied_time=None):
        """
        Sign a transaction with ``account`` and broadcast it to every mempool.

        Returns:
            Transaction: the broadcast transaction
        """
        # pylint: disable=R0913
        if not submitter.runs_client:
            raise AgencyViolation(f"iot device {submitter.id!r} cannot submit transactions")
        if account != submitter.account and account not in submitter.gateway_of:
            raise AgencyViolation(f"peer {submitter.id!r} does not hold {account}")
        nonce = self._nonces.get(account, 0)
        self._nonces[account] = nonce + 1
        if supplied_time is not None:
            self.advance_clock(supplied_time)
        time = self.clock if supplied_time is None else supplied_time
        tx = Transaction.create(account, target, abi_name, args, time, nonce)
        for node in self.nodes.values():
            node.submit(tx)
        self.submissions.append((submitter.id, tx))
        logger.debug("{} submitted {} to {}", submitter.id, abi_name, target)
        return tx

    def audit_agency(self):
        """
        Transactions signed with an IoT device account by anyone but its agent.

        Returns:
            list: (submitter_id, tx) pairs breaking the agency rule
        """
        violations = []
        for submitter_id, tx in self.submissions:
            sender = self.topology.by_account(tx.sender)
            if sender is not None and sender.role is Role.IOT_DEVICE:
                if self.peer(submitter_id).account != sender.agent:
                    violations.append((submitter_id, tx))
        return violations

    # ==================== ROUNDS ====================
    def pending(self):
        """True when transactions wait in the mempools."""
        return bool(self.reference_node.mempool)

    def run_round(self):
        """
        Mine one block (if anything is pending) and have every replica accept it.

        Returns:
            Block or None: the accepted block, None when nothing was mined
        """
        self.rounds += 1
        if not self.mining_enabled:
            logger.debug("round {}: mining stalled", self.rounds)
            return None
        if not self.pending() and not self.genesis.allow_empty_blocks:
            return None
        miner_id = self.miners[int(self._rng.integers(len(self.miners)))]
        miner = self.peer(miner_id)
        block = self.nodes[miner_id].mine_block(miner.account, self.clock)
        for node in self.nodes.values():
            node.accept_block(block)
        logger.info("round {}: {} mined block {} ({} txs)", self.rounds, miner_id,
                    block.height, len(block.transactions))
        return block

    def settle(self, max_rounds=DEFAULT_MAX_WAIT_ROUNDS):
        """Run rounds until the mempools are empty (or the limit is hit)."""
        for _ in range(max_rounds):
            if not self.pending():
                return
            self.run_round()
