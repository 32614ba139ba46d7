"""A replica: local chain, world state and mempool."""
import struct

from loguru import logger

from chain.block import Block, block_hash, genesis_block, hash_with_nonce, header_prefix
from chain.errors import BlockRejected, EmptyMempool, MiningExhausted
from chain.utils import MAX_NONCE, meets_difficulty
from runtime.events import EventBus


def execute_transactions(world, transactions, height, timestamp):
    """
    Run transactions in order against a world, in place.

    Returns:
        list: One receipt per transaction
    """
    return [world.apply_transaction(tx, height, timestamp) for tx in transactions]


class NodeState:
    """
    Single-threaded replica of the ledger.

    The world is always the result of replaying ``chain`` on the genesis
    world; only :meth:`accept_block` moves it forward.
    """

    def __init__(self, genesis, kinds=None, node_id=""):
        """
        Build a replica at genesis.

        Args:
            genesis: Genesis parameters shared by every replica
            kinds: Contract kinds (defaults to ACC/JC/RC)
            node_id: Name used in log lines
        """
        self.genesis = genesis
        self.kinds = kinds
        self.node_id = node_id
        self.world = genesis.build_world(kinds)
        self.chain = [genesis_block(genesis, self.world)]
        self.mempool = []
        self.receipts = {}
        self._tx_index = {}
        self.events = EventBus()
        self._log = logger.bind(node=node_id)

    # ==================== QUERIES ====================
    @property
    def tip(self):
        """Latest accepted block."""
        return self.chain[-1]

    @property
    def height(self):
        """Height of the tip."""
        return self.tip.height

    @property
    def difficulty(self):
        """Leading zero bits required of every non-genesis block."""
        return self.genesis.difficulty

    @property
    def state_root(self):
        """Digest of the current world."""
        return self.world.digest()

    def transaction(self, tx_id):
        """Included transaction with this id, or None."""
        location = self._tx_index.get(tx_id)
        if location is None:
            return None
        height, position = location
        return self.chain[height].transactions[position]

    def height_of(self, tx_id):
        """Height of the block that included a transaction, or None."""
        location = self._tx_index.get(tx_id)
        return location[0] if location is not None else None

    def receipt(self, tx_id):
        """Receipt of an included transaction, or None."""
        return self.receipts.get(tx_id)

    def call_read_only(self, caller, target, abi_name, args=()):
        """Read-only ABI call against the tip state."""
        # pylint: disable=R0913
        return self.world.call_read_only(caller, target, abi_name, args,
                                         self.height, self.tip.timestamp)

    def subscribe_events(self, emitter=None, name=None):
        """Live stream of events from blocks accepted from now on."""
        return self.events.subscribe(emitter, name)

    # ==================== MEMPOOL ====================
    def submit(self, tx):
        """
        Queue a transaction for mining.

        Returns:
            bool: False when the transaction is malformed or already known
        """
        if not tx.is_well_formed():
            self._log.warning("dropping malformed tx {}", tx.tx_id.hex()[:12])
            return False
        if tx.tx_id in self._tx_index or any(p.tx_id == tx.tx_id for p in self.mempool):
            return False
        self.mempool.append(tx)
        return True

    # ==================== MINING ====================
    def mine_block(self, miner, timestamp):
        """
        Build and seal the next block from the whole mempool.

        The node itself is not changed; hand the block to accept_block.

        Raises:
            EmptyMempool: nothing pending and empty blocks are disabled
            MiningExhausted: no nonce within the budget met the difficulty
        """
        if not self.mempool and not self.genesis.allow_empty_blocks:
            raise EmptyMempool("mempool is empty and empty-block mining is disabled")

        transactions = tuple(self.mempool)
        height = self.height + 1
        world = self.world.copy()
        execute_transactions(world, transactions, height, timestamp)
        draft = Block(height, block_hash(self.tip), transactions, world.digest(), 0,
                      miner, timestamp)

        prefix = header_prefix(draft)
        for nonce in range(self.genesis.nonce_budget):
            if meets_difficulty(hash_with_nonce(prefix, nonce), self.difficulty):
                self._log.debug("sealed block {} with nonce {}", height, nonce)
                return Block(height, draft.prev_hash, transactions, draft.state_root, nonce,
                             miner, timestamp)
        raise MiningExhausted(f"no nonce below {self.genesis.nonce_budget} reaches "
                              f"difficulty {self.difficulty}")

    # ==================== VALIDATION ====================
    def _check(self, block):
        """
        Run every validation check.

        Returns:
            tuple: (failed_check or None, replayed world, receipts)
        """
        # pylint: disable=R0911
        try:
            if not isinstance(block.nonce, int) or not 0 <= block.nonce <= MAX_NONCE:
                return "malformed", None, None
            if block.height != self.height + 1:
                return "height", None, None
            if block.prev_hash != block_hash(self.tip):
                return "prev-hash", None, None
            if not meets_difficulty(block_hash(block), self.difficulty):
                return "proof-of-work", None, None
            if block.timestamp < self.tip.timestamp:
                return "timestamp", None, None
            seen = set()
            for tx in block.transactions:
                if not tx.is_well_formed() or tx.tx_id in seen or tx.tx_id in self._tx_index:
                    return "transaction-format", None, None
                seen.add(tx.tx_id)
            world = self.world.copy()
            receipts = execute_transactions(world, block.transactions, block.height,
                                            block.timestamp)
            if world.digest() != block.state_root:
                return "state-root", None, None
        except (TypeError, ValueError, AttributeError, struct.error) as exc:
            self._log.debug("malformed block: {}", exc)
            return "malformed", None, None
        return None, world, receipts

    def validate_block(self, block):
        """True iff the block extends the tip and replays to its state root."""
        failed, _, _ = self._check(block)
        return failed is None

    def accept_block(self, block):
        """
        Validate and append a block, then deliver its events.

        Returns:
            list: Receipts of the block's transactions

        Raises:
            BlockRejected: validation failed; the node is unchanged
        """
        failed, world, receipts = self._check(block)
        if failed is not None:
            self._log.warning("rejected block {}: {}", block.height, failed)
            raise BlockRejected(failed)

        self.world = world
        self.chain.append(block)
        included = set()
        for position, (tx, receipt) in enumerate(zip(block.transactions, receipts)):
            self.receipts[tx.tx_id] = receipt
            self._tx_index[tx.tx_id] = (block.height, position)
            included.add(tx.tx_id)
        self.mempool = [tx for tx in self.mempool if tx.tx_id not in included]
        self._log.info("accepted block {} ({} txs)", block.height, len(block.transactions))

        for receipt in receipts:
            if receipt.ok:
                self.events.publish(receipt.events)
        return receipts
