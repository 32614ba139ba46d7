"""World state: accounts, deployed contracts, and deterministic execution."""
import copy

from loguru import logger

from chain.codec import digest
from runtime.contract import CallContext
from runtime.errors import (CallDepthExceeded, ContractDestroyed, ContractError,
                            NotAContract, PermissionDenied, UnknownKind,
                            UnknownSender)
from runtime.types import Address, ContractRecord, Receipt
from runtime.utils import (ACCOUNT_DOMAIN, CONTRACT_DOMAIN, MAX_CALL_DEPTH,
                           STATUS_OK, derive_address_bytes)


def default_kinds():
    """The contract kinds shipped with the framework (ACC, JC, RC)."""
    # late import, contracts depend on the runtime
    from contracts import CONTRACT_KINDS  # pylint: disable=C0415
    return dict(CONTRACT_KINDS)


class World:
    """
    Every account and contract of one replica.

    Only :meth:`apply_transaction` changes contract state, and it does so
    atomically: a failing transaction leaves the world digest untouched.
    """

    def __init__(self, seed=0, kinds=None, strict_time=False):
        """
        Create an empty world.

        Args:
            seed: 64-bit seed mixed into every derived address
            kinds: Mapping kind tag -> Contract subclass (defaults to ACC/JC/RC)
            strict_time: Contracts use the block timestamp instead of the
                caller-supplied time
        """
        self.seed = seed
        self.kinds = dict(kinds) if kinds is not None else default_kinds()
        self.strict_time = strict_time
        self._accounts = {}
        self._contracts = {}

    # ==================== ACCOUNTS ====================
    @property
    def accounts(self):
        """Registered account addresses, in creation order."""
        return tuple(self._accounts)

    def create_account(self, label=""):
        """
        Register a fresh externally controlled account.

        The address depends only on the seed, the creation counter and the
        label, so a world rebuilt with the same seed gets the same accounts.
        """
        counter = len(self._accounts)
        address = Address(derive_address_bytes(self.seed, ACCOUNT_DOMAIN, counter, label))
        self._accounts[address] = label
        logger.debug("account {} created ({})", address, label or counter)
        return address

    def is_account(self, address):
        """True for externally controlled accounts (never contracts)."""
        return address in self._accounts

    def label_of(self, address):
        """Label an account was created with."""
        return self._accounts.get(address, "")

    # ==================== CONTRACTS ====================
    def record(self, address):
        """Contract record at an address, dead or alive."""
        record = self._contracts.get(address)
        if record is None:
            raise NotAContract(f"no contract at {address}")
        return record

    def is_alive(self, address):
        """True when a live contract sits at the address."""
        record = self._contracts.get(address)
        return record is not None and record.alive

    def kind_of(self, address):
        """Kind tag of the contract at an address, or None."""
        record = self._contracts.get(address)
        return record.kind if record is not None else None

    def contract(self, address):
        """Live contract instance (for read-only inspection)."""
        return self._live(address).contract

    def _live(self, address):
        record = self.record(address)
        if not record.alive:
            raise ContractDestroyed(f"contract {address} was destroyed")
        return record

    def _deploy(self, tx):
        contract_cls = self.kinds.get(tx.abi_name)
        if contract_cls is None:
            raise UnknownKind(f"unknown contract kind {tx.abi_name!r}")
        address = Address(derive_address_bytes(self.seed, CONTRACT_DOMAIN, tx.tx_id))
        if address in self._contracts:
            raise UnknownKind(f"address collision at {address}")
        instance = contract_cls.deploy(address, tx.sender, tx.args)
        self._contracts[address] = ContractRecord(address, tx.sender, contract_cls.kind, instance)
        logger.debug("deployed {} at {} by {}", contract_cls.kind, address, tx.sender)
        return address

    def selfdestruct(self, contract, caller):
        """
        Remove a contract's code and storage.

        Raises:
            PermissionDenied: caller is not the contract's creator
        """
        record = self._live(contract)
        if caller != record.creator:
            raise PermissionDenied(f"{caller} did not create {contract}")
        record.alive = False
        record.contract = None
        logger.debug("contract {} selfdestructed", contract)

    # ==================== EXECUTION ====================
    def apply_transaction(self, tx, block_height=0, block_timestamp=0):
        """
        Execute one transaction atomically.

        Args:
            tx: Transaction to run (deployment when ``tx.target`` is None)
            block_height: Height of the block carrying the transaction
            block_timestamp: Simulation-clock time of that block

        Returns:
            Receipt: status "ok" with return values and events, or an error
            code with no state change
        """
        checkpoint = copy.deepcopy(self._contracts)
        events = []
        try:
            if not self.is_account(tx.sender):
                raise UnknownSender(f"{tx.sender} is not a registered account")
            if tx.is_deployment:
                values = (self._deploy(tx),)
            else:
                ctx = CallContext(self, tx.sender, tx.target, tx, 0,
                                  block_height, block_timestamp, events)
                values = self._dispatch(ctx, tx.abi_name, tx.args)
        except ContractError as err:
            self._contracts = checkpoint
            logger.debug("tx {} failed: {} ({})", tx.tx_id.hex()[:12], err.code, err)
            return Receipt(tx.tx_id, err.code, error=str(err))
        return Receipt(tx.tx_id, STATUS_OK, values, tuple(events))

    def invoke_by_message(self, message, parent):
        """
        Run a nested call on behalf of a contract.

        Errors propagate so that the enclosing transaction aborts.
        """
        depth = parent.depth + 1
        if depth > MAX_CALL_DEPTH:
            raise CallDepthExceeded(f"message depth {depth} exceeds {MAX_CALL_DEPTH}")
        ctx = CallContext(self, message.from_contract, message.target, parent.tx, depth,
                          parent.block_height, parent.block_timestamp, parent.events,
                          parent.read_only)
        return self._dispatch(ctx, message.abi_name, message.args)

    def call_read_only(self, caller, target, abi_name, args=(), block_height=0, block_timestamp=0):
        """
        Run an ABI without committing anything.

        Mutating ABIs may be called; their effects are discarded and they emit
        nothing. ABIs declared non-mutating run without a checkpoint.
        """
        # pylint: disable=R0913
        ctx = CallContext(self, caller, target, None, 0, block_height, block_timestamp,
                          [], read_only=True)
        if not self._live(target).contract.is_mutating(abi_name):
            return self._dispatch(ctx, abi_name, tuple(args))
        checkpoint = copy.deepcopy(self._contracts)
        try:
            return self._dispatch(ctx, abi_name, tuple(args))
        finally:
            self._contracts = checkpoint

    def _dispatch(self, ctx, abi_name, args):
        record = self._live(ctx.contract)
        return record.contract.invoke(ctx, abi_name, args)

    def effective_time(self, ctx, supplied_time):
        """Time an ABI should reason with (block time in strict mode)."""
        return ctx.block_timestamp if self.strict_time else supplied_time

    # ==================== DIGEST ====================
    def canonical(self):
        """Digest-ready view of the whole world."""
        return {
            "seed": self.seed,
            "strictTime": self.strict_time,
            "accounts": [[address, label] for address, label in self._accounts.items()],
            "contracts": {address: record for address, record in self._contracts.items()},
        }

    def digest(self):
        """32-byte state root of the world."""
        return digest(self)

    def copy(self):
        """Independent deep copy (used for speculative execution)."""
        return copy.deepcopy(self)
