"""Value types shared by the runtime, the contracts and the chain."""
from __future__ import annotations

from dataclasses import dataclass

from runtime.utils import ADDRESS_SIZE, STATUS_OK


class Address(bytes):
    """Opaque 20-byte identity of an account or a contract."""

    def __new__(cls, raw):
        raw = bytes(raw)
        if len(raw) != ADDRESS_SIZE:
            raise ValueError(f"address must be {ADDRESS_SIZE} bytes, got {len(raw)}")
        return super().__new__(cls, raw)

    @classmethod
    def from_hex(cls, text):
        """Parse a ``0x``-prefixed (or bare) hex string."""
        if text.startswith(("0x", "0X")):
            text = text[2:]
        return cls(bytes.fromhex(text))

    def __str__(self):
        return "0x" + self.hex()

    def __repr__(self):
        return f"Address({self})"


ZERO_ADDRESS = Address(bytes(ADDRESS_SIZE))


def freeze(value):
    """Turn nested lists into tuples so values can sit inside frozen dataclasses."""
    if isinstance(value, (list, tuple)):
        return tuple(freeze(item) for item in value)
    return value


def is_typed_value(value):
    """
    Check a value belongs to the ABI value universe.

    Integers, strings, addresses and booleans cover every ABI; ``None`` stands
    for a blank or omitted field and sequences carry ABI-name lists.
    """
    if value is None or isinstance(value, (bool, int, str, Address)):
        return True
    if isinstance(value, (list, tuple)):
        return all(is_typed_value(item) for item in value)
    return False


@dataclass(frozen=True)
class Transaction:
    """
    Account-originated ABI invocation.

    ``target`` is None for a deployment, in which case ``abi_name`` names the
    contract kind and ``args`` are its init arguments.
    """
    sender: Address
    target: Address | None
    abi_name: str
    args: tuple
    supplied_time: int
    nonce: int
    tx_id: bytes = b""

    @classmethod
    def create(cls, sender, target, abi_name, args, supplied_time, nonce=0):
        """Build a transaction and stamp its id."""
        # pylint: disable=R0913
        unsigned = cls(sender, target, abi_name, freeze(args), supplied_time, nonce)
        return cls(sender, target, abi_name, freeze(args), supplied_time, nonce,
                   unsigned.compute_id())

    def body(self):
        """All fields except the id, in canonical order."""
        return [self.sender, self.target, self.abi_name, list(self.args),
                self.supplied_time, self.nonce]

    def canonical(self):
        """Body plus id, as hashed into blocks."""
        return [*self.body(), self.tx_id]

    def compute_id(self):
        """Digest of the canonical serialization of the body."""
        # imported here, the codec itself depends on this module
        from chain.codec import digest  # pylint: disable=C0415
        return digest(self.body())

    @property
    def is_deployment(self):
        """True when this transaction deploys a contract."""
        return self.target is None

    def is_well_formed(self):
        """Structural check used by block validation."""
        if not isinstance(self.sender, Address):
            return False
        if self.target is not None and not isinstance(self.target, Address):
            return False
        if not isinstance(self.abi_name, str) or not self.abi_name:
            return False
        if not isinstance(self.args, tuple) or not is_typed_value(self.args):
            return False
        for number in (self.supplied_time, self.nonce):
            if isinstance(number, bool) or not isinstance(number, int) or number < 0:
                return False
        return self.tx_id == self.compute_id()


@dataclass(frozen=True)
class Message:
    """Contract-originated ABI invocation; lives only inside a transaction."""
    from_contract: Address
    target: Address
    abi_name: str
    args: tuple


@dataclass(frozen=True)
class Event:
    """Log entry emitted by a contract during execution."""
    emitter: Address
    name: str
    payload: tuple
    block_height: int
    tx_id: bytes


@dataclass(frozen=True)
class Receipt:
    """Outcome of one transaction inside a block."""
    tx_id: bytes
    status: str
    return_values: tuple = ()
    events: tuple = ()
    error: str = ""

    @property
    def ok(self):
        """True when the transaction committed."""
        return self.status == STATUS_OK


@dataclass
class ContractRecord:
    """A deployed contract: its code (by kind) and its state."""
    address: Address
    creator: Address
    kind: str
    contract: object = None
    alive: bool = True

    def canonical(self):
        """Digest-ready view; dead contracts keep only their tombstone."""
        state = self.contract.canonical() if self.alive and self.contract is not None else None
        return [self.creator, self.kind, self.alive, state]
