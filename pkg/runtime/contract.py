"""Base class for native contract state machines and their ABI dispatch."""
from __future__ import annotations

from dataclasses import dataclass

from runtime.errors import MalformedArguments, NoSuchAbi
from runtime.types import Address, Event, Message

NONE_TYPE = type(None)


class ListOf:
    """Signature marker for a list argument whose items share one type."""
    # pylint: disable=R0903

    def __init__(self, item_type):
        self.item_type = item_type

    def __repr__(self):
        return f"ListOf({self.item_type.__name__})"


def _matches(value, expected):
    """Strict type test: booleans are not integers here."""
    if isinstance(expected, tuple):
        return any(_matches(value, option) for option in expected)
    if isinstance(expected, ListOf):
        return (isinstance(value, (list, tuple))
                and all(_matches(item, expected.item_type) for item in value))
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if expected is NONE_TYPE:
        return value is None
    return isinstance(value, expected)


def check_signature(name, arg_types, args):
    """
    Validate call arguments against a declared signature.

    Raises:
        MalformedArguments: wrong count or wrong type
    """
    if len(args) != len(arg_types):
        raise MalformedArguments(f"{name} takes {len(arg_types)} arguments, got {len(args)}")
    for position, (value, expected) in enumerate(zip(args, arg_types)):
        if not _matches(value, expected):
            raise MalformedArguments(f"{name} argument {position} has wrong type {type(value).__name__}")


@dataclass(frozen=True)
class AbiSpec:
    """Name, signature and mutability of one ABI."""
    name: str
    arg_types: tuple
    mutating: bool = True


def abi(name, *arg_types, mutating=True):
    """Mark a contract method as an invokable ABI."""
    def decorate(func):
        func.abi_spec = AbiSpec(name, arg_types, mutating)
        return func
    return decorate


@dataclass
class CallContext:
    """Everything an ABI may see about the invocation it is serving."""
    # pylint: disable=R0902
    world: object
    caller: Address
    contract: Address
    tx: object
    depth: int
    block_height: int
    block_timestamp: int
    events: list
    read_only: bool = False

    @property
    def via_message(self):
        """True when the caller is another contract."""
        return self.depth > 0

    def send_message(self, target, abi_name, *args):
        """Synchronously run an ABI of another contract."""
        message = Message(self.contract, target, abi_name, tuple(args))
        return self.world.invoke_by_message(message, self)

    def emit(self, name, *payload):
        """Append an event; it becomes visible once the block is accepted."""
        if self.read_only:
            return
        tx_id = self.tx.tx_id if self.tx is not None else b""
        self.events.append(Event(self.contract, name, tuple(payload), self.block_height, tx_id))

    def selfdestruct(self):
        """Destroy the running contract on behalf of the caller."""
        self.world.selfdestruct(self.contract, self.caller)


class Contract:
    """
    A contract kind: code as Python methods, state as instance attributes.

    Subclasses declare ``kind``, ``init_types`` (deployment signature) and
    decorate their ABIs with :func:`abi`.
    """
    kind = ""
    init_types = ()
    _abis = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        table = {}
        for klass in reversed(cls.__mro__):
            for attr in vars(klass).values():
                spec = getattr(attr, "abi_spec", None)
                if spec is not None:
                    table[spec.name] = (spec, attr)
        cls._abis = table

    def __init__(self, address, creator):
        self.address = address
        self.creator = creator

    @classmethod
    def abi_names(cls):
        """Sorted ABI names of this kind, as listed in RC entries."""
        return sorted(cls._abis)

    @classmethod
    def is_mutating(cls, abi_name):
        """False only for ABIs declared with ``mutating=False``."""
        entry = cls._abis.get(abi_name)
        return entry is None or entry[0].mutating

    @classmethod
    def deploy(cls, address, creator, init_args):
        """Validate init arguments and build the initial state."""
        check_signature(cls.kind, cls.init_types, init_args)
        contract = cls(address, creator)
        contract.setup(*init_args)
        return contract

    def setup(self, *init_args):
        """Kind-specific initialization, called once on deployment."""

    def invoke(self, ctx, abi_name, args):
        """
        Dispatch an ABI call.

        Returns:
            tuple: ABI return values (empty when the ABI returns nothing)
        """
        entry = self._abis.get(abi_name)
        if entry is None:
            raise NoSuchAbi(f"{self.kind} has no ABI {abi_name!r}")
        spec, func = entry
        check_signature(abi_name, spec.arg_types, args)
        result = func(self, ctx, *args)
        if result is None:
            return ()
        if isinstance(result, tuple):
            return result
        return (result,)

    def canonical(self):
        """Digest-ready state; every kind must override."""
        raise NotImplementedError
