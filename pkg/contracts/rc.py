"""Register Contract: the lookup table from method names to contracts."""
from dataclasses import dataclass

from runtime.contract import NONE_TYPE, Contract, ListOf, abi
from runtime.errors import ContractError, PermissionDenied
from runtime.types import Address

JUDGE_METHOD_NAME = "JC"


class DuplicateName(ContractError):
    """A method with this name is already registered."""
    code = "duplicate-name"


class CreatorMismatch(ContractError):
    """Registration sent by someone other than the entry's creator."""
    code = "creator-mismatch"


class DanglingAddress(ContractError):
    """The contract address holds no live contract."""
    code = "dangling-address"


class NoSuchMethod(ContractError):
    """No method registered under this name."""
    code = "no-such-method"


class BlankParty(ContractError):
    """Subject/object may only be left blank, together, for a judge entry."""
    code = "blank-party"


@dataclass(frozen=True)
class MethodEntry:
    """One row of the lookup table."""
    # pylint: disable=R0902
    method_name: str
    subject: Address | None
    object: Address | None
    sc_name: str
    creator: Address
    sc_address: Address
    abi_list: tuple

    def as_values(self):
        """ABI-friendly tuple, in register order."""
        return (self.method_name, self.subject, self.object, self.sc_name,
                self.creator, self.sc_address, self.abi_list)

    @classmethod
    def from_values(cls, values):
        """Rebuild an entry from getMethod's return values."""
        name, subject, obj, sc_name, creator, sc_address, abi_list = values
        return cls(name, subject, obj, sc_name, creator, sc_address, tuple(abi_list))


class RegisterContract(Contract):
    """
    Lookup table of access-control and judging methods.

    Lookups are open to everyone; only a method's creator can register,
    update or delete it.
    """
    kind = "RC"
    init_types = ()

    def __init__(self, address, creator):
        super().__init__(address, creator)
        self.entries = {}

    def _entry(self, method_name):
        entry = self.entries.get(method_name)
        if entry is None:
            raise NoSuchMethod(f"no method named {method_name!r}")
        return entry

    @staticmethod
    def _require_live(ctx, sc_address):
        if not ctx.world.is_alive(sc_address):
            raise DanglingAddress(f"{sc_address} hosts no live contract")

    @abi("methodRegister", str, (Address, NONE_TYPE), (Address, NONE_TYPE), str, Address,
         Address, ListOf(str))
    def method_register(self, ctx, method_name, subject, obj, sc_name, creator, sc_address,
                        abi_list):
        """Register a new method; the caller must be the entry's creator."""
        # pylint: disable=R0913
        if ctx.caller != creator:
            raise CreatorMismatch(f"{ctx.caller} cannot register on behalf of {creator}")
        if method_name in self.entries:
            raise DuplicateName(f"method {method_name!r} already registered")
        self._require_live(ctx, sc_address)
        if (subject is None) != (obj is None):
            raise BlankParty("subject and object are blank together or not at all")
        if subject is None and ctx.world.kind_of(sc_address) != "JC":
            raise BlankParty("only a judge entry may leave subject and object blank")
        self.entries[method_name] = MethodEntry(method_name, subject, obj, sc_name, creator,
                                                sc_address, tuple(abi_list))

    @abi("methodUpdate", str, str, Address, ListOf(str))
    def method_update(self, ctx, method_name, sc_name, sc_address, abi_list):
        """Point a method at another contract; parties and creator never change."""
        # pylint: disable=R0913
        entry = self._entry(method_name)
        if ctx.caller != entry.creator:
            raise PermissionDenied(f"only the creator can update {method_name!r}")
        self._require_live(ctx, sc_address)
        self.entries[method_name] = MethodEntry(method_name, entry.subject, entry.object,
                                                sc_name, entry.creator, sc_address,
                                                tuple(abi_list))

    @abi("methodDelete", str)
    def method_delete(self, ctx, method_name):
        """Remove a method from the table."""
        entry = self._entry(method_name)
        if ctx.caller != entry.creator:
            raise PermissionDenied(f"only the creator can delete {method_name!r}")
        del self.entries[method_name]

    @abi("getContract", str, mutating=False)
    def get_contract(self, ctx, method_name):
        """
        Resolve a method.

        Returns:
            tuple: (scAddress, abiList)
        """
        entry = self._entry(method_name)
        return entry.sc_address, entry.abi_list

    @abi("getMethod", str, mutating=False)
    def get_method(self, ctx, method_name):
        """Full lookup-table row of a method."""
        return self._entry(method_name).as_values()

    def canonical(self):
        return {name: list(entry.as_values()) for name, entry in self.entries.items()}
