"""Exceptions raised while executing contract ABIs."""


class ContractError(Exception):
    """
    Base class for every failure an ABI invocation can produce.

    The ``code`` is what lands in a receipt's status, so it must stay stable.
    """
    code = "contract-error"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class PermissionDenied(ContractError):
    """Caller is not allowed to run this ABI."""
    code = "permission-denied"


class ContractDestroyed(ContractError):
    """Target contract has been selfdestructed."""
    code = "contract-destroyed"


class NotAContract(ContractError):
    """Target address hosts no contract at all."""
    code = "no-such-contract"


class NoSuchAbi(ContractError):
    """The contract kind has no ABI with this name."""
    code = "no-such-abi"


class UnknownKind(ContractError):
    """Deployment named a contract kind the world does not know."""
    code = "unknown-kind"


class MalformedArguments(ContractError):
    """Argument count or types do not match the ABI signature."""
    code = "malformed-args"


class UnknownSender(ContractError):
    """Transaction sender is not a registered account."""
    code = "unknown-sender"


class CallDepthExceeded(ContractError):
    """Nested messages went deeper than MAX_CALL_DEPTH."""
    code = "call-depth-exceeded"
