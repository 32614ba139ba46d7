"""Exceptions raised by nodes while mining, validating and persisting blocks."""


class ChainError(Exception):
    """Base class for ledger failures."""
    code = "chain-error"


class MiningError(ChainError):
    """A block could not be mined."""
    code = "mining-error"


class MiningExhausted(MiningError):
    """No nonce within the budget satisfied the difficulty."""
    code = "mining-exhausted"


class EmptyMempool(MiningError):
    """Nothing to mine and empty blocks are disabled."""
    code = "empty-mempool"


class BlockRejected(ChainError):
    """A block failed validation; ``check`` names the failed check."""
    code = "block-rejected"

    def __init__(self, check, message=""):
        super().__init__(message or f"block rejected: {check}")
        self.check = check


class SnapshotError(ChainError):
    """A snapshot document could not be parsed."""
    code = "snapshot-error"
