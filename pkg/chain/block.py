"""Blocks, genesis parameters and the block hash."""
import hashlib
import struct
from dataclasses import dataclass

from chain.codec import encode
from chain.utils import DEFAULT_DIFFICULTY, DEFAULT_NONCE_BUDGET, GENESIS_PREV_HASH
from runtime.types import ZERO_ADDRESS
from runtime.world import World


@dataclass(frozen=True)
class Block:
    """Hash-chained batch of transactions with its post-execution state root."""
    # pylint: disable=R0902
    height: int
    prev_hash: bytes
    transactions: tuple
    state_root: bytes
    nonce: int
    miner: bytes
    timestamp: int

    def header_fields(self):
        """Every field but the nonce, in fixed order."""
        return [self.height, self.prev_hash, list(self.transactions), self.state_root,
                self.miner, self.timestamp]


def header_prefix(block):
    """Canonical bytes hashed in front of the nonce."""
    return encode(block.header_fields())


def hash_with_nonce(prefix, nonce):
    """Block digest for a given header prefix and nonce."""
    return hashlib.sha256(prefix + struct.pack(">Q", nonce)).digest()


def block_hash(block):
    """
    32-byte digest of a block.

    The serialization covers every field, the nonce last, so mining can
    reuse the header prefix while it searches.
    """
    return hash_with_nonce(header_prefix(block), block.nonce)


@dataclass(frozen=True)
class Genesis:
    """
    Everything a replica needs to rebuild the initial world.

    Two nodes built from equal Genesis values start from identical state.
    """
    # pylint: disable=R0902
    seed: int = 0
    difficulty: int = DEFAULT_DIFFICULTY
    accounts: tuple = ()
    timestamp: int = 0
    allow_empty_blocks: bool = False
    strict_time: bool = False
    nonce_budget: int = DEFAULT_NONCE_BUDGET

    def build_world(self, kinds=None):
        """Fresh world with the genesis accounts registered in order."""
        world = World(self.seed, kinds, self.strict_time)
        for label in self.accounts:
            world.create_account(label)
        return world


def genesis_block(genesis, world):
    """The fixed first block; exempt from proof of work."""
    return Block(0, GENESIS_PREV_HASH, (), world.digest(), 0, ZERO_ADDRESS, genesis.timestamp)
