"""Utility functions and constants for the ledger."""

# ==================== MINING CONSTANTS ====================
# leading zero bits a block hash needs
DEFAULT_DIFFICULTY = 8
# nonces tried before giving up on a block
DEFAULT_NONCE_BUDGET = 1 << 22

# ==================== HASH CONSTANTS ====================
HASH_SIZE = 32
HASH_BITS = HASH_SIZE * 8
GENESIS_PREV_HASH = bytes(HASH_SIZE)
# nonces are packed as unsigned 64-bit integers
MAX_NONCE = (1 << 64) - 1

# ==================== SNAPSHOT CONSTANTS ====================
SNAPSHOT_SCHEMA_VERSION = 1


# ==================== PROOF OF WORK ====================
def leading_zero_bits(data):
    """
    Count leading zero bits of a byte string.

    Args:
        data (bytes): Digest to inspect

    Returns:
        int: Number of zero bits before the first set bit
    """
    value = int.from_bytes(data, "big")
    return len(data) * 8 - value.bit_length()


def meets_difficulty(block_digest, difficulty):
    """True when the digest has at least ``difficulty`` leading zero bits."""
    if difficulty <= 0:
        return True
    return leading_zero_bits(block_digest) >= difficulty
