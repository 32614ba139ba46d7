"""Utility functions and constants for the contract runtime."""
import hashlib
import struct

# ==================== IDENTITY CONSTANTS ====================
ADDRESS_SIZE = 20

# domain tags keep account and contract address spaces apart
ACCOUNT_DOMAIN = b"account"
CONTRACT_DOMAIN = b"contract"

# ==================== EXECUTION CONSTANTS ====================
# a transaction runs at depth 0, each nested message adds one
MAX_CALL_DEPTH = 8

# largest integer a world value can hold (signed 64-bit)
MAX_STORED_INT = (1 << 63) - 1

STATUS_OK = "ok"


# ==================== ADDRESS DERIVATION ====================
def derive_address_bytes(seed, domain, *parts):
    """
    Derive a deterministic 20-byte identifier.

    Args:
        seed: World seed (64-bit integer)
        domain: ACCOUNT_DOMAIN or CONTRACT_DOMAIN
        parts: Extra bytes or ints mixed into the digest (counter, tx id, label)

    Returns:
        bytes: First ADDRESS_SIZE bytes of the SHA-256 digest
    """
    hasher = hashlib.sha256()
    hasher.update(domain)
    hasher.update(struct.pack(">Q", seed & 0xFFFFFFFFFFFFFFFF))
    for part in parts:
        if isinstance(part, int):
            hasher.update(struct.pack(">Q", part))
        elif isinstance(part, str):
            hasher.update(part.encode("utf-8"))
        else:
            hasher.update(bytes(part))
    return hasher.digest()[:ADDRESS_SIZE]
