"""JSON chain snapshots: genesis parameters plus the full block list."""
import json
from pathlib import Path

from chain.block import Block, Genesis
from chain.errors import SnapshotError
from chain.utils import SNAPSHOT_SCHEMA_VERSION
from runtime.types import Address, Transaction


# ==================== TYPED VALUES ====================
def value_to_json(value):
    """Tag a typed ABI value so it survives a JSON round trip."""
    # pylint: disable=R0911
    if value is None:
        return None
    if isinstance(value, bool):
        return {"bool": value}
    if isinstance(value, int):
        return {"int": value}
    if isinstance(value, str):
        return {"str": value}
    if isinstance(value, Address):
        return {"address": str(value)}
    if isinstance(value, (list, tuple)):
        return {"list": [value_to_json(item) for item in value]}
    raise SnapshotError(f"cannot store {type(value).__name__} in a snapshot")


def value_from_json(data):
    """Inverse of value_to_json."""
    # pylint: disable=R0911
    if data is None:
        return None
    if not isinstance(data, dict) or len(data) != 1:
        raise SnapshotError(f"bad typed value {data!r}")
    (tag, raw), = data.items()
    if tag == "bool":
        return bool(raw)
    if tag == "int":
        return int(raw)
    if tag == "str":
        return str(raw)
    if tag == "address":
        return Address.from_hex(raw)
    if tag == "list":
        return tuple(value_from_json(item) for item in raw)
    raise SnapshotError(f"unknown value tag {tag!r}")


# ==================== TRANSACTIONS AND BLOCKS ====================
def transaction_to_json(tx):
    """Snapshot form of a transaction (id kept as recorded, never recomputed)."""
    return {
        "sender": str(tx.sender),
        "target": str(tx.target) if tx.target is not None else None,
        "abi": tx.abi_name,
        "args": [value_to_json(arg) for arg in tx.args],
        "suppliedTime": tx.supplied_time,
        "nonce": tx.nonce,
        "txId": tx.tx_id.hex(),
    }


def transaction_from_json(data):
    """Rebuild a transaction exactly as stored."""
    target = data["target"]
    return Transaction(
        Address.from_hex(data["sender"]),
        Address.from_hex(target) if target is not None else None,
        data["abi"],
        tuple(value_from_json(arg) for arg in data["args"]),
        data["suppliedTime"],
        data["nonce"],
        bytes.fromhex(data["txId"]),
    )


def block_to_json(block):
    """Snapshot form of a block."""
    return {
        "height": block.height,
        "prevHash": block.prev_hash.hex(),
        "transactions": [transaction_to_json(tx) for tx in block.transactions],
        "stateRoot": block.state_root.hex(),
        "nonce": block.nonce,
        "miner": str(block.miner),
        "timestamp": block.timestamp,
    }


def block_from_json(data):
    """Rebuild a block exactly as stored."""
    return Block(
        data["height"],
        bytes.fromhex(data["prevHash"]),
        tuple(transaction_from_json(tx) for tx in data["transactions"]),
        bytes.fromhex(data["stateRoot"]),
        data["nonce"],
        Address.from_hex(data["miner"]),
        data["timestamp"],
    )


def genesis_to_json(genesis):
    """Snapshot form of the genesis parameters."""
    return {
        "seed": genesis.seed,
        "accounts": list(genesis.accounts),
        "timestamp": genesis.timestamp,
        "allowEmptyBlocks": genesis.allow_empty_blocks,
        "strictTime": genesis.strict_time,
        "nonceBudget": genesis.nonce_budget,
    }


def genesis_from_json(data, difficulty):
    """Rebuild genesis parameters; difficulty is stored beside them."""
    return Genesis(
        seed=data["seed"],
        difficulty=difficulty,
        accounts=tuple(data["accounts"]),
        timestamp=data["timestamp"],
        allow_empty_blocks=data["allowEmptyBlocks"],
        strict_time=data["strictTime"],
        nonce_budget=data["nonceBudget"],
    )


# ==================== DOCUMENTS ====================
def snapshot_document(node):
    """Everything needed to replay a node's chain from genesis."""
    return {
        "schemaVersion": SNAPSHOT_SCHEMA_VERSION,
        "genesis": genesis_to_json(node.genesis),
        "difficulty": node.difficulty,
        "blocks": [block_to_json(block) for block in node.chain[1:]],
        "stateRoot": node.state_root.hex(),
    }


def save_snapshot(node, path):
    """Write a node's snapshot as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(snapshot_document(node), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def load_snapshot(path):
    """
    Read a snapshot document.

    Returns:
        tuple: (genesis, blocks, recorded_state_root)

    Raises:
        SnapshotError: unreadable, wrong version, or missing fields
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    if document.get("schemaVersion") != SNAPSHOT_SCHEMA_VERSION:
        raise SnapshotError(f"unsupported snapshot schemaVersion {document.get('schemaVersion')!r}")
    try:
        genesis = genesis_from_json(document["genesis"], document["difficulty"])
        blocks = [block_from_json(block) for block in document["blocks"]]
        state_root = bytes.fromhex(document["stateRoot"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"malformed snapshot {path}: {exc}") from exc
    return genesis, blocks, state_root
