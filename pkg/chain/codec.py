"""
Canonical binary serialization.

Every value is written as a one-byte tag followed by a fixed-width or
length-prefixed body, so equal values always serialize to equal bytes.
Maps are written with their entries sorted by encoded key.
"""
import hashlib
import struct

from runtime.types import Address

TAG_NONE = b"N"
TAG_FALSE = b"F"
TAG_TRUE = b"T"
TAG_INT = b"I"
TAG_STR = b"S"
TAG_BYTES = b"B"
TAG_ADDRESS = b"A"
TAG_LIST = b"L"
TAG_MAP = b"M"


class CodecError(ValueError):
    """Value cannot be canonically encoded."""


def encode(value):
    """
    Serialize a value canonically.

    Args:
        value: None, bool, int, str, bytes, Address, list/tuple, dict, or any
            object exposing ``canonical()``

    Returns:
        bytes: Canonical encoding
    """
    out = bytearray()
    _encode_into(value, out)
    return bytes(out)


def digest(value):
    """SHA-256 of the canonical encoding."""
    return hashlib.sha256(encode(value)).digest()


def _encode_into(value, out):
    # pylint: disable=R0912
    if value is None:
        out += TAG_NONE
    elif isinstance(value, bool):
        out += TAG_TRUE if value else TAG_FALSE
    elif isinstance(value, int):
        try:
            out += TAG_INT + struct.pack(">q", value)
        except struct.error as exc:
            raise CodecError(f"integer out of 64-bit range: {value}") from exc
    elif isinstance(value, str):
        _write_sized(out, TAG_STR, value.encode("utf-8"))
    elif isinstance(value, Address):
        out += TAG_ADDRESS + bytes(value)
    elif isinstance(value, (bytes, bytearray)):
        _write_sized(out, TAG_BYTES, bytes(value))
    elif isinstance(value, (list, tuple)):
        out += TAG_LIST + struct.pack(">I", len(value))
        for item in value:
            _encode_into(item, out)
    elif isinstance(value, dict):
        entries = sorted(((encode(key), item) for key, item in value.items()),
                         key=lambda entry: entry[0])
        out += TAG_MAP + struct.pack(">I", len(entries))
        for encoded_key, item in entries:
            out += encoded_key
            _encode_into(item, out)
    elif hasattr(value, "canonical"):
        _encode_into(value.canonical(), out)
    else:
        raise CodecError(f"cannot encode {type(value).__name__}")


def _write_sized(out, tag, data):
    out += tag + struct.pack(">I", len(data)) + data
