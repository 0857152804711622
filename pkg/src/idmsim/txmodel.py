"""Transaction data model, input-data message codec, and semantic detection.

A transaction is metadata plus an arbitrary byte string in the input field.
Messages ride in that field as UTF-8; ``decode_idm`` recovers them only when
the bytes look like human-readable text (``is_semantic``), so ABI-encoded
contract calls and binary payloads pass through untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

BASE_GAS = 21_000
ADDRESS_LEN = 20


class TxJsonError(ValueError):
    """Malformed transaction JSON; message names the offending field."""


@dataclass(frozen=True)
class TxFieldsMeta:
    """Everything in a transaction except the input payload."""

    from_addr: bytes
    to_addr: bytes
    value: int
    nonce: int
    gas_limit: int
    max_fee_per_gas: int
    max_priority_fee_per_gas: int
    sender_sig: bytes = b""

    def __post_init__(self):
        for name, addr in (("from", self.from_addr), ("to", self.to_addr)):
            if len(addr) != ADDRESS_LEN:
                raise ValueError(f"{name} must be {ADDRESS_LEN} bytes")
        for name in ("value", "nonce", "gas_limit", "max_fee_per_gas",
                     "max_priority_fee_per_gas"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.max_priority_fee_per_gas > self.max_fee_per_gas:
            raise ValueError("maxPriorityFeePerGas exceeds maxFeePerGas")
        if self.gas_limit < BASE_GAS:
            raise ValueError(f"gasLimit below the {BASE_GAS} transfer minimum")

    def with_gas_limit(self, gas_limit: int) -> "TxFieldsMeta":
        return replace(self, gas_limit=gas_limit)


@dataclass(frozen=True)
class Transaction:
    meta: TxFieldsMeta
    input: bytes = b""


@dataclass(frozen=True)
class DecodedMessage:
    """A message recovered from input data, with its original byte length."""

    text: str
    byte_length: int

    def __post_init__(self):
        if self.byte_length != len(self.text.encode("utf-8")):
            raise ValueError("byte_length inconsistent with text")

    @classmethod
    def from_text(cls, text: str) -> "DecodedMessage":
        return cls(text, len(text.encode("utf-8")))


def encode_idm(message: str) -> bytes:
    """Encode a message for the input-data field (UTF-8)."""
    return message.encode("utf-8")


MIN_SEMANTIC_CHARS = 4
MIN_PRINTABLE_RATIO = 0.9


def is_semantic(data: bytes) -> bool:
    """Whether raw input bytes carry human-readable text.

    True iff the bytes decode as UTF-8 into at least four characters, at
    least 90% of which are printable (control characters count against the
    ratio), with at least one alphabetic character in any script.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        return False
    if len(text) < MIN_SEMANTIC_CHARS:
        return False
    printable = sum(1 for ch in text if ch.isprintable())
    if printable < MIN_PRINTABLE_RATIO * len(text):
        return False
    return any(ch.isalpha() for ch in text)


def decode_idm(data: bytes) -> DecodedMessage | None:
    """Extract the message from input data, or None for non-semantic bytes."""
    if not is_semantic(data):
        return None
    return DecodedMessage(data.decode("utf-8"), len(data))


def build_transaction(meta: TxFieldsMeta, input_data: bytes = b"") -> Transaction:
    """Assemble a transaction; input bytes are carried verbatim."""
    return Transaction(meta=meta, input=bytes(input_data))


# ---------------------------------------------------------------------------
# JSON codec. Byte fields are 0x-prefixed hex, integers decimal strings.

_INT_FIELDS = ("value", "nonce", "gasLimit", "maxFeePerGas",
               "maxPriorityFeePerGas")


def _hex(data: bytes) -> str:
    return "0x" + data.hex()


def _unhex(text: str, field: str) -> bytes:
    if not isinstance(text, str) or not text.startswith("0x"):
        raise TxJsonError(f"field {field!r}: expected 0x-prefixed hex")
    try:
        return bytes.fromhex(text[2:])
    except ValueError:
        raise TxJsonError(f"field {field!r}: invalid hex {text!r}") from None


def _unint(text: str, field: str) -> int:
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise TxJsonError(f"field {field!r}: expected decimal string") from None
    return value


def tx_to_dict(tx: Transaction) -> dict:
    m = tx.meta
    return {
        "from": _hex(m.from_addr),
        "to": _hex(m.to_addr),
        "value": str(m.value),
        "nonce": str(m.nonce),
        "gasLimit": str(m.gas_limit),
        "maxFeePerGas": str(m.max_fee_per_gas),
        "maxPriorityFeePerGas": str(m.max_priority_fee_per_gas),
        "input": _hex(tx.input),
        "senderSig": _hex(m.sender_sig),
    }


def tx_from_dict(obj: dict) -> Transaction:
    if not isinstance(obj, dict):
        raise TxJsonError("transaction must be a JSON object")
    for key in ("from", "to", "input", "senderSig", *_INT_FIELDS):
        if key not in obj:
            raise TxJsonError(f"field {key!r}: missing")
    try:
        meta = TxFieldsMeta(
            from_addr=_unhex(obj["from"], "from"),
            to_addr=_unhex(obj["to"], "to"),
            value=_unint(obj["value"], "value"),
            nonce=_unint(obj["nonce"], "nonce"),
            gas_limit=_unint(obj["gasLimit"], "gasLimit"),
            max_fee_per_gas=_unint(obj["maxFeePerGas"], "maxFeePerGas"),
            max_priority_fee_per_gas=_unint(
                obj["maxPriorityFeePerGas"], "maxPriorityFeePerGas"),
            sender_sig=_unhex(obj["senderSig"], "senderSig"),
        )
    except ValueError as exc:
        if isinstance(exc, TxJsonError):
            raise
        raise TxJsonError(str(exc)) from None
    return Transaction(meta=meta, input=_unhex(obj["input"], "input"))


def tx_to_json(tx: Transaction) -> str:
    return json.dumps(tx_to_dict(tx))


def tx_from_json(text: str) -> Transaction:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TxJsonError(f"invalid JSON: {exc}") from None
    return tx_from_dict(obj)


def mempool_to_json(txs: list[Transaction]) -> str:
    return json.dumps([tx_to_dict(tx) for tx in txs], indent=2)


def mempool_from_json(text: str) -> list[Transaction]:
    try:
        arr = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TxJsonError(f"invalid JSON: {exc}") from None
    if not isinstance(arr, list):
        raise TxJsonError("mempool must be a JSON array")
    return [tx_from_dict(obj) for obj in arr]
