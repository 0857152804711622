"""Moderation proofs: classifier-signed attestations embedded in input data.

A classifier that finds a message non-toxic signs the Keccak-256 hash of the
message bytes with its secp256k1 key; the sender appends the 65-byte
signature to the message and builders verify it against the classifier's
published public key before inclusion.

Note the attestation binds only the message: a valid (message, proof) pair is
replayable verbatim by any sender in any transaction. That is inherent to
this design and left visible rather than patched.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from . import secp256k1
from .classifier import ClassifierConfig, Label, classify
from .keccak import keccak256
from .txmodel import DecodedMessage

PROOF_LEN = secp256k1.SIG_LEN  # r(32) || s(32) || recovery id(1)


class AttestationRefusedError(RuntimeError):
    """The classifier found the message toxic and will not sign it."""


@dataclass(frozen=True)
class ModerationProof:
    """A 65-byte recoverable signature attesting non-toxicity.

    Construction only checks length so tampered vectors can be represented;
    issue_proof always emits canonical (lower half-order s) signatures and
    verification rejects anything non-canonical.
    """

    sig_bytes: bytes

    def __post_init__(self):
        if len(self.sig_bytes) != PROOF_LEN:
            raise ValueError(f"proof must be exactly {PROOF_LEN} bytes")


@dataclass(frozen=True)
class ClassifierKeyPair:
    secret_key: bytes   # 32-byte scalar
    public_key: bytes   # 33-byte compressed point

    def __post_init__(self):
        derived = derive_public_key(self.secret_key)
        if derived != self.public_key:
            raise ValueError("public_key does not match secret_key")

    @property
    def secret_int(self) -> int:
        return int.from_bytes(self.secret_key, "big")


def derive_public_key(secret_key: bytes) -> bytes:
    secret = int.from_bytes(secret_key, "big")
    if not 0 < secret < secp256k1.N:
        raise ValueError("secret key out of range")
    return secp256k1.compress(secp256k1.point_mul(secret))


def keygen(seed: bytes | None = None) -> ClassifierKeyPair:
    """Generate a keypair; a 32-byte seed makes generation deterministic.

    Seeds mapping outside the valid scalar range are rehashed until valid
    (never surfaces as an error).
    """
    if seed is not None and len(seed) != 32:
        raise ValueError("seed must be 32 bytes")
    material = seed if seed is not None else os.urandom(32)
    candidate = int.from_bytes(material, "big")
    while not 0 < candidate < secp256k1.N:
        material = keccak256(material)
        candidate = int.from_bytes(material, "big")
    secret_key = candidate.to_bytes(32, "big")
    return ClassifierKeyPair(secret_key, derive_public_key(secret_key))


def message_hash(message: DecodedMessage) -> bytes:
    """Keccak-256 over the message's UTF-8 bytes."""
    return keccak256(message.text.encode("utf-8"))


def issue_proof(keys: ClassifierKeyPair, message: DecodedMessage,
                config: ClassifierConfig) -> ModerationProof:
    """Classify, then sign the message hash if and only if non-toxic.

    Deterministic signing nonce: identical messages yield identical proofs.
    Classifier transport errors propagate unchanged.
    """
    verdict = classify(message, config)
    if verdict.label is Label.TOXIC:
        raise AttestationRefusedError(
            "attestation refused: message classified toxic")
    sig = secp256k1.sign(keys.secret_int, message_hash(message))
    return ModerationProof(sig)


def embed_proof(message_bytes: bytes, proof: ModerationProof) -> bytes:
    """Final input payload: message bytes followed by the 65-byte proof."""
    return bytes(message_bytes) + proof.sig_bytes


def verify_proof(pk: bytes, message: DecodedMessage, proof) -> bool:
    """True iff proof is a canonical, valid signature over the message hash.

    Malformed or non-canonical signature bytes return False, never raise.
    Accepts a ModerationProof or raw bytes.
    """
    sig = proof.sig_bytes if isinstance(proof, ModerationProof) else bytes(proof)
    parsed = secp256k1.parse_signature(sig)
    if parsed is None:
        return False
    r, s, _ = parsed
    return secp256k1.verify(pk, message_hash(message), r, s)


def split_proof(input_data: bytes, pk: bytes):
    """Split input data into (message bytes, proof) if a valid proof ends it.

    Returns None when no valid embedded proof exists (too short, suffix not a
    canonical signature, or signature fails against the prefix hash); None is
    a normal outcome, not corruption.
    """
    if len(input_data) < PROOF_LEN + 1:
        return None
    prefix, suffix = input_data[:-PROOF_LEN], input_data[-PROOF_LEN:]
    parsed = secp256k1.parse_signature(suffix)
    if parsed is None:
        return None
    r, s, _ = parsed
    if not secp256k1.verify(pk, keccak256(prefix), r, s):
        return None
    return prefix, ModerationProof(suffix)


# ---------------------------------------------------------------------------
# Key files: secret key as bare hex with owner-only permissions; public key
# distributed as 33-byte compressed hex.

def save_secret_key(keys: ClassifierKeyPair, path: str) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(keys.secret_key.hex() + "\n")


def load_secret_key(path: str) -> ClassifierKeyPair:
    with open(path, encoding="utf-8") as fh:
        text = fh.read().strip()
    if text.startswith("0x"):
        text = text[2:]
    secret_key = bytes.fromhex(text)
    if len(secret_key) != 32:
        raise ValueError(f"key file {path!r} must hold 32 hex-encoded bytes")
    return ClassifierKeyPair(secret_key, derive_public_key(secret_key))
