"""secp256k1 ECDSA with recoverable 65-byte signatures (r ‖ s ‖ recovery id).

Signing uses a deterministic RFC-6979 nonce so identical inputs always yield
identical signature bytes; s is normalized to the lower half-order and the
recovery id flipped accordingly. Verification in the hot path is delegated to
OpenSSL through ``cryptography`` when the curve is available there (it is
roughly an order of magnitude faster); ``verify_py`` is an independent
from-the-curve-equations verifier kept for cross-checking and as a fallback.
"""

from __future__ import annotations

import hashlib
import hmac
from functools import lru_cache

P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

SIG_LEN = 65
HALF_N = N // 2

try:
    from cryptography.hazmat.primitives import hashes
    from cryptography.hazmat.primitives.asymmetric import ec
    from cryptography.hazmat.primitives.asymmetric.utils import (
        Prehashed,
        encode_dss_signature,
    )
    from cryptography.exceptions import InvalidSignature, UnsupportedAlgorithm

    ec.derive_private_key(1, ec.SECP256K1())
    _ECDSA_PREHASHED = ec.ECDSA(Prehashed(hashes.SHA256()))
    _OPENSSL = True
except Exception:  # pragma: no cover - environment without secp256k1 support
    _OPENSSL = False


# ---------------------------------------------------------------------------
# Field / point arithmetic (Jacobian coordinates; None is the identity)

def _jdbl(p):
    if p is None:
        return None
    x, y, z = p
    if y == 0:
        return None
    ys = y * y % P
    s = 4 * x * ys % P
    m = 3 * x * x % P
    x3 = (m * m - 2 * s) % P
    y3 = (m * (s - x3) - 8 * ys * ys) % P
    z3 = 2 * y * z % P
    return (x3, y3, z3)


def _jadd(p, q):
    if p is None:
        return q
    if q is None:
        return p
    x1, y1, z1 = p
    x2, y2, z2 = q
    z1s = z1 * z1 % P
    z2s = z2 * z2 % P
    u1 = x1 * z2s % P
    u2 = x2 * z1s % P
    s1 = y1 * z2s * z2 % P
    s2 = y2 * z1s * z1 % P
    if u1 == u2:
        if s1 != s2:
            return None
        return _jdbl(p)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    h2 = h * h % P
    h3 = h2 * h % P
    u1h2 = u1 * h2 % P
    x3 = (r * r - h3 - 2 * u1h2) % P
    y3 = (r * (u1h2 - x3) - s1 * h3) % P
    z3 = h * z1 * z2 % P
    return (x3, y3, z3)


def _jmul(point, k):
    acc = None
    add = point
    while k:
        if k & 1:
            acc = _jadd(acc, add)
        add = _jdbl(add)
        k >>= 1
    return acc


def _affine(p):
    if p is None:
        return None
    x, y, z = p
    zi = pow(z, -1, P)
    zi2 = zi * zi % P
    return (x * zi2 % P, y * zi2 * zi % P)


def point_mul(k: int, point: tuple | None = None) -> tuple | None:
    """k·point in affine coordinates (generator when point is omitted)."""
    base = (GX, GY, 1) if point is None else (point[0], point[1], 1)
    return _affine(_jmul(base, k % N))


def on_curve(point: tuple) -> bool:
    x, y = point
    return 0 < x < P and 0 < y < P and (y * y - (x * x * x + 7)) % P == 0


def compress(point: tuple) -> bytes:
    x, y = point
    return bytes([2 + (y & 1)]) + x.to_bytes(32, "big")


def decompress(data: bytes) -> tuple:
    """33-byte compressed point -> (x, y). Raises ValueError if invalid."""
    if len(data) != 33 or data[0] not in (2, 3):
        raise ValueError("not a 33-byte compressed point")
    x = int.from_bytes(data[1:], "big")
    if not 0 < x < P:
        raise ValueError("x out of range")
    y = pow((x * x * x + 7) % P, (P + 1) // 4, P)
    if (y * y - (x * x * x + 7)) % P != 0:
        raise ValueError("x not on curve")
    if y & 1 != data[0] & 1:
        y = P - y
    return (x, y)


# ---------------------------------------------------------------------------
# RFC-6979 deterministic nonce

def _rfc6979_nonce(secret: int, digest: bytes) -> int:
    h = int.from_bytes(digest, "big") % N
    key = secret.to_bytes(32, "big") + h.to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + key, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + key, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 0 < candidate < N:
            return candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


# ---------------------------------------------------------------------------
# Sign / parse / verify / recover

def sign(secret: int, digest: bytes) -> bytes:
    """Deterministic recoverable signature over a 32-byte digest."""
    if not 0 < secret < N:
        raise ValueError("secret key out of range")
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    z = int.from_bytes(digest, "big") % N
    k = _rfc6979_nonce(secret, digest)
    while True:
        rx, ry = point_mul(k)
        r = rx % N
        s = pow(k, -1, N) * (z + r * secret) % N
        if r != 0 and s != 0:
            break
        k = _rfc6979_nonce(secret, digest + b"\x00")  # astronomically unlikely
    v = ry & 1
    if s > HALF_N:
        s = N - s
        v ^= 1
    return r.to_bytes(32, "big") + s.to_bytes(32, "big") + bytes([v])


def parse_signature(sig: bytes) -> tuple | None:
    """(r, s, v) if sig is a canonical 65-byte signature encoding, else None.

    Canonical means r, s in range with s in the lower half-order and a
    recovery id of 0 or 1; high-s encodings are rejected outright.
    """
    if len(sig) != SIG_LEN:
        return None
    r = int.from_bytes(sig[:32], "big")
    s = int.from_bytes(sig[32:64], "big")
    v = sig[64]
    if not 0 < r < N or not 0 < s <= HALF_N or v not in (0, 1):
        return None
    return (r, s, v)


def verify_py(pubkey: tuple, digest: bytes, r: int, s: int) -> bool:
    """Independent pure-math ECDSA verification (slow; oracle/fallback)."""
    if not on_curve(pubkey):
        return False
    z = int.from_bytes(digest, "big") % N
    si = pow(s, -1, N)
    u1 = z * si % N
    u2 = r * si % N
    pt = _affine(_jadd(_jmul((GX, GY, 1), u1),
                       _jmul((pubkey[0], pubkey[1], 1), u2)))
    return pt is not None and pt[0] % N == r


if _OPENSSL:
    @lru_cache(maxsize=64)
    def _openssl_pubkey(pubkey_bytes: bytes):
        return ec.EllipticCurvePublicKey.from_encoded_point(
            ec.SECP256K1(), pubkey_bytes)

    def verify(pubkey_bytes: bytes, digest: bytes, r: int, s: int) -> bool:
        """ECDSA verification against a 33-byte compressed public key."""
        try:
            key = _openssl_pubkey(pubkey_bytes)
            key.verify(encode_dss_signature(r, s), digest, _ECDSA_PREHASHED)
            return True
        except (InvalidSignature, ValueError, UnsupportedAlgorithm):
            return False
else:  # pragma: no cover
    def verify(pubkey_bytes: bytes, digest: bytes, r: int, s: int) -> bool:
        try:
            point = decompress(pubkey_bytes)
        except ValueError:
            return False
        return verify_py(point, digest, r, s)


def recover(digest: bytes, r: int, s: int, v: int) -> tuple | None:
    """Public key recovery (the ecrecover primitive); None if impossible."""
    if not 0 < r < N or not 0 < s < N or v not in (0, 1):
        return None
    x = r  # the x = r + N candidate has no recovery-id encoding here
    alpha = (x * x * x + 7) % P
    y = pow(alpha, (P + 1) // 4, P)
    if (y * y - alpha) % P != 0:
        return None
    if y & 1 != v:
        y = P - y
    z = int.from_bytes(digest, "big") % N
    ri = pow(r, -1, N)
    pt = _jadd(_jmul((x, y, 1), s * ri % N),
               _jmul((GX, GY, 1), (-z * ri) % N))
    return _affine(pt)
