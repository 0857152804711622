"""Keccak-256 (original pad10*1 padding, not SHA-3).

The permutation is the hot kernel of proof verification: every moderation
proof check hashes the embedded message, and hashing cost grows linearly with
message length. Two interchangeable backends are provided:

* ``numba`` — the sponge loop compiled with ``@njit`` over uint64 lanes
  (default when numba is importable).
* ``pure-python`` — the same permutation on plain ints, used when numba is
  unavailable or when ``IDMSIM_PURE_PY=1`` is set.

Both produce identical digests; ``backends()`` exposes them for the
``kernel-bench`` comparison.
"""

from __future__ import annotations

import os

import numpy as np

RATE = 136  # bytes absorbed per permutation at 512-bit capacity

_ROTC = (1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14,
         27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44)
_PILN = (10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4,
         15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1)
_RC = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

_MASK = (1 << 64) - 1


def _pad(data: bytes) -> bytes:
    padlen = RATE - (len(data) % RATE)
    if padlen == 1:
        return data + b"\x81"
    return data + b"\x01" + b"\x00" * (padlen - 2) + b"\x80"


def keccak256_py(data: bytes) -> bytes:
    """Pure-Python backend."""
    padded = _pad(data)
    st = [0] * 25
    for off in range(0, len(padded), RATE):
        block = padded[off:off + RATE]
        for i in range(17):
            st[i] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        for rc in _RC:
            # theta
            bc = [st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20]
                  for i in range(5)]
            for i in range(5):
                t = bc[(i + 4) % 5] ^ (((bc[(i + 1) % 5] << 1)
                                        | (bc[(i + 1) % 5] >> 63)) & _MASK)
                for j in range(0, 25, 5):
                    st[j + i] ^= t
            # rho + pi
            t = st[1]
            for i in range(24):
                j = _PILN[i]
                r = _ROTC[i]
                st[j], t = ((t << r) | (t >> (64 - r))) & _MASK, st[j]
            # chi
            for j in range(0, 25, 5):
                row = st[j:j + 5]
                for i in range(5):
                    st[j + i] = row[i] ^ (~row[(i + 1) % 5] & row[(i + 2) % 5] & _MASK)
            # iota
            st[0] ^= rc
    return b"".join(lane.to_bytes(8, "little") for lane in st[:4])


def _make_numba_backend():
    from numba import njit

    rotc = np.array(_ROTC, dtype=np.uint64)
    piln = np.array(_PILN, dtype=np.int64)
    rcs = np.array(_RC, dtype=np.uint64)
    one = np.uint64(1)
    sixty_three = np.uint64(63)
    sixty_four = np.uint64(64)

    @njit(cache=True)
    def _absorb(blocks, nblocks):  # pragma: no cover - exercised via wrapper
        st = np.zeros(25, dtype=np.uint64)
        bc = np.zeros(5, dtype=np.uint64)
        for b in range(nblocks):
            off = b * 17
            for i in range(17):
                st[i] ^= blocks[off + i]
            for rnd in range(24):
                for i in range(5):
                    bc[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20]
                for i in range(5):
                    t = bc[(i + 4) % 5] ^ ((bc[(i + 1) % 5] << one)
                                           | (bc[(i + 1) % 5] >> sixty_three))
                    for j in range(0, 25, 5):
                        st[j + i] ^= t
                t = st[1]
                for i in range(24):
                    j = piln[i]
                    r = rotc[i]
                    tmp = st[j]
                    st[j] = (t << r) | (t >> (sixty_four - r))
                    t = tmp
                for j in range(0, 25, 5):
                    for i in range(5):
                        bc[i] = st[j + i]
                    for i in range(5):
                        st[j + i] = bc[i] ^ ((~bc[(i + 1) % 5]) & bc[(i + 2) % 5])
                st[0] ^= rcs[rnd]
        return st

    def keccak256_numba(data: bytes) -> bytes:
        padded = _pad(data)
        blocks = np.frombuffer(padded, dtype="<u8")
        st = _absorb(blocks, len(padded) // RATE)
        return st[:4].tobytes()

    return keccak256_numba


def _select_backend():
    if os.environ.get("IDMSIM_PURE_PY"):
        return "pure-python", keccak256_py
    try:
        return "numba", _make_numba_backend()
    except ImportError:
        return "pure-python", keccak256_py


BACKEND, keccak256 = _select_backend()


def backends() -> dict:
    """All importable backends, by name (for cross-checks and benchmarks)."""
    out = {"pure-python": keccak256_py}
    try:
        out["numba"] = _make_numba_backend()
    except ImportError:
        pass
    return out
