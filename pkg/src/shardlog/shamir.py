"""(k, n) threshold secret sharing of byte strings over GF(2^8).

Every byte position of the secret gets its own fresh random polynomial of
degree k-1 whose constant term is the secret byte; share i holds the
evaluations at x_i for all positions. Any k shares reconstruct the secret by
Lagrange interpolation at x = 0; any k-1 shares are consistent with every
candidate secret.

Randomness is injected as a ``random.Random`` so splits are reproducible
under a fixed seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from random import Random

from .gf256 import INV, MUL

# (node id, entry index): which sealed log entry a share belongs to
EntryId = tuple[bytes, int]

NODE_ID_LEN = 16
DEFAULT_ENTRY_ID: EntryId = (b"\x00" * NODE_ID_LEN, 0)

_SHARE_HEADER = struct.Struct(">16sQBI")  # node id, entry index, x, y length


@dataclass(frozen=True)
class SharingParams:
    """Threshold k, share count n, and the n distinct nonzero x-coordinates."""

    threshold: int
    share_count: int
    x_coords: tuple[int, ...] = ()

    def __post_init__(self):
        k, n = self.threshold, self.share_count
        if not 1 <= k <= n <= 255:
            raise ValueError(f"need 1 <= k <= n <= 255, got k={k} n={n}")
        if not self.x_coords:
            object.__setattr__(self, "x_coords", tuple(range(1, n + 1)))
        xs = self.x_coords
        if len(xs) != n:
            raise ValueError(f"expected {n} x-coordinates, got {len(xs)}")
        if len(set(xs)) != n:
            raise ValueError("x-coordinates must be distinct")
        if any(not 1 <= x <= 255 for x in xs):
            raise ValueError("x-coordinates must be nonzero field elements")


@dataclass(frozen=True)
class Share:
    """One fragment of a shared secret: y_bytes[j] = p_j(x)."""

    entry_id: EntryId
    x: int
    y_bytes: bytes

    def __post_init__(self):
        if not 1 <= self.x <= 255:
            raise ValueError(f"share x must be a nonzero field element, got {self.x}")
        if len(self.entry_id[0]) != NODE_ID_LEN:
            raise ValueError("entry node id must be 16 bytes")


def split_secret(
    secret: bytes,
    params: SharingParams,
    rng: Random,
    entry_id: EntryId = DEFAULT_ENTRY_ID,
) -> list[Share]:
    """Split ``secret`` into n shares, any k of which reconstruct it.

    A fresh degree-(k-1) polynomial is drawn per byte position; the rng
    supplies the k-1 non-constant coefficients for every position.
    """
    if not secret:
        raise ValueError("cannot split an empty secret")
    k = params.threshold
    length = len(secret)
    # coefficient block: position j uses bytes [j*(k-1), (j+1)*(k-1))
    coeffs = rng.randbytes((k - 1) * length) if k > 1 else b""

    shares = []
    for x in params.x_coords:
        row = MUL[x]  # row[v] == v * x; Horner step below stays table-only
        y = bytearray(length)
        for j in range(length):
            acc = 0
            base = j * (k - 1)
            for d in range(k - 2, -1, -1):
                acc = MUL[acc][x] ^ coeffs[base + d]
            y[j] = row[acc] ^ secret[j]
        shares.append(Share(entry_id=entry_id, x=x, y_bytes=bytes(y)))
    return shares


def reconstruct_secret(shares: list[Share]) -> bytes:
    """Interpolate the sharing polynomials at x = 0, byte position by position.

    Succeeds whenever the supplied shares are at least the original k and
    untampered; fewer or corrupted shares yield garbage, not an error — the
    caller's integrity check (MAC) is the arbiter.
    """
    if not shares:
        raise ValueError("need at least one share")
    entry_id = shares[0].entry_id
    length = len(shares[0].y_bytes)
    xs = []
    for s in shares:
        if s.entry_id != entry_id:
            raise ValueError("shares belong to different entries")
        if len(s.y_bytes) != length:
            raise ValueError("shares have mismatched lengths")
        xs.append(s.x)
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate x-coordinates")

    weights = lagrange_weights_at_zero(xs)
    secret = bytearray(length)
    for w, s in zip(weights, shares):
        row = MUL[w]
        y = s.y_bytes
        for j in range(length):
            secret[j] ^= row[y[j]]
    return bytes(secret)


def lagrange_weights_at_zero(xs: list[int]) -> list[int]:
    """Coefficients w_i with secret = XOR_i w_i * y_i; w_i = prod_{j!=i} x_j / (x_j ^ x_i)."""
    weights = []
    for i, xi in enumerate(xs):
        w = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            w = MUL[MUL[w][xj]][INV[xi ^ xj]]
        weights.append(w)
    return weights


def evaluate_from_shares(shares: list[Share], x_target: int) -> bytes:
    """Evaluate the polynomials defined by ``shares`` at another x-coordinate.

    Used to test whether a further share is consistent with a subset that
    already reconstructed cleanly.
    """
    xs = [s.x for s in shares]
    if x_target in xs:
        raise ValueError("target x collides with an input share")
    length = len(shares[0].y_bytes)
    # same Lagrange basis, evaluated at x_target instead of 0
    weights = []
    for i, xi in enumerate(xs):
        w = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            w = MUL[MUL[w][x_target ^ xj]][INV[xi ^ xj]]
        weights.append(w)
    out = bytearray(length)
    for w, s in zip(weights, shares):
        row = MUL[w]
        y = s.y_bytes
        for j in range(length):
            out[j] ^= row[y[j]]
    return bytes(out)


def pack_share(share: Share) -> bytes:
    """Bit-exact wire format: node id (16) | entry index (8 BE) | x (1) | y len (4 BE) | y."""
    node, index = share.entry_id
    return _SHARE_HEADER.pack(node, index, share.x, len(share.y_bytes)) + share.y_bytes


def unpack_share(data: bytes) -> Share:
    if len(data) < _SHARE_HEADER.size:
        raise ValueError(f"share record truncated: {len(data)} bytes")
    node, index, x, y_len = _SHARE_HEADER.unpack_from(data)
    y = data[_SHARE_HEADER.size:]
    if len(y) != y_len:
        raise ValueError(f"share record length mismatch: header says {y_len}, got {len(y)}")
    return Share(entry_id=(node, index), x=x, y_bytes=y)
