"""Random share placement and the adversary's exact odds against it.

Each sealed entry's n shares go to n distinct peers drawn uniformly without
replacement, fresh per entry. Against a coalition of c compromised peers out
of M, the number of an entry's shares landing on the coalition is
hypergeometric, which gives closed forms for the two things an adversary can
try: collecting k shares (read) or destroying enough that fewer than k
survive (suppress).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from random import Random

from .shamir import EntryId, SharingParams

_RECORD_HEAD = struct.Struct(">16sQB")


@dataclass(frozen=True)
class PlacementPolicy:
    """Sharing params plus the candidate peers (never the originating node)."""

    params: SharingParams
    peers: frozenset[bytes]

    def __post_init__(self):
        if self.params.share_count > len(self.peers):
            raise ValueError(
                f"{self.params.share_count} shares but only {len(self.peers)} candidate peers"
            )
        if any(len(p) != 16 for p in self.peers):
            raise ValueError("peer ids must be 16 bytes")


@dataclass(frozen=True)
class DispersalRecord:
    """Where one entry's shares went: x-coordinate -> node id, all distinct."""

    entry_id: EntryId
    assignment: dict[int, bytes]

    def __post_init__(self):
        nodes = list(self.assignment.values())
        if len(set(nodes)) != len(nodes):
            raise ValueError("assigned nodes must be pairwise distinct")


def choose_nodes(entry_id: EntryId, policy: PlacementPolicy, rng: Random) -> DispersalRecord:
    """Sample n distinct peers uniformly and pair them with the x-coordinates.

    Peers are sorted before sampling so a fixed seed gives a fixed draw
    regardless of set iteration order.
    """
    n = policy.params.share_count
    chosen = rng.sample(sorted(policy.peers), n)
    assignment = dict(zip(policy.params.x_coords, chosen))
    return DispersalRecord(entry_id=entry_id, assignment=assignment)


def _check_bounds(peer_count: int, compromised: int, shares: int, threshold: int) -> None:
    if not 0 <= compromised <= peer_count:
        raise ValueError(f"need 0 <= c <= M, got c={compromised} M={peer_count}")
    if not 1 <= threshold <= shares <= peer_count:
        raise ValueError(
            f"need 1 <= k <= n <= M, got k={threshold} n={shares} M={peer_count}"
        )


def _tail_counts(peer_count: int, compromised: int, shares: int, at_least: int) -> tuple[int, int]:
    """(favorable, total) placements putting >= at_least shares on compromised peers."""
    favorable = sum(
        comb(compromised, j) * comb(peer_count - compromised, shares - j)
        for j in range(at_least, min(shares, compromised) + 1)
    )
    return favorable, comb(peer_count, shares)


def compromise_counts(peer_count: int, compromised: int, shares: int, threshold: int) -> tuple[int, int]:
    """Unreduced (favorable, total) for the read probability; see compromise_probability."""
    _check_bounds(peer_count, compromised, shares, threshold)
    return _tail_counts(peer_count, compromised, shares, threshold)


def compromise_probability(peer_count: int, compromised: int, shares: int, threshold: int) -> Fraction:
    """Exact probability that >= k of an entry's n shares land on compromised peers.

    sum_{j=k..min(n,c)} C(c,j) C(M-c,n-j) / C(M,n), as a reduced rational.
    """
    return Fraction(*compromise_counts(peer_count, compromised, shares, threshold))


def suppression_counts(peer_count: int, compromised: int, shares: int, threshold: int) -> tuple[int, int]:
    """Unreduced (favorable, total) for the suppression probability."""
    _check_bounds(peer_count, compromised, shares, threshold)
    # fewer than k survivors on honest peers == at least n-k+1 on compromised ones
    return _tail_counts(peer_count, compromised, shares, shares - threshold + 1)


def suppression_probability(peer_count: int, compromised: int, shares: int, threshold: int) -> Fraction:
    """Exact probability the coalition can destroy enough shares to block reconstruction."""
    return Fraction(*suppression_counts(peer_count, compromised, shares, threshold))


def pack_dispersal_record(record: DispersalRecord) -> bytes:
    """entry id (16+8) | n (1) | repeated x (1) + node id (16), ascending x."""
    node, index = record.entry_id
    out = [_RECORD_HEAD.pack(node, index, len(record.assignment))]
    for x in sorted(record.assignment):
        out.append(bytes([x]) + record.assignment[x])
    return b"".join(out)


def unpack_dispersal_record(data: bytes) -> DispersalRecord:
    if len(data) < _RECORD_HEAD.size:
        raise ValueError("dispersal record truncated")
    node, index, n = _RECORD_HEAD.unpack_from(data)
    if len(data) != _RECORD_HEAD.size + n * 17:
        raise ValueError("dispersal record length mismatch")
    assignment = {}
    for i in range(n):
        off = _RECORD_HEAD.size + i * 17
        assignment[data[off]] = data[off + 1:off + 18]
    return DispersalRecord(entry_id=(node, index), assignment=assignment)
