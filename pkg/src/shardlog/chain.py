"""Append-only forward-secure log streams sealed with chained HMAC-SHA-256.

Each entry's MAC covers the previous entry's MAC, so interior modification or
deletion breaks the chain. The MAC key is evolved one-way after every append
and the old key discarded, so compromising a node never lets the adversary
re-seal entries it already committed. Chained MACs alone cannot expose tail
deletion; periodically broadcast anchors (entry count + head MAC) close that
gap at verification time.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from enum import Enum

MAC_LEN = 32
KEY_LEN = 32
GENESIS_MAC = b"\x00" * MAC_LEN

_ENTRY_HEADER = struct.Struct(">QQBBI")  # index, timestamp, layer, kind, payload len
_ANCHOR = struct.Struct(">16sQ32s")


class Layer(Enum):
    """Stack position an entry was captured at (wire tags are fixed)."""

    APPLICATION = 0
    MIDDLEWARE = 1
    OPERATING_SYSTEM = 2
    HARDWARE = 3

    @property
    def label(self) -> str:
        return _LAYER_LABELS[self]


_LAYER_LABELS = {
    Layer.APPLICATION: "Application",
    Layer.MIDDLEWARE: "Middleware",
    Layer.OPERATING_SYSTEM: "OperatingSystem",
    Layer.HARDWARE: "Hardware",
}
LAYER_BY_LABEL = {v: k for k, v in _LAYER_LABELS.items()}


class Kind(Enum):
    PROGRAM_LOG = 0
    SYSTEM_LOG = 1
    USER_ACTIVITY_LOG = 2

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]


_KIND_LABELS = {
    Kind.PROGRAM_LOG: "ProgramLog",
    Kind.SYSTEM_LOG: "SystemLog",
    Kind.USER_ACTIVITY_LOG: "UserActivityLog",
}
KIND_BY_LABEL = {v: k for k, v in _KIND_LABELS.items()}


class SequencingError(Exception):
    """Entry index does not match the stream's next expected index."""


@dataclass(frozen=True)
class LogEntry:
    index: int
    timestamp: int  # microseconds since epoch
    layer: Layer
    kind: Kind
    payload: bytes

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("entry index must be >= 0")
        if not 0 <= self.timestamp < 2**64:
            raise ValueError("timestamp must fit an unsigned 64-bit integer")
        if not self.payload:
            raise ValueError("payload must be nonempty")


@dataclass(frozen=True)
class SealedEntry:
    entry: LogEntry
    prev_mac: bytes
    mac: bytes


@dataclass(frozen=True)
class ChainState:
    """Head of a stream: the next key, next index, and last MAC. Old keys are gone."""

    current_key: bytes
    next_index: int
    last_mac: bytes

    @classmethod
    def genesis(cls, key: bytes) -> "ChainState":
        if len(key) != KEY_LEN:
            raise ValueError("genesis key must be 32 bytes")
        return cls(current_key=key, next_index=0, last_mac=GENESIS_MAC)


@dataclass(frozen=True)
class ChainAnchor:
    node_id: bytes
    entry_count: int
    head_mac: bytes


class StreamStatus(Enum):
    VALID = "valid"
    MANIPULATION = "manipulation"
    GAP = "gap"
    TRUNCATION = "truncated"


@dataclass(frozen=True)
class StreamVerdict:
    """Primary verification finding for one stream.

    ``at`` is the first bad index for manipulation, the first missing index
    for a gap, and the surviving entry count for truncation (in which case
    ``expected_count`` carries the anchor's count).
    """

    status: StreamStatus
    at: int | None = None
    expected_count: int | None = None

    @property
    def valid(self) -> bool:
        return self.status is StreamStatus.VALID


def canonical_encode(entry: LogEntry, prev_mac: bytes) -> bytes:
    """Injective fixed-layout encoding that the entry MAC is computed over.

    index (8 BE) | timestamp (8 BE) | layer tag (1) | kind tag (1) |
    payload length (4 BE) | payload | prev_mac (32)
    """
    if len(prev_mac) != MAC_LEN:
        raise ValueError("prev_mac must be 32 bytes")
    if len(entry.payload) > 0xFFFFFFFF:
        raise ValueError("payload longer than 2^32 - 1 bytes")
    header = _ENTRY_HEADER.pack(
        entry.index, entry.timestamp, entry.layer.value, entry.kind.value, len(entry.payload)
    )
    return header + entry.payload + prev_mac


def canonical_decode(data: bytes) -> tuple[LogEntry, bytes]:
    """Inverse of canonical_encode; rejects anything that encode cannot emit."""
    if len(data) < _ENTRY_HEADER.size + MAC_LEN:
        raise ValueError("encoded entry too short")
    index, timestamp, layer_tag, kind_tag, payload_len = _ENTRY_HEADER.unpack_from(data)
    expected = _ENTRY_HEADER.size + payload_len + MAC_LEN
    if len(data) != expected:
        raise ValueError(f"encoded entry length mismatch: expected {expected}, got {len(data)}")
    try:
        layer = Layer(layer_tag)
        kind = Kind(kind_tag)
    except ValueError:
        raise ValueError(f"unknown layer/kind tag ({layer_tag}, {kind_tag})") from None
    payload = data[_ENTRY_HEADER.size:_ENTRY_HEADER.size + payload_len]
    prev_mac = data[-MAC_LEN:]
    entry = LogEntry(index=index, timestamp=timestamp, layer=layer, kind=kind, payload=payload)
    return entry, prev_mac


def compute_mac(key: bytes, entry: LogEntry, prev_mac: bytes) -> bytes:
    return hmac.new(key, canonical_encode(entry, prev_mac), hashlib.sha256).digest()


def key_evolve(key: bytes) -> bytes:
    """One-way key step: SHA-256(key || "evolve"). The old key is unrecoverable."""
    return hashlib.sha256(key + b"evolve").digest()


def append(state: ChainState, entry: LogEntry) -> tuple[SealedEntry, ChainState]:
    """Seal ``entry`` onto the stream and evolve the state.

    The returned state holds the evolved key and the new head MAC; the caller
    must drop the old state to get forward security.
    """
    if entry.index != state.next_index:
        raise SequencingError(
            f"entry index {entry.index} != expected {state.next_index}"
        )
    mac = compute_mac(state.current_key, entry, state.last_mac)
    sealed = SealedEntry(entry=entry, prev_mac=state.last_mac, mac=mac)
    new_state = ChainState(
        current_key=key_evolve(state.current_key),
        next_index=state.next_index + 1,
        last_mac=mac,
    )
    return sealed, new_state


def make_anchor(node_id: bytes, state: ChainState) -> ChainAnchor:
    return ChainAnchor(node_id=node_id, entry_count=state.next_index, head_mac=state.last_mac)


def verify_chain(
    entries: list[SealedEntry],
    genesis_key: bytes,
    anchor: ChainAnchor | None = None,
) -> StreamVerdict:
    """Recompute the whole MAC chain from the genesis key.

    Reports (first finding wins): MAC mismatch -> manipulation at that index;
    missing index -> gap; with an anchor, fewer entries than anchored or a
    head MAC that contradicts the anchor -> truncation. All failures are
    findings, never exceptions.
    """
    key = genesis_key
    last_mac = GENESIS_MAC
    expected_index = 0
    macs: list[bytes] = []
    for sealed in entries:
        if sealed.entry.index != expected_index:
            return StreamVerdict(StreamStatus.GAP, at=expected_index)
        if sealed.prev_mac != last_mac:
            return StreamVerdict(StreamStatus.MANIPULATION, at=expected_index)
        recomputed = compute_mac(key, sealed.entry, sealed.prev_mac)
        if not hmac.compare_digest(recomputed, sealed.mac):
            return StreamVerdict(StreamStatus.MANIPULATION, at=expected_index)
        macs.append(sealed.mac)
        last_mac = sealed.mac
        key = key_evolve(key)
        expected_index += 1

    if anchor is not None and anchor.entry_count > 0:
        if anchor.entry_count > len(entries):
            return StreamVerdict(
                StreamStatus.TRUNCATION, at=len(entries), expected_count=anchor.entry_count
            )
        if macs[anchor.entry_count - 1] != anchor.head_mac:
            # the anchored head never occurs in this chain: rewritten history
            return StreamVerdict(
                StreamStatus.TRUNCATION, at=len(entries), expected_count=anchor.entry_count
            )
    return StreamVerdict(StreamStatus.VALID)


class KeySchedule:
    """Random access to the evolved key sequence of one genesis key, memoized."""

    def __init__(self, genesis_key: bytes):
        self._keys = [genesis_key]

    def key_at(self, index: int) -> bytes:
        if index < 0:
            raise ValueError("key index must be >= 0")
        keys = self._keys
        while len(keys) <= index:
            keys.append(key_evolve(keys[-1]))
        return keys[index]


def pack_record(sealed: SealedEntry) -> bytes:
    """Sealed-stream record: canonical encoding followed by the 32-byte MAC."""
    return canonical_encode(sealed.entry, sealed.prev_mac) + sealed.mac


def unpack_record(data: bytes) -> SealedEntry:
    if len(data) < MAC_LEN:
        raise ValueError("sealed record too short")
    entry, prev_mac = canonical_decode(data[:-MAC_LEN])
    return SealedEntry(entry=entry, prev_mac=prev_mac, mac=data[-MAC_LEN:])


def pack_stream(entries: list[SealedEntry]) -> bytes:
    return b"".join(pack_record(e) for e in entries)


def read_stream(data: bytes) -> list[SealedEntry]:
    """Parse a concatenated sealed-stream file back into records."""
    entries = []
    offset = 0
    total = len(data)
    while offset < total:
        if total - offset < _ENTRY_HEADER.size + 2 * MAC_LEN:
            raise ValueError(f"truncated record at offset {offset}")
        (_, _, _, _, payload_len) = _ENTRY_HEADER.unpack_from(data, offset)
        record_len = _ENTRY_HEADER.size + payload_len + 2 * MAC_LEN
        if total - offset < record_len:
            raise ValueError(f"truncated record at offset {offset}")
        entries.append(unpack_record(data[offset:offset + record_len]))
        offset += record_len
    return entries


def pack_anchor(anchor: ChainAnchor) -> bytes:
    return _ANCHOR.pack(anchor.node_id, anchor.entry_count, anchor.head_mac)


def read_anchors(data: bytes) -> list[ChainAnchor]:
    if len(data) % _ANCHOR.size:
        raise ValueError("anchor file length is not a multiple of the record size")
    return [
        ChainAnchor(node_id=n, entry_count=c, head_mac=h)
        for n, c, h in _ANCHOR.iter_unpack(data)
    ]
