"""Post-incident reconstruction of dispersed log streams.

Gathers surviving shares from node stores, rebuilds each entry by trying
k-subsets of its shares in deterministic order (Shamir shares carry no
self-authentication, so an external validator — normally the chain MAC —
arbitrates), rebuilds per-node streams, and verifies every chain against its
genesis key and the freshest anchor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Callable, Iterable, Mapping

from . import chain
from .chain import ChainAnchor, SealedEntry, StreamVerdict
from .shamir import EntryId, Share, evaluate_from_shares, reconstruct_secret

# node id -> entry id -> x -> Share, as held by the surviving nodes
ShareStores = Mapping[bytes, Mapping[EntryId, Mapping[int, Share]]]

Validator = Callable[[EntryId, bytes], bool]


class EntryOutcome(Enum):
    RECONSTRUCTED = "reconstructed"
    RECONSTRUCTED_TAMPER = "reconstructed-tamper"
    UNRECOVERABLE = "unrecoverable"


@dataclass(frozen=True)
class ShareInconsistency:
    """A stored share that does not lie on the polynomials of the accepted candidate."""

    entry_id: EntryId
    x: int
    holder: bytes


@dataclass
class EntryRecovery:
    outcome: EntryOutcome
    data: bytes | None = None
    shares_seen: int = 0
    inconsistencies: list[ShareInconsistency] = field(default_factory=list)


@dataclass
class RecoveryResult:
    entries: dict[EntryId, EntryRecovery]

    def recovered(self) -> dict[EntryId, bytes]:
        return {
            eid: rec.data
            for eid, rec in self.entries.items()
            if rec.data is not None
        }

    def inconsistencies(self) -> list[ShareInconsistency]:
        found = [i for rec in self.entries.values() for i in rec.inconsistencies]
        return sorted(found, key=lambda i: (i.entry_id, i.x, i.holder))


@dataclass
class VerificationReport:
    """Per-stream verdicts plus per-entry recovery status and share-level findings."""

    streams: dict[bytes, StreamVerdict]
    entries: dict[EntryId, EntryRecovery]
    inconsistencies: list[ShareInconsistency]
    anchor_conflicts: list[bytes]  # nodes with equal-count anchors whose head MACs differ

    @property
    def all_valid(self) -> bool:
        return (
            all(v.valid for v in self.streams.values())
            and not self.inconsistencies
            and not self.anchor_conflicts
        )


def structural_validator(entry_id: EntryId, candidate: bytes) -> bool:
    """Keyless fallback arbiter: the bytes must parse as a sealed record for this index."""
    try:
        sealed = chain.unpack_record(candidate)
    except ValueError:
        return False
    return sealed.entry.index == entry_id[1]


def mac_validator(key_schedules: Mapping[bytes, chain.KeySchedule]) -> Validator:
    """Arbiter for verifiers holding genesis keys: structure plus an exact MAC match."""

    def validate(entry_id: EntryId, candidate: bytes) -> bool:
        node_id, index = entry_id
        schedule = key_schedules.get(node_id)
        if schedule is None:
            return False
        try:
            sealed = chain.unpack_record(candidate)
        except ValueError:
            return False
        if sealed.entry.index != index:
            return False
        expected = chain.compute_mac(schedule.key_at(index), sealed.entry, sealed.prev_mac)
        return expected == sealed.mac

    return validate


def reconstruct_entry(
    entry_id: EntryId,
    shares: Mapping[int, Share],
    holders: Mapping[int, bytes],
    k: int,
    validator: Validator,
) -> EntryRecovery:
    """Try k-subsets of the shares (ascending x order) until the validator accepts one.

    If no subset validates but a strict majority of subsets agree on one
    candidate that at least parses structurally, that candidate is returned
    with a tamper finding; otherwise the entry is unrecoverable. Shares off
    the accepted candidate's polynomials are reported with their holders.
    """
    available = [shares[x] for x in sorted(shares)]
    if len(available) < k:
        return EntryRecovery(outcome=EntryOutcome.UNRECOVERABLE, shares_seen=len(available))

    candidates: list[tuple[tuple[Share, ...], bytes]] = []
    for subset in combinations(available, k):
        candidate = reconstruct_secret(list(subset))
        if validator(entry_id, candidate):
            return _accept(entry_id, EntryOutcome.RECONSTRUCTED, candidate,
                           subset, available, holders)
        candidates.append((subset, candidate))

    # no subset satisfied the arbiter: fall back to majority consistency
    tally: dict[bytes, int] = {}
    for _, candidate in candidates:
        tally[candidate] = tally.get(candidate, 0) + 1
    best, votes = max(tally.items(), key=lambda kv: kv[1])
    if votes * 2 > len(candidates) and structural_validator(entry_id, best):
        subset = next(s for s, c in candidates if c == best)
        return _accept(entry_id, EntryOutcome.RECONSTRUCTED_TAMPER, best,
                       subset, available, holders)
    return EntryRecovery(outcome=EntryOutcome.UNRECOVERABLE, shares_seen=len(available))


def _accept(entry_id, outcome, candidate, subset, available, holders) -> EntryRecovery:
    rec = EntryRecovery(outcome=outcome, data=candidate, shares_seen=len(available))
    subset_xs = {s.x for s in subset}
    for share in available:
        if share.x in subset_xs:
            continue
        if evaluate_from_shares(list(subset), share.x) != share.y_bytes:
            rec.inconsistencies.append(
                ShareInconsistency(entry_id=entry_id, x=share.x, holder=holders[share.x])
            )
    return rec


def collect_and_reconstruct(
    stores: ShareStores,
    k: int,
    validator: Validator | None = None,
    expected: Iterable[EntryId] | None = None,
) -> RecoveryResult:
    """Merge all surviving stores and reconstruct every entry they mention.

    ``expected`` adds entry ids that must appear in the result even if no
    share survived anywhere (reported unrecoverable with zero shares).
    Failures are per-entry findings, never exceptions.
    """
    if k < 1:
        raise ValueError("threshold must be >= 1")
    merged: dict[EntryId, dict[int, Share]] = {}
    holders: dict[EntryId, dict[int, bytes]] = {}
    for node_id in sorted(stores):
        for entry_id, by_x in stores[node_id].items():
            for x, share in by_x.items():
                merged.setdefault(entry_id, {})[x] = share
                holders.setdefault(entry_id, {})[x] = node_id

    todo = set(merged)
    if expected is not None:
        todo.update(expected)

    validate = validator if validator is not None else structural_validator
    entries: dict[EntryId, EntryRecovery] = {}
    for entry_id in sorted(todo):
        entries[entry_id] = reconstruct_entry(
            entry_id, merged.get(entry_id, {}), holders.get(entry_id, {}), k, validate
        )
    return RecoveryResult(entries=entries)


def freshest_anchors(anchors: Iterable[ChainAnchor]) -> tuple[dict[bytes, ChainAnchor], list[bytes]]:
    """Pick the highest-count anchor per node; flag equal-count/different-head conflicts."""
    best: dict[bytes, ChainAnchor] = {}
    conflicts: set[bytes] = set()
    for anchor in anchors:
        cur = best.get(anchor.node_id)
        if cur is None:
            best[anchor.node_id] = anchor
            continue
        if anchor.entry_count == cur.entry_count and anchor.head_mac != cur.head_mac:
            conflicts.add(anchor.node_id)
        if (anchor.entry_count, anchor.head_mac) > (cur.entry_count, cur.head_mac):
            best[anchor.node_id] = anchor
    return best, sorted(conflicts)


def forensic_report(
    recovery: RecoveryResult,
    genesis_keys: Mapping[bytes, bytes],
    anchors: Iterable[ChainAnchor] = (),
) -> VerificationReport:
    """Verify every node's recovered stream against its genesis key and freshest anchor.

    Every recovered entry id must belong to a node with an escrowed genesis
    key; an unknown node is a caller error, not a finding.
    """
    streams: dict[bytes, list[SealedEntry]] = {node: [] for node in genesis_keys}
    for (node_id, _), rec in recovery.entries.items():
        if node_id not in genesis_keys:
            raise KeyError(f"no genesis key for node {node_id.hex()}")
        if rec.data is None:
            continue
        try:
            sealed = chain.unpack_record(rec.data)
        except ValueError:
            continue  # majority candidates are pre-screened; defensive only
        streams[node_id].append(sealed)

    best_anchor, conflicts = freshest_anchors(anchors)
    verdicts: dict[bytes, StreamVerdict] = {}
    for node_id in sorted(streams):
        entries = sorted(streams[node_id], key=lambda s: s.entry.index)
        verdicts[node_id] = chain.verify_chain(
            entries, genesis_keys[node_id], best_anchor.get(node_id)
        )
    return VerificationReport(
        streams=verdicts,
        entries=recovery.entries,
        inconsistencies=recovery.inconsistencies(),
        anchor_conflicts=conflicts,
    )
