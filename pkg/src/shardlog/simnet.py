"""Deterministic simulation of a node ecosystem running the full log pipeline.

Every workload step appends one entry to its node's chain, seals it, splits
the sealed record into n shares, and disperses them to n randomly chosen
peers; the originator keeps only its chain head, never the plaintext.
Scripted attacks (compromise, share tampering, share destruction, node wipes)
interleave at chosen steps. After the workload a trusted verifier holding the
escrowed genesis keys collects surviving shares, reconstructs every entry,
verifies every chain against the freshest anchor, and emits a report.

Time is discrete, one workload event per step, no loss or latency in the
benign network; identical config and seed give a byte-identical report.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from random import Random
from typing import Iterable, Mapping

from . import chain, recovery
from .chain import ChainAnchor, ChainState, LogEntry, StreamVerdict
from .dispersal import PlacementPolicy, choose_nodes
from .recovery import EntryOutcome, ShareInconsistency
from .shamir import EntryId, Share, SharingParams, split_secret

NODE_ID_LEN = 16


def node_id_from_index(index: int) -> bytes:
    """Stable 16-byte id for config node index i (id 0x...00 stays reserved)."""
    return (index + 1).to_bytes(NODE_ID_LEN, "big")


def genesis_key(seed: int, node_id: bytes) -> bytes:
    """Escrowed per-node genesis MAC key, derived from the scenario seed."""
    return hashlib.sha256(b"shardlog-genesis:" + seed.to_bytes(8, "big") + node_id).digest()


class AttackKind(Enum):
    COMPROMISE_NODE = "CompromiseNode"
    TAMPER_SHARE = "TamperShare"
    DESTROY_SHARES = "DestroyShares"
    WIPE_NODE = "WipeNode"


@dataclass(frozen=True)
class AttackAction:
    """One scripted adversary action, applied before workload step ``at_step``.

    ``entry_node``/``entry_index`` select a stored entry for TamperShare and
    (optionally) DestroyShares; ``x`` picks the share, defaulting to the
    lowest x held. ``offset``/``mask`` say which byte to XOR when tampering.
    """

    at_step: int
    kind: AttackKind
    target: int
    entry_node: int | None = None
    entry_index: int | None = None
    x: int | None = None
    offset: int = 0
    mask: int = 0x01


@dataclass(frozen=True)
class SimConfig:
    node_count: int
    threshold: int
    share_count: int
    anchor_period: int
    seed: int
    workload: tuple[tuple[int, LogEntry], ...]
    attacks: tuple[AttackAction, ...] = ()

    def __post_init__(self):
        params = SharingParams(self.threshold, self.share_count)  # validates k, n
        if self.share_count > self.node_count - 1:
            raise ValueError(
                f"{self.share_count} shares need {self.share_count} peers, "
                f"but nodes={self.node_count} leaves {self.node_count - 1}"
            )
        if self.anchor_period < 1:
            raise ValueError("anchor_period must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")
        next_index = [0] * self.node_count
        for node, entry in self.workload:
            if not 0 <= node < self.node_count:
                raise ValueError(f"workload references unknown node {node}")
            if entry.index != next_index[node]:
                raise ValueError(
                    f"node {node} entry index {entry.index} out of order, "
                    f"expected {next_index[node]}"
                )
            next_index[node] += 1
        for attack in self.attacks:
            if not 0 <= attack.at_step <= len(self.workload):
                raise ValueError(f"attack step {attack.at_step} outside workload bounds")
            if not 0 <= attack.target < self.node_count:
                raise ValueError(f"attack targets unknown node {attack.target}")
        object.__setattr__(self, "params", params)

    params: SharingParams = field(init=False, repr=False, compare=False)


class NodeState:
    """One simulated node: own chain head, stored foreign shares, received anchors."""

    def __init__(self, node_id: bytes, chain_state: ChainState):
        self.node_id = node_id
        self.chain = chain_state
        self.foreign_shares: dict[EntryId, dict[int, Share]] = {}
        self.anchors: list[ChainAnchor] = []
        self.compromised = False

    def store_share(self, share: Share) -> None:
        self.foreign_shares.setdefault(share.entry_id, {})[share.x] = share


@dataclass
class SimReport:
    """Immutable once produced; run_scenario output and the CLI's report source."""

    node_count: int
    threshold: int
    share_count: int
    anchor_period: int
    seed: int
    workload_len: int
    attack_count: int
    outcomes: list[tuple[EntryId, EntryOutcome]]
    verdicts: dict[bytes, StreamVerdict]
    recovered_counts: dict[bytes, int]
    inconsistencies: list[ShareInconsistency]
    anchor_conflicts: list[bytes]
    readable: list[EntryId]

    @property
    def outcome_counts(self) -> dict[EntryOutcome, int]:
        counts = {outcome: 0 for outcome in EntryOutcome}
        for _, outcome in self.outcomes:
            counts[outcome] += 1
        return counts

    @property
    def streams_valid(self) -> int:
        return sum(1 for v in self.verdicts.values() if v.valid)

    @property
    def has_findings(self) -> bool:
        clean_outcomes = all(o is EntryOutcome.RECONSTRUCTED for _, o in self.outcomes)
        return not (
            clean_outcomes
            and self.streams_valid == len(self.verdicts)
            and not self.inconsistencies
            and not self.anchor_conflicts
        )


class Simulation:
    """Single-threaded deterministic event loop over a SimConfig."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.rng = Random(config.seed)
        self.nodes: dict[bytes, NodeState] = {}
        self.genesis_keys: dict[bytes, bytes] = {}
        for i in range(config.node_count):
            nid = node_id_from_index(i)
            key = genesis_key(config.seed, nid)
            self.nodes[nid] = NodeState(nid, ChainState.genesis(key))
            self.genesis_keys[nid] = key
        self._ids = sorted(self.nodes)
        # adversary bookkeeping: shares ever visible to a compromised node,
        # and chain heads captured at compromise time
        self.adversary_pool: dict[EntryId, set[int]] = {}
        self.chain_snapshots: dict[bytes, ChainState] = {}
        # conservation ledger: every dispersed share's holder, and destructions
        self.dispersed: dict[tuple[EntryId, int], bytes] = {}
        self.destroyed: set[tuple[EntryId, int]] = set()
        self._step = 0

    # -- event loop --------------------------------------------------------

    def run(self) -> SimReport:
        workload = self.config.workload
        for step in range(len(workload) + 1):
            self._step = step
            for attack in self.config.attacks:
                if attack.at_step == step:
                    self.apply_attack(attack)
            if step < len(workload):
                node_index, entry = workload[step]
                self._log_and_disperse(node_index, entry)
        return self._verify_and_report()

    def _log_and_disperse(self, node_index: int, entry: LogEntry) -> None:
        node = self.nodes[node_id_from_index(node_index)]
        sealed, node.chain = chain.append(node.chain, entry)
        record = chain.pack_record(sealed)
        entry_id: EntryId = (node.node_id, entry.index)

        peers = frozenset(self._ids) - {node.node_id}
        policy = PlacementPolicy(params=self.config.params, peers=peers)
        placement = choose_nodes(entry_id, policy, self.rng)
        shares = split_secret(record, self.config.params, self.rng, entry_id=entry_id)
        for share in shares:
            holder = self.nodes[placement.assignment[share.x]]
            holder.store_share(share)
            self.dispersed[(entry_id, share.x)] = holder.node_id
            if holder.compromised:
                self.adversary_pool.setdefault(entry_id, set()).add(share.x)
        # the sealed record itself is now discarded: the log lives in the shares

        if (entry.index + 1) % self.config.anchor_period == 0:
            anchor = chain.make_anchor(node.node_id, node.chain)
            for nid in self._ids:
                if nid != node.node_id:
                    self.nodes[nid].anchors.append(anchor)

    # -- attacks -----------------------------------------------------------

    def apply_attack(self, action: AttackAction) -> None:
        target = self.nodes.get(node_id_from_index(action.target))
        if target is None:
            raise ValueError(f"attack targets unknown node {action.target}")
        handler = {
            AttackKind.COMPROMISE_NODE: self._compromise,
            AttackKind.TAMPER_SHARE: self._tamper_share,
            AttackKind.DESTROY_SHARES: self._destroy_shares,
            AttackKind.WIPE_NODE: self._wipe,
        }[action.kind]
        handler(target, action)

    def _compromise(self, target: NodeState, action: AttackAction) -> None:
        target.compromised = True
        self.chain_snapshots[target.node_id] = target.chain
        for entry_id, by_x in target.foreign_shares.items():
            self.adversary_pool.setdefault(entry_id, set()).update(by_x)

    def _entry_selector(self, action: AttackAction) -> EntryId:
        if action.entry_node is None or action.entry_index is None:
            raise ValueError(f"{action.kind.value} needs entry-node and entry-index")
        return (node_id_from_index(action.entry_node), action.entry_index)

    def _tamper_share(self, target: NodeState, action: AttackAction) -> None:
        entry_id = self._entry_selector(action)
        held = target.foreign_shares.get(entry_id)
        if not held:
            raise ValueError(
                f"node {action.target} holds no shares of entry "
                f"({action.entry_node}, {action.entry_index})"
            )
        x = action.x if action.x is not None else min(held)
        share = held.get(x)
        if share is None:
            raise ValueError(f"node {action.target} holds no share with x={x}")
        if not 0 <= action.offset < len(share.y_bytes):
            raise ValueError(f"tamper offset {action.offset} outside share of {len(share.y_bytes)} bytes")
        y = bytearray(share.y_bytes)
        y[action.offset] ^= action.mask
        held[x] = replace(share, y_bytes=bytes(y))

    def _destroy_shares(self, target: NodeState, action: AttackAction) -> None:
        if action.entry_node is not None or action.entry_index is not None:
            victims = [self._entry_selector(action)]  # rejects half-specified selectors
        else:
            victims = list(target.foreign_shares)
        for entry_id in victims:
            for x in target.foreign_shares.pop(entry_id, {}):
                self.destroyed.add((entry_id, x))

    def _wipe(self, target: NodeState, action: AttackAction) -> None:
        # the machine is reset: chain head, stored shares and anchors all go.
        # A post-wipe appender keeps the public index sequence but runs on a
        # key the escrow never saw, so any forged continuation is detectable.
        wipe_key = hashlib.sha256(
            b"shardlog-wiped:" + self.config.seed.to_bytes(8, "big")
            + target.node_id + self._step.to_bytes(8, "big")
        ).digest()
        target.chain = ChainState(
            current_key=wipe_key,
            next_index=target.chain.next_index,
            last_mac=chain.GENESIS_MAC,
        )
        for entry_id, by_x in target.foreign_shares.items():
            for x in by_x:
                self.destroyed.add((entry_id, x))
        target.foreign_shares = {}
        target.anchors = []

    # -- verification ------------------------------------------------------

    def stores(self) -> dict[bytes, dict[EntryId, dict[int, Share]]]:
        return {nid: self.nodes[nid].foreign_shares for nid in self._ids}

    def _verify_and_report(self) -> SimReport:
        config = self.config
        schedules = {nid: chain.KeySchedule(key) for nid, key in self.genesis_keys.items()}
        validator = recovery.mac_validator(schedules)
        expected = [
            (node_id_from_index(node), entry.index) for node, entry in config.workload
        ]
        result = recovery.collect_and_reconstruct(
            self.stores(), config.threshold, validator, expected
        )
        anchors = [a for nid in self._ids for a in self.nodes[nid].anchors]
        report = recovery.forensic_report(result, self.genesis_keys, anchors)

        outcomes = [(eid, result.entries[eid].outcome) for eid in expected]
        recovered_counts = {
            nid: sum(
                1 for (n, _), rec in result.entries.items()
                if n == nid and rec.data is not None
            )
            for nid in self._ids
        }
        readable = sorted(
            eid for eid, xs in self.adversary_pool.items() if len(xs) >= config.threshold
        )
        return SimReport(
            node_count=config.node_count,
            threshold=config.threshold,
            share_count=config.share_count,
            anchor_period=config.anchor_period,
            seed=config.seed,
            workload_len=len(config.workload),
            attack_count=len(config.attacks),
            outcomes=outcomes,
            verdicts=report.streams,
            recovered_counts=recovered_counts,
            inconsistencies=report.inconsistencies,
            anchor_conflicts=report.anchor_conflicts,
            readable=readable,
        )


def run_scenario(config: SimConfig) -> SimReport:
    return Simulation(config).run()


def adversary_readable(
    stores: Mapping[bytes, Mapping[EntryId, Mapping[int, Share]]],
    coalition: Iterable[bytes],
    k: int,
) -> set[EntryId]:
    """Entries for which >= k distinct shares currently sit on coalition nodes."""
    coalition = set(coalition)
    unknown = coalition - set(stores)
    if unknown:
        raise ValueError(f"coalition references unknown nodes: {sorted(unknown)}")
    seen: dict[EntryId, set[int]] = {}
    for nid in coalition:
        for entry_id, by_x in stores[nid].items():
            seen.setdefault(entry_id, set()).update(by_x)
    return {eid for eid, xs in seen.items() if len(xs) >= k}
