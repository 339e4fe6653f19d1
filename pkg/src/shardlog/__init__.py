"""Tamper-evident decentralized forensic logging toolkit.

Per-node log streams are sealed with forward-secure chained MACs, split into
(k, n) threshold shares over GF(2^8), and dispersed to randomly chosen peers,
so no single machine holds a forgeable or destroyable copy. The package also
ships the recovery/verification side, a deterministic adversarial network
simulator, and a cross-layer event correlator.
"""

from .chain import (
    ChainAnchor,
    ChainState,
    Kind,
    Layer,
    LogEntry,
    SealedEntry,
    StreamStatus,
    StreamVerdict,
    append,
    canonical_decode,
    canonical_encode,
    key_evolve,
    verify_chain,
)
from .correlate import CausalChain, LayerEvent, correlate, parse_events
from .dispersal import (
    DispersalRecord,
    PlacementPolicy,
    choose_nodes,
    compromise_probability,
    suppression_probability,
)
from .gf256 import gf_add, gf_inv, gf_mul
from .recovery import (
    EntryOutcome,
    RecoveryResult,
    VerificationReport,
    collect_and_reconstruct,
    forensic_report,
)
from .shamir import Share, SharingParams, reconstruct_secret, split_secret
from .simnet import AttackAction, AttackKind, SimConfig, SimReport, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AttackAction",
    "AttackKind",
    "CausalChain",
    "ChainAnchor",
    "ChainState",
    "DispersalRecord",
    "EntryOutcome",
    "Kind",
    "Layer",
    "LayerEvent",
    "LogEntry",
    "PlacementPolicy",
    "RecoveryResult",
    "SealedEntry",
    "Share",
    "SharingParams",
    "SimConfig",
    "SimReport",
    "StreamStatus",
    "StreamVerdict",
    "VerificationReport",
    "append",
    "canonical_decode",
    "canonical_encode",
    "choose_nodes",
    "collect_and_reconstruct",
    "compromise_probability",
    "correlate",
    "forensic_report",
    "gf_add",
    "gf_inv",
    "gf_mul",
    "key_evolve",
    "parse_events",
    "reconstruct_secret",
    "run_scenario",
    "split_secret",
    "suppression_probability",
    "verify_chain",
]
