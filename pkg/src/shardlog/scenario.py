"""Text formats: scenario files in, simulation reports out.

A scenario file is line-delimited records of named fields. Blank lines and
``#`` comments are ignored. The config record comes first; workload ``log``
records execute in file order (entry indexes are assigned per node); attacks
fire before the workload step they name.

    config nodes=4 threshold=2 shares=3 anchor-period=5 seed=42
    log node=0 ts=1000000 layer=Application kind=ProgramLog payload=6c6f67696e
    attack step=10 kind=WipeNode target=0
    attack step=4 kind=TamperShare target=2 entry-node=0 entry-index=1 x=1 offset=0 mask=01
    attack step=4 kind=DestroyShares target=2 [entry-node=.. entry-index=..]
    attack step=0 kind=CompromiseNode target=1

Reports are rendered with a stable field order so equal runs diff clean.
"""

from __future__ import annotations

from .chain import KIND_BY_LABEL, LAYER_BY_LABEL, LogEntry, StreamStatus, StreamVerdict
from .recovery import EntryOutcome
from .simnet import AttackAction, AttackKind, SimConfig, SimReport


class ScenarioError(ValueError):
    """Scenario file rejected; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


_ATTACK_KINDS = {kind.value: kind for kind in AttackKind}


def _fields(tokens: list[str], line_no: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for token in tokens:
        name, eq, value = token.partition("=")
        if not eq or not name or not value:
            raise ScenarioError(line_no, f"malformed field {token!r}, expected name=value")
        if name in out:
            raise ScenarioError(line_no, f"duplicate field {name!r}")
        out[name] = value
    return out

def _take_int(fields: dict[str, str], name: str, line_no: int, base: int = 10) -> int:
    if name not in fields:
        raise ScenarioError(line_no, f"missing field {name!r}")
    raw = fields.pop(name)
    try:
        return int(raw, base)
    except ValueError:
        raise ScenarioError(line_no, f"field {name}={raw!r} is not a number") from None


def parse_scenario(text: str, seed_override: int | None = None) -> SimConfig:
    config_fields: dict[str, int] | None = None
    config_line = 0
    workload: list[tuple[int, LogEntry]] = []
    attacks: list[AttackAction] = []
    next_index: dict[int, int] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        record, *tokens = line.split(" ")
        fields = _fields(tokens, line_no)

        if record == "config":
            if config_fields is not None:
                raise ScenarioError(line_no, "duplicate config record")
            config_fields = {
                name: _take_int(fields, name, line_no)
                for name in ("nodes", "threshold", "shares", "anchor-period", "seed")
            }
            config_line = line_no
        elif record == "log":
            node = _take_int(fields, "node", line_no)
            ts = _take_int(fields, "ts", line_no)
            layer = LAYER_BY_LABEL.get(fields.pop("layer", ""))
            if layer is None:
                raise ScenarioError(line_no, "missing or unknown layer tag")
            kind = KIND_BY_LABEL.get(fields.pop("kind", ""))
            if kind is None:
                raise ScenarioError(line_no, "missing or unknown kind tag")
            payload_hex = fields.pop("payload", "")
            try:
                payload = bytes.fromhex(payload_hex)
            except ValueError:
                raise ScenarioError(line_no, f"payload is not hex: {payload_hex!r}") from None
            if not payload:
                raise ScenarioError(line_no, "payload must be nonempty hex")
            index = next_index.get(node, 0)
            next_index[node] = index + 1
            try:
                entry = LogEntry(index=index, timestamp=ts, layer=layer, kind=kind, payload=payload)
            except ValueError as exc:
                raise ScenarioError(line_no, str(exc)) from None
            workload.append((node, entry))
        elif record == "attack":
            step = _take_int(fields, "step", line_no)
            kind_label = fields.pop("kind", "")
            if kind_label not in _ATTACK_KINDS:
                raise ScenarioError(line_no, f"unknown attack kind {kind_label!r}")
            target = _take_int(fields, "target", line_no)
            entry_node = _take_int(fields, "entry-node", line_no) if "entry-node" in fields else None
            entry_index = _take_int(fields, "entry-index", line_no) if "entry-index" in fields else None
            x = _take_int(fields, "x", line_no) if "x" in fields else None
            offset = _take_int(fields, "offset", line_no) if "offset" in fields else 0
            mask = _take_int(fields, "mask", line_no, base=16) if "mask" in fields else 0x01
            if not 0 <= mask <= 0xFF:
                raise ScenarioError(line_no, f"mask {mask:#x} is not a byte")
            attacks.append(AttackAction(
                at_step=step, kind=_ATTACK_KINDS[kind_label], target=target,
                entry_node=entry_node, entry_index=entry_index, x=x,
                offset=offset, mask=mask,
            ))
        else:
            raise ScenarioError(line_no, f"unknown record type {record!r}")

        if fields:
            raise ScenarioError(line_no, f"unexpected fields: {', '.join(sorted(fields))}")

    if config_fields is None:
        raise ScenarioError(1, "no config record found")
    seed = seed_override if seed_override is not None else config_fields["seed"]
    try:
        return SimConfig(
            node_count=config_fields["nodes"],
            threshold=config_fields["threshold"],
            share_count=config_fields["shares"],
            anchor_period=config_fields["anchor-period"],
            seed=seed,
            workload=tuple(workload),
            attacks=tuple(attacks),
        )
    except ValueError as exc:
        raise ScenarioError(config_line, str(exc)) from None


def format_scenario(config: SimConfig) -> str:
    lines = [
        f"config nodes={config.node_count} threshold={config.threshold} "
        f"shares={config.share_count} anchor-period={config.anchor_period} seed={config.seed}"
    ]
    for node, entry in config.workload:
        lines.append(
            f"log node={node} ts={entry.timestamp} layer={entry.layer.label} "
            f"kind={entry.kind.label} payload={entry.payload.hex()}"
        )
    for a in config.attacks:
        parts = [f"attack step={a.at_step} kind={a.kind.value} target={a.target}"]
        if a.entry_node is not None:
            parts.append(f"entry-node={a.entry_node}")
        if a.entry_index is not None:
            parts.append(f"entry-index={a.entry_index}")
        if a.x is not None:
            parts.append(f"x={a.x}")
        if a.kind is AttackKind.TAMPER_SHARE:
            parts.append(f"offset={a.offset} mask={a.mask:02x}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _verdict_text(verdict: StreamVerdict) -> str:
    if verdict.status is StreamStatus.VALID:
        return "status=valid"
    if verdict.status is StreamStatus.TRUNCATION:
        return f"status=truncated at={verdict.at} expected={verdict.expected_count}"
    return f"status={verdict.status.value} at={verdict.at}"


def render_report(report: SimReport) -> str:
    """Stable line-oriented report; equal configs and seeds render byte-identically."""
    lines = [
        "shardlog-simulation-report",
        f"config nodes={report.node_count} threshold={report.threshold} "
        f"shares={report.share_count} anchor-period={report.anchor_period} "
        f"seed={report.seed} workload={report.workload_len} attacks={report.attack_count}",
    ]
    for (node_id, index), outcome in report.outcomes:
        lines.append(f"entry node={node_id.hex()} index={index} outcome={outcome.value}")
    for node_id in sorted(report.verdicts):
        lines.append(
            f"stream node={node_id.hex()} recovered={report.recovered_counts.get(node_id, 0)} "
            + _verdict_text(report.verdicts[node_id])
        )
    for finding in report.inconsistencies:
        node_id, index = finding.entry_id
        lines.append(
            f"inconsistency node={node_id.hex()} index={index} "
            f"x={finding.x} holder={finding.holder.hex()}"
        )
    for node_id in report.anchor_conflicts:
        lines.append(f"anchor-conflict node={node_id.hex()}")
    for node_id, index in report.readable:
        lines.append(f"readable node={node_id.hex()} index={index}")
    counts = report.outcome_counts
    lines.append(
        f"summary entries={report.workload_len} "
        f"reconstructed={counts[EntryOutcome.RECONSTRUCTED]} "
        f"tampered={counts[EntryOutcome.RECONSTRUCTED_TAMPER]} "
        f"unrecoverable={counts[EntryOutcome.UNRECOVERABLE]} "
        f"streams-valid={report.streams_valid} "
        f"streams-flagged={len(report.verdicts) - report.streams_valid} "
        f"inconsistencies={len(report.inconsistencies)} "
        f"anchor-conflicts={len(report.anchor_conflicts)} "
        f"readable={len(report.readable)}"
    )
    return "\n".join(lines) + "\n"
