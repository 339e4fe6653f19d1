"""Cross-layer event correlation over recovered log payloads.

Events record who did what to which object at which layer. Actions legitimate
at one layer can surface as anomalies at another, so single-layer timelines
explain nothing; joining events on the touched object within a time window
rebuilds the cross-layer chronology. Correlation is exact-match plus window —
no semantic or probabilistic matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from .chain import LAYER_BY_LABEL, Layer

# event payload line: fixed field order, single spaces
_FIELDS = ("ts", "layer", "node", "actor", "action", "object")

# tie-break rank for equal timestamps: causes at lower layers sort first
_DEPTH = {
    Layer.HARDWARE: 0,
    Layer.OPERATING_SYSTEM: 1,
    Layer.MIDDLEWARE: 2,
    Layer.APPLICATION: 3,
}


@dataclass(frozen=True)
class LayerEvent:
    timestamp: int  # microseconds
    layer: Layer
    node_id: bytes
    actor: str
    action: str
    obj: str

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")
        if len(self.node_id) != 16:
            raise ValueError("node id must be 16 bytes")
        if not (self.actor and self.action and self.obj):
            raise ValueError("actor, action and object must be nonempty")


@dataclass(frozen=True)
class Reject:
    """A payload parse_events could not accept, with its input position."""

    position: int
    reason: str


@dataclass(frozen=True)
class CausalChain:
    events: tuple[LayerEvent, ...]
    key: str  # the shared object identifier
    span: tuple[int, int]  # first and last timestamp


def format_event(event: LayerEvent) -> str:
    return (
        f"ts={event.timestamp} layer={event.layer.label} node={event.node_id.hex()} "
        f"actor={event.actor} action={event.action} object={event.obj}"
    )


def parse_event_line(line: str) -> LayerEvent:
    tokens = line.split(" ")
    if len(tokens) != len(_FIELDS):
        raise ValueError(f"expected {len(_FIELDS)} fields, got {len(tokens)}")
    values = {}
    for token, name in zip(tokens, _FIELDS):
        prefix = name + "="
        if not token.startswith(prefix) or len(token) == len(prefix):
            raise ValueError(f"malformed field {token!r}, expected {name}=<value>")
        values[name] = token[len(prefix):]
    try:
        ts = int(values["ts"])
    except ValueError:
        raise ValueError(f"bad timestamp {values['ts']!r}") from None
    layer = LAYER_BY_LABEL.get(values["layer"])
    if layer is None:
        raise ValueError(f"unknown layer {values['layer']!r}")
    try:
        node = bytes.fromhex(values["node"])
    except ValueError:
        raise ValueError(f"bad node id {values['node']!r}") from None
    if len(node) != 16:
        raise ValueError(f"node id must be 16 bytes, got {len(node)}")
    return LayerEvent(
        timestamp=ts,
        layer=layer,
        node_id=node,
        actor=values["actor"],
        action=values["action"],
        obj=values["object"],
    )


def parse_events(payloads: list[bytes]) -> tuple[list[LayerEvent], list[Reject]]:
    """One LayerEvent per well-formed payload; the rest land in the rejects, never dropped."""
    events: list[LayerEvent] = []
    rejects: list[Reject] = []
    for pos, payload in enumerate(payloads):
        try:
            text = payload.decode("utf-8")
        except UnicodeDecodeError:
            rejects.append(Reject(position=pos, reason="payload is not valid UTF-8"))
            continue
        if text.endswith("\n"):
            text = text[:-1]
        try:
            events.append(parse_event_line(text))
        except ValueError as exc:
            rejects.append(Reject(position=pos, reason=str(exc)))
    return events, rejects


def _sort_key(event: LayerEvent):
    return (event.timestamp, _DEPTH[event.layer], event.node_id, event.actor)


def correlate(events: list[LayerEvent], window: int) -> list[CausalChain]:
    """Group events by object, then chain runs whose successive gaps are <= window.

    The chains partition the input: every event appears in exactly one chain,
    and the result is independent of input order. Output is sorted by first
    timestamp.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    by_object: dict[str, list[LayerEvent]] = {}
    for event in events:
        by_object.setdefault(event.obj, []).append(event)

    chains: list[CausalChain] = []
    for obj in by_object:
        group = sorted(by_object[obj], key=_sort_key)
        run: list[LayerEvent] = [group[0]]
        for event in group[1:]:
            if event.timestamp - run[-1].timestamp <= window:
                run.append(event)
            else:
                chains.append(_chain(run, obj))
                run = [event]
        chains.append(_chain(run, obj))
    chains.sort(key=lambda c: (c.span[0], c.key))
    return chains


def _chain(run: list[LayerEvent], obj: str) -> CausalChain:
    return CausalChain(
        events=tuple(run), key=obj, span=(run[0].timestamp, run[-1].timestamp)
    )
