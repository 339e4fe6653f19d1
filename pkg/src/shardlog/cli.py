"""Command-line front end.

Exit codes: 0 success, 1 usage or input-format error, 2 domain failure
(insufficient shares, --strict findings). Findings in a report do not by
themselves change the exit status. Output files are written atomically so
error paths never leave partial output behind.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from random import Random

from . import chain, correlate, dispersal, recovery, scenario, shamir, simnet

USAGE_ERROR = 1
DOMAIN_ERROR = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for domain failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _fail(message: str, code: int) -> int:
    print(f"shardlog: {message}", file=sys.stderr)
    return code


def cmd_simulate(args) -> int:
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot read scenario: {exc}", USAGE_ERROR)
    try:
        config = scenario.parse_scenario(text, seed_override=args.seed)
    except scenario.ScenarioError as exc:
        return _fail(f"{args.scenario}: {exc}", USAGE_ERROR)
    report = simnet.run_scenario(config)
    rendered = scenario.render_report(report)
    if args.out:
        _write_atomic(Path(args.out), rendered.encode("utf-8"))
    else:
        sys.stdout.write(rendered)
    if args.strict and report.has_findings:
        return DOMAIN_ERROR
    return 0


def cmd_split(args) -> int:
    src = Path(args.input)
    try:
        secret = src.read_bytes()
    except OSError as exc:
        return _fail(f"cannot read input: {exc}", USAGE_ERROR)
    try:
        params = shamir.SharingParams(args.threshold, args.shares)
        shares = shamir.split_secret(secret, params, Random(args.seed))
    except ValueError as exc:
        return _fail(str(exc), USAGE_ERROR)
    out_dir = Path(args.out_dir) if args.out_dir else src.parent
    for share in shares:
        path = out_dir / f"{src.name}.s{share.x:03d}"
        _write_atomic(path, shamir.pack_share(share))
        print(path)
    return 0


def cmd_reconstruct(args) -> int:
    shares = []
    for name in args.shares:
        try:
            shares.append(shamir.unpack_share(Path(name).read_bytes()))
        except OSError as exc:
            return _fail(f"cannot read share: {exc}", USAGE_ERROR)
        except ValueError as exc:
            return _fail(f"{name}: {exc}", USAGE_ERROR)
    entry_ids = {s.entry_id for s in shares}
    if len(entry_ids) > 1:
        return _fail("share files belong to different secrets", USAGE_ERROR)
    by_x = {s.x: s for s in shares}
    if len(by_x) < args.threshold:
        return _fail(f"need {args.threshold}, have {len(by_x)}", DOMAIN_ERROR)
    chosen = [by_x[x] for x in sorted(by_x)[: args.threshold]]
    secret = shamir.reconstruct_secret(chosen)
    _write_atomic(Path(args.out), secret)
    return 0


def cmd_verify(args) -> int:
    try:
        entries = chain.read_stream(Path(args.stream).read_bytes())
    except OSError as exc:
        return _fail(f"cannot read stream: {exc}", USAGE_ERROR)
    except ValueError as exc:
        return _fail(f"{args.stream}: {exc}", USAGE_ERROR)
    try:
        genesis = bytes.fromhex(args.genesis)
    except ValueError:
        return _fail("genesis key must be hex", USAGE_ERROR)
    if len(genesis) != chain.KEY_LEN:
        return _fail("genesis key must be 32 bytes of hex", USAGE_ERROR)

    anchor = None
    if args.anchors:
        try:
            anchors = chain.read_anchors(Path(args.anchors).read_bytes())
        except OSError as exc:
            return _fail(f"cannot read anchors: {exc}", USAGE_ERROR)
        except ValueError as exc:
            return _fail(f"{args.anchors}: {exc}", USAGE_ERROR)
        if args.node:
            try:
                node = bytes.fromhex(args.node)
            except ValueError:
                return _fail("--node must be hex", USAGE_ERROR)
            anchors = [a for a in anchors if a.node_id == node]
        best, _ = recovery.freshest_anchors(anchors)
        if len(best) > 1:
            return _fail("anchor file covers several nodes; pick one with --node", USAGE_ERROR)
        anchor = next(iter(best.values()), None)

    verdict = chain.verify_chain(sorted(entries, key=lambda s: s.entry.index), genesis, anchor)
    print(f"stream entries={len(entries)} {scenario._verdict_text(verdict)}")
    return 0


def cmd_correlate(args) -> int:
    try:
        raw = Path(args.events).read_bytes()
    except OSError as exc:
        return _fail(f"cannot read events: {exc}", USAGE_ERROR)
    payloads = [line for line in raw.split(b"\n") if line]
    events, rejects = correlate.parse_events(payloads)
    chains = correlate.correlate(events, args.window)
    for causal in chains:
        print(
            f"chain object={causal.key} start={causal.span[0]} "
            f"end={causal.span[1]} events={len(causal.events)}"
        )
        for event in causal.events:
            print(f"  {correlate.format_event(event)}")
    for reject in rejects:
        print(f"reject position={reject.position} reason={reject.reason}")
    return 0


def cmd_probe(args) -> int:
    try:
        if args.suppression:
            favorable, total = dispersal.suppression_counts(
                args.nodes, args.compromised, args.shares, args.threshold
            )
        else:
            favorable, total = dispersal.compromise_counts(
                args.nodes, args.compromised, args.shares, args.threshold
            )
    except ValueError as exc:
        return _fail(str(exc), USAGE_ERROR)
    print(f"{favorable}/{total} ≈ {favorable / total:.6f}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="shardlog", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario file and write the report")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--strict", action="store_true",
                   help="exit 2 if the report contains any finding")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("split", help="split a file into threshold shares")
    p.add_argument("input")
    p.add_argument("--threshold", type=int, required=True, metavar="K")
    p.add_argument("--shares", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("reconstruct", help="rebuild a secret from share files")
    p.add_argument("shares", nargs="+")
    p.add_argument("--threshold", type=int, required=True, metavar="K")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", help="verify a sealed stream file")
    p.add_argument("stream")
    p.add_argument("--genesis", required=True, help="genesis key, 64 hex chars")
    p.add_argument("--anchors", help="anchor file for truncation detection")
    p.add_argument("--node", help="restrict anchors to this node id (hex)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("correlate", help="build cross-layer causal chains from event lines")
    p.add_argument("events")
    p.add_argument("--window", type=int, default=60_000_000,
                   help="max gap within a chain, microseconds (default 60s)")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("probe", help="exact adversary odds for a placement grid point")
    p.add_argument("--nodes", type=int, required=True, metavar="M", help="peer count")
    p.add_argument("--compromised", type=int, required=True, metavar="C")
    p.add_argument("--shares", type=int, required=True, metavar="N")
    p.add_argument("--threshold", type=int, required=True, metavar="K")
    p.add_argument("--suppression", action="store_true",
                   help="probability of blocking reconstruction instead of reading")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
