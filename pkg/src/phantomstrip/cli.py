"""Command-line surface: scenario runs, pulse codec round-trips, live service.

Exit codes: 0 success, 1 validation problems (bad flags, malformed
documents), 2 I/O problems (missing or unreadable files).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from phantomstrip import __version__
from phantomstrip import ircodec, scenario
from phantomstrip.ircodec import FrameKind, IrFrame
from phantomstrip.scenario import ScenarioError
from phantomstrip.sim import savings_vs_baseline


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; this tool reserves 2 for I/O problems.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _load_params(path: Optional[str]) -> ircodec.ProtocolParams:
    if path is None:
        return ircodec.DEFAULT_PARAMS
    return scenario.params_from_json(_read_text(path))


def _cmd_sim(args: argparse.Namespace) -> int:
    doc = scenario.parse_scenario(_read_text(args.scenario))
    baseline, automated = savings_vs_baseline(doc.config)
    report = baseline if args.baseline else automated
    _write_text(args.report, scenario.dumps_report(report, doc.source_sha256))
    return 0


def _cmd_decode(args: argparse.Namespace) -> int:
    params = _load_params(args.params)
    train = ircodec.parse_capture(_read_text(args.pulses))
    outcome = ircodec.decode_train(params, train)
    lines = []
    for frame in outcome.frames:
        if frame.kind is FrameKind.DATA:
            lines.append(
                json.dumps(
                    {"kind": "data", "address": frame.address, "command": frame.command}
                )
            )
        else:
            lines.append(json.dumps({"kind": "repeat"}))
    _write_text(args.output, "".join(line + "\n" for line in lines))
    for diag in outcome.diagnostics:
        print(f"diagnostic: offset {diag.offset}: {diag.reason.value}", file=sys.stderr)
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    params = _load_params(args.params)
    if args.repeat:
        if args.address is not None or args.command is not None:
            raise ScenarioError("--repeat takes no address or command")
        train = ircodec.encode_repeat(params)
    else:
        if args.address is None or args.command is None:
            raise ScenarioError("encode needs --address and --command (or --repeat)")
        train = ircodec.encode_frame(params, IrFrame.data(args.address, args.command))
    _write_text(args.output, ircodec.format_capture(train))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from phantomstrip import service

    doc = scenario.parse_scenario(_read_text(args.scenario))
    server = service.ControlService(
        doc.config,
        port=args.port,
        time_factor=args.time_factor,
        virtual_clock=args.virtual_clock,
        ui_dir=args.ui_dir,
    )
    print(f"listening on http://127.0.0.1:{server.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="phantomstrip", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("sim", help="run a scenario and write its energy report")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file ('-' for stdin)")
    p_sim.add_argument("--report", default=None, help="report destination (default stdout)")
    p_sim.add_argument(
        "--baseline",
        action="store_true",
        help="write the always-plugged baseline report instead of the automated one",
    )
    p_sim.set_defaults(func=_cmd_sim)

    p_dec = sub.add_parser("decode", help="decode a pulse capture into frames")
    p_dec.add_argument("--pulses", required=True, help="capture file ('-' for stdin)")
    p_dec.add_argument("--params", default=None, help="pulse-timing override JSON")
    p_dec.add_argument("--output", default=None, help="frame destination (default stdout)")
    p_dec.set_defaults(func=_cmd_decode)

    p_enc = sub.add_parser("encode", help="emit the pulse capture for one button code")
    p_enc.add_argument("--address", type=int, default=None)
    p_enc.add_argument("--command", type=int, default=None)
    p_enc.add_argument("--repeat", action="store_true", help="emit a repeat burst instead")
    p_enc.add_argument("--params", default=None, help="pulse-timing override JSON")
    p_enc.add_argument("--output", default=None, help="capture destination (default stdout)")
    p_enc.set_defaults(func=_cmd_encode)

    p_srv = sub.add_parser("serve", help="serve a live strip over HTTP")
    p_srv.add_argument("--scenario", required=True, help="scenario JSON file ('-' for stdin)")
    p_srv.add_argument("--port", type=int, default=0, help="TCP port (default: pick a free one)")
    p_srv.add_argument(
        "--time-factor",
        type=float,
        default=60.0,
        help="simulated seconds per wall-clock second (default 60)",
    )
    p_srv.add_argument(
        "--virtual-clock",
        action="store_true",
        help="freeze time; advance it only via POST /tick",
    )
    p_srv.add_argument("--ui-dir", default=None, help="serve static files from this directory")
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
