"""Command line front end; exit codes are the machine contract.

0 = proven / pass / property holds, 1 = disproven / fail / property fails,
2 = unknown, 3 = input error."""

from __future__ import annotations

import argparse
import socket
import sys
from pathlib import Path

from .errors import HypergamesError, ParseError, ResourceLimitError, ValidationError
from .service import ops

EXIT_PROVEN = 0
EXIT_DISPROVEN = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3

FORMAT_VERSIONS = (
    ("kripke-format", 1),
    ("formula-format", 1),
    ("prophecy-format", 1),
    ("certificate-format", 1),
    ("mpg-format", 1),
)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _version_text() -> str:
    from . import __version__

    lines = [f"hypergames {__version__}"]
    lines += [f"{name}: {v}" for name, v in FORMAT_VERSIONS]
    return "\n".join(lines)


def cmd_check(args: argparse.Namespace) -> int:
    result = ops.run_check(
        _read(args.ks),
        _read(args.formula),
        prophecy_text=_read(args.prophecy) if args.prophecy else "",
        mode=args.mode,
        max_memory=args.memory,
        budget=args.budget,
        obs_mode=args.obs_mode,
    )
    print(f"verdict: {result['status']}")
    print(f"method: {result['method']}")
    print(f"guarantee: {result['guarantee']}")
    if result["detail"]:
        print(f"detail: {result['detail']}")
    if result["bounds"]:
        print("bounds: " + " ".join(f"{k}={v}" for k, v in sorted(result["bounds"].items())))
    if result["witness"]:
        print("witness lassos:")
        for var, lasso in result["witness"].items():
            stem = " ".join(lasso["stem"])
            loop = " ".join(lasso["loop"])
            print(f"  {var}: stem [{stem}] loop [{loop}]")
    if result["certificate"] is not None:
        out = Path(args.out) if args.out else Path(args.formula).with_suffix(".cert")
        out.write_text(result["certificate"], encoding="utf-8")
        print(f"certificate written to {out}")
    return {
        "proven": EXIT_PROVEN,
        "disproven": EXIT_DISPROVEN,
        "unknown": EXIT_UNKNOWN,
    }[result["status"]]


def cmd_certify(args: argparse.Namespace) -> int:
    result = ops.run_certify(
        _read(args.certificate),
        ks_text=_read(args.ks) if args.ks else None,
        formula_text=_read(args.formula) if args.formula else None,
        prophecy_text=_read(args.prophecy) if args.prophecy else None,
    )
    print(f"verdict: {'pass' if result['ok'] else 'fail'}")
    print(f"game hash: {result['game_hash']}")
    print(f"explored: {result['nodes']} nodes, {result['edges']} edges")
    for line in result["errors"] + result["diagnostics"]:
        print(line)
    return EXIT_PROVEN if result["ok"] else EXIT_DISPROVEN


def cmd_oracle(args: argparse.Namespace) -> int:
    result = ops.run_oracle(_read(args.ks), _read(args.formula), args.stem, args.loop)
    word = "true" if result["holds"] else "false"
    print(f"verdict: {word} stem={result['stem']} loop={result['loop']}")
    return EXIT_PROVEN if result["holds"] else EXIT_DISPROVEN


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.bind, args.port))
        port = probe.getsockname()[1]
        probe.close()
    except OSError as exc:
        print(f"error: cannot bind {args.bind}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"listening on {args.bind}:{port}", flush=True)
    uvicorn.run(create_app(), host=args.bind, port=port, log_level="warning")
    return EXIT_PROVEN


class _VersionAction(argparse.Action):
    """Emit the version block verbatim; the help formatter would rewrap it."""

    def __call__(self, parser, namespace, values, option_string=None):
        print(_version_text())
        parser.exit(0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypergames")
    parser.add_argument("--version", action=_VersionAction, nargs=0, help="print format versions of all file grammars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="solve a property and emit a certificate when the proof is game-level")
    p.add_argument("ks", help="system description file")
    p.add_argument("formula", help="property file")
    p.add_argument("--prophecy", help="prophecy family file to apply before solving")
    p.add_argument("--mode", default="auto", choices=["auto", "zielonka", "exists-forall", "bounded"])
    p.add_argument("--memory", type=int, default=2, help="per-player memory bound for bounded search")
    p.add_argument("--budget", type=int, default=10_000_000, help="evaluation budget for bounded search")
    p.add_argument("--obs-mode", default="hierarchical", choices=["hierarchical", "full"])
    p.add_argument("--out", help="certificate output path (default: formula path with .cert suffix)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify", help="check a strategy certificate without the solver")
    p.add_argument("certificate", help="certificate file")
    p.add_argument("--ks", help="system file to rebuild against (default: embedded text)")
    p.add_argument("--formula", help="property file to rebuild against (default: embedded text)")
    p.add_argument("--prophecy", help="prophecy family file (default: embedded manifest)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("oracle", help="brute-force the property over bounded lassos")
    p.add_argument("ks", help="system description file")
    p.add_argument("formula", help="property file")
    p.add_argument("--stem", type=int, required=True, help="stem length bound (>= 1)")
    p.add_argument("--loop", type=int, required=True, help="loop length bound (>= 1)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000, help="port to listen on; 0 picks a free one")
    p.add_argument("--bind", default="127.0.0.1", help="address to bind")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HypergamesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
