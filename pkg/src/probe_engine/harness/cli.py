"""Command-line interface: figure datasets, sweeps, matrix dumps and checks.

Exit status is 0 on success, 1 for invalid configuration or arguments and
2 for numerical failures (including failed invariant checks).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from ..errors import ConfigError, DomainError, NumericalFailure
from .checks import run_checks
from .config import FORMATS, Output, SweepConfig, load_config, parse_assignment
from .datasets import build_timestamp, dumps
from .figures import FIGURES, run_figure
from .sweep import run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="YAML/JSON configuration file")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. grids.phi.count=20 (repeatable)")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--format", choices=FORMATS, help="output format")
    g.add_argument("--workers", type=int, help="worker processes (env PROBE_ENGINE_WORKERS)")
    g.add_argument("--branch", choices=("plus", "minus"), help="load branch for power-gain output")
    g.add_argument("--tolerance", type=float, help="absolute quadrature tolerance")
    g.add_argument("--timestamp", choices=("now",), help="stamp wall-clock time into metadata")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="probe-engine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fig = sub.add_parser("figure", parents=[common], help="emit a figure dataset")
    fig.add_argument("figure", choices=[f.lower() for f in FIGURES])

    sub.add_parser("sweep", parents=[common], help="sweep the (phi, delta, scale) grid")

    dump = sub.add_parser("onsager-dump", parents=[common], help="print L4, L' and L'' at one point")
    dump.add_argument("--phi", type=float, default=math.pi / 2)
    dump.add_argument("--field", type=int, choices=(1, -1), default=1)

    chk = sub.add_parser("check", parents=[common], help="run the invariant suite at one point")
    chk.add_argument("--phi", type=float, default=math.pi / 3)
    chk.add_argument("--delta", type=float, default=1.5)
    chk.add_argument("--x-lt", type=float, default=1e-3, help="thermal force X_L^T")
    return parser


def resolve_config(args) -> SweepConfig:
    overrides = [parse_assignment(s) for s in args.set]
    flags: dict = {}
    if args.workers is not None:
        flags["workers"] = args.workers
    if args.branch is not None:
        flags["sweep"] = {"branch": args.branch}
    if args.tolerance is not None:
        flags["quadrature"] = {"tol": args.tolerance}
    out = {}
    if args.format is not None:
        out["format"] = args.format
    if args.out is not None:
        out["path"] = args.out
    if out:
        flags["output"] = out
    cfg = load_config(args.config, overrides + [flags])
    if args.format is None and cfg.output.path and cfg.output.path.endswith(".json"):
        cfg = replace(cfg, output=Output(format="json", path=cfg.output.path))
    return cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_dataset(ds, cfg: SweepConfig, args) -> None:
    if args.timestamp:
        ds.metadata["timestamp"] = build_timestamp(args.timestamp)
    _emit(dumps(ds, cfg.output.format), cfg.output.path)


def _matrix_dict(m) -> dict:
    out = {"kind": m.kind, "field": m.field, "fluxes": list(m.flux_labels),
           "forces": list(m.force_labels), "values": m.values.tolist()}
    if m.eliminated is not None:
        out["eliminated"] = m.eliminated.tolist()
    return out


def _dump(cfg: SweepConfig, args) -> None:
    from ..pipeline import onsager_chain

    model = cfg.model.build(args.phi, field=args.field)
    chain = onsager_chain(model, cfg.quadrature.window, cfg.quadrature.tol)
    mats = {"L4": chain.full, "L3": chain.vprobe, "L2": chain.buttiker}
    if cfg.output.format == "json":
        doc = {"phi": args.phi, "field": args.field, **{k: _matrix_dict(m) for k, m in mats.items()}}
        _emit(json.dumps(doc, indent=2) + "\n", cfg.output.path)
        return
    lines = [f"# phi = {args.phi!r}, field = {args.field:+d}"]
    with np.printoptions(precision=12, suppress=False, linewidth=120):
        for name, m in mats.items():
            lines.append(f"{name} ({m.kind}) fluxes {', '.join(m.flux_labels)}; forces {', '.join(m.force_labels)}")
            lines.append(str(m.values))
    _emit("\n".join(lines) + "\n", cfg.output.path)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "figure":
            _write_dataset(run_figure(args.figure, cfg), cfg, args)
        elif args.command == "sweep":
            _write_dataset(run_sweep(cfg), cfg, args)
        elif args.command == "onsager-dump":
            _dump(cfg, args)
        elif args.command == "check":
            results = run_checks(cfg, args.phi, args.delta, args.x_lt)
            _emit("\n".join(r.line() for r in results) + "\n", cfg.output.path)
            if not all(r.passed for r in results):
                return EXIT_NUMERIC
    except ConfigError as exc:
        for field, msg in exc.problems:
            print(f"config error: {field}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
