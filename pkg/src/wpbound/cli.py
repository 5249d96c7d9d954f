"""Command line entry point: ``wpbound {enumerate,bound,volume,verify,limits}``.

Every command prints a JSON run record on stdout (``limits`` prints CSV) and
stores a copy under ``<cache-dir>/runs``.  Exit codes: 0 ok, 1 a checked
property failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bounds import VARIANTS, BoundError, bound_report, limit_report
from .mc_engine import PROPOSALS, SamplerConfig, SamplingError, estimate_cell_volume_n1
from .ribbon_graph import (CANONICAL_VERSION, DEFAULT_MAX_VERTICES, RibbonGraphError, check_hyperbolic,
                           enumerate_trivalent, write_catalog)
from .verify import SUITES, SuiteConfig, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ENV_CACHE = "WPBOUND_CACHE_DIR"


class UsageError(Exception):
    pass


def _hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, default=_jsonable)
    return hashlib.sha256(text.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


@dataclass
class RunRecord:
    command: str
    parameters: dict
    input_hash: str
    outputs: dict
    output_hash: str
    timestamp: str
    version: str = __version__

    @classmethod
    def build(cls, command: str, parameters: dict, outputs: dict) -> "RunRecord":
        return cls(
            command=command,
            parameters=parameters,
            input_hash=_hash({"command": command, "parameters": parameters, "version": __version__}),
            outputs=outputs,
            output_hash=_hash(outputs),
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True, default=_jsonable)


def cache_dir(args) -> Path:
    if args.cache_dir:
        return Path(args.cache_dir)
    if os.environ.get(ENV_CACHE):
        return Path(os.environ[ENV_CACHE])
    return Path.home() / ".cache" / "wpbound"


def _surface(args, n_required=None):
    if args.punctures is not None and args.punctures <= 0:
        raise UsageError("--punctures must be positive")
    if n_required is not None and args.punctures not in (None, n_required):
        raise UsageError(f"this command needs --punctures {n_required}")
    try:
        check_hyperbolic(args.genus, args.punctures if args.punctures is not None else n_required)
    except RibbonGraphError as exc:
        raise UsageError(str(exc)) from None


def _write_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in fields})
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


# -- commands -----------------------------------------------------------------

def cmd_enumerate(args):
    _surface(args)
    try:
        classes = enumerate_trivalent(args.genus, args.punctures, max_vertices=args.max_vertices)
    except RibbonGraphError as exc:
        raise UsageError(str(exc)) from None
    root = cache_dir(args) / "catalog"
    index = write_catalog(classes, args.genus, args.punctures, root)
    aut = [c.aut_order for c in classes]
    out = {
        "genus": args.genus,
        "punctures": args.punctures,
        "count": len(classes),
        "aut_orders": aut,
        "aut_mass": sum(1.0 / a for a in aut),
        "index": str(index),
        "canonical_version": CANONICAL_VERSION,
    }
    rows = [{"index": i, "aut_order": a, "graph": json.dumps(c.canonical.to_json())}
            for i, (a, c) in enumerate(zip(aut, classes))]
    return out, rows, True


def cmd_bound(args):
    _surface(args)
    try:
        rep = bound_report(args.genus, args.punctures, args.variant)
    except BoundError as exc:
        raise UsageError(str(exc)) from None
    out = rep.as_record()
    rows = [{"g": rep.g, "n": rep.n, "variant": v, "total_upper": out["total_upper"][v],
             "log_total_upper": out["log_total_upper"][v], "limit_ratio": out["limit_ratio"][v]}
            for v in out["total_upper"]]
    return out, rows, True


def cmd_volume(args):
    _surface(args, n_required=1)
    classes = enumerate_trivalent(args.genus, 1)
    cfg = SamplerConfig(seed=args.seed, samples=args.samples, proposal=args.proposal, shards=args.shards)
    per_graph = []
    total = var = 0.0
    for i, iso in enumerate(classes):
        try:
            est = estimate_cell_volume_n1(iso.canonical, cfg)
        except SamplingError as exc:
            per_graph.append({"index": i, "aut_order": iso.aut_order, "error": str(exc)})
            continue
        rec = est.as_record()
        rec.update(index=i, aut_order=iso.aut_order)
        per_graph.append(rec)
        total += est.mean / iso.aut_order
        var += (est.std_error / iso.aut_order) ** 2
    out = {
        "genus": args.genus,
        "punctures": 1,
        "convention": "divided power omega^k/k!, absolute density",
        "per_graph": per_graph,
        "weighted_total": total,
        "weighted_total_std_error": math.sqrt(var),
        "complete": all("error" not in r for r in per_graph),
    }
    if args.genus == 1:
        # labeled comparison only; conventions differ between sources
        out["reference"] = {"label": "pi^2/12 (one common normalization of the (1,1) volume)",
                            "value": math.pi**2 / 12, "asserted": False}
    rows = [{k: r.get(k) for k in ("index", "aut_order", "mean", "std_error", "accept_rate", "error")}
            for r in per_graph]
    return out, rows, True


def cmd_verify(args):
    cfg = SuiteConfig(genus=args.genus, punctures=args.punctures, samples=args.samples, seed=args.seed)
    if args.genus is not None or args.punctures is not None:
        g = 1 if args.genus is None else args.genus
        n = 1 if args.punctures is None else args.punctures
        if n <= 0:
            raise UsageError("--punctures must be positive")
        try:
            check_hyperbolic(g, n)
        except RibbonGraphError as exc:
            raise UsageError(str(exc)) from None
    checks = run_suite(args.suite, cfg)
    failed = [c.as_record() for c in checks if not c.passed]
    out = {
        "suite": args.suite,
        "checks": len(checks),
        "passed": len(checks) - len(failed),
        "failures": failed,
        "records": [c.as_record() for c in checks],
    }
    rows = [{"suite": c.suite, "property": c.property, "pass": c.passed, "params": json.dumps(c.params)}
            for c in checks]
    return out, rows, not failed


def cmd_limits(args):
    if args.gmax < 2:
        raise UsageError("--gmax must be at least 2")
    n = 1 if args.punctures is None else args.punctures
    if n <= 0:
        raise UsageError("--punctures must be positive")
    variants = None if args.variant is None else (args.variant,)
    try:
        rows = limit_report(args.gmax, n=n, variants=variants, g_min=args.gmin)
    except BoundError as exc:
        raise UsageError(str(exc)) from None
    return {"rows": rows}, rows, True


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wpbound", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--csv", metavar="PATH", help="also write a CSV view ('-' for stdout)")
    common.add_argument("--cache-dir", metavar="DIR", help=f"cache directory (default ${ENV_CACHE} or ~/.cache/wpbound)")
    sub = p.add_subparsers(dest="command", required=True)

    def surface(sp, required=True, n_default=None):
        sp.add_argument("--genus", "-g", type=int, required=required, default=None)
        sp.add_argument("--punctures", "-n", type=int, required=required and n_default is None, default=n_default)

    sp = sub.add_parser("enumerate", parents=[common], help="write the catalog of trivalent ribbon graphs")
    surface(sp)
    sp.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_VERTICES)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("bound", parents=[common], help="closed-form volume bounds")
    surface(sp)
    sp.add_argument("--variant", choices=VARIANTS)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("volume", parents=[common], help="Monte Carlo cell volumes (one puncture)")
    surface(sp, n_default=1)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--shards", type=int, default=1)
    sp.add_argument("--proposal", choices=PROPOSALS, default="simplex")
    sp.set_defaults(func=cmd_volume)

    sp = sub.add_parser("verify", parents=[common], help="run property suites")
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    surface(sp, required=False)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("limits", parents=[common], help="ln(upper bound)/(g ln g) table as CSV")
    sp.add_argument("--gmax", type=int, required=True)
    sp.add_argument("--gmin", type=int, default=2)
    sp.add_argument("--punctures", "-n", type=int, default=None)
    sp.add_argument("--variant", choices=VARIANTS)
    sp.set_defaults(func=cmd_limits)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    for flag in ("samples", "shards"):
        if getattr(args, flag, 1) is not None and getattr(args, flag, 1) <= 0:
            print(f"wpbound: error: --{flag} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        outputs, rows, ok = args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"wpbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    params = {k: v for k, v in vars(args).items() if k not in ("func", "csv", "cache_dir")}
    record = RunRecord.build(args.command, params, outputs)
    runs = cache_dir(args) / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    (runs / f"{args.command}_{record.input_hash[:16]}.json").write_text(record.to_json() + "\n")
    if args.command == "limits":
        _write_csv("-", rows)
        if args.csv and args.csv != "-":
            _write_csv(args.csv, rows)
    else:
        if args.csv == "-":
            _write_csv("-", rows)
        else:
            print(record.to_json())
            if args.csv:
                _write_csv(args.csv, rows)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
