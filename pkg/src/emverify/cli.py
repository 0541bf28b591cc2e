"""Command-line front end: verify a family member, sweep the family, or run
the identity corpus.

Exit status contract: 0 = pass, 1 = verification failure, 2 = usage or
configuration error.  CSV numbers carry 17 significant digits so round-trips
are lossless, and output is byte-identical across runs for a fixed
configuration and seed.
"""
from __future__ import annotations

import argparse
import os
import sys

from .errors import EmverifyError, InvalidParams
from .family import FamilyParams, build_chart, sweep
from .identities import run_identities
from .residuals import Tolerances, verify

SWEEP_HEADER = "ratio,d,c,area_sigma,area_1,yamabe,calabi,max_residual"
CHECK_HEADER = "equation,max_residual,mean_residual,tolerance,pass"

_DEFAULTS = {
    "a": 1.0,
    "b": 2.0,
    "grid": "16,4,16,4",
    "tol_jet": 1e-8,
    "tol_fd": 1e-5,
    "format": "text",
    "out": None,
    "threads": None,
    "ratio_min": 1.001,
    "ratio_max": 100.0,
    "steps": 200,
    "residual_grid": "10,2,10,2",
    "seed": 0,
    "samples": 1000,
}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_grid(text: str, name: str) -> tuple[int, int, int, int]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise InvalidParams(f"{name} must be four comma-separated integers")
    if len(parts) != 4:
        raise InvalidParams(f"{name} must have four entries (n_t,n_th,n_u,n_th2)")
    if parts[0] < 4 or parts[2] < 4:
        raise InvalidParams(f"{name}: non-angular grid sizes must be >= 4")
    if parts[1] < 1 or parts[3] < 1:
        raise InvalidParams(f"{name}: angular grid sizes must be >= 1")
    return parts


def _load_config_file(path: str) -> dict:
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParams(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def _resolve(args: argparse.Namespace, keys: list[str]) -> dict:
    """defaults < config file < explicit flags."""
    resolved = {k: _DEFAULTS[k] for k in keys}
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        for k, v in file_cfg.items():
            if k not in resolved:
                raise InvalidParams(f"unknown config key {k!r}")
            resolved[k] = type(_DEFAULTS[k])(v) if _DEFAULTS[k] is not None else v
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            resolved[k] = v
    if resolved.get("threads") is None:
        env = os.environ.get("EMVERIFY_THREADS")
        resolved["threads"] = int(env) if env else (os.cpu_count() or 1)
    return resolved


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def cmd_check(args) -> int:
    cfg = _resolve(args, ["a", "b", "grid", "tol_jet", "tol_fd", "format", "out", "threads"])
    if args.print_config:
        print("\n".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
        return 0
    grid = _parse_grid(cfg["grid"], "--grid")
    params = FamilyParams(cfg["a"], cfg["b"])
    chart = build_chart(params)
    tol = Tolerances(jet=cfg["tol_jet"], fd=cfg["tol_fd"])
    report = verify(chart.em_config(), grid, tol, threads=cfg["threads"])
    if cfg["format"] == "csv":
        lines = [CHECK_HEADER]
        for name, mx, mean, tolerance, status in report.to_csv_rows():
            lines.append(f"{name},{_fmt(mx)},{_fmt(mean)},{_fmt(tolerance)},{status}")
        _emit("\n".join(lines), cfg["out"])
    else:
        _emit(report.to_text(), cfg["out"])
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    cfg = _resolve(args, ["ratio_min", "ratio_max", "steps", "residual_grid", "out", "threads"])
    if args.print_config:
        print("\n".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
        return 0
    if cfg["steps"] < 1:
        raise InvalidParams("sweep needs at least one step")
    if not (1.0 < cfg["ratio_min"] <= cfg["ratio_max"]):
        raise InvalidParams("require 1 < ratio_min <= ratio_max")
    rows = sweep(
        cfg["ratio_min"],
        cfg["ratio_max"],
        cfg["steps"],
        residual_grid=_parse_grid(cfg["residual_grid"], "--residual-grid"),
        threads=cfg["threads"],
    )
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.ratio,
                    r.s_h,
                    r.s_sigma,
                    r.area_sigma,
                    r.area_1,
                    r.yamabe,
                    r.calabi,
                    r.max_residual,
                )
            )
        )
    _emit("\n".join(lines), cfg["out"])
    return 0


def cmd_identities(args) -> int:
    cfg = _resolve(args, ["seed", "samples", "out", "threads"])
    if args.print_config:
        print("\n".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
        return 0
    results = run_identities(
        seed=cfg["seed"],
        samples=cfg["samples"],
        flip_divergence_sign=args.flip_codifferential_sign,
    )
    lines = [
        f"{r.name:32s} max {r.max_residual:10.3e}  tol {r.tolerance:7.1e}  "
        f"{'pass' if r.passed else 'FAIL'}  (n={r.samples})"
        for r in results
    ]
    ok = all(r.passed for r in results)
    lines.append("overall: " + ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines), cfg["out"])
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emverify",
        description="Construct and verify the two-sphere-product Einstein-Maxwell family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="optional key=value config file; flags override")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--threads", type=int, help="parallelism degree (default: cores)")
    common.add_argument(
        "--print-config", action="store_true", help="print the resolved configuration and exit"
    )

    p = sub.add_parser("check", parents=[common], help="verify one family member on a grid")
    p.add_argument("--a", type=float, help="inner parameter, 0 < a < b")
    p.add_argument("--b", type=float, help="outer parameter")
    p.add_argument("--grid", help="n_t,n_th,n_u,n_th2 (non-angular sizes >= 4)")
    p.add_argument("--tol-jet", dest="tol_jet", type=float, help="jet-tier tolerance")
    p.add_argument("--tol-fd", dest="tol_fd", type=float, help="finite-difference-tier tolerance")
    p.add_argument("--format", choices=("text", "csv"), help="report format")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("sweep", parents=[common], help="tabulate the family over b/a")
    p.add_argument("--ratio-min", dest="ratio_min", type=float)
    p.add_argument("--ratio-max", dest="ratio_max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument(
        "--residual-grid",
        dest="residual_grid",
        help="coarse verification grid per row (n_t,n_th,n_u,n_th2)",
    )
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("identities", parents=[common], help="run the property corpus")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument(
        "--flip-codifferential-sign",
        action="store_true",
        help=argparse.SUPPRESS,  # negative-control hook used by the tests
    )
    p.set_defaults(fn=cmd_identities)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (InvalidParams, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EmverifyError as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
