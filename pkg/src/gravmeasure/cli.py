"""``gravmeasure`` command line.

Exit codes: 0 success, 1 verification failure, 2 configuration or grid
error, 3 numerical fault.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .checks import CHECKS, deviation_table, printed_form_table, run_checks
from .config import RunConfig
from .cow import (
    cow_intensity,
    cow_phase,
    cow_phase_R_derivative,
    correction_factor,
    RDependenceReport,
    paul_trap_estimate,
    r_dependence_comparison,
)
from .domain import GravitySource, Particle, validate_scenario
from .errors import ConfigError, GridMismatch, NumericalFault
from .interference import BeamPair, InterferenceReport, interference_report
from .kernels import measured_propagator, relative_difference, unmeasured_propagator
from .records import read_record_csv, zero_record
from .serialize import csv_text, dumps

SUBCOMMANDS = ("propagator", "interference", "cow", "estimate", "verify", "sweep")


class UsageError(ConfigError):
    pass


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return t.isoformat(timespec="seconds")


def manifest(cfg: RunConfig, subcommand: str, overrides: dict | None = None) -> dict:
    return {
        "tool": "gravmeasure",
        "version": __version__,
        "subcommand": subcommand,
        "config_digest": cfg.digest(),
        "overrides": overrides or {},
        "timestamp": _timestamp(),
    }


# -- inputs --------------------------------------------------------------------

def _load_config(args) -> RunConfig:
    if args.config:
        return RunConfig.from_file(args.config, toy_units=args.toy_units)
    return RunConfig.empty(toy_units=args.toy_units)


def _record_alpha(cfg: RunConfig, record_path):
    if record_path:
        try:
            return read_record_csv(record_path)
        except (OSError, ValueError) as exc:
            if isinstance(exc, GridMismatch):
                raise
            raise ConfigError(f"cannot read record {record_path}: {exc}") from None
    return cfg.record("record")


def _lp(amp) -> dict:
    return {"log_magnitude": float(amp.log_magnitude), "phase": float(amp.phase)}


# -- computations (pure: config in, ordered dict out) ----------------------------

def compute_propagator(cfg: RunConfig, record_path=None) -> dict:
    s = cfg.scenario()
    rec = _record_alpha(cfg, record_path)
    out = {"validation": list(validate_scenario(s).violations), "unmeasured": _lp(unmeasured_propagator(s))}
    if rec is not None:
        derived = measured_propagator(s, rec, "derived")
        printed = measured_propagator(s, rec, "printed")
        out["measured"] = _lp(derived)
        out["measured_printed"] = _lp(printed)
        out["printed_vs_derived"] = float(relative_difference(printed, derived))
        out["measured_vs_unmeasured"] = float(relative_difference(derived, unmeasured_propagator(s)))
    return out


def _pair(cfg: RunConfig, record_path=None) -> BeamPair:
    s = cfg.scenario()
    ra = _record_alpha(cfg, record_path)
    if ra is None:
        ra = zero_record(s.endpoints.tau_start, s.endpoints.tau_end, cfg.get("measurement.delta_alpha_m"),
                         int(cfg.get("record.points")))
    if cfg.has_record("record_beta"):
        rb = cfg.record("record_beta", resolution=cfg.delta_beta())
    else:
        rb = ra.with_resolution(cfg.delta_beta())
    return BeamPair(s, ra, rb)


def compute_interference(cfg: RunConfig, record_path=None) -> dict:
    rep = interference_report(_pair(cfg, record_path))
    return rep.as_dict()


def compute_cow(cfg: RunConfig, record_path=None) -> dict:
    setup = cfg.cow_setup()
    s = cfg.scenario()
    c, src, part = s.constants, s.source, s.particle
    out = {
        "phase": cow_phase(setup, src, part, c),
        "intensity": cow_intensity(setup, src, part, c),
        "correction_factor": correction_factor(setup, src),
        "phase_derivative_R": cow_phase_R_derivative(setup, src, part, c),
    }
    heights = cfg.cow_heights()
    if heights is not None:
        rep = r_dependence_comparison(setup, src, part, _pair(cfg, record_path), c, heights)
        out["comparison"] = rep.as_dict()
    return out


def compute_estimate(cfg: RunConfig, record_path=None) -> dict:
    ex = cfg.explicit
    toy = cfg.toy_units
    source = GravitySource(cfg.get("source.M_kg"), cfg.get("source.R_m")) \
        if toy or ex & {"source.M_kg", "source.R_m"} else None
    particle = Particle(cfg.get("particle.m_kg")) if toy or "particle.m_kg" in ex else None
    c = cfg.constants() if toy or ex & {"constants.G_SI", "constants.hbar_SI"} else None
    T = cfg.get("estimate.T_s") if "estimate.T_s" in ex else None
    res = cfg.get("estimate.delta_alpha_m") if "estimate.delta_alpha_m" in ex else None
    if res is None and "measurement.delta_alpha_m" in ex:
        res = cfg.get("measurement.delta_alpha_m")
    extra = []
    if toy and res is None:
        res = 1.0
        extra.append("resolution = 1.0 (toy units)")
    if toy and T is None:
        T = 1.0
        extra.append("flight time T = 1.0 (toy units)")
    if toy:
        extra.append("toy units: G = hbar = M = R = m = 1 unless set")
    r = paul_trap_estimate(source, particle, T, res, c)
    d = r.as_dict()
    d["assumptions"] = list(r.assumptions) + extra
    return d


COMPUTE = {
    "propagator": compute_propagator,
    "interference": compute_interference,
    "cow": compute_cow,
    "estimate": compute_estimate,
}


def _flatten(prefix: str, obj, out: dict) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, (bool, int, float, np.floating)) and not isinstance(obj, str):
        out[prefix] = obj


def _sweep_point(task):
    cfg, key, value, target, record_path = task
    res = COMPUTE[target](cfg.with_override(key, value), record_path)
    flat: dict = {}
    _flatten("", res, flat)
    return flat


def parse_sweep(text: str) -> tuple[str, np.ndarray]:
    try:
        key, _, rng = text.partition("=")
        start, stop, steps = rng.split(":")
        n = int(steps)
        if n < 1:
            raise ValueError
        return key.strip(), np.linspace(float(start), float(stop), n)
    except ValueError:
        raise UsageError(f"--sweep expects KEY=start:stop:steps, got {text!r}") from None


def compute_sweep(cfg: RunConfig, key: str, values, target: str, record_path=None, jobs: int = 1):
    cfg.with_override(key, float(values[0]))
    tasks = [(cfg, key, float(v), target, record_path) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    if all("direct_phase" in r for r in rows):
        # follow the parameter path instead of the per-point principal value
        unwrapped = np.unwrap([r["direct_phase"] for r in rows])
        for r, u in zip(rows, unwrapped):
            r["direct_phase_unwrapped"] = float(u)
            r["phase_is_principal"] = False
    columns = list(rows[0])
    for r in rows[1:]:
        columns += [k for k in r if k not in columns]
    return [key] + columns, [[float(v)] + [r.get(k, "") for k in columns] for v, r in zip(values, rows)]


# -- output --------------------------------------------------------------------

def _csv_for(sub: str, result: dict) -> str:
    if sub == "interference":
        return csv_text(InterferenceReport.csv_header(), [[result[k] for k in InterferenceReport.csv_header()]])
    if sub == "cow" and "comparison" in result:
        return csv_text(RDependenceReport.CSV_COLUMNS, result["comparison"]["rows"])
    if sub == "verify":
        cols = ["name", "value", "relation", "tolerance", "passed"]
        return csv_text(cols, [[c[k] for k in cols] for c in result["checks"]])
    if sub == "propagator":
        rows = [[k, v["log_magnitude"], v["phase"]] for k, v in result.items() if isinstance(v, dict)]
        return csv_text(["kind", "log_magnitude", "phase"], rows)
    flat: dict = {}
    _flatten("", result, flat)
    return csv_text(list(flat), [list(flat.values())])


def _emit(args, sub: str, doc: dict, csv_body: str | None) -> None:
    json_body = dumps(doc)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{sub}.json").write_text(json_body)
        if csv_body is not None:
            (out / f"{sub}.csv").write_text(csv_body)
        return
    sys.stdout.write(csv_body if args.format == "csv" and csv_body is not None else json_body)


# -- commands ------------------------------------------------------------------

def _run_sweep(args, cfg: RunConfig, target: str) -> int:
    key, values = parse_sweep(args.sweep)
    header, rows = compute_sweep(cfg, key, values, target, args.record, args.jobs)
    doc = {"manifest": manifest(cfg, "sweep", {"sweep": args.sweep, "target": target}),
           "columns": header, "rows": rows}
    _emit(args, "sweep", doc, csv_text(header, rows))
    return 0


def _run_compute(args, sub: str) -> int:
    cfg = _load_config(args)
    if getattr(args, "sweep", None):
        return _run_sweep(args, cfg, sub)
    result = COMPUTE[sub](cfg, args.record)
    doc = {"manifest": manifest(cfg, sub), "result": result}
    _emit(args, sub, doc, _csv_for(sub, result))
    return 0


def _run_verify(args) -> int:
    if args.list:
        for name, (_, fast) in CHECKS.items():
            sys.stdout.write(f"{name}{'' if fast else '  (slow)'}\n")
        return 0
    if not args.tolerance_scale > 0 or not math.isfinite(args.tolerance_scale):
        raise UsageError("--tolerance-scale must be a positive finite number")
    cfg = _load_config(args)
    names = args.only.split(",") if args.only else None
    if names:
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise UsageError(f"unknown check(s): {', '.join(unknown)}")
    results = run_checks(names, args.tolerance_scale, args.quick)
    checks = [r.as_dict() for r in results]
    result = {
        "all_passed": all(r.passed for r in results),
        "checks": checks,
        "deviation_table": deviation_table(),
        "printed_form": printed_form_table(),
    }
    doc = {"manifest": manifest(cfg, "verify", {"tolerance_scale": args.tolerance_scale, "quick": args.quick}),
           "result": result}
    _emit(args, "verify", doc, _csv_for("verify", result))
    for r in results:
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  {r.value:.3e} {r.relation} {r.tolerance:.3e}\n")
    return 0 if result["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (key = value)")
    common.add_argument("--record", help="alpha record CSV (time_s, alpha_m; resolution in header)")
    common.add_argument("--out", help="directory for <subcommand>.json / .csv")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    common.add_argument("--toy-units", action="store_true", help="G = hbar = M = R = m = 1 defaults")

    p = argparse.ArgumentParser(prog="gravmeasure",
                                description="Monitored-particle propagators in an expanded gravity field.")
    p.add_argument("--version", action="version", version=f"gravmeasure {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("propagator", "interference", "cow", "estimate"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--sweep", help="KEY=start:stop:steps")
        sp.add_argument("--jobs", type=int, default=1)
    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument("--sweep", required=True, help="KEY=start:stop:steps")
    sw.add_argument("--target", choices=tuple(COMPUTE), default="interference")
    sw.add_argument("--jobs", type=int, default=1)
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--list", action="store_true", help="print the check inventory")
    v.add_argument("--quick", action="store_true", help="skip the slow grid checks")
    v.add_argument("--tolerance-scale", type=float, default=1.0)
    v.add_argument("--only", help="comma-separated check names")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        if args.command == "sweep":
            return _run_sweep(args, _load_config(args), args.target)
        return _run_compute(args, args.command)
    except (ConfigError, GridMismatch) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (NumericalFault, ArithmeticError) as exc:
        sys.stderr.write(f"numerical fault: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
