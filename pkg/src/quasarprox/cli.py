"""Batch experiment runner and command-line entry points.

Commands:
  run <config-path>      execute an experiment config, write CSVs + reports
  list-zoo               print the registered test-function ids
  verify <entry-id>      sampled certificate verification for one entry
  rates <trace.csv>      re-check rate bounds for a stored trace

Config files are flat key = value lines (comments start with '#'). Method
specs are colon-separated: `hippa:p=3:beta=1e6` or `psg:step0=0.8`.
"""
from __future__ import annotations

import argparse
import ast
import json
import os
import sys
from pathlib import Path

import numpy as np

from .baselines import METHODS as BASELINE_METHODS
from .baselines import default_baseline_config, run_baseline
from .core import RunTrace, TraceRecord
from .errors import ConfigParseError, QuasarproxError
from .functions import get_entry, zoo_ids
from .hippa import HippaConfig, run_hippa
from .hope import ProxConfig
from .quasar import (
    PROPERTIES,
    QuasarCertificate,
    SamplerConfig,
    definition_residual,
    verify_certificate,
)
from .rates import check_rate_bounds, estimate_rate

TRACE_COLUMNS = (
    "k",
    "value",
    "step_norm",
    "dist_to_min",
    "rel_err",
    "inner_iters",
    "elapsed_s",
)
OUTPUT_ENV_VAR = "QUASARPROX_OUTPUT_DIR"


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config_file(path):
    """Flat key = value config; repeated keys are rejected."""
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigParseError(f"{path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key in raw:
            raise ConfigParseError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


class ExperimentConfig:
    def __init__(self, entry_id, methods, seeds, eps_step, rel_err_tol, max_iters,
                 output_dir, entry_overrides=None):
        assert methods, "at least one method is required"
        self.entry_id = entry_id
        self.methods = list(methods)
        self.seeds = list(seeds)
        self.eps_step = eps_step
        self.rel_err_tol = rel_err_tol
        self.max_iters = max_iters
        self.output_dir = Path(os.environ.get(OUTPUT_ENV_VAR, output_dir))
        self.entry_overrides = dict(entry_overrides or {})

    @staticmethod
    def from_file(path):
        raw = parse_config_file(path)
        overrides = {
            key.split(".", 1)[1]: _literal(val)
            for key, val in raw.items()
            if key.startswith("entry.")
        }
        try:
            return ExperimentConfig(
                entry_id=raw["entry"],
                methods=[m.strip() for m in raw["methods"].split(",") if m.strip()],
                seeds=[int(s) for s in raw.get("seeds", "0").split(",")],
                eps_step=float(raw.get("eps_step", 1e-8)),
                rel_err_tol=(
                    float(raw["rel_err_tol"]) if "rel_err_tol" in raw else None
                ),
                max_iters=int(raw.get("max_iters", 2000)),
                output_dir=raw.get("output_dir", "out"),
                entry_overrides=overrides,
            )
        except KeyError as exc:
            raise ConfigParseError(f"{path}: missing required key {exc}") from None


def _parse_method_spec(spec):
    parts = spec.split(":")
    name = parts[0].strip()
    kw = {}
    for part in parts[1:]:
        if "=" not in part:
            raise ConfigParseError(f"bad method option {part!r} in {spec!r}")
        key, _, value = part.partition("=")
        kw[key.strip()] = _literal(value.strip())
    return name, kw


def _run_method(entry, spec, cfg, seed):
    name, kw = _parse_method_spec(spec)
    x0 = entry.x0(seed)
    region = None
    if kw.pop("project", 0):
        assert entry.certificate is not None, "projection needs a certified region"
        region = entry.certificate.region
    if name == "hippa":
        prox = ProxConfig(
            p=float(kw.pop("p", 2.0)),
            beta=float(kw.pop("beta", 1.0)),
            inner_tol=float(kw.pop("inner_tol", 1e-10)),
            inner_max_iters=int(kw.pop("inner_max", 2000)),
            smoothing_mu=float(kw.pop("mu", 1e-3)),
            smoothing_shrink=float(kw.pop("shrink", 0.1)),
        )
        hippa_cfg = HippaConfig(
            prox=prox,
            eps_step=cfg.eps_step,
            eps_rel=cfg.rel_err_tol,
            max_iters=cfg.max_iters,
            region=region,
            mc_eval_samples=int(kw.pop("mc_eval", 0)),
        )
        assert not kw, f"unused hippa options {sorted(kw)}"
        return run_hippa(entry.oracle, x0, hippa_cfg), hippa_cfg
    if name in BASELINE_METHODS:
        base = default_baseline_config(
            name,
            region=region,
            rel_err_tol=cfg.rel_err_tol,
            max_iters=cfg.max_iters,
        )
        if "step0" in kw or "batch" in kw:
            from .baselines import BaselineConfig

            base = BaselineConfig(
                method=base.method,
                step0=float(kw.pop("step0", base.step0)),
                step_rule=base.step_rule,
                batch=int(kw.pop("batch", base.batch)),
                max_iters=base.max_iters,
                rel_err_tol=base.rel_err_tol,
                region=base.region,
            )
        assert not kw, f"unused baseline options {sorted(kw)}"
        return run_baseline(entry.oracle, x0, base), None
    raise ConfigParseError(f"unknown method {name!r} in spec {spec!r}")


def _write_trace_csv(path, trace, oracle):
    xbar_norm = None
    if oracle.minimizer is not None:
        xbar_norm = float(np.linalg.norm(oracle.minimizer))
    lines = [",".join(TRACE_COLUMNS)]
    for rec in trace.records:
        if rec.dist_to_min is None:
            dist = rel = ""
        else:
            dist = repr(rec.dist_to_min)
            rel = repr(
                rec.dist_to_min / xbar_norm if xbar_norm else rec.dist_to_min
            )
        lines.append(
            ",".join(
                [
                    str(rec.k),
                    repr(rec.value),
                    repr(rec.step_norm),
                    dist,
                    rel,
                    str(rec.inner_iters),
                    repr(rec.elapsed_s),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def _method_slug(spec):
    return spec.replace(":", "_").replace("=", "").replace(".", "p")


def run_experiment(cfg):
    """Execute every (method, seed) pair; returns the artifact paths."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    summary_rows = []
    for spec in cfg.methods:
        slug = _method_slug(spec)
        report = None
        for seed in cfg.seeds:
            entry = get_entry(cfg.entry_id, seed=seed, **cfg.entry_overrides)
            trace, hippa_cfg = _run_method(entry, spec, cfg, seed)
            csv_path = cfg.output_dir / f"{cfg.entry_id}_{slug}_seed{seed}.csv"
            _write_trace_csv(csv_path, trace, entry.oracle)
            paths.append(csv_path)
            final = trace.records[-1]
            xbar = entry.oracle.minimizer
            rel_err = ""
            if final.dist_to_min is not None and xbar is not None:
                nrm = float(np.linalg.norm(xbar))
                rel_err = repr(final.dist_to_min / nrm if nrm else final.dist_to_min)
            summary_rows.append(
                (
                    f"{slug}_seed{seed}",
                    str(final.k),
                    repr(final.elapsed_s),
                    rel_err,
                    repr(final.value),
                )
            )
            if report is None:
                report = _rate_report(entry, trace, hippa_cfg)
        report_path = cfg.output_dir / f"{cfg.entry_id}_{slug}_rates.json"
        report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        paths.append(report_path)
    summary_path = cfg.output_dir / f"{cfg.entry_id}_summary.csv"
    header = "method,iteration_to_stop,time_s,relative_error,objective_value"
    summary_path.write_text(
        "\n".join([header] + [",".join(row) for row in summary_rows]) + "\n"
    )
    paths.append(summary_path)
    return paths


def _rate_report(entry, trace, hippa_cfg):
    try:
        fitted = estimate_rate(trace, entry.oracle, getattr(
            hippa_cfg.prox, "p", 2.0) if hippa_cfg else 2.0)
    except QuasarproxError:
        fitted = {}
    if hippa_cfg is None or entry.certificate is None:
        return {"fitted": fitted, "theorem_checks": []}
    try:
        report = check_rate_bounds(
            trace, entry.certificate, hippa_cfg, entry.oracle.min_value
        )
        out = report.to_json()
        out["fitted"] = fitted or out["fitted"]
        return out
    except QuasarproxError as exc:
        return {"fitted": fitted, "theorem_checks": [], "note": str(exc)}


# ------------------------------------------------------------------ commands
def _cmd_run(args):
    cfg = ExperimentConfig.from_file(args.config)
    paths = run_experiment(cfg)
    for path in paths:
        print(path)
    return 0


def _cmd_list_zoo(args):
    for entry_id in zoo_ids():
        print(entry_id)
    return 0


def _cmd_verify(args):
    entry = get_entry(args.entry_id, seed=args.seed)
    sampler = SamplerConfig(n_samples=args.samples, seed=args.seed)
    failed = False
    if entry.certificate is not None:
        for prop in args.properties or ["definition"]:
            report = verify_certificate(entry.oracle, entry.certificate, prop, sampler)
            status = "pass" if report.passed else "FAIL"
            print(
                f"{args.entry_id} {prop}: {status} "
                f"(worst violation {report.worst_violation:.3e}, "
                f"{report.samples_tested} samples)"
            )
            failed = failed or not report.passed
    for negative in entry.negative_certificates:
        resid = definition_residual(
            entry.oracle,
            negative.certificate,
            negative.witness_x,
            negative.witness_lam,
        )
        refuted = resid > 0.0
        status = "refuted" if refuted else "NOT refuted"
        print(
            f"{args.entry_id} negative kappa={negative.certificate.kappa:g}: "
            f"{status} (witness residual {resid:.3e})"
        )
        failed = failed or not refuted
    return 1 if failed else 0


def _read_trace_csv(path):
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].split(",") != list(TRACE_COLUMNS):
        raise ConfigParseError(f"{path}: not a trace CSV")
    records = []
    for line in lines[1:]:
        parts = line.split(",")
        records.append(
            TraceRecord(
                k=int(parts[0]),
                x=np.empty(0),
                value=float(parts[1]),
                step_norm=float(parts[2]),
                dist_to_min=float(parts[3]) if parts[3] else None,
                inner_iters=int(parts[5]),
                elapsed_s=float(parts[6]),
            )
        )
    return RunTrace(
        records=records,
        config_digest="",
        terminated_by="max_iters",
        meta={},
    )


def _cmd_rates(args):
    trace = _read_trace_csv(args.trace)
    trace.meta["inner_tol"] = args.inner_tol
    cert = QuasarCertificate.from_json(json.loads(Path(args.cert).read_text()))
    cfg = HippaConfig(
        prox=ProxConfig(p=args.p, beta=args.beta, inner_tol=args.inner_tol),
        eps_step=args.eps_step,
        max_iters=max(len(trace.records), 1),
    )
    report = check_rate_bounds(trace, cert, cfg, args.h_star, radius=args.radius)
    print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    return 0 if report.all_passed else 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="quasarprox", description="experiment runner and certificate checker"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.set_defaults(fn=_cmd_run)

    p_list = sub.add_parser("list-zoo", help="list registered objectives")
    p_list.set_defaults(fn=_cmd_list_zoo)

    p_verify = sub.add_parser("verify", help="verify an entry's certificates")
    p_verify.add_argument("entry_id")
    p_verify.add_argument("--property", dest="properties", action="append",
                          choices=PROPERTIES)
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(fn=_cmd_verify)

    p_rates = sub.add_parser("rates", help="re-check bounds for a stored trace")
    p_rates.add_argument("trace")
    p_rates.add_argument("--cert", required=True)
    p_rates.add_argument("--p", type=float, default=2.0)
    p_rates.add_argument("--beta", type=float, default=1.0)
    p_rates.add_argument("--h-star", type=float, default=0.0)
    p_rates.add_argument("--eps-step", type=float, default=1e-8)
    p_rates.add_argument("--inner-tol", type=float, default=1e-10)
    p_rates.add_argument("--radius", type=float, default=None)
    p_rates.set_defaults(fn=_cmd_rates)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except QuasarproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
