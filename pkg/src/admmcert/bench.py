"""Run orchestration: config execution, stepsize sweeps, trace certification.

Exit-code contract (process level, exhaustive):
  0  converged and every certificate check passed (or checking was disabled)
  2  converged but at least one check failed, or a stored trace disagreed
  3  iteration cap reached before the residual target
  4  configuration, assumption, or runtime defect (divergence, inner solver)
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigurationError, GeneratorError
from .problem import validate_assumptions
from .serialize import (load_config, read_trace_csv, resolve_instance,
                        resolve_start, solver_config_from_doc, trace_csv_lines,
                        write_certificate, write_report, write_trace_csv)
from .solver import run

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_ITERATION_CAP = 3
EXIT_CONFIG_ERROR = 4

WORKERS_ENV = "ADMMCERT_WORKERS"

SWEEP_COLUMNS = ("theta", "beta", "outcome", "iterations",
                 "res_primal", "res_dual_y", "res_dual_x",
                 "delta1", "delta2", "eta0",
                 "checks_passed", "checks_failed", "error")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def execute_config(doc: dict):
    """Instance + config + start resolution, validation, and one run."""
    inst = resolve_instance(doc["instance"])
    vdoc = doc.get("validation", {})
    validation = validate_assumptions(inst,
                                      samples=int(vdoc.get("samples", 200)),
                                      tol=float(vdoc.get("tol", 1e-6)),
                                      seed=int(vdoc.get("seed", 0)))
    if not validation.ok:
        raise ConfigurationError(
            f"instance fails assumption validation: {validation.summary()}")
    config = solver_config_from_doc(doc["solver"], inst)
    start = resolve_start(doc.get("start"), inst)
    return inst, config, run(inst, config, start)


def _exit_code(result) -> int:
    if result.outcome == "converged":
        if result.checks is not None and any(not c.passed for c in result.checks):
            return EXIT_CHECK_FAILED
        return EXIT_OK
    if result.outcome == "iteration-cap":
        return EXIT_ITERATION_CAP
    return EXIT_CONFIG_ERROR


def run_config(path) -> int:
    """Execute one config file, write its artifacts, map to an exit code."""
    try:
        doc = load_config(path)
        inst, config, result = execute_config(doc)
    except (ConfigurationError, GeneratorError) as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG_ERROR

    base = Path(path).resolve().parent
    outputs = doc.get("outputs", {})

    def out_path(key, default):
        return base / outputs.get(key, default)

    write_trace_csv(result, out_path("trace", "trace.csv"))
    if result.checks is not None:
        write_certificate(result.checks, out_path("certificate", "certificate.json"))
    write_report(result, out_path("report", "report.json"))
    if result.outcome == "error":
        _err(f"error: {result.message}")
    return _exit_code(result)


def _sweep_member(payload) -> dict:
    doc_json, theta = payload
    doc = json.loads(doc_json)
    doc = dict(doc)
    solver = dict(doc["solver"])
    solver["theta"] = theta
    solver["beta"] = "auto"   # the admissible penalty depends on theta
    doc["solver"] = solver
    row = {name: "" for name in SWEEP_COLUMNS}
    row["theta"] = theta
    try:
        _, config, result = execute_config(doc)
    except (ConfigurationError, GeneratorError) as exc:
        row.update(outcome="error", error=str(exc))
        return row
    final = result.final
    checks = result.checks or []
    row.update(
        beta=config.beta, outcome=result.outcome, iterations=result.iterations,
        res_primal=final.res_primal if final else "",
        res_dual_y=final.res_dual_y if final else "",
        res_dual_x=final.res_dual_x if final else "",
        delta1=result.constants.delta1, delta2=result.constants.delta2,
        eta0=result.constants.eta0,
        checks_passed=sum(1 for c in checks if c.passed),
        checks_failed=sum(1 for c in checks if not c.passed),
        error=result.message)
    return row


def theta_sweep(path, thetas, out_path=None, workers: int | None = None) -> int:
    """Run the config once per stepsize with a per-theta admissible penalty.

    Per-run failures are recorded in their row and the sweep continues.  Rows
    are emitted sorted by theta.  Worker count comes from the argument or the
    ADMMCERT_WORKERS environment variable (default 1, sequential).
    """
    try:
        doc = load_config(path)
        for theta in thetas:
            if not 0.0 < theta < 2.0:
                raise ConfigurationError(f"sweep theta {theta} outside (0, 2)")
    except ConfigurationError as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG_ERROR

    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    doc_json = json.dumps(doc)
    payloads = [(doc_json, float(t)) for t in sorted(thetas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_member, payloads))
    else:
        rows = [_sweep_member(p) for p in payloads]

    rows.sort(key=lambda r: r["theta"])
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(_sweep_cell(row[name]) for name in SWEEP_COLUMNS))
    text = "\n".join(lines) + "\n"
    if out_path is None:
        out_path = Path(path).resolve().parent / "sweep.csv"
    Path(out_path).write_text(text)
    bad = [r for r in rows if r["outcome"] != "converged" or r["checks_failed"]]
    return EXIT_OK if not bad else EXIT_CHECK_FAILED


def _sweep_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def certify_trace(trace_path, config_path, out_path=None) -> int:
    """Re-run a config deterministically and certify a stored trace against it.

    The stored rows must match the recomputed ones exactly (traces are
    platform-reproducible); the full check suite then runs on the recomputed
    trace.
    """
    try:
        doc = load_config(config_path)
        stored = read_trace_csv(trace_path)
        solver = dict(doc["solver"])
        solver["certify"] = True
        doc = dict(doc, solver=solver)
        _, _, result = execute_config(doc)
    except (ConfigurationError, GeneratorError) as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG_ERROR

    fresh = list(trace_csv_lines(result))[1:]
    stored_lines = [",".join([str(r["k"])] + [format(r[c], ".17g")
                                              for c in ("res_primal", "res_dual_y",
                                                        "res_dual_x", "L_beta",
                                                        "delta_k", "eta_k", "merit")])
                    for r in stored]
    mismatch = stored_lines != fresh
    if mismatch:
        _err(f"trace mismatch: stored {len(stored_lines)} rows do not "
             f"reproduce under this config")
    if out_path is not None:
        write_certificate(result.checks, out_path)
    failed = [c for c in result.checks if not c.passed]
    print(f"checks: {len(result.checks)} run, {len(result.checks) - len(failed)} "
          f"passed, {len(failed)} failed; trace "
          f"{'MISMATCH' if mismatch else 'reproduced'}")
    for c in failed[:20]:
        print(f"  FAIL {c.name} at k={c.iteration}: slack={c.slack:.3e} "
              f"tol={c.tolerance:.3e}")
    if mismatch or failed:
        return EXIT_CHECK_FAILED
    return EXIT_OK
