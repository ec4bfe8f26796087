"""JSON and CSV interchange for instances, run configs, traces and reports.

Matrices are nested row-major arrays.  CSV cells carry 17 significant digits
so traces round-trip exactly; JSON floats use Python's shortest round-trip
representation.  The trace column order is part of the interface:

    k,res_primal,res_dual_y,res_dual_x,L_beta,delta_k,eta_k,merit
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .generators import FAMILIES, generate_instance
from .oracles import (BoxIndicator, ConvexQuadratic, CosineQuadratic, L0Penalty,
                      QuadraticSmooth, SphereIndicator)
from .problem import ProblemInstance
from .solver import ExplicitG, LinearizedG, RunResult, SolverConfig, ZeroG

TRACE_COLUMNS = ("k", "res_primal", "res_dual_y", "res_dual_x",
                 "L_beta", "delta_k", "eta_k", "merit")

# Residual budget for the consistent-multiplier start policy.
CONSISTENT_TOL = 1e-8


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# instances

def oracle_to_doc(oracle) -> dict:
    if isinstance(oracle, ConvexQuadratic):
        return {"family": "quadratic", "P": oracle.P.tolist(), "q": oracle.q.tolist()}
    if isinstance(oracle, BoxIndicator):
        return {"family": "box", "lo": oracle.lower.tolist(), "hi": oracle.upper.tolist()}
    if isinstance(oracle, L0Penalty):
        return {"family": "l0", "mu": oracle.mu, "dim": oracle.dim}
    if isinstance(oracle, SphereIndicator):
        return {"family": "sphere", "dim": oracle.dim}
    if isinstance(oracle, QuadraticSmooth):
        return {"family": "quadratic", "Q": oracle.Q.tolist(), "c": oracle.c.tolist(),
                "lipschitz": oracle.lipschitz, "weak_convexity": oracle.weak_convexity}
    if isinstance(oracle, CosineQuadratic):
        return {"family": "cosine-quadratic", "a": oracle.a, "dim": oracle.dim}
    raise ConfigurationError(f"cannot serialize oracle of type {type(oracle).__name__}")


def f_from_doc(doc: dict):
    family = doc.get("family")
    if family == "quadratic":
        return ConvexQuadratic(doc["P"], doc["q"])
    if family == "box":
        return BoxIndicator(doc["lo"], doc["hi"])
    if family == "l0":
        return L0Penalty(doc["mu"], doc["dim"])
    if family == "sphere":
        return SphereIndicator(doc["dim"])
    raise ConfigurationError(f"unknown nonsmooth family {family!r}")


def g_from_doc(doc: dict):
    family = doc.get("family")
    if family == "quadratic":
        return QuadraticSmooth(doc["Q"], doc["c"],
                               lipschitz=doc.get("lipschitz"),
                               weak_convexity=doc.get("weak_convexity"))
    if family == "cosine-quadratic":
        return CosineQuadratic(doc["a"], doc["dim"])
    raise ConfigurationError(f"unknown smooth family {family!r}")


def instance_to_doc(inst: ProblemInstance) -> dict:
    return {
        "A": inst.A.tolist(),
        "B": inst.B.tolist(),
        "b": inst.b.tolist(),
        "f": oracle_to_doc(inst.f),
        "g": oracle_to_doc(inst.g),
        "beta_bar": inst.beta_bar,
        "objective_floor": inst.objective_floor,
    }


def instance_from_doc(doc: dict) -> ProblemInstance:
    for key in ("A", "B", "b", "f", "g"):
        if key not in doc:
            raise ConfigurationError(f"instance document is missing {key!r}")
    return ProblemInstance(
        A=np.asarray(doc["A"], dtype=float),
        B=np.asarray(doc["B"], dtype=float),
        b=np.asarray(doc["b"], dtype=float),
        f=f_from_doc(doc["f"]),
        g=g_from_doc(doc["g"]),
        beta_bar=float(doc.get("beta_bar", 0.0)),
        objective_floor=float(doc.get("objective_floor", 0.0)))


def resolve_instance(doc: dict) -> ProblemInstance:
    """Inline instance document, or {"generator": {...}} spec."""
    if "generator" in doc:
        gen = doc["generator"]
        for key in ("family", "n", "p", "l", "seed"):
            if key not in gen:
                raise ConfigurationError(f"generator spec is missing {key!r}")
        if gen["family"] not in FAMILIES:
            raise ConfigurationError(f"unknown generator family {gen['family']!r}")
        if min(int(gen["n"]), int(gen["p"]), int(gen["l"])) < 1:
            raise ConfigurationError("generator dimensions must be >= 1")
        return generate_instance(gen["family"], int(gen["n"]), int(gen["p"]),
                                 int(gen["l"]), int(gen["seed"]),
                                 params=gen.get("params"))
    return instance_from_doc(doc)


# ---------------------------------------------------------------------------
# solver config and start

def g_spec_from_doc(doc) -> object:
    if doc is None:
        return ZeroG()
    kind = doc.get("kind")
    if kind == "zero":
        return ZeroG()
    if kind == "explicit":
        return ExplicitG(np.asarray(doc["matrix"], dtype=float))
    if kind == "linearized":
        return LinearizedG(float(doc["alpha"]))
    raise ConfigurationError(f"unknown G kind {kind!r}")


def g_spec_to_doc(spec) -> dict:
    if isinstance(spec, ZeroG):
        return {"kind": "zero"}
    if isinstance(spec, ExplicitG):
        return {"kind": "explicit", "matrix": np.asarray(spec.matrix).tolist()}
    if isinstance(spec, LinearizedG):
        return {"kind": "linearized", "alpha": spec.alpha}
    raise ConfigurationError(f"cannot serialize G spec {spec!r}")


def solver_config_from_doc(doc: dict, inst: ProblemInstance) -> SolverConfig:
    """Build a SolverConfig; beta may be the string "auto"."""
    from .params import min_admissible_beta
    from .linalg import spectral_summary

    if "theta" not in doc:
        raise ConfigurationError("solver config is missing 'theta'")
    theta = float(doc["theta"])
    tau = float(doc.get("tau", 0.0))
    beta = doc.get("beta", "auto")
    if beta == "auto":
        spec = spectral_summary(inst.B)
        beta = min_admissible_beta(theta, tau, inst.g.weak_convexity,
                                   inst.g.lipschitz, spec.sigma_min,
                                   spec.sigma_plus, beta_bar=inst.beta_bar,
                                   margin=float(doc.get("beta_margin", 1.1)))
    return SolverConfig(
        theta=theta, beta=float(beta), tau=tau,
        G=g_spec_from_doc(doc.get("G")),
        rho=float(doc.get("rho", 1e-6)),
        max_iters=int(doc.get("max_iters", 1000)),
        certify=bool(doc.get("certify", True)),
        inner_tol=float(doc.get("inner_tol", 1e-12)))


def resolve_start(doc: dict | None, inst: ProblemInstance):
    """Explicit (x0, y0, lambda0) or a named policy.

    "zeros" starts every block at the origin.  "consistent-multiplier" also
    starts the primal blocks at zero but picks the least-squares multiplier
    reproducing the smooth gradient; when the residual of that fit exceeds
    the budget the policy cannot deliver consistency and says so (the seed
    program then decides feasibility on its own).
    """
    n, p, l = inst.dims
    doc = doc or {"policy": "zeros"}
    if "x0" in doc or "y0" in doc or "lambda0" in doc:
        try:
            return (np.asarray(doc["x0"], dtype=float),
                    np.asarray(doc["y0"], dtype=float),
                    np.asarray(doc["lambda0"], dtype=float))
        except KeyError as exc:
            raise ConfigurationError(
                "explicit start needs all of x0, y0, lambda0") from exc
    policy = doc.get("policy", "zeros")
    if policy == "zeros":
        return np.zeros(n), np.zeros(p), np.zeros(l)
    if policy == "consistent-multiplier":
        y0 = np.zeros(p)
        grad = inst.g.gradient(y0)
        lam0, *_ = np.linalg.lstsq(inst.B.T, grad, rcond=None)
        resid = float(np.linalg.norm(inst.B.T @ lam0 - grad))
        if resid > CONSISTENT_TOL * max(1.0, float(np.linalg.norm(grad))):
            raise ConfigurationError(
                f"consistent-multiplier start is unavailable: the smooth "
                f"gradient at the origin leaves residual {resid:.3e} outside "
                f"the row space of B; use tau > 0 with another policy")
        return np.zeros(n), y0, lam0
    raise ConfigurationError(f"unknown start policy {policy!r}")


# ---------------------------------------------------------------------------
# run artifacts

def trace_csv_lines(result: RunResult):
    yield ",".join(TRACE_COLUMNS)
    for rec in result.trace:
        yield ",".join([str(rec.k)] + [_fmt(v) for v in (
            rec.res_primal, rec.res_dual_y, rec.res_dual_x,
            rec.L_beta, rec.delta, rec.eta, rec.merit)])


def write_trace_csv(result: RunResult, path) -> None:
    Path(path).write_text("\n".join(trace_csv_lines(result)) + "\n")


def read_trace_csv(path) -> list[dict]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].split(",") != list(TRACE_COLUMNS):
        raise ConfigurationError(f"{path} is not a trace file (bad header)")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        row = {"k": int(cells[0])}
        for name, cell in zip(TRACE_COLUMNS[1:], cells[1:]):
            row[name] = float(cell)
        rows.append(row)
    return rows


def checks_to_doc(checks) -> list[dict]:
    return [{"name": c.name, "iteration": c.iteration, "slack": c.slack,
             "tolerance": c.tolerance, "pass": c.passed} for c in checks]


def write_certificate(checks, path) -> None:
    Path(path).write_text(json.dumps(checks_to_doc(checks), indent=1) + "\n")


def report_doc(result: RunResult) -> dict:
    from .certify import summarize
    final = result.final
    doc = {
        "outcome": result.outcome,
        "iterations": result.iterations,
        "converged_at": result.converged_at,
        "message": result.message,
        "final_residuals": None if final is None else {
            "primal": final.res_primal,
            "dual_y": final.res_dual_y,
            "dual_x": final.res_dual_x,
        },
        "constants": dict(result.constants.as_dict(), delta0=result.delta0),
        "certificate": None if result.checks is None else summarize(result.checks),
        "wall_time_s": result.wall_time,
    }
    return doc


def write_report(result: RunResult, path) -> None:
    Path(path).write_text(json.dumps(report_doc(result), indent=1) + "\n")


def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict) or "instance" not in doc or "solver" not in doc:
        raise ConfigurationError(
            f"config {path} must be an object with 'instance' and 'solver'")
    return doc
