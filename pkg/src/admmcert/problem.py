"""Problem container, augmented Lagrangian, and assumption validation.

A ProblemInstance packages the linear coupling (A, B, b), the two objective
oracles, a reference penalty level beta_bar at which the penalized objective
is known to be bounded below, and a finite lower bound on that infimum
(objective_floor).  Supplying a lower bound instead of the exact infimum only
enlarges the initial optimality gap, which keeps every certified bound valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleError
from .linalg import as_matrix, as_vector, range_inclusion_gap, reduced_svd

# A range-inclusion gap at or below this level counts as satisfied.
RANGE_GAP_TOL = 1e-8


@dataclass(frozen=True)
class ProblemInstance:
    """min f(x) + g(y)  subject to  A x + B y = b."""

    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    f: object
    g: object
    beta_bar: float = 0.0
    objective_floor: float = 0.0

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        b = as_vector(self.b, B.shape[0], "b")
        if A.shape[0] != B.shape[0]:
            raise ValueError("A and B must have equal row counts")
        for arr in (A, B, b):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "beta_bar", float(self.beta_bar))
        object.__setattr__(self, "objective_floor", float(self.objective_floor))
        if self.beta_bar < 0:
            raise ValueError("beta_bar must be nonnegative")
        if not math.isfinite(self.objective_floor):
            raise ValueError("objective_floor must be finite")

    @property
    def dims(self) -> tuple[int, int, int]:
        """(n, p, l): first block, second block, constraint dimensions."""
        return self.A.shape[1], self.B.shape[1], self.B.shape[0]

    def residual(self, x, y) -> np.ndarray:
        return self.A @ x + self.B @ y - self.b


def aug_lagrangian(inst: ProblemInstance, beta: float, x, y, lam) -> float:
    """f(x) + g(y) - <lam, Ax+By-b> + (beta/2)||Ax+By-b||^2.

    Returns +inf when x lies outside dom f.  A non-finite smooth value is an
    oracle defect and raises instead.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    gval = inst.g.value(y)
    if not math.isfinite(gval):
        raise OracleError(f"smooth oracle returned non-finite value {gval}")
    fval = inst.f.value(x)
    if fval == float("inf"):
        return float("inf")
    r = inst.residual(x, y)
    return float(fval + gval - lam @ r + 0.5 * beta * (r @ r))


def delta0(inst: ProblemInstance, beta: float, x0, y0, lam0) -> float:
    """Initial optimality gap: augmented Lagrangian at the start minus the floor.

    +inf signals a start outside dom f.  The gap is affine in the floor, so a
    conservative floor only loosens, never invalidates, downstream bounds.
    """
    if beta < inst.beta_bar:
        raise ValueError(f"beta={beta} must be >= beta_bar={inst.beta_bar}")
    val = aug_lagrangian(inst, beta, x0, y0, lam0)
    if val == float("inf"):
        return float("inf")
    return val - inst.objective_floor


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        return "; ".join(
            f"{c.name}={'pass' if c.passed else 'FAIL'}" for c in self.checks)


def validate_assumptions(inst: ProblemInstance, samples: int = 200,
                         tol: float = 1e-6, seed: int = 0) -> ValidationReport:
    """Numerically probe the structural assumptions the analysis relies on.

    Universally quantified conditions (the projected-gradient secant bound and
    the lower-curvature bound) are sampled at `samples` random pairs drawn
    over mixed radii; declared constants are taken from the oracles.  Failures
    are reported, not raised, so mis-specified instances can be inspected.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    n, p, _ = inst.dims
    checks = []

    # Nonsmooth block: proper and prox-capable, prox output lands in the domain.
    try:
        probe = inst.f.scaled_prox(np.zeros(n), 1.0)
        fval = inst.f.value(probe)
        a0_ok = math.isfinite(fval)
        a0_detail = {"probe_value": fval}
    except Exception as exc:  # noqa: BLE001 - report, never raise
        a0_ok, a0_detail = False, {"error": repr(exc)}
    checks.append(AssumptionCheck("nonsmooth-proper", a0_ok, a0_detail))

    # Coupling: B nonzero and {b} united with the range of A inside range of B.
    b_nonzero = bool(inst.B.any())
    gap = range_inclusion_gap(inst.B, inst.A, inst.b) if b_nonzero else float("inf")
    checks.append(AssumptionCheck(
        "range-inclusion", b_nonzero and gap <= RANGE_GAP_TOL,
        {"gap": gap, "b_nonzero": b_nonzero}))

    # Basis of the row space of B for the projected secant bound.
    basis = reduced_svd(inst.B)[2] if b_nonzero else np.zeros((p, 0))

    def proj(v):
        return basis @ (basis.T @ v) if basis.shape[1] else np.zeros_like(v)

    L = float(inst.g.lipschitz)
    m = float(inst.g.weak_convexity)
    worst_secant = 0.0
    worst_curv = 0.0
    worst_grad = 0.0
    fd_points = min(samples, 8)
    for i in range(samples):
        radius = 10.0 ** rng.uniform(-1.0, 1.0)
        y = radius * rng.standard_normal(p)
        y2 = y + radius * rng.standard_normal(p)
        dy = y2 - y
        nrm = np.linalg.norm(dy)
        if nrm == 0.0:
            continue
        gy, gy2 = inst.g.gradient(y), inst.g.gradient(y2)
        secant = np.linalg.norm(proj(gy2) - proj(gy))
        worst_secant = max(worst_secant, secant / max(L * nrm, 1e-300))
        curv = (inst.g.value(y2) - inst.g.value(y) - gy @ dy
                + (0.5 * m + 1e-8) * nrm ** 2)
        worst_curv = min(worst_curv, curv) if i else curv
        if i < fd_points:
            worst_grad = max(worst_grad, _grad_fd_error(inst.g, y))
    checks.append(AssumptionCheck(
        "projected-secant", worst_secant <= 1.0 + tol,
        {"worst_ratio": worst_secant, "lipschitz": L}))
    checks.append(AssumptionCheck(
        "lower-curvature", worst_curv >= -1e-10,
        {"worst_slack": worst_curv, "weak_convexity": m}))
    checks.append(AssumptionCheck(
        "gradient-consistency", worst_grad <= 1.0,
        {"worst_ratio": worst_grad}))

    floor_ok = math.isfinite(inst.objective_floor) and inst.beta_bar >= 0
    checks.append(AssumptionCheck(
        "penalized-floor", floor_ok,
        {"objective_floor": inst.objective_floor, "beta_bar": inst.beta_bar}))

    return ValidationReport(tuple(checks))


def _grad_fd_error(g, y) -> float:
    """Central-difference check of the gradient, as a multiple of its budget."""
    grad = g.gradient(y)
    fd = np.empty_like(grad)
    for i in range(y.shape[0]):
        h = 1e-6 * (1.0 + abs(y[i]))
        e = np.zeros_like(y)
        e[i] = h
        fd[i] = (g.value(y + e) - g.value(y - e)) / (2.0 * h)
    budget = max(1e-6, 1e-4 * np.linalg.norm(grad))
    return float(np.linalg.norm(fd - grad) / budget)
