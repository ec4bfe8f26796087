"""Over-relaxed proximal splitting loop with exact subproblem solves.

One iteration minimizes the augmented Lagrangian in the first block (with an
optional proximal metric G), then in the second block (with an isotropic
proximal weight tau), and finally moves the multiplier by theta * beta times
the constraint residual, theta in (0, 2).  The auxiliary multiplier reported
for stationarity is the one implied by the first-block optimality conditions,
evaluated before the second block moves.

Subproblems are solved exactly: by a symmetric factorization for quadratic
terms, by the prox map when the quadratic part of the subproblem is a
multiple of the identity, by a metric prox otherwise.  The smooth-block
subproblem for non-quadratic terms uses damped Newton with backtracking down
to ``inner_tol``; the certifier's tolerance model absorbs that inner error.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, InnerSolveError, OracleError
from .linalg import as_matrix, as_vector, spectral_summary
from .params import DerivedConstants, derive_constants, eta0_seed
from .problem import ProblemInstance, aug_lagrangian, delta0

# Abort when the multiplier grows past this factor over its start size.
DIVERGENCE_FACTOR = 1e12

# Max inner Newton iterations for the non-quadratic smooth subproblem.
NEWTON_CAP = 100


@dataclass(frozen=True)
class ZeroG:
    kind = "zero"


@dataclass(frozen=True)
class ExplicitG:
    matrix: np.ndarray
    kind = "explicit"


@dataclass(frozen=True)
class LinearizedG:
    """G = alpha I - beta A^T A, which turns the first subproblem into a prox."""

    alpha: float
    kind = "linearized"


def resolve_g_matrix(spec, A: np.ndarray, beta: float) -> np.ndarray:
    """Materialize the proximal metric for the first block and validate PSD."""
    n = A.shape[1]
    if isinstance(spec, ZeroG):
        return np.zeros((n, n))
    if isinstance(spec, LinearizedG):
        ata = A.T @ A
        lam_max = float(np.linalg.eigvalsh(ata)[-1]) if n else 0.0
        bound = beta * lam_max
        if spec.alpha < bound * (1.0 - 1e-12):
            raise ConfigurationError(
                f"linearized metric needs alpha >= beta*||A^T A|| = {bound:.6g}, "
                f"got alpha={spec.alpha:.6g}")
        return spec.alpha * np.eye(n) - beta * ata
    if isinstance(spec, ExplicitG):
        G = as_matrix(spec.matrix, "G")
        if G.shape != (n, n):
            raise ConfigurationError(f"G must be {n}x{n}, got {G.shape}")
        if np.max(np.abs(G - G.T)) > 1e-10 * max(1.0, float(np.max(np.abs(G)))):
            raise ConfigurationError("G must be symmetric")
        G = 0.5 * (G + G.T)
        if n and float(np.linalg.eigvalsh(G)[0]) < -1e-10:
            raise ConfigurationError("G must be positive semidefinite")
        return G
    raise ConfigurationError(f"unknown G specification: {spec!r}")


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters for the splitting loop.

    beta must be numeric here; automatic penalty selection lives in the
    bench layer.  rho is the termination tolerance on the largest of the
    three residuals, and inner_tol the relative gradient target of the
    smooth-block inner solver.
    """

    theta: float
    beta: float
    tau: float = 0.0
    G: object = field(default_factory=ZeroG)
    rho: float = 1e-6
    max_iters: int = 1000
    certify: bool = True
    inner_tol: float = 1e-12

    def validate(self):
        if not 0.0 < self.theta < 2.0:
            raise ConfigurationError(f"theta must lie in (0, 2), got {self.theta}")
        if self.beta <= 0:
            raise ConfigurationError(f"beta must be positive, got {self.beta}")
        if self.tau < 0:
            raise ConfigurationError(f"tau must be nonnegative, got {self.tau}")
        if self.rho <= 0:
            raise ConfigurationError(f"rho must be positive, got {self.rho}")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")
        if self.inner_tol <= 0:
            raise ConfigurationError("inner_tol must be positive")


@dataclass(frozen=True)
class IterateRecord:
    """One iteration: points, differences, residuals, and merit ingredients."""

    k: int
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    lam_hat: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    dlam: np.ndarray
    L_beta: float
    delta: float
    eta: float
    res_primal: float
    res_dual_y: float
    res_dual_x: float
    inner_budget: float = 0.0   # certified accuracy of the second-block solve

    @property
    def merit(self) -> float:
        return self.delta + self.eta

    @property
    def res_max(self) -> float:
        return max(self.res_primal, self.res_dual_y, self.res_dual_x)


@dataclass(frozen=True)
class StartRecord:
    """Iteration-0 state the certifier seeds from."""

    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    L_beta: float
    delta: float
    eta: float   # optimal value of the seed program
    dy0: np.ndarray
    w0: np.ndarray

    @property
    def merit(self) -> float:
        return self.delta + self.eta


class _XStep:
    """First-block subproblem: min f(x) + 0.5 x^T (G + beta A^T A) x + <d, x>."""

    def __init__(self, inst: ProblemInstance, beta: float, G: np.ndarray):
        self.inst = inst
        self.beta = beta
        self.G = G
        A = inst.A
        n = A.shape[1]
        M = G + beta * (A.T @ A)
        M = 0.5 * (M + M.T)
        self.M = M
        f = inst.f
        diag_mean = float(np.trace(M) / n) if n else 0.0
        is_scalar = bool(
            n and np.max(np.abs(M - diag_mean * np.eye(n)))
            <= 1e-12 * max(1.0, abs(diag_mean)) and diag_mean > 0)
        if getattr(f, "is_quadratic", False):
            self.route = "quadratic"
            H = f.P + M
            self._solve = _make_spd_solver(H, "first-block subproblem")
        elif is_scalar:
            self.route = "prox"
            self.alpha = diag_mean
        elif getattr(f, "metric_prox", None) is not None:
            if n and float(np.linalg.eigvalsh(M)[0]) <= 0:
                raise ConfigurationError(
                    "metric prox route needs G + beta A^T A positive definite")
            self.route = "metric"
            self._solve_m = _make_spd_solver(M, "first-block metric")
        else:
            raise ConfigurationError(
                "first-block subproblem is not solvable exactly: the prox term "
                "needs G + beta A^T A to be a positive multiple of the identity "
                "(use the linearized metric) or the oracle must provide a "
                "metric prox")

    def linear_term(self, x_prev, y_prev, lam_prev) -> np.ndarray:
        A, B, b = self.inst.A, self.inst.B, self.inst.b
        return (-(A.T @ lam_prev) + self.beta * (A.T @ (B @ y_prev - b))
                - self.G @ x_prev)

    def __call__(self, x_prev, y_prev, lam_prev) -> np.ndarray:
        d = self.linear_term(x_prev, y_prev, lam_prev)
        f = self.inst.f
        if self.route == "quadratic":
            return self._solve(-(f.q + d))
        if self.route == "prox":
            return f.scaled_prox(-d / self.alpha, self.alpha)
        center = self._solve_m(-d)
        return f.metric_prox(center, self.M)


class _YStep:
    """Second-block subproblem: min g(y) + 0.5 y^T (tau I + beta B^T B) y + <e, y>.

    After each solve, ``last_budget`` holds the accuracy the returned iterate
    is certified to: the a-posteriori residual norm for the direct route, the
    accepted gradient budget for the Newton route.  The certifier's slack
    model consumes it.
    """

    def __init__(self, inst: ProblemInstance, beta: float, tau: float,
                 inner_tol: float):
        self.inst = inst
        self.beta = beta
        self.tau = tau
        self.inner_tol = inner_tol
        self.last_budget = 0.0
        B = inst.B
        p = B.shape[1]
        self.H0 = tau * np.eye(p) + beta * (B.T @ B)
        g = inst.g
        if getattr(g, "is_quadratic", False):
            self.route = "quadratic"
            self._H = g.Q + self.H0
            self._solve = _make_spd_solver(
                self._H, "second-block subproblem (needs beta*sigma_min + tau > m)",
                require_pd=True)
        else:
            self.route = "newton"

    def linear_term(self, x_next, y_prev, lam_prev) -> np.ndarray:
        A, B, b = self.inst.A, self.inst.B, self.inst.b
        return (-(B.T @ lam_prev) + self.beta * (B.T @ (A @ x_next - b))
                - self.tau * y_prev)

    def _grad(self, y, e) -> np.ndarray:
        return self.inst.g.gradient(y) + self.H0 @ y + e

    def _value(self, y, e) -> float:
        return self.inst.g.value(y) + 0.5 * float(y @ (self.H0 @ y)) + float(e @ y)

    def __call__(self, x_next, y_prev, lam_prev) -> np.ndarray:
        e = self.linear_term(x_next, y_prev, lam_prev)
        g = self.inst.g
        if self.route == "quadratic":
            y = self._solve(-(g.c + e))
            self.last_budget = float(np.linalg.norm(self._H @ y + (g.c + e)))
            return y
        # Damped Newton on a strongly convex objective, warm-started at y_prev.
        target = self.inner_tol * max(1.0, float(np.linalg.norm(self._grad(y_prev, e))))
        y = np.array(y_prev, dtype=float)
        val = self._value(y, e)
        for _ in range(NEWTON_CAP):
            grad = self._grad(y, e)
            gnorm = float(np.linalg.norm(grad))
            budget = max(target, self._grad_floor(y, e))
            if gnorm <= budget:
                self.last_budget = budget
                return y
            H = g.hessian(y) + self.H0
            step = np.linalg.solve(H, -grad)
            descent = float(grad @ step)
            if abs(descent) <= 1e-13 * (1.0 + abs(val)):
                # Predicted decrease is below value-rounding noise; the
                # full step contracts locally, a value-based search cannot.
                y = y + step
                val = self._value(y, e)
                continue
            t = 1.0
            while True:
                y_new = y + t * step
                val_new = self._value(y_new, e)
                if val_new <= val + 1e-4 * t * descent or t < 1e-14:
                    break
                t *= 0.5
            y, val = y_new, val_new
        gnorm = float(np.linalg.norm(self._grad(y, e)))
        budget = max(target, self._grad_floor(y, e))
        if gnorm <= budget:
            self.last_budget = budget
            return y
        raise InnerSolveError(
            f"second-block Newton stalled at gradient norm {gnorm:.3e} "
            f"(target {target:.3e})", achieved=gnorm)

    def _grad_floor(self, y, e) -> float:
        """Rounding floor of the gradient evaluation; below it the iterate is
        exact to machine precision and demanding more is meaningless."""
        scale = (float(np.linalg.norm(self.inst.g.gradient(y)))
                 + float(np.linalg.norm(self.H0 @ y))
                 + float(np.linalg.norm(e)))
        return 64.0 * np.finfo(float).eps * scale


def _make_spd_solver(H, what: str, require_pd: bool = False):
    """Cholesky-backed solver; PSD-singular systems fall back to a pseudoinverse."""
    H = 0.5 * (H + H.T)
    try:
        factor = scipy.linalg.cho_factor(H, lower=True)
        return lambda rhs: scipy.linalg.cho_solve(factor, rhs)
    except np.linalg.LinAlgError as exc:
        if require_pd:
            raise ConfigurationError(f"{what} is not positive definite") from exc
    except ValueError as exc:
        raise ConfigurationError(f"{what} has invalid entries") from exc
    pinv = np.linalg.pinv(H)
    return lambda rhs: pinv @ rhs


def x_step(inst: ProblemInstance, config: SolverConfig, x_prev, y_prev, lam_prev):
    """Solve one first-block subproblem from the given state."""
    G = resolve_g_matrix(config.G, inst.A, config.beta)
    stepper = _XStep(inst, config.beta, G)
    return stepper(np.asarray(x_prev, dtype=float),
                   np.asarray(y_prev, dtype=float),
                   np.asarray(lam_prev, dtype=float))


def y_step(inst: ProblemInstance, config: SolverConfig, x_next, y_prev, lam_prev):
    """Solve one second-block subproblem from the given state."""
    stepper = _YStep(inst, config.beta, config.tau, config.inner_tol)
    return stepper(np.asarray(x_next, dtype=float),
                   np.asarray(y_prev, dtype=float),
                   np.asarray(lam_prev, dtype=float))


def lambda_step(lam_prev, theta: float, beta: float, residual) -> np.ndarray:
    """Multiplier update lam - theta * beta * (Ax + By - b)."""
    return np.asarray(lam_prev, dtype=float) - theta * beta * np.asarray(residual, dtype=float)


def lambda_hat(lam_prev, beta: float, x_next, y_prev, inst: ProblemInstance) -> np.ndarray:
    """Auxiliary multiplier lam - beta * (A x_next + B y_prev - b)."""
    r_half = inst.A @ np.asarray(x_next, dtype=float) \
        + inst.B @ np.asarray(y_prev, dtype=float) - inst.b
    return np.asarray(lam_prev, dtype=float) - beta * r_half


@dataclass
class RunResult:
    outcome: str                       # "converged" | "iteration-cap" | "error"
    trace: list[IterateRecord]
    start: StartRecord
    constants: DerivedConstants
    delta0: float
    G: np.ndarray
    converged_at: int | None = None
    message: str = ""
    checks: list | None = None
    wall_time: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def final(self) -> IterateRecord | None:
        return self.trace[-1] if self.trace else None


def run(inst: ProblemInstance, config: SolverConfig, start,
        on_iterate=None) -> RunResult:
    """Run the splitting loop from start = (x0, y0, lam0).

    Stops when max(primal residual, smooth dual residual, ||G dx||) falls to
    config.rho, at the iteration cap, or on a defect (divergence, inner-solver
    failure).  With config.certify, every per-iteration inequality and the
    whole-run rate bounds are checked and attached to the result.

    Raises ConfigurationError for inadmissible constants, an infeasible seed
    program, or a start outside dom f; defects arising mid-run are reported
    through the outcome instead.
    """
    from .certify import Certifier  # local import to avoid a cycle

    t0 = time.perf_counter()
    config.validate()
    n, p, l = inst.dims
    x0 = as_vector(np.asarray(start[0], dtype=float), n, "x0")
    y0 = as_vector(np.asarray(start[1], dtype=float), p, "y0")
    lam0 = as_vector(np.asarray(start[2], dtype=float), l, "lam0")
    if config.beta < inst.beta_bar:
        raise ConfigurationError(
            f"beta={config.beta} is below the instance's beta_bar={inst.beta_bar}")

    G = resolve_g_matrix(config.G, inst.A, config.beta)
    spectral = spectral_summary(inst.B)
    seed = eta0_seed(inst.B, lam0, inst.g.gradient(y0), config.theta,
                     config.beta, config.tau, inst.g.weak_convexity,
                     spectral=spectral)
    if not seed.feasible:
        raise ConfigurationError(
            "the dual-seed program is infeasible for this start; choose tau > 0 "
            "or a multiplier start with B^T lam0 = grad g(y0)")
    constants = derive_constants(spectral, config.theta, config.beta, config.tau,
                                 inst.g.lipschitz, inst.g.weak_convexity,
                                 seed.value)
    d0 = delta0(inst, config.beta, x0, y0, lam0)
    if not math.isfinite(d0):
        raise ConfigurationError("start x0 lies outside the domain of f")

    start_rec = StartRecord(
        x=x0, y=y0, lam=lam0,
        L_beta=aug_lagrangian(inst, config.beta, x0, y0, lam0),
        delta=d0, eta=seed.value, dy0=seed.dy0, w0=seed.w0)

    xstep = _XStep(inst, config.beta, G)
    ystep = _YStep(inst, config.beta, config.tau, config.inner_tol)
    certifier = Certifier(inst, config, constants, G, start_rec, xstep) \
        if config.certify else None

    trace: list[IterateRecord] = []
    x, y, lam = x0, y0, lam0
    lam0_norm = float(np.linalg.norm(lam0))
    outcome, converged_at, message = "iteration-cap", None, ""

    for k in range(1, config.max_iters + 1):
        try:
            x_next = xstep(x, y, lam)
            lh = lam - config.beta * (inst.A @ x_next + inst.B @ y - inst.b)
            y_next = ystep(x_next, y, lam)
            r = inst.residual(x_next, y_next)
            lam_next = lam - config.theta * config.beta * r
            dx, dy, dlam = x_next - x, y_next - y, lam_next - lam
            L_val = aug_lagrangian(inst, config.beta, x_next, y_next, lam_next)
            eta_k = (0.5 * constants.c1 * float(np.sum((inst.B.T @ dlam) ** 2))
                     + constants.kappa * float(dy @ dy))
            rec = IterateRecord(
                k=k, x=x_next, y=y_next, lam=lam_next, lam_hat=lh,
                dx=dx, dy=dy, dlam=dlam,
                L_beta=L_val, delta=L_val - inst.objective_floor, eta=eta_k,
                res_primal=float(np.linalg.norm(r)),
                res_dual_y=float(np.linalg.norm(inst.g.gradient(y_next)
                                                - inst.B.T @ lh)),
                res_dual_x=float(np.linalg.norm(G @ dx)),
                inner_budget=ystep.last_budget)
            trace.append(rec)
            if certifier is not None:
                certifier.observe(rec)
        except (InnerSolveError, OracleError) as exc:
            # Oracle overflow on a runaway trajectory is a divergence
            # symptom, not a crash.
            outcome, message = "error", str(exc)
            break
        if on_iterate is not None:
            on_iterate(rec)
        x, y, lam = x_next, y_next, lam_next

        if not (math.isfinite(L_val) and math.isfinite(rec.res_max)):
            outcome, message = "error", f"non-finite values at iteration {k}"
            break
        if float(np.linalg.norm(lam)) > DIVERGENCE_FACTOR * (1.0 + lam0_norm):
            outcome, message = ("error",
                                f"multiplier diverged at iteration {k}; "
                                "the penalty parameters look inadmissible")
            break
        if rec.res_max <= config.rho:
            outcome, converged_at = "converged", k
            break

    checks = certifier.finalize(trace) if certifier is not None else None
    return RunResult(outcome=outcome, trace=trace, start=start_rec,
                     constants=constants, delta0=d0, G=G,
                     converged_at=converged_at, message=message,
                     checks=checks, wall_time=time.perf_counter() - t0)
