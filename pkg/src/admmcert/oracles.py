"""Objective oracles for the two blocks of the constrained model.

First-block oracles (the nonsmooth term) expose ``value`` and
``scaled_prox(center, weight)`` returning a global minimizer of
f(x) + (weight/2)||x - center||^2, plus optionally
``metric_prox(center, M)`` for a general positive definite metric.
Second-block oracles (the smooth term) expose ``value``, ``gradient``,
``hessian`` and the curvature constants ``lipschitz`` and
``weak_convexity``.  All families below have exact global prox maps or
exact constants; the convergence certificates rely on that exactness.
"""

from __future__ import annotations

import numpy as np

from .linalg import as_matrix, as_vector

# Slack used when testing membership in an indicator's domain.
DOMAIN_TOL = 1e-8


def _symmetrize(M):
    return 0.5 * (M + M.T)


class ConvexQuadratic:
    """f(x) = 0.5 x^T P x + q^T x with P symmetric positive semidefinite."""

    is_quadratic = True

    def __init__(self, P, q):
        P = _symmetrize(as_matrix(P, "P"))
        q = as_vector(q, P.shape[0], "q")
        eigs = np.linalg.eigvalsh(P)
        if eigs[0] < -1e-10 * max(1.0, abs(eigs[-1])):
            raise ValueError(f"P must be positive semidefinite, min eig {eigs[0]}")
        self.P = P
        self.q = q
        self.dim = P.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.P @ x + self.q @ x)

    def gradient(self, x) -> np.ndarray:
        return self.P @ np.asarray(x, dtype=float) + self.q

    def scaled_prox(self, center, weight) -> np.ndarray:
        center = np.asarray(center, dtype=float)
        H = self.P + weight * np.eye(self.dim)
        return np.linalg.solve(H, weight * center - self.q)

    def metric_prox(self, center, metric) -> np.ndarray:
        center = np.asarray(center, dtype=float)
        metric = np.asarray(metric, dtype=float)
        return np.linalg.solve(self.P + metric, metric @ center - self.q)


class BoxIndicator:
    """Indicator of the box [lower, upper]; prox clamps coordinatewise."""

    is_quadratic = False
    metric_prox = None

    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D with equal shape")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper")
        self.lower = lower
        self.upper = upper
        self.dim = lower.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        slack = DOMAIN_TOL * (1.0 + np.abs(self.lower) + np.abs(self.upper))
        if np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack):
            return 0.0
        return float("inf")

    def scaled_prox(self, center, weight) -> np.ndarray:
        return np.clip(np.asarray(center, dtype=float), self.lower, self.upper)


class L0Penalty:
    """f(x) = mu * nnz(x); prox is hard thresholding.

    Coordinates with |c| strictly above sqrt(2 mu / weight) survive; the tie
    at the threshold is resolved to zero so traces are reproducible.
    """

    is_quadratic = False
    metric_prox = None

    def __init__(self, mu, dim):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)
        self.dim = int(dim)

    def value(self, x) -> float:
        return self.mu * int(np.count_nonzero(np.asarray(x, dtype=float)))

    def scaled_prox(self, center, weight) -> np.ndarray:
        center = np.asarray(center, dtype=float)
        thresh = np.sqrt(2.0 * self.mu / weight)
        out = np.where(np.abs(center) > thresh, center, 0.0)
        return out


class SphereIndicator:
    """Indicator of the unit sphere; prox normalizes, exact zero maps to e_1."""

    is_quadratic = False
    metric_prox = None

    def __init__(self, dim):
        self.dim = int(dim)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if abs(np.linalg.norm(x) - 1.0) <= DOMAIN_TOL:
            return 0.0
        return float("inf")

    def scaled_prox(self, center, weight) -> np.ndarray:
        center = np.asarray(center, dtype=float)
        nrm = np.linalg.norm(center)
        if nrm == 0.0:
            out = np.zeros(self.dim)
            out[0] = 1.0
            return out
        return center / nrm


class QuadraticSmooth:
    """g(y) = 0.5 y^T Q y + c^T y with symmetric Q, possibly indefinite.

    The Lipschitz constant defaults to the spectral norm of Q and the weak
    convexity constant to max(0, -lambda_min(Q)); both can be overridden to
    model mis-stated curvature in validation tests.
    """

    is_quadratic = True

    def __init__(self, Q, c, lipschitz=None, weak_convexity=None):
        Q = _symmetrize(as_matrix(Q, "Q"))
        c = as_vector(c, Q.shape[0], "c")
        eigs = np.linalg.eigvalsh(Q)
        self.Q = Q
        self.c = c
        self.dim = Q.shape[0]
        self.lipschitz = float(max(abs(eigs[0]), abs(eigs[-1]))
                               if lipschitz is None else lipschitz)
        self.weak_convexity = float(max(0.0, -eigs[0])
                                    if weak_convexity is None else weak_convexity)

    def value(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(0.5 * y @ self.Q @ y + self.c @ y)

    def gradient(self, y) -> np.ndarray:
        return self.Q @ np.asarray(y, dtype=float) + self.c

    def hessian(self, y) -> np.ndarray:
        return self.Q


class CosineQuadratic:
    """g(y) = 0.5 ||y||^2 + a * sum(cos(y_i)).

    Curvature lies in [1 - a, 1 + a], so lipschitz = 1 + a and
    weak_convexity = max(0, a - 1); the term is genuinely nonconvex for a > 1.
    """

    is_quadratic = False

    def __init__(self, a, dim):
        if a < 0:
            raise ValueError("a must be nonnegative")
        self.a = float(a)
        self.dim = int(dim)
        self.lipschitz = 1.0 + self.a
        self.weak_convexity = max(0.0, self.a - 1.0)

    def value(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(0.5 * y @ y + self.a * np.sum(np.cos(y)))

    def gradient(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return y - self.a * np.sin(y)

    def hessian(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.eye(self.dim) - self.a * np.diag(np.cos(y))
