"""Shared test utilities: independent oracles and config helpers.

The seed-program oracles here are deliberately independent of the library's
closed-form path: one solves the full KKT system of the program in the
original (dy, dlam) variables with a pseudoinverse, the other runs exact-step
projected gradient descent from many random starts.
"""

from __future__ import annotations

import numpy as np

from admmcert import (LinearizedG, SolverConfig, ZeroG, c1, min_admissible_beta,
                      spectral_summary)

INF = float("inf")


def seed_qp_data(B, theta, beta, tau, m):
    """Objective H and constraint C of the seed program in z = (dy, dlam)."""
    B = np.asarray(B, dtype=float)
    l, p = B.shape
    spec = spectral_summary(B)
    kap = (beta * spec.sigma_min + tau - m) / 4.0
    c1_val = c1(theta, beta, spec.sigma_plus)
    zeta = 1.0 - 1.0 / theta
    H = np.zeros((p + l, p + l))
    H[:p, :p] = 2.0 * kap * np.eye(p)
    H[p:, p:] = c1_val * (B @ B.T)
    C = np.hstack([tau * np.eye(p), zeta * B.T])
    return H, C


def eta0_kkt_oracle(B, v, theta, beta, tau, m):
    """Seed-program value via a dense pseudoinverse KKT solve; inf if infeasible."""
    H, C = seed_qp_data(B, theta, beta, tau, m)
    v = np.asarray(v, dtype=float)
    z_ls, *_ = np.linalg.lstsq(C, v, rcond=None)
    if np.linalg.norm(C @ z_ls - v) > 1e-8 * max(1.0, np.linalg.norm(v)):
        return INF
    d = H.shape[0]
    K = np.block([[H, C.T], [C, np.zeros((C.shape[0], C.shape[0]))]])
    rhs = np.concatenate([np.zeros(d), v])
    sol = np.linalg.pinv(K) @ rhs
    z = sol[:d]
    assert np.linalg.norm(C @ z - v) <= 1e-7 * max(1.0, np.linalg.norm(v))
    return float(0.5 * z @ (H @ z))


def eta0_pgd_oracle(B, v, theta, beta, tau, m, starts=50, iters=4000, seed=0):
    """Seed-program value via exact-step projected gradient from random starts."""
    H, C = seed_qp_data(B, theta, beta, tau, m)
    v = np.asarray(v, dtype=float)
    Cp = np.linalg.pinv(C)
    z_part = Cp @ v
    if np.linalg.norm(C @ z_part - v) > 1e-8 * max(1.0, np.linalg.norm(v)):
        return INF
    d = H.shape[0]
    ker_proj = np.eye(d) - Cp @ C
    rng = np.random.default_rng(seed)
    Z = z_part[:, None] + ker_proj @ rng.standard_normal((d, starts))
    for _ in range(iters):
        grad = H @ Z
        D = -(ker_proj @ grad)
        dnorm2 = np.sum(D * D, axis=0)
        gnorm2 = np.sum(grad * grad, axis=0)
        # columns whose projected gradient is rounding noise are converged
        active = dnorm2 > 1e-28 * np.maximum(1.0, gnorm2)
        if not active.any():
            break
        den = np.sum(D * (H @ D), axis=0)
        num = np.sum(grad * D, axis=0)
        step = np.where(active & (den > 0), -num / np.where(den > 0, den, 1.0), 0.0)
        Z = Z + step[None, :] * D
        # re-project to kill feasibility drift
        Z = Z - Cp @ (C @ Z - v[:, None])
    vals = 0.5 * np.sum(Z * (H @ Z), axis=0)
    return float(vals.min())


def auto_config(inst, theta, tau=None, g_kind="zero", rho=1e-6, max_iters=2000,
                certify=True, margin=1.1):
    """Admissible config with an auto penalty.

    tau=None picks a tau that keeps the run well posed from an arbitrary
    start: above m for singular B^T B (admissibility) and positive at
    theta=1 (seed-program feasibility without a consistent multiplier).
    """
    spec = spectral_summary(inst.B)
    m = inst.g.weak_convexity
    if tau is None:
        if spec.sigma_min == 0:
            tau = m + 1.0
        elif theta == 1.0:
            tau = m + 0.5
        else:
            tau = 0.0
    beta = min_admissible_beta(theta, tau, m, inst.g.lipschitz,
                               spec.sigma_min, spec.sigma_plus,
                               beta_bar=inst.beta_bar, margin=margin)
    if g_kind == "linearized":
        ata = inst.A.T @ inst.A
        alpha = 1.05 * beta * float(np.linalg.eigvalsh(ata)[-1])
        G = LinearizedG(alpha)
    elif g_kind == "zero":
        G = ZeroG()
    else:
        G = g_kind
    return SolverConfig(theta=theta, beta=beta, tau=tau, G=G, rho=rho,
                        max_iters=max_iters, certify=certify)


def default_start(inst):
    """Origin start, except the sphere family which needs a feasible x0."""
    n, p, l = inst.dims
    x0 = np.zeros(n)
    if inst.f.value(x0) == INF:
        x0 = inst.f.scaled_prox(np.zeros(n), 1.0)
    return x0, np.zeros(p), np.zeros(l)
