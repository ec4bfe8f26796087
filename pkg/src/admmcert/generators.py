"""Seeded random problem generators with known objective floors.

Each family builds an instance that satisfies the structural assumptions by
construction: the constraint right-hand side and the columns of the first
coupling matrix are drawn inside the range of the second coupling matrix, and
curvature constants come from exact eigenvalue computations.  The penalized
objective floor is exact for the jointly coercive quadratic family (dense
normal-equations solve) and a conservative eigenvalue-based lower bound for
the families with compact or separable nonsmooth terms; a conservative floor
only enlarges the certified initial gap.
"""

from __future__ import annotations

import numpy as np

from .errors import GeneratorError
from .oracles import (BoxIndicator, ConvexQuadratic, CosineQuadratic, L0Penalty,
                      QuadraticSmooth, SphereIndicator)
from .problem import ProblemInstance

FAMILIES = ("quad-quad", "l0-ls", "box-cos", "sphere-quad")

_FLOOR_PD_MARGIN = 1e-8
_BETA_BAR_CAP = 2.0 ** 20


def generate_instance(family: str, n: int, p: int, l: int, seed: int,
                      params: dict | None = None) -> ProblemInstance:
    """Draw a seeded instance of one of the built-in families.

    params (all optional):
      rank        column rank of B, default min(l, p); below p forces a
                  singular B^T B, which downstream needs tau above the
                  weak-convexity constant
      ortho_a     draw A with orthonormal columns (needs rank(B) >= n);
                  makes the standard splitting prox-exact for indicator f
      nonconvex   quad-quad only: make the smooth block indefinite
      mu          l0-ls sparsity weight (default 0.3)
      a           box-cos cosine weight (default 2.0, weakly convex)
      box_radius  box-cos half-width scale (default 1.0)

    quad-quad at dimensions (1, 1, 1) returns the canonical scalar instance
    used across the diagnostics (identity couplings, unit quadratics,
    objective floor exactly 0).
    """
    if family not in FAMILIES:
        raise GeneratorError(f"unknown family {family!r}; choose from {FAMILIES}")
    if min(n, p, l) < 1:
        raise GeneratorError("dimensions must be >= 1")
    params = dict(params or {})
    rng = np.random.default_rng(seed)

    if family == "quad-quad" and (n, p, l) == (1, 1, 1):
        return _scalar_canonical()

    rank = int(params.get("rank", min(l, p)))
    if not 1 <= rank <= min(l, p):
        raise GeneratorError(f"rank must lie in [1, {min(l, p)}], got {rank}")
    B = _matrix_with_rank(rng, l, p, rank)
    A, b = _coupled_data(rng, B, n, rank, bool(params.get("ortho_a", False)))

    if family == "quad-quad":
        return _quad_quad(rng, A, B, b, nonconvex=bool(params.get("nonconvex", True)),
                          full_rank=(rank == p))
    if family == "l0-ls":
        return _prox_family(rng, A, B, b,
                            lambda: L0Penalty(float(params.get("mu", 0.3)), n))
    if family == "box-cos":
        return _box_cos(rng, A, B, b, a=float(params.get("a", 2.0)),
                        radius=float(params.get("box_radius", 1.0)))
    return _prox_family(rng, A, B, b, lambda: SphereIndicator(n))


def scalar_fixture() -> ProblemInstance:
    """The canonical 1x1x1 quadratic instance (couplings 1, floor 0)."""
    return _scalar_canonical()


def _scalar_canonical() -> ProblemInstance:
    one = np.ones((1, 1))
    return ProblemInstance(
        A=one, B=one.copy(), b=np.zeros(1),
        f=ConvexQuadratic(one.copy(), np.zeros(1)),
        g=QuadraticSmooth(one.copy(), np.zeros(1)),
        beta_bar=0.0, objective_floor=0.0)


def _orthonormal(rng, rows: int, cols: int) -> np.ndarray:
    M = rng.standard_normal((rows, max(cols, 1)))
    Q, _ = np.linalg.qr(M)
    return Q[:, :cols]


def _matrix_with_rank(rng, rows: int, cols: int, rank: int,
                      smin: float = 0.8, smax: float = 2.0) -> np.ndarray:
    U = _orthonormal(rng, rows, rank)
    V = _orthonormal(rng, cols, rank)
    s = np.sort(rng.uniform(smin, smax, rank))[::-1]
    return U @ (s[:, None] * V.T)


def _coupled_data(rng, B, n, rank, ortho_a):
    """A with columns in range(B), b in range(B)."""
    l, p = B.shape
    if ortho_a:
        if rank < n:
            raise GeneratorError(
                f"ortho_a needs rank(B) >= n, got rank {rank} and n {n}")
        basis = np.linalg.qr(B @ rng.standard_normal((p, rank)))[0][:, :rank]
        A = basis @ _orthonormal(rng, rank, n)
    else:
        A = B @ (rng.standard_normal((p, n)) / np.sqrt(p))
    b = B @ (rng.standard_normal(p) / np.sqrt(p))
    return A, b


def _spd(rng, dim: int, lo: float, hi: float) -> np.ndarray:
    V = _orthonormal(rng, dim, dim)
    eigs = rng.uniform(lo, hi, dim)
    return V @ (eigs[:, None] * V.T)


def _quad_quad(rng, A, B, b, nonconvex: bool, full_rank: bool):
    n, p = A.shape[1], B.shape[1]
    P = _spd(rng, n, 0.5, 2.0)
    q = rng.standard_normal(n)
    eigs = rng.uniform(0.3, 2.5, p)
    neg = rng.uniform(0.1, 0.8) if nonconvex else 0.0
    basis = _orthonormal(rng, p, p)
    c = rng.standard_normal(p)
    f = ConvexQuadratic(P, q)
    # One negative mode makes the smooth block weakly convex.  Too much
    # negative curvature can leave the penalized objective unbounded no
    # matter the penalty; shrink it deterministically until coercivity holds.
    last_err = None
    for shrink in (1.0, 0.25, 0.05, 0.0):
        e = eigs.copy()
        if neg * shrink > 0.0:
            e[0] = -neg * shrink
        Q = basis @ (e[:, None] * basis.T)
        try:
            beta_bar, floor = _exact_quadratic_floor(A, B, b, P, q, Q, c)
        except GeneratorError as exc:
            last_err = exc
            continue
        return ProblemInstance(A=A, B=B, b=b, f=f, g=QuadraticSmooth(Q, c),
                               beta_bar=beta_bar, objective_floor=floor)
    raise last_err


def _exact_quadratic_floor(A, B, b, P, q, Q, c):
    """Smallest dyadic beta_bar with a jointly coercive penalized objective,
    and the exact infimum at that level via the normal equations."""
    n, p = A.shape[1], B.shape[1]
    C = np.hstack([A, B])
    CtC = C.T @ C
    H0 = np.zeros((n + p, n + p))
    H0[:n, :n] = P
    H0[n:, n:] = Q
    beta_bar = 0.0
    while True:
        H = H0 + beta_bar * CtC
        eigs = np.linalg.eigvalsh(H)
        if eigs[0] > _FLOOR_PD_MARGIN * max(1.0, eigs[-1]):
            break
        beta_bar = max(1.0, 2.0 * beta_bar)
        if beta_bar > _BETA_BAR_CAP:
            raise GeneratorError(
                "penalized objective stays unbounded below: the smooth block "
                "is indefinite on the null space of the couplings")
    w = np.concatenate([q - beta_bar * (A.T @ b), c - beta_bar * (B.T @ b)])
    z = np.linalg.solve(H0 + beta_bar * CtC, -w)
    floor = 0.5 * float(z @ w) + 0.5 * beta_bar * float(b @ b)
    return beta_bar, floor


def _prox_family(rng, A, B, b, make_f):
    """Families with nonnegative nonsmooth term and strongly convex smooth term.

    With f >= 0 and the penalty >= 0, min_y g(y) lower-bounds the penalized
    objective at beta_bar = 0.
    """
    p = B.shape[1]
    Q = _spd(rng, p, 0.4, 2.2)
    c = rng.standard_normal(p)
    floor = -0.5 * float(c @ np.linalg.solve(Q, c))
    return ProblemInstance(A=A, B=B, b=b, f=make_f(), g=QuadraticSmooth(Q, c),
                           beta_bar=0.0, objective_floor=floor)


def _box_cos(rng, A, B, b, a: float, radius: float):
    n, p = A.shape[1], B.shape[1]
    lower = -radius * rng.uniform(0.5, 1.5, n)
    upper = radius * rng.uniform(0.5, 1.5, n)
    # 0.5||y||^2 >= 0 and each cosine term >= -a, so -a*p floors the objective.
    floor = -a * p
    return ProblemInstance(A=A, B=B, b=b, f=BoxIndicator(lower, upper),
                           g=CosineQuadratic(a, p),
                           beta_bar=0.0, objective_floor=floor)
