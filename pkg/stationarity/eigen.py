"""
Module Name: eigen.py
Description: Smallest Hessian eigenvalue from Hessian-vector products. Lanczos with full
             reorthogonalization; for small dimensions the answer is cross-checked against a dense
             eigensolve of the Hessian assembled column by column.
Date: 2026-10-19
"""

import numpy as np
from scipy import linalg

from configs.config import (
    LANCZOS_MAX_ITERS, LANCZOS_TOL, LANCZOS_MAX_RESTARTS, DENSE_EIGEN_MAX_DIM, debug, logger
)
from configs.errors import EigenBreakdownError, ConfigurationError
from problems.streams import substream, LANCZOS

BREAKDOWN_TOL = 1e-12


def _orthogonalize(v, basis):
    # two passes of classical Gram-Schmidt keep the basis orthogonal to working precision
    if basis.shape[1]:
        v = v - basis @ (basis.T @ v)
        v = v - basis @ (basis.T @ v)
    return v


def _fresh_start(rng, basis, d):
    """Random unit vector orthogonal to basis; gives up after LANCZOS_MAX_RESTARTS draws."""
    for attempt in range(LANCZOS_MAX_RESTARTS):
        v = _orthogonalize(rng.standard_normal(d), basis)
        norm = np.linalg.norm(v)
        if norm > BREAKDOWN_TOL and np.isfinite(norm):
            return v / norm
        debug(f"lanczos start vector collapsed (attempt {attempt + 1})")
    raise EigenBreakdownError(f"no usable start vector after {LANCZOS_MAX_RESTARTS} restarts")


def lanczos_min_eigenvalue(hvp, d, iters=LANCZOS_MAX_ITERS, tol=LANCZOS_TOL, rng=None):
    """
    Lanczos estimate of the smallest eigenvalue of the symmetric operator hvp.

    When the Krylov space becomes invariant the iteration restarts from a fresh random vector
    orthogonal to everything seen so far; the tridiagonal matrix then becomes block diagonal.
    """
    if int(iters) != iters or iters < 1:
        raise ConfigurationError(f"iters must be >= 1, got {iters}")
    rng = substream(0, LANCZOS) if rng is None else rng
    k_max = min(int(iters), d)
    basis = np.zeros((d, k_max))
    alphas, betas = [], []
    q = _fresh_start(rng, basis[:, :0], d)
    beta_prev = 0.0
    scale = 0.0
    restarted = False
    theta = np.inf

    for j in range(k_max):
        basis[:, j] = q
        u = np.asarray(hvp(q), dtype=np.float64)
        if not np.all(np.isfinite(u)):
            raise EigenBreakdownError("Hessian-vector product returned non-finite values")
        alpha = float(q @ u)
        r = u - alpha * q
        if j and beta_prev:
            r -= beta_prev * basis[:, j - 1]
        r = _orthogonalize(r, basis[:, :j + 1])
        alphas.append(alpha)
        beta = float(np.linalg.norm(r))
        scale = max(scale, abs(alpha), beta)

        if j == 0:
            theta, last = alpha, 1.0
        else:
            ritz, vecs = linalg.eigh_tridiagonal(np.array(alphas), np.array(betas),
                                                 select="i", select_range=(0, 0))
            theta, last = float(ritz[0]), float(vecs[-1, 0])
        if j + 1 == k_max:
            break
        if beta <= BREAKDOWN_TOL * max(1.0, scale):
            q = _fresh_start(rng, basis[:, :j + 1], d)
            betas.append(0.0)
            beta_prev = 0.0
            restarted = True
            continue
        if not restarted and beta * abs(last) < tol:
            debug(f"lanczos converged after {j + 1} steps")
            break
        q = r / beta
        betas.append(beta)
        beta_prev = beta

    return theta


def dense_min_eigenvalue(hvp, d):
    """Smallest eigenvalue of the Hessian assembled from d Hessian-vector products."""
    columns = np.column_stack([hvp(col) for col in np.eye(d)])
    return float(linalg.eigvalsh(0.5 * (columns + columns.T))[0])


def min_eigenvalue(hvp, d, iters=LANCZOS_MAX_ITERS, tol=LANCZOS_TOL, rng=None):
    """
    Smallest eigenvalue of grad^2 f(x) given hvp: v -> grad^2 f(x) v.

    For d <= DENSE_EIGEN_MAX_DIM the dense value is returned and the Lanczos estimate is checked
    against it.
    """
    estimate = lanczos_min_eigenvalue(hvp, d, iters, tol, rng)
    if d > DENSE_EIGEN_MAX_DIM:
        return estimate
    dense = dense_min_eigenvalue(hvp, d)
    if abs(dense - estimate) > max(tol, 1e-6):
        logger.warning(f"lanczos estimate {estimate:.10g} differs from dense value {dense:.10g}")
    return dense
