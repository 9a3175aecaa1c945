"""Dense SPD linear algebra and posterior sampling kernels.

Conventions: SPD matrices are plain ``(d, d)`` float64 numpy arrays that are
symmetric (1e-10 relative tolerance) with strictly positive eigenvalues.
``symmetry_error`` / ``cholesky`` double as the validity checks.

The incremental pieces are sized for the bandit hot loop: rank-one updates of
an inverse (Sherman-Morrison) and of a Cholesky factor (hyperbolic-rotation
downdate) both cost O(d^2) per round, against O(d^3) for refactorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidParameter, NotPositiveDefinite

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the source matrix."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def symmetry_error(a: np.ndarray) -> float:
    """Relative asymmetry |A - A.T|_max / max(1, |A|_max)."""
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - a.T))) / scale


def cholesky(a: np.ndarray, pivot_tol: float = PIVOT_TOL) -> CholeskyFactor:
    """Factor an SPD matrix as L @ L.T with L lower triangular.

    Raises NotPositiveDefinite when any pivot falls at or below ``pivot_tol``
    (equivalently, a diagonal entry of L at or below sqrt(pivot_tol)).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionMismatch("matrix dimension must be >= 1")
    if not np.all(np.isfinite(a)):
        raise InvalidParameter("matrix contains NaN or Inf entries")
    if symmetry_error(a) > 1e-10:
        raise InvalidParameter("matrix is not symmetric within 1e-10 relative tolerance")
    try:
        lower = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    # LAPACK only rejects pivots <= 0; enforce the stricter tolerance here.
    if float(np.min(np.diagonal(lower))) ** 2 <= pivot_tol:
        raise NotPositiveDefinite(
            f"pivot at or below {pivot_tol:g} during factorization"
        )
    return CholeskyFactor(lower=lower)


def spd_inverse(a: np.ndarray) -> np.ndarray:
    """Invert an SPD matrix via its Cholesky factor; result exactly symmetric."""
    factor = cholesky(a)
    inv = scipy.linalg.cho_solve((factor.lower, True), np.eye(factor.dim), check_finite=False)
    return (inv + inv.T) / 2.0


def _downdate_loop(lower, x):
    """In-place rank-one downdate: L L^T - x x^T. Returns False on pivot loss."""
    d = lower.shape[0]
    for k in range(d):
        lkk = lower[k, k]
        xk = x[k]
        r2 = lkk * lkk - xk * xk
        if r2 <= 1e-24:
            return False
        r = np.sqrt(r2)
        c = r / lkk
        s = xk / lkk
        lower[k, k] = r
        for i in range(k + 1, d):
            li = (lower[i, k] - s * x[i]) / c
            lower[i, k] = li
            x[i] = c * x[i] - s * li
    return True


if _HAVE_NUMBA:
    _downdate_kernel = _njit(cache=True)(_downdate_loop)
else:  # pragma: no cover
    _downdate_kernel = _downdate_loop


def chol_downdate(factor: CholeskyFactor, x: np.ndarray) -> CholeskyFactor:
    """Return the lower factor of (L L^T - x x^T).

    Requires the downdated matrix to remain positive definite; raises
    NotPositiveDefinite otherwise. O(d^2).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != factor.dim:
        raise DimensionMismatch(
            f"vector of length {x.shape} incompatible with factor dim {factor.dim}"
        )
    lower = factor.lower.copy()
    ok = _downdate_kernel(lower, x.copy())
    if not ok:
        raise NotPositiveDefinite("rank-one downdate lost positive definiteness")
    return CholeskyFactor(lower=lower)


def sherman_morrison_update(b_inv: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Inverse of (B + c c^T) given B^{-1}.

    Returns B^{-1} - (B^{-1} c c^T B^{-1}) / (1 + c^T B^{-1} c). The result is
    bitwise symmetric whenever the input is, since the subtracted outer
    product is exactly symmetric in floating point.
    """
    b_inv = np.asarray(b_inv, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1 or b_inv.shape != (c.shape[0], c.shape[0]):
        raise DimensionMismatch(
            f"B^-1 shape {b_inv.shape} incompatible with vector length {c.shape}"
        )
    u = b_inv @ c
    denom = 1.0 + float(c @ u)
    return b_inv - np.outer(u, u / denom)


def sample_mvn(mean: np.ndarray, scale: float, factor: CholeskyFactor, rng) -> np.ndarray:
    """Draw from N(mean, scale^2 * F) where F = L L^T is the factored covariance.

    Computes mean + scale * L @ z with z ~ N(0, I) drawn from ``rng``; the z
    draw happens even when scale is 0 so stream consumption is uniform.
    """
    mean = np.asarray(mean, dtype=np.float64)
    if mean.ndim != 1 or mean.shape[0] != factor.dim:
        raise DimensionMismatch(
            f"mean of length {mean.shape} incompatible with factor dim {factor.dim}"
        )
    if scale < 0:
        raise InvalidParameter(f"scale must be >= 0, got {scale}")
    z = rng.standard_normal(factor.dim)
    return mean + scale * (factor.lower @ z)


def sample_beta(s: float, f: float, rng) -> float:
    """Draw from Beta(s, f); valid for any s > 0, f > 0.

    Clamped into the open interval (0, 1) so downstream ratios stay finite.
    """
    if not (s > 0 and f > 0):
        raise InvalidParameter(f"Beta parameters must be positive, got s={s}, f={f}")
    draw = float(rng.beta(s, f))
    return min(max(draw, np.finfo(np.float64).tiny), 1.0 - 2.0**-53)
