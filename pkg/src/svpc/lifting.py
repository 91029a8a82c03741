"""The lifting ``m_d`` of signed singular values and its companions.

Lifted coordinates are always laid out as

* d=2: ``(nu1, nu2, nu1*nu2)``
* d=3: ``(nu1, nu2, nu3, nu2*nu3, nu1*nu3, nu1*nu2, nu1*nu2*nu3)``

All functions accept a single point or a stack of points (last axis is the
coordinate axis).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NotInImageError
from .matkit import Minors

LIFTED_DIM = {2: 3, 3: 7}
DIM_FROM_LIFTED = {3: 2, 7: 3}

MEMBERSHIP_ATOL = 1e-9
MEMBERSHIP_RTOL = 1e-9


def lifted_dim(dim: int) -> int:
    try:
        return LIFTED_DIM[dim]
    except KeyError:
        raise DimensionError(f"unsupported dimension {dim}") from None


def base_dim(k: int) -> int:
    try:
        return DIM_FROM_LIFTED[k]
    except KeyError:
        raise DimensionError(f"no lifting has {k} components") from None


def lift(nu) -> np.ndarray:
    """Evaluate ``m_d`` on one point or on an ``(n, d)`` stack."""
    v = np.asarray(nu, dtype=float)
    d = v.shape[-1]
    if d == 2:
        return np.stack([v[..., 0], v[..., 1], v[..., 0] * v[..., 1]], axis=-1)
    if d == 3:
        a, b, c = v[..., 0], v[..., 1], v[..., 2]
        bc = b * c
        # a * (b * c) is the association used by the cofactor determinant
        return np.stack([a, b, c, bc, a * c, a * b, a * bc], axis=-1)
    raise DimensionError(f"unsupported dimension {d}")


def project(M: Minors) -> np.ndarray:
    """Keep the diagonal of each matrix block and the determinant entry."""
    A = np.asarray(M.A, dtype=float)
    if A.shape == (2, 2):
        return np.array([A[0, 0], A[1, 1], M.c])
    if A.shape == (3, 3):
        if M.B is None:
            raise DimensionError("3x3 minors need the adjugate block")
        B = np.asarray(M.B, dtype=float)
        return np.array([A[0, 0], A[1, 1], A[2, 2], B[0, 0], B[1, 1], B[2, 2], M.c])
    raise DimensionError(f"unsupported block shape {A.shape}")


def _residuals(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = x.shape[-1]
    if k == 3:
        pairs = [(x[..., 2], x[..., 0] * x[..., 1])]
    elif k == 7:
        pairs = [
            (x[..., 3], x[..., 1] * x[..., 2]),
            (x[..., 4], x[..., 0] * x[..., 2]),
            (x[..., 5], x[..., 0] * x[..., 1]),
            (x[..., 6], x[..., 0] * x[..., 1] * x[..., 2]),
        ]
    else:
        raise DimensionError(f"no lifting has {k} components")
    return np.stack([np.abs(got - want) for got, want in pairs], axis=-1), np.stack(
        [np.abs(want) for _, want in pairs], axis=-1
    )


def membership(x, tol: float | None = None) -> tuple[bool, float]:
    """Test whether ``x`` lies in ``Im(m_d)``.

    Parameters
    ----------
    x : array_like
        A lifted point of length 3 or 7.
    tol : float, optional
        Absolute tolerance on each redundancy relation.  When omitted the
        default ``1e-9 + 1e-9 * |expected|`` is used per relation.

    Returns
    -------
    inside : bool
    residual : float
        Largest absolute violation of the redundancy relations.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("membership expects a single lifted point")
    res, scale = _residuals(x)
    if tol is None:
        ok = bool(np.all(res <= MEMBERSHIP_ATOL + MEMBERSHIP_RTOL * scale))
    else:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        ok = bool(np.all(res <= tol))
    return ok, float(res.max())


def recover(x, tol: float | None = None) -> np.ndarray:
    """Invert :func:`lift` on its image (the first ``d`` components)."""
    x = np.asarray(x, dtype=float)
    ok, residual = membership(x, tol)
    if not ok:
        raise NotInImageError(f"point is not in the lifted image (residual {residual:g})", residual)
    return x[: base_dim(len(x))].copy()


def elementary_symmetric(nu) -> np.ndarray:
    """Elementary symmetric polynomials ``e(nu)``."""
    v = np.asarray(nu, dtype=float)
    d = v.shape[-1]
    if d == 2:
        return np.stack([v[..., 0] + v[..., 1], v[..., 0] * v[..., 1]], axis=-1)
    if d == 3:
        a, b, c = v[..., 0], v[..., 1], v[..., 2]
        return np.stack([a + b + c, b * c + a * c + a * b, a * b * c], axis=-1)
    raise DimensionError(f"unsupported dimension {d}")
