"""Small dense linear algebra for 2x2 and 3x3 matrices.

Everything here works on plain ``numpy`` arrays.  Matrices are validated on
entry (square, dimension 2 or 3, finite entries) and never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionError, InputError, SVDConvergenceError

SUPPORTED_DIMS = (2, 3)

JACOBI_MAX_SWEEPS = 64
JACOBI_TOL = 1e-14


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a float array after checking shape and finiteness."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in SUPPORTED_DIMS:
        raise DimensionError(f"expected a 2x2 or 3x3 matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix entries must be finite")
    return A


def det(M) -> float:
    """Cofactor-expansion determinant."""
    A = as_matrix(M)
    if A.shape[0] == 2:
        return float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
    return float(
        A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
        + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
    )


def cofactor(M) -> np.ndarray:
    """Matrix of cofactors of a 3x3 matrix, ``cof(M) = adj(M)^T``."""
    A = as_matrix(M)
    if A.shape[0] != 3:
        raise DimensionError("cofactor matrix is only used for 3x3 matrices")
    C = np.empty((3, 3))
    for i in range(3):
        r = [k for k in range(3) if k != i]
        for j in range(3):
            c = [k for k in range(3) if k != j]
            minor = A[r[0], c[0]] * A[r[1], c[1]] - A[r[0], c[1]] * A[r[1], c[0]]
            C[i, j] = minor if (i + j) % 2 == 0 else -minor
    return C


def adjugate_transpose(M) -> np.ndarray:
    """``adj(M)^T`` built from 2x2 cofactors, so singular ``M`` is fine."""
    return cofactor(M)


class Minors(NamedTuple):
    """Minors of ``F``: ``(F, det F)`` for d=2, ``(F, adj(F)^T, det F)`` for d=3.

    ``B`` is ``None`` in two dimensions.
    """

    A: np.ndarray
    B: Optional[np.ndarray]
    c: float

    @property
    def dim(self) -> int:
        return self.A.shape[0]


def minors(F) -> Minors:
    A = as_matrix(F)
    if A.shape[0] == 2:
        return Minors(A.copy(), None, det(A))
    return Minors(A.copy(), adjugate_transpose(A), det(A))


@dataclass(frozen=True)
class SignedSpectrum:
    """Canonical signed singular values of a matrix.

    Magnitudes are sorted in descending order and the sign of the
    determinant sits on the last entry; all other entries are nonnegative.
    """

    nu: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.nu)

    @property
    def product(self) -> float:
        return float(np.prod(self.nu))


def _svd2_values(A: np.ndarray) -> tuple[float, float]:
    # F = R(phi) diag(q + r, q - r) R(theta) with q, r the norms of the
    # conformal and anti-conformal parts; q - r carries the sign of det F.
    e = 0.5 * (A[0, 0] + A[1, 1])
    f = 0.5 * (A[0, 0] - A[1, 1])
    g = 0.5 * (A[1, 0] + A[0, 1])
    h = 0.5 * (A[1, 0] - A[0, 1])
    q = math.hypot(e, h)
    r = math.hypot(f, g)
    return q + r, q - r


def _jacobi_singular_values(A: np.ndarray) -> np.ndarray:
    """One-sided (Hestenes) Jacobi; returns unsorted singular values."""
    # scale to unit max entry so that squared norms neither underflow nor overflow
    scale = float(np.max(np.abs(A)))
    if scale == 0.0 or not np.isfinite(scale):
        return np.full(A.shape[1], scale)
    U = A / scale
    n = U.shape[1]
    # columns at round-off level relative to A count as zero
    negligible = (JACOBI_TOL * float(np.sqrt(np.sum(U * U)))) ** 2
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(U[:, p] @ U[:, p])
                beta = float(U[:, q] @ U[:, q])
                gamma = float(U[:, p] @ U[:, q])
                if gamma == 0.0 or min(alpha, beta) <= negligible:
                    continue
                if abs(gamma) <= JACOBI_TOL * math.sqrt(alpha) * math.sqrt(beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
        if not rotated:
            return scale * np.sqrt(np.sum(U * U, axis=0))
    raise SVDConvergenceError(
        f"one-sided Jacobi did not converge within {JACOBI_MAX_SWEEPS} sweeps"
    )


def signed_svd(F) -> SignedSpectrum:
    """Canonical representative of the signed singular values of ``F``.

    Raises
    ------
    SVDConvergenceError
        If the 3x3 Jacobi iteration hits its sweep cap.
    """
    A = as_matrix(F)
    if A.shape[0] == 2:
        s1, s2 = _svd2_values(A)
        return SignedSpectrum(np.array([s1, s2]))
    sigma = np.sort(_jacobi_singular_values(A))[::-1]
    if det(A) < 0:
        sigma[-1] = -sigma[-1]
    return SignedSpectrum(sigma)


def rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    R = np.empty(q.shape[:-1] + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - w * z)
    R[..., 0, 2] = 2 * (x * z + w * y)
    R[..., 1, 0] = 2 * (x * y + w * z)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - w * x)
    R[..., 2, 0] = 2 * (x * z - w * y)
    R[..., 2, 1] = 2 * (y * z + w * x)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def sample_rotations(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` Haar-distributed elements of SO(dim), shape ``(n, dim, dim)``.

    SO(2) uses a uniform angle; SO(3) uses normalized Gaussian quaternions,
    which are uniform on the 3-sphere and hence Haar after the double cover.
    """
    if dim == 2:
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        c, s = np.cos(theta), np.sin(theta)
        R = np.empty((n, 2, 2))
        R[:, 0, 0], R[:, 0, 1], R[:, 1, 0], R[:, 1, 1] = c, -s, s, c
        return R
    if dim == 3:
        q = rng.standard_normal((n, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        return _quaternion_to_matrix(q)
    raise DimensionError(f"unsupported dimension {dim}")


def sample_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    return sample_rotations(dim, 1, rng)[0]


def schur_product(A, B) -> np.ndarray:
    """Entrywise product ``A ⊙ B``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return A * B
