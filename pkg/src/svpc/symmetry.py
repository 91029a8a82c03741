"""Signed permutations with an even number of sign flips.

The group acting on signed singular values is

    Pi_d = { diag(signs) @ P : P a permutation matrix, prod(signs) = +1 },

with ``|Pi_2| = 4`` and ``|Pi_3| = 24``.  It preserves the product of the
components, so it maps each set of signed singular values onto itself.
Elements are stored as ``(perm, signs)`` integer tuples; the matrix form is
built on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, GridError
from .gridfn import GridFunction, GridSpec
from .lifting import lift, lifted_dim, project
from .matkit import SUPPORTED_DIMS, minors


@dataclass(frozen=True, order=True)
class GroupElement:
    """``(S nu)_i = signs[i] * nu[perm[i]]`` (0-based ``perm``)."""

    perm: tuple
    signs: tuple

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"{self.perm} is not a permutation")
        if len(self.signs) != len(self.perm) or any(s not in (-1, 1) for s in self.signs):
            raise ValueError(f"bad sign vector {self.signs}")
        if int(np.prod(self.signs)) != 1:
            raise ValueError("the product of the signs must be +1")

    @property
    def dim(self) -> int:
        return len(self.perm)

    def matrix(self) -> np.ndarray:
        d = self.dim
        S = np.zeros((d, d))
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            S[i, p] = s
        return S

    def permutation_matrix(self) -> np.ndarray:
        d = self.dim
        P = np.zeros((d, d))
        P[np.arange(d), list(self.perm)] = 1.0
        return P

    def compose(self, other: "GroupElement") -> "GroupElement":
        """``self ∘ other``, i.e. apply ``other`` first."""
        perm = tuple(other.perm[self.perm[i]] for i in range(self.dim))
        signs = tuple(self.signs[i] * other.signs[self.perm[i]] for i in range(self.dim))
        return GroupElement(perm, signs)

    def inverse(self) -> "GroupElement":
        d = self.dim
        perm = [0] * d
        signs = [1] * d
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            perm[p] = i
            signs[p] = s
        return GroupElement(tuple(perm), tuple(signs))

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.dim)) and all(s == 1 for s in self.signs)


@dataclass(frozen=True)
class GroupTable:
    dim: int
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index(self, g: GroupElement) -> int:
        return self.elements.index(g)

    def matrices(self) -> np.ndarray:
        return np.stack([g.matrix() for g in self.elements])


@lru_cache(maxsize=None)
def enumerate_group(dim: int) -> GroupTable:
    """All elements of ``Pi_dim``: identity first, the rest lexicographic."""
    if dim not in SUPPORTED_DIMS:
        raise DimensionError(f"unsupported dimension {dim}")
    elems = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((-1, 1), repeat=dim):
            if np.prod(signs) == 1:
                elems.append(GroupElement(perm, signs))
    elems.sort()
    ident = GroupElement(tuple(range(dim)), (1,) * dim)
    elems.remove(ident)
    return GroupTable(dim, tuple([ident] + elems))


def apply(S: GroupElement, nu) -> np.ndarray:
    """Apply ``S`` to one point or to an ``(n, d)`` stack."""
    v = np.asarray(nu, dtype=float)
    if v.shape[-1] != S.dim:
        raise DimensionError(f"group element of dimension {S.dim} applied to {v.shape[-1]}-vector")
    return v[..., list(S.perm)] * np.array(S.signs, dtype=float)


def orbit(nu) -> np.ndarray:
    """``S nu`` for every ``S`` in the group, in table order."""
    v = np.asarray(nu, dtype=float)
    return np.stack([apply(S, v) for S in enumerate_group(v.shape[-1])])


# -- grid actions ------------------------------------------------------------

def orbit_index_maps(spec: GridSpec) -> np.ndarray:
    """Flat node index of ``S nu`` for every group element and node.

    Requires a nu-grid (identical, origin-symmetric axes), on which every
    group element maps nodes to nodes.  Shape ``(|Pi_d|, spec.size)``.
    """
    if spec.kind != "nu":
        raise GridError(f"group action needs a nu-grid, got a {spec.kind}-grid")
    n = spec.shape[0]
    mi = np.unravel_index(np.arange(spec.size), spec.shape)
    maps = []
    for S in enumerate_group(spec.ndim):
        new = [mi[p] if s > 0 else (n - 1 - mi[p]) for p, s in zip(S.perm, S.signs)]
        maps.append(np.ravel_multi_index(tuple(new), spec.shape))
    return np.stack(maps)


def _deviation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    same = a == b
    with np.errstate(invalid="ignore"):
        dev = np.abs(a - b)
    return np.where(same, 0.0, dev)


def is_invariant(phi: GridFunction, tol: float = 1e-9):
    """Check ``phi(S nu) == phi(nu)`` within ``tol`` for all nodes and ``S``.

    Returns
    -------
    ok : bool
    deviation : float
        Worst ``|phi(nu) - phi(S nu)|`` (``inf`` if only one side is infinite).
    node : numpy.ndarray or None
        Node where the worst deviation occurs.
    """
    maps = orbit_index_maps(phi.spec)
    v = phi.values
    dev = np.max(_deviation(v[maps], v[None, :]), axis=0)
    j = int(np.argmax(dev))
    worst = float(dev[j])
    return worst <= tol, worst, (phi.spec.node_at(j) if worst > 0 else None)


def symmetrize(phi: GridFunction, mode: str = "min") -> GridFunction:
    """Replace each value by the min (or max) over its orbit."""
    if mode not in ("min", "max"):
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    maps = orbit_index_maps(phi.spec)
    stacked = phi.values[maps]
    out = stacked.min(axis=0) if mode == "min" else stacked.max(axis=0)
    return phi.with_values(out)


# -- support function and rotation reduction ---------------------------------

def canonical(nu) -> np.ndarray:
    """Orbit representative: magnitudes sorted descending, sign on the last entry.

    With a zero entry every sign pattern lies in the orbit, so all entries
    are taken nonnegative.  Works on one point or an ``(n, d)`` stack.
    """
    v = np.asarray(nu, dtype=float)
    out = -np.sort(-np.abs(v), axis=-1)
    odd = np.sum(v < 0, axis=-1) % 2 == 1
    flip = odd & np.all(v != 0, axis=-1)
    out[..., -1] = np.where(flip, -out[..., -1], out[..., -1])
    return out


def lambda_support(beta, nu) -> float:
    """``max over S of <beta, m_d(S nu)>`` (exact finite maximum)."""
    nu = np.asarray(nu, dtype=float)
    return float(lambda_support_many(beta, nu[None, :])[0])


def lambda_support_many(beta, nus) -> np.ndarray:
    """Vectorised :func:`lambda_support` over an ``(n, d)`` stack of points.

    Evaluated on the canonical orbit representative so that the result is
    bit-for-bit constant on orbits.
    """
    beta = np.asarray(beta, dtype=float)
    nus = canonical(nus)
    if beta.shape[-1] != lifted_dim(nus.shape[-1]):
        raise DimensionError("beta and nu dimensions do not match")
    vals = [lift(apply(S, nus)) @ beta for S in enumerate_group(nus.shape[-1])]
    return np.max(np.stack(vals), axis=0)


def _schur_weights(beta: np.ndarray, nu: np.ndarray) -> np.ndarray:
    d = len(nu)
    if d == 2:
        return np.outer(beta[:2], nu)
    nt = np.array([nu[1] * nu[2], nu[0] * nu[2], nu[0] * nu[1]])
    return np.outer(beta[:3], nu) + np.outer(beta[3:6], nt)


def lifted_rotation_value(beta, nu, R1, R2) -> float:
    """``<beta, P(M(R1 diag(nu) R2))>`` via the Schur-product identity.

    Uses ``(R1 ⊙ R2^T) : N + beta_k * prod(nu)``; see
    :func:`lifted_rotation_value_direct` for the minors-based evaluation.
    """
    beta = np.asarray(beta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    N = _schur_weights(beta, nu)
    return float(np.sum(R1 * R2.T * N) + beta[-1] * np.prod(nu))


def lifted_rotation_value_direct(beta, nu, R1, R2) -> float:
    F = np.asarray(R1, dtype=float) @ np.diag(np.asarray(nu, dtype=float)) @ np.asarray(R2, dtype=float)
    return float(np.asarray(beta, dtype=float) @ project(minors(F)))


def lifted_rotation_values(beta, nu, R1s: np.ndarray, R2s: np.ndarray) -> np.ndarray:
    """Batched Schur-product evaluation over stacks of rotation pairs."""
    beta = np.asarray(beta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    N = _schur_weights(beta, nu)
    return np.einsum("nij,nji,ij->n", R1s, R2s, N) + beta[-1] * np.prod(nu)


def embed(S: GroupElement) -> tuple[np.ndarray, np.ndarray]:
    """Rotations ``R1, R2`` in SO(d) with ``R1 diag(nu) R2 = diag(S nu)``.

    With ``S = diag(signs) P`` take ``R1 = diag(signs) P J`` and
    ``R2 = J P^T``, where ``J`` is the identity if ``det P = 1`` and a
    single-axis reflection otherwise; ``J`` commutes with diagonal matrices.
    """
    P = S.permutation_matrix()
    J = np.eye(S.dim)
    if np.linalg.det(P) < 0:
        J[0, 0] = -1.0
    R1 = np.diag(np.array(S.signs, dtype=float)) @ P @ J
    R2 = J @ P.T
    return R1, R2
