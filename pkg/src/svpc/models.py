"""Isotropic energy densities in matrix form ``W(F)`` and signed form ``phi(nu)``.

Every model provides both evaluators, computed along independent routes
where possible (invariants of ``F`` or a library SVD for ``W``, plain
algebra on ``nu`` for ``phi``), so that ``W(F) = phi(signed_svd(F))`` is a
real consistency check.  Barrier models return ``+inf`` for ``det F <= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, InputError
from .gridfn import GridFunction, GridSpec, build
from .lifting import elementary_symmetric, lift, lifted_dim
from .matkit import SUPPORTED_DIMS, as_matrix, cofactor, det
from .symmetry import lambda_support_many, orbit

YES, NO = "yes", "no"


@dataclass
class EnergyModel:
    """A named isotropic energy with matched evaluators.

    ``phi`` maps an ``(n, d)`` array of signed singular values to ``n``
    extended reals; ``W`` maps one ``d x d`` matrix to an extended real.
    """

    name: str
    dim: int
    params: dict
    description: str
    phi: Callable
    W: Callable
    finite_everywhere: bool
    det_barrier: bool
    known_svpc: str
    psi: Optional[Callable] = None
    schema: dict = field(default_factory=dict)

    def Phi(self, nu) -> float:
        nu = np.asarray(nu, dtype=float)
        if nu.shape != (self.dim,):
            raise DimensionError(f"{self.name} expects {self.dim} signed singular values")
        return float(self.phi(nu[None, :])[0])

    def sample(self, nu_grid: GridSpec) -> GridFunction:
        if nu_grid.kind != "nu" or nu_grid.dim != self.dim:
            raise DimensionError(f"{self.name} needs a d={self.dim} nu-grid")
        return build(nu_grid, self.phi, vectorized=True)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "description": self.description,
            "parameters": {k: _jsonable(v) for k, v in self.schema.items()},
            "finite_everywhere": self.finite_everywhere,
            "det_barrier": self.det_barrier,
            "known_svpc": self.known_svpc,
        }


def evaluate_W(m: EnergyModel, F) -> float:
    return float(m.W(as_matrix(F)))


def evaluate_Phi(m: EnergyModel, nu) -> float:
    return m.Phi(nu)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    return v


def _signed_values_lib(F: np.ndarray) -> np.ndarray:
    """Signed singular values from the library SVD (independent of matkit)."""
    s = np.linalg.svd(F, compute_uv=False)
    if np.linalg.det(F) < 0:
        s[-1] = -s[-1]
    return s


def _barrier(prod: np.ndarray, finite: np.ndarray) -> np.ndarray:
    return np.where(prod > 0, finite, np.inf)


# -- model builders -------------------------------------------------------------

def _lifted_affine(d, p):
    k = lifted_dim(d)
    beta = np.asarray(p["beta"], dtype=float).reshape(-1)
    if beta.shape != (k,):
        raise InputError(f"beta must have {k} entries for d={d}")
    if np.any(beta[:-1] != 0):
        raise InputError(
            "only slopes along the determinant coordinate give invariant lifted-affine energies;"
            " beta must vanish except in its last entry"
        )
    c, off = float(beta[-1]), float(p["offset"])

    def phi(nu):
        return lift(nu) @ beta + off

    def W(F):
        return c * det(F) + off

    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=YES)


def _lifted_convex(d, p):
    a, c, e, off = (float(p[k]) for k in ("a", "c", "e", "offset"))
    b = float(p.get("b", 0.0))
    if min(a, b, c) < 0:
        raise InputError("a, b and c must be nonnegative for a convex quadratic")

    def phi(nu):
        x = lift(nu)
        out = 0.5 * a * np.sum(x[:, :d] ** 2, axis=1)
        if d == 3:
            out += 0.5 * b * np.sum(x[:, 3:6] ** 2, axis=1)
        return out + 0.5 * c * x[:, -1] ** 2 + e * x[:, -1] + off

    def W(F):
        J = det(F)
        out = 0.5 * a * float(np.sum(F * F)) + 0.5 * c * J * J + e * J + off
        if d == 3:
            out += 0.5 * b * float(np.sum(cofactor(F) ** 2))
        return out

    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=YES)


def _svk(d, p):
    lam, mu = float(p["lambda"]), float(p["mu"])

    def phi(nu):
        sq = nu * nu
        return lam / 8.0 * (np.sum(sq, axis=1) - d) ** 2 + mu / 4.0 * np.sum((sq - 1.0) ** 2, axis=1)

    def W(F):
        E = 0.5 * (F.T @ F - np.eye(d))
        return lam / 2.0 * float(np.trace(E)) ** 2 + mu * float(np.trace(E @ E))

    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=NO)


def _ogden(d, p):
    pw, q = float(p["p"]), float(p["q"])
    if pw < 1:
        raise InputError("p must be >= 1")
    if q < 0:
        raise InputError("q must be >= 0")

    def phi(nu):
        out = np.sum(np.abs(nu) ** pw, axis=1)
        if q == 0:
            return out
        prod = np.prod(nu, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _barrier(prod, out + np.abs(prod) ** (-q))

    def W(F):
        s = np.sqrt(np.clip(np.linalg.eigvalsh(F.T @ F), 0.0, None))
        out = float(np.sum(s**pw))
        if q == 0:
            return out
        J = np.linalg.det(F)
        return out + J ** (-q) if J > 0 else math.inf

    flags = dict(finite_everywhere=q == 0, det_barrier=q > 0, known_svpc=YES)
    return phi, W, flags


def _double_well(d, p):
    a = float(p["a"])
    if a < 0:
        raise InputError("a must be >= 0")

    pts = orbit(np.full(d, a))  # the wells, one per group element

    def phi(nu):
        dist = np.sum((nu[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        return np.min(dist, axis=1)

    def W(F):
        # distance to a * SO(d) via the Kabsch rotation
        U, _, Vt = np.linalg.svd(F)
        D = np.eye(d)
        D[-1, -1] = np.sign(np.linalg.det(U @ Vt)) or 1.0
        R = U @ D @ Vt
        return float(np.sum((F - a * R) ** 2))

    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=NO)


def _det_barrier(d, p):
    def phi(nu):
        prod = np.prod(nu, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _barrier(prod, -np.log(np.abs(prod)) + np.sum(nu * nu, axis=1))

    def W(F):
        J = np.linalg.det(F)
        return -math.log(J) + float(np.sum(F * F)) if J > 0 else math.inf

    return phi, W, dict(finite_everywhere=False, det_barrier=True, known_svpc=YES)


def _concave(d, p):
    def phi(nu):
        return -np.sum(nu * nu, axis=1)

    def W(F):
        return -float(np.sum(F * F))

    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=NO)


# psi library: name -> (allowed dims, psi(e, a, b, c))
def _psi_quadratic(e, a, b, c):
    return a * (e[0] ** 2 - 2.0 * e[1]) + c * e[-1] ** 2 + b * e[-1]


def _psi_quartic(e, a, b, c):
    return a * e[0] ** 4 + c * e[1] ** 2 + b * e[1]


def _psi_abs(e, a, b, c):
    return a * abs(e[0]) + c * e[1] ** 2 + b * e[1]


def _psi_cosh(e, a, b, c):
    return a * math.cosh(e[0]) + c * e[1] ** 2 + b * e[1]


def _psi_trace(e, a, b, c):
    return a * e[0]


PSI_LIBRARY = {
    "quadratic": ((2, 3), _psi_quadratic, "a (e1^2 - 2 e2) + c e_d^2 + b e_d"),
    "quartic": ((2,), _psi_quartic, "a e1^4 + c e2^2 + b e2"),
    "abs": ((2,), _psi_abs, "a |e1| + c e2^2 + b e2"),
    "cosh": ((2,), _psi_cosh, "a cosh(e1) + c e2^2 + b e2"),
    "trace": ((2, 3), _psi_trace, "a e1 (not symmetric; a negative example)"),
}


def _invariant(d, p):
    name = p["psi"]
    if name not in PSI_LIBRARY:
        raise InputError(f"unknown psi {name!r}; choose from {sorted(PSI_LIBRARY)}")
    dims, fn, _ = PSI_LIBRARY[name]
    if d not in dims:
        raise DimensionError(f"psi {name!r} is only available for d in {dims}")
    a, b, c = float(p["a"]), float(p["b"]), float(p["c"])
    if name != "trace" and min(a, c) < 0:
        raise InputError("a and c must be nonnegative for a convex psi")

    def psi(e):
        return fn(np.asarray(e, dtype=float), a, b, c)

    def phi(nu):
        E = elementary_symmetric(nu)
        return np.array([psi(e) for e in E])

    def W(F):
        return float(psi(elementary_symmetric(_signed_values_lib(F))))

    known = NO if name == "trace" else YES
    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=known, psi=psi)


def _lambda_support(d, p):
    k = lifted_dim(d)
    beta = np.asarray(p["beta"], dtype=float).reshape(-1)
    if beta.shape != (k,):
        raise InputError(f"beta must have {k} entries for d={d}")

    def phi(nu):
        return lambda_support_many(beta, nu)

    def W(F):
        return float(lambda_support_many(beta, _signed_values_lib(F)[None, :])[0])

    return phi, W, dict(finite_everywhere=True, det_barrier=False, known_svpc=YES)


def _default_beta(d, last_only=False):
    k = lifted_dim(d)
    if last_only:
        return [0.0] * (k - 1) + [1.0]
    return [1.0, 0.5, 0.25] if d == 2 else [1.0, 0.5, 0.25, 0.5, -0.25, 0.0, 0.75]


_REGISTRY = {
    "concave": (_concave, lambda d: {}, "concave quadratic -|nu|^2"),
    "det_barrier": (_det_barrier, lambda d: {}, "-log(det F) + |F|^2, +inf for det F <= 0"),
    "double_well": (_double_well, lambda d: {"a": 1.0}, "squared distance to a * SO(d)"),
    "invariant_model": (
        _invariant,
        lambda d: {"psi": "quadratic", "a": 1.0, "b": 0.5, "c": 0.5},
        "psi(e(nu)) for psi from a library of functions of the elementary symmetric polynomials",
    ),
    "lambda_support": (
        _lambda_support,
        lambda d: {"beta": _default_beta(d)},
        "max over the group orbit of <beta, m_d(S nu)>",
    ),
    "lifted_affine": (
        _lifted_affine,
        lambda d: {"beta": _default_beta(d, last_only=True), "offset": 0.0},
        "<beta, m_d(nu)> + offset (beta along det F only)",
    ),
    "lifted_convex": (
        _lifted_convex,
        lambda d: dict({"a": 1.0, "c": 0.5, "e": 0.25, "offset": 0.0}, **({"b": 0.5} if d == 3 else {})),
        "a/2 |F|^2 (+ b/2 |cof F|^2) + c/2 det^2 + e det + offset",
    ),
    "ogden_like": (
        _ogden,
        lambda d: {"p": 2.0, "q": 1.0},
        "sum |nu_i|^p + det^-q (q > 0 adds a barrier, +inf for det <= 0)",
    ),
    "st_venant_kirchhoff": (
        _svk,
        lambda d: {"lambda": 1.0, "mu": 1.0},
        "lambda/2 (tr E)^2 + mu tr(E^2), E = (F^T F - I)/2",
    ),
}


def model_names() -> list:
    return sorted(_REGISTRY)


def get_model(name: str, dim: int, params: Optional[dict] = None) -> EnergyModel:
    """Instantiate a catalog model.

    Raises
    ------
    InputError
        Unknown model name or parameter, or parameters out of range.
    """
    if dim not in SUPPORTED_DIMS:
        raise DimensionError(f"unsupported dimension {dim}")
    if name not in _REGISTRY:
        raise InputError(f"unknown model {name!r}; choose from {model_names()}")
    builder, defaults_fn, desc = _REGISTRY[name]
    defaults = defaults_fn(dim)
    params = dict(params or {})
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise InputError(f"unknown parameter(s) {unknown} for {name}; expected {sorted(defaults)}")
    full = dict(defaults, **params)
    phi, W, flags = builder(dim, full)
    psi = flags.pop("psi", None)
    return EnergyModel(name, dim, full, desc, phi, W, psi=psi, schema=defaults, **flags)


def catalog(dim: int = 2) -> list:
    """All models with default parameters, sorted by name."""
    return [get_model(n, dim) for n in model_names()]
