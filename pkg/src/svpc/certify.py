"""Singular value polyconvexity verdicts and related diagnostics.

A sampled ``phi`` is certified when its discrete envelope ``(phi^)^v``
reproduces it to within ``certify_tol`` at every finite node.  Because the
slope grid is finite, the dual envelope can only under-estimate the exact
discrete envelope, so a small gap is a conservative certificate.  A large
gap is only reported as a refutation when its witness is interior in slope
space and the primal LP oracle confirms it; everything else is
``Inconclusive``.  All verdicts are conditional on the grids used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .conjugate import (
    ConjugationConfig,
    default_tolerances,
    envelope_details,
    in_lifted_hull,
    lp_biconjugate_at,
    sv_conjugate_transform,
    sv_dual_conjugate_transform,
)
from .errors import DimensionError, GridError, HyperplaneError, InputError
from .gridfn import GridFunction, GridSpec, build, interpolate, midpoint_convexity_check
from .lifting import elementary_symmetric, lift
from .symmetry import apply, enumerate_group

SVPC = "SVPC"
NOT_SVPC = "NotSVPC"
INCONCLUSIVE = "Inconclusive"

MAX_LP_CONFIRMATIONS = 32


def _num(x):
    """JSON-safe float (infinities as strings)."""
    if x is None:
        return None
    x = float(x)
    if x == np.inf:
        return "+inf"
    if x == -np.inf:
        return "-inf"
    return x


@dataclass
class Certificate:
    """Outcome of :func:`is_svpc`; every verdict is grid-resolution-conditional."""

    verdict: str
    max_gap: float
    max_gap_node: Optional[list]
    witness_node: Optional[list]
    witness_gap: Optional[float]
    lp_value: Optional[float]
    boundary_active: bool
    certify_tol: float
    refute_margin: float
    nu_grid: dict
    beta_grid: dict
    infinite_nodes: int = 0
    separated_nodes: int = 0
    unresolved_nodes: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_gap": _num(self.max_gap),
            "max_gap_node": self.max_gap_node,
            "witness_node": self.witness_node,
            "witness_gap": _num(self.witness_gap),
            "lp_value": _num(self.lp_value),
            "boundary_active": self.boundary_active,
            "tolerances": {"certify_tol": self.certify_tol, "refute_margin": self.refute_margin},
            "grids": {"nu": self.nu_grid, "beta": self.beta_grid},
            "infinite_nodes": {
                "total": self.infinite_nodes,
                "separated": self.separated_nodes,
                "unresolved": self.unresolved_nodes,
            },
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def _infinite_node_status(phi: GridFunction, config: ConjugationConfig):
    """Classify ``+inf`` nodes as separated, inside the lifted hull, or unresolved.

    A node is separated when some grid slope puts ``m_d(nu)`` strictly
    beyond the support function of the lifted finite nodes; then the exact
    discrete envelope is ``+inf`` there too.  Remaining nodes get an LP
    hull-membership test.
    """
    inf_idx = np.flatnonzero(phi.values == np.inf)
    if inf_idx.size == 0:
        return inf_idx, inf_idx, inf_idx
    indicator = phi.with_values(np.where(phi.finite, 0.0, np.inf))
    sigma = sv_conjugate_transform(indicator, config.beta_grid, config.beta_embedding).result
    sep = sv_dual_conjugate_transform(sigma, config.nu_grid, config.beta_embedding).result.values
    separated = inf_idx[sep[inf_idx] > config.tol]
    rest = inf_idx[sep[inf_idx] <= config.tol]
    inside = np.array(
        [j for j in rest if in_lifted_hull(phi, config.nu_grid.node_at(int(j)))], dtype=np.int64
    )
    unresolved = np.setdiff1d(rest, inside)
    return separated, inside, unresolved


def is_svpc(phi: GridFunction, config: ConjugationConfig,
            certify_tol: Optional[float] = None, refute_margin: Optional[float] = None) -> Certificate:
    """Three-way singular value polyconvexity verdict for a sampled ``phi``.

    Parameters
    ----------
    phi : GridFunction
        Samples on ``config.nu_grid``; must be invariant under the signed
        permutation group.
    config : ConjugationConfig
        Grids; restricted slope subspaces are rejected as non-certifying.
    certify_tol, refute_margin : float, optional
        Default to ``5 h^2`` and ``10 * certify_tol`` with ``h`` the nu-grid
        spacing.

    Raises
    ------
    NotInvariantError
        If ``phi`` is not invariant.
    """
    if not config.certifying:
        raise GridError("restricted slope grids are smoke-test only and cannot certify")
    dt, dr = default_tolerances(config.nu_grid)
    certify_tol = dt if certify_tol is None else float(certify_tol)
    refute_margin = dr if refute_margin is None else float(refute_margin)
    if not (0 < certify_tol <= refute_margin):
        raise InputError("need 0 < certify_tol <= refute_margin")

    det = envelope_details(phi, config)
    spec = config.nu_grid
    gaps = det.gaps()
    separated, inside, unresolved = _infinite_node_status(phi, config)
    gaps[inside] = np.inf
    boundary = det.envelope.boundary.copy()
    boundary[inside] = False

    known = np.isfinite(phi.values)
    known[inside] = True
    if known.any():
        cand = np.flatnonzero(known)
        j = int(cand[np.argmax(gaps[cand])])
        max_gap, max_node = float(gaps[j]), spec.node_at(j).tolist()
    else:
        j, max_gap, max_node = -1, 0.0, None

    cert = Certificate(
        verdict=INCONCLUSIVE,
        max_gap=max_gap,
        max_gap_node=max_node,
        witness_node=None,
        witness_gap=None,
        lp_value=None,
        boundary_active=bool(boundary[j]) if j >= 0 else False,
        certify_tol=certify_tol,
        refute_margin=refute_margin,
        nu_grid=spec.describe(),
        beta_grid=config.beta_grid.describe(),
        infinite_nodes=int(np.sum(phi.values == np.inf)),
        separated_nodes=int(separated.size),
        unresolved_nodes=int(unresolved.size),
        notes=["verdict is conditional on the sampling and slope grids"],
    )

    if max_gap <= certify_tol and unresolved.size == 0:
        cert.verdict = SVPC
        cert.witness_node = max_node
        cert.witness_gap = max_gap
        return cert

    # refutation: interior witnesses in decreasing gap order, LP-confirmed
    resolved = np.flatnonzero(known & ~boundary & (gaps > refute_margin))
    order = resolved[np.lexsort((resolved, -gaps[resolved]))]
    for w in order[:MAX_LP_CONFIRMATIONS]:
        node = spec.node_at(int(w))
        lp, _ = lp_biconjugate_at(phi, node)
        if phi.values[w] - lp > refute_margin:
            cert.verdict = NOT_SVPC
            cert.witness_node = node.tolist()
            cert.witness_gap = float(gaps[w])
            cert.lp_value = lp
            cert.boundary_active = False
            return cert
    if max_gap > certify_tol:
        cert.notes.append("gap above certify_tol but no interior LP-confirmed witness above refute_margin")
    if unresolved.size:
        cert.notes.append(f"{unresolved.size} infinite-valued nodes are neither separated nor inside the lifted hull")
    return cert


# -- supporting hyperplanes ------------------------------------------------------

@dataclass
class Hyperplane:
    """Affine minorant ``<beta, m_d(.)> - offset`` of ``phi`` in lifted variables.

    ``epsilon`` is the slack at the target point (finite case); ``level`` is
    the value of the minorant at the target (infinite case, ``>= 1/epsilon``).
    """

    beta: np.ndarray
    offset: float
    epsilon: float
    level: float

    def minorant(self, nu) -> np.ndarray:
        return lift(np.asarray(nu, dtype=float)) @ self.beta - self.offset

    def verify(self, phi: GridFunction, slack: float = 1e-10) -> float:
        """Largest violation of ``phi >= minorant - epsilon`` on the grid."""
        m = self.minorant(phi.spec.nodes())
        fin = phi.finite
        bound = np.maximum(1.0, np.abs(m[fin]))
        viol = (m[fin] - self.epsilon) - phi.values[fin]
        worst = float(np.max(viol / bound)) if fin.any() else -np.inf
        if worst > slack:
            raise AssertionError(f"supporting inequality violated by {worst:g}")
        return worst


def supporting_hyperplane(phi: GridFunction, nu0, epsilon: float, config: ConjugationConfig) -> Hyperplane:
    """Best slope on the grid supporting ``phi`` at ``nu0``.

    Finite ``phi(nu0)``: the returned ``epsilon`` is the achieved slack
    ``phi(nu0) - (<beta, m_d(nu0)> - phi^(beta))``.  Infinite ``phi(nu0)``:
    the minorant must reach the level ``1 / epsilon`` at ``nu0``.

    Raises
    ------
    HyperplaneError
        If no grid slope reaches the requested accuracy; ``best`` carries
        the best achieved slack (finite case) or level (infinite case).
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    nu0 = np.asarray(nu0, dtype=float)
    if nu0.shape != (config.nu_grid.dim,):
        raise DimensionError("nu0 does not match the grid dimension")
    if not phi.spec.same_as(config.nu_grid):
        raise GridError("phi is not sampled on the configured nu-grid")
    conj = sv_conjugate_transform(phi, config.beta_grid, config.beta_embedding).result
    B = config.beta_points()
    scores = B @ lift(nu0) - conj.values
    j = int(np.argmax(scores))
    beta, offset, best = B[j].copy(), float(conj.values[j]), float(scores[j])
    j0 = config.nu_grid.index_of(nu0)
    target = phi.values[j0]
    if np.isfinite(target):
        achieved = max(float(target - best), 0.0)
        if achieved > epsilon:
            raise HyperplaneError(f"best slack on the slope grid is {achieved:g} > {epsilon:g}", achieved)
        hp = Hyperplane(beta, offset, achieved, best)
    else:
        if best < 1.0 / epsilon:
            raise HyperplaneError(f"best level on the slope grid is {best:g} < {1.0 / epsilon:g}", best)
        hp = Hyperplane(beta, offset, 0.0, best)
    hp.verify(phi)
    return hp


# -- invariant-based criterion --------------------------------------------------

def compose(psi: Callable, nu_grid: GridSpec) -> GridFunction:
    """Sample ``phi = psi(e(nu))`` exactly on ``nu_grid``."""
    E = elementary_symmetric(nu_grid.nodes())
    vals = np.array([float(psi(e)) for e in E])
    return GridFunction(nu_grid, vals)


def _interp_bound(psi: GridFunction) -> float:
    """Multilinear interpolation error bound ``sum_j h_j^2 max|d_jj psi| / 8``."""
    F = psi.grid_values()
    total = 0.0
    for ax, a in enumerate(psi.spec.axes):
        if len(a) < 3:
            continue
        h = float(np.max(np.diff(a)))
        d2 = np.diff(F, n=2, axis=ax) / h**2
        d2 = d2[np.isfinite(d2)]
        if d2.size:
            total += h * h * float(np.max(np.abs(d2))) / 8.0
    return total


def steigmann_check(psi_samples: GridFunction, tol: float = 1e-9, nu_grid: Optional[GridSpec] = None,
                    psi: Optional[Callable] = None) -> dict:
    """Sufficient criterion for ``phi = psi(e(nu))``: convexity plus symmetry.

    Convexity is tested with :func:`midpoint_convexity_check` on the
    samples.  The symmetry ``psi(e(nu)) = psi(e(S nu))`` is tested on a
    companion nu-grid for every group element; with a closure ``psi`` the
    values are exact, otherwise they are interpolated from the samples and
    the report is flagged approximate (tolerance widened by the
    interpolation error bound).
    """
    spec = psi_samples.spec
    if spec.kind != "e":
        raise GridError("psi must be sampled on an e-grid")
    d = spec.ndim
    if nu_grid is None:
        r = max(1.0, float(np.max(np.abs(spec.axes[0]))) / d)
        nu_grid = GridSpec.uniform("nu", d, r, 9)
    if nu_grid.kind != "nu" or nu_grid.dim != d:
        raise GridError("companion nu-grid does not match the e-grid dimension")

    convex_ok, convex_worst, where = midpoint_convexity_check(psi_samples, tol=tol)

    nodes = nu_grid.nodes()
    group = enumerate_group(d)
    base = elementary_symmetric(nodes)
    approximate = psi is None
    sym_tol = tol
    if psi is None:
        sym_tol = tol + 2.0 * _interp_bound(psi_samples)

        def ev(E):
            return interpolate(psi_samples, E)
    else:
        def ev(E):
            return np.array([float(psi(e)) for e in E])

    ref = ev(base)
    worst, worst_at, skipped = 0.0, None, 0
    for S in group:
        other = ev(elementary_symmetric(apply(S, nodes)))
        both = np.isfinite(ref) & np.isfinite(other)
        skipped += int(np.sum(np.isnan(ref) | np.isnan(other)))
        one = np.isinf(ref) ^ np.isinf(other)
        dev = np.where(both, np.abs(ref - other), 0.0)
        dev = np.where(one & ~np.isnan(ref) & ~np.isnan(other), np.inf, dev)
        k = int(np.argmax(dev))
        if dev[k] > worst:
            worst, worst_at = float(dev[k]), {"nu": nodes[k].tolist(), "perm": list(S.perm), "signs": list(S.signs)}
    symmetric_ok = worst <= sym_tol
    return {
        "criterion_satisfied": bool(convex_ok and symmetric_ok),
        "convex": bool(convex_ok),
        "convexity_worst": float(convex_worst),
        "convexity_where": None if where is None else {"node": list(where[0]), "direction": list(where[1])},
        "symmetric": bool(symmetric_ok),
        "symmetry_worst": worst,
        "symmetry_where": worst_at,
        "symmetry_tol": sym_tol,
        "approximate": approximate,
        "skipped_out_of_range": skipped,
        "nu_grid": nu_grid.describe(),
    }


# -- d=2 line monotonicity (diagnostic) -------------------------------------------

def line_monotonicity_check(g_samples: GridFunction, tol: float = 1e-12) -> dict:
    """Monotonicity of ``g`` along the two d=2 line families, for ``alpha, delta > 0``.

    Family A: ``t -> g(alpha + t, t, delta)`` on ``t >= 0``.
    Family B: ``t -> g(alpha + t, alpha - t, delta)`` on ``[0, alpha]``.
    Only grid-representable lines are sampled, which needs uniform axes with
    equal spacing on the first two lifted coordinates.  Diagnostic only.
    """
    spec = g_samples.spec
    if spec.kind != "lifted" or spec.ndim != 3:
        raise GridError("line monotonicity needs a d=2 lifted grid")
    a1, a2, a3 = spec.axes
    if not (spec.is_uniform(0) and spec.is_uniform(1)):
        raise GridError("the first two lifted axes must be uniform")
    if len(a1) != len(a2) or not np.allclose(a1, a2, rtol=0, atol=1e-12):
        raise GridError("the first two lifted axes must coincide")
    G = g_samples.grid_values()
    n = len(a1)
    z = n // 2  # index of 0
    deltas = np.flatnonzero(a3 > 0)
    report = {"family_a": {"violations": 0, "worst": 0.0, "where": None, "lines": 0},
              "family_b": {"violations": 0, "worst": 0.0, "where": None, "lines": 0}}

    def scan(name, path, alpha, k):
        vals = np.array([G[i, j, k] for i, j in path])
        rep = report[name]
        rep["lines"] += 1
        if len(vals) < 2:
            return
        with np.errstate(invalid="ignore"):
            drop = vals[:-1] - vals[1:]
        drop = np.where(np.isnan(drop), 0.0, drop)
        bad = drop > tol
        rep["violations"] += int(bad.sum())
        m = int(np.argmax(drop))
        if drop[m] > rep["worst"]:
            i, j = path[m + 1]
            rep["worst"] = float(drop[m])
            rep["where"] = {"alpha": float(a1[z + alpha]), "delta": float(a3[k]),
                            "point": [float(a1[i]), float(a2[j]), float(a3[k])]}

    for k in deltas:
        for alpha in range(1, n - z):
            path_a = [(z + alpha + t, z + t) for t in range(0, n - z - alpha)]
            scan("family_a", path_a, alpha, k)
            path_b = [(z + alpha + t, z + alpha - t) for t in range(0, alpha + 1) if z + alpha + t < n]
            scan("family_b", path_b, alpha, k)
    report["monotone"] = report["family_a"]["violations"] == 0 and report["family_b"]["violations"] == 0
    report["diagnostic_only"] = True
    return report


def lifted_grid_samples(g: Callable, max_abs, count) -> GridFunction:
    """Sample a lifted-variable function on a uniform d=2 lifted grid."""
    spec = GridSpec.uniform("lifted", 3, max_abs, count)
    return build(spec, g)


__all__ = [
    "SVPC", "NOT_SVPC", "INCONCLUSIVE", "Certificate", "is_svpc", "Hyperplane",
    "supporting_hyperplane", "compose", "steigmann_check", "line_monotonicity_check",
    "lifted_grid_samples",
]
