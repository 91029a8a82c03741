"""Discrete singular-value polyconvex conjugation and its primal LP oracle.

For a sampled ``phi`` on a nu-grid and a finite set of slopes ``beta``:

    phi^(beta)   = max over nu-nodes   of <beta, m_d(nu)> - phi(nu)
    theta^v(nu)  = max over beta-nodes of <beta, m_d(nu)> - theta(beta)

and the envelope is ``(phi^)^v``.  All suprema run over the configured
finite grids, by brute force.  Nodes with value ``+inf`` are left out of
the maximum; ties in every argmax go to the lowest flat index.

The primal route (:func:`lp_biconjugate_at`) computes the same envelope as
the lower convex hull of the lifted graph, one linear program per point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import simplex
from .errors import AllInfiniteError, DimensionError, GridError, InputError, NotInvariantError
from .gridfn import GridFunction, GridSpec, symmetric_axis, symmetric_axis_from_positive
from .lifting import lift, lifted_dim
from .symmetry import is_invariant

CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class ConjugationConfig:
    """Grids over which the suprema are truncated.

    ``beta_embedding`` (shape ``(k_d, r)``) maps an ``r``-axis slope grid of
    kind ``"x"`` into the full slope space.  Such restricted runs are for
    smoke tests only and are never certifying.
    """

    nu_grid: GridSpec
    beta_grid: GridSpec
    tol: float = 1e-9
    beta_embedding: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.nu_grid.kind != "nu":
            raise GridError("nu_grid must be a nu-grid")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        k = lifted_dim(self.nu_grid.dim)
        if self.beta_embedding is None:
            if self.beta_grid.kind != "beta":
                raise GridError("beta_grid must be a beta-grid")
            if self.beta_grid.ndim != k:
                raise DimensionError(f"beta_grid needs {k} axes for d={self.nu_grid.dim}")
        else:
            E = np.asarray(self.beta_embedding, dtype=float)
            if E.shape != (k, self.beta_grid.ndim):
                raise DimensionError(f"beta_embedding must have shape ({k}, {self.beta_grid.ndim})")
            object.__setattr__(self, "beta_embedding", E)

    @property
    def certifying(self) -> bool:
        return self.beta_embedding is None

    def beta_points(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        pts = self.beta_grid.nodes(start, stop)
        if self.beta_embedding is not None:
            pts = pts @ self.beta_embedding.T
        return pts


def isochoric_config(nu_grid: GridSpec, max_abs, count, tol: float = 1e-9) -> ConjugationConfig:
    """d=3 slopes restricted to ``b1=b2=b3, b4=b5=b6`` (non-certifying)."""
    if nu_grid.dim != 3:
        raise DimensionError("the isochoric restriction is only defined for d=3")
    E = np.zeros((7, 3))
    E[0:3, 0] = 1.0
    E[3:6, 1] = 1.0
    E[6, 2] = 1.0
    return ConjugationConfig(nu_grid, GridSpec.uniform("x", 3, max_abs, count), tol, E)


# -- brute-force max-plus kernels ---------------------------------------------

def _rows_per_chunk(other: int) -> int:
    return max(1, CHUNK_ELEMS // max(other, 1))


def _sweep_out(out_points_fn, n_out: int, in_pts: np.ndarray, in_vals: np.ndarray):
    """max_j <out_i, in_j> - in_vals[j] with the output side chunked."""
    best = np.full(n_out, -np.inf)
    arg = np.full(n_out, -1, dtype=np.int64)
    if in_pts.shape[0] == 0:
        return best, arg
    step = _rows_per_chunk(in_pts.shape[0])
    for start in range(0, n_out, step):
        stop = min(start + step, n_out)
        S = out_points_fn(start, stop) @ in_pts.T
        S -= in_vals[None, :]
        j = np.argmax(S, axis=1)
        best[start:stop] = S[np.arange(stop - start), j]
        arg[start:stop] = j
    return best, arg


def _sweep_in(out_pts: np.ndarray, in_points_fn, in_vals: np.ndarray):
    """Same maximum with the input side chunked (running max over chunks)."""
    n_out = out_pts.shape[0]
    best = np.full(n_out, -np.inf)
    arg = np.full(n_out, -1, dtype=np.int64)
    n_in = in_vals.shape[0]
    step = _rows_per_chunk(n_out)
    for start in range(0, n_in, step):
        stop = min(start + step, n_in)
        vals = in_vals[start:stop]
        keep = np.isfinite(vals)
        if not keep.any():
            continue
        pts = in_points_fn(start, stop)[keep]
        S = out_pts @ pts.T
        S -= vals[keep][None, :]
        j = np.argmax(S, axis=1)
        m = S[np.arange(n_out), j]
        better = m > best
        best[better] = m[better]
        arg[better] = np.flatnonzero(keep)[j[better]] + start
    return best, arg


# -- singular value polyconvex conjugation --------------------------------------

@dataclass
class Transform:
    """A conjugate together with the argmax bookkeeping of its sweep."""

    result: GridFunction
    argmax: np.ndarray  # flat index into the input grid, -1 if the sup was empty
    boundary: np.ndarray  # argmax lies on the input grid boundary

    @property
    def boundary_active(self) -> bool:
        return bool(self.boundary.any())


def _finite_input(f: GridFunction, what: str):
    if np.any(f.values == -np.inf):
        return None
    fin = np.flatnonzero(f.finite)
    if fin.size == 0:
        raise AllInfiniteError(f"{what} has no finite value")
    return fin


def sv_conjugate_transform(phi: GridFunction, beta_grid: GridSpec,
                           beta_embedding: Optional[np.ndarray] = None) -> Transform:
    if phi.spec.kind != "nu":
        raise GridError("sv_conjugate expects a function on a nu-grid")
    if beta_embedding is None and beta_grid.ndim != lifted_dim(phi.spec.dim):
        raise DimensionError("beta-grid dimension does not match the nu-grid")
    fin = _finite_input(phi, "phi")
    n_out = beta_grid.size
    if fin is None:
        vals = np.full(n_out, np.inf)
        return Transform(GridFunction(beta_grid, vals), np.full(n_out, -1), np.zeros(n_out, bool))
    X = lift(phi.spec.nodes()[fin])
    if beta_embedding is None:
        out_fn = beta_grid.nodes
    else:
        def out_fn(a, b):
            return beta_grid.nodes(a, b) @ beta_embedding.T
    best, arg = _sweep_out(out_fn, n_out, X, phi.values[fin])
    arg = fin[arg]
    boundary = phi.spec.boundary_mask()[arg]
    return Transform(GridFunction(beta_grid, best), arg, boundary)


def sv_conjugate(phi: GridFunction, beta_grid: GridSpec) -> GridFunction:
    """``phi^`` on ``beta_grid`` (finite wherever ``phi`` has a finite sample).

    Raises
    ------
    AllInfiniteError
        If ``phi`` is identically ``+inf``.
    """
    return sv_conjugate_transform(phi, beta_grid).result


def sv_dual_conjugate_transform(theta: GridFunction, nu_grid: GridSpec,
                                beta_embedding: Optional[np.ndarray] = None) -> Transform:
    if nu_grid.kind != "nu":
        raise GridError("sv_dual_conjugate maps onto a nu-grid")
    spec = theta.spec
    if beta_embedding is None and (spec.kind != "beta" or spec.ndim != lifted_dim(nu_grid.dim)):
        raise GridError("theta must live on a beta-grid matching the nu-grid")
    fin = _finite_input(theta, "theta")
    n_out = nu_grid.size
    if fin is None:
        vals = np.full(n_out, np.inf)
        return Transform(GridFunction(nu_grid, vals), np.full(n_out, -1), np.zeros(n_out, bool))
    X = lift(nu_grid.nodes())
    if beta_embedding is None:
        in_fn = spec.nodes
    else:
        def in_fn(a, b):
            return spec.nodes(a, b) @ beta_embedding.T
    best, arg = _sweep_in(X, in_fn, np.asarray(theta.values))
    boundary = spec.boundary_mask()[arg]
    return Transform(GridFunction(nu_grid, best), arg, boundary)


def sv_dual_conjugate(theta: GridFunction, nu_grid: GridSpec) -> GridFunction:
    """``theta^v`` on ``nu_grid``."""
    return sv_dual_conjugate_transform(theta, nu_grid).result


@dataclass
class EnvelopeResult:
    phi: GridFunction
    conjugate: Transform
    envelope: Transform
    config: ConjugationConfig
    report: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.envelope.result.values

    def gaps(self) -> np.ndarray:
        """``phi - envelope`` on finite nodes of ``phi``; NaN elsewhere."""
        out = np.full(self.phi.spec.size, np.nan)
        fin = self.phi.finite
        out[fin] = self.phi.values[fin] - self.values[fin]
        return out


def check_invariant(phi: GridFunction, tol: float):
    ok, dev, node = is_invariant(phi, tol)
    if not ok:
        where = None if node is None else node.tolist()
        raise NotInvariantError(
            f"phi is not invariant under signed permutations (deviation {dev:g} at {where})",
            dev,
            node,
        )


def envelope_details(phi: GridFunction, config: ConjugationConfig,
                     require_invariant: bool = True) -> EnvelopeResult:
    """Envelope plus all argmax bookkeeping and a JSON-ready report."""
    if not phi.spec.same_as(config.nu_grid):
        raise GridError("phi is not sampled on the configured nu-grid")
    if require_invariant:
        check_invariant(phi, config.tol)
    if np.any(phi.values == -np.inf):
        raise InputError("phi must not take the value -inf")
    conj = sv_conjugate_transform(phi, config.beta_grid, config.beta_embedding)
    env = sv_dual_conjugate_transform(conj.result, config.nu_grid, config.beta_embedding)
    res = EnvelopeResult(phi, conj, env, config)
    gaps = res.gaps()
    fin = np.isfinite(gaps)
    if fin.any():
        j = int(np.flatnonzero(fin)[np.argmax(gaps[fin])])
        max_gap, witness = float(gaps[j]), phi.spec.node_at(j).tolist()
        active = bool(env.boundary[j])
    else:
        max_gap, witness, active = 0.0, None, False
    res.report = {
        "boundary_active": active,
        "max_gap": max_gap,
        "witness": witness,
        "beta_boundary_nodes": int(env.boundary.sum()),
        "nu_boundary_slopes": int(conj.boundary.sum()),
        "certifying": config.certifying,
        "nu_grid": config.nu_grid.describe(),
        "beta_grid": config.beta_grid.describe(),
    }
    return res


def sv_envelope(phi: GridFunction, config: ConjugationConfig) -> GridFunction:
    """The discrete envelope ``(phi^)^v``.

    Requires ``phi`` to be invariant under the signed permutation group
    (within ``config.tol``); raises :class:`NotInvariantError` otherwise.
    """
    return envelope_details(phi, config).envelope.result


# -- classical Legendre-Fenchel pair -------------------------------------------

def lf_conjugate(f: GridFunction, dual_grid: GridSpec) -> GridFunction:
    """``f*(y) = max over nodes x of <y, x> - f(x)`` on ``dual_grid``."""
    if dual_grid.ndim != f.spec.ndim:
        raise DimensionError("dual grid dimension does not match")
    fin = _finite_input(f, "f")
    if fin is None:
        return GridFunction(dual_grid, np.full(dual_grid.size, np.inf))
    X = f.spec.nodes()[fin]
    best, _ = _sweep_out(dual_grid.nodes, dual_grid.size, X, f.values[fin])
    return GridFunction(dual_grid, best)


def lf_biconjugate(f: GridFunction, dual_grid: GridSpec) -> GridFunction:
    """``f**`` back on ``f``'s own grid via ``dual_grid``."""
    return lf_conjugate(lf_conjugate(f, dual_grid), f.spec)


# -- primal oracle ------------------------------------------------------------

@dataclass
class LPWitness:
    """Convex combination of lifted nodes certifying a primal envelope value."""

    nodes: np.ndarray  # (s, d) support points
    indices: np.ndarray  # flat grid indices of the support points
    weights: np.ndarray
    value: float

    def check(self, target_nu) -> None:
        if len(self.weights) == 0:
            return
        target = lift(np.asarray(target_nu, dtype=float))
        if abs(self.weights.sum() - 1.0) > 1e-10:
            raise AssertionError("witness weights do not sum to one")
        if np.any(self.weights < -1e-12):
            raise AssertionError("negative witness weight")
        if np.max(np.abs(self.weights @ lift(self.nodes) - target)) > 1e-8:
            raise AssertionError("witness does not reproduce the lifted target")


def _lp_columns(phi: GridFunction):
    fin = np.flatnonzero(phi.finite)
    if fin.size == 0:
        raise AllInfiniteError("phi has no finite value")
    X = lift(phi.spec.nodes()[fin])
    A = np.vstack([X.T, np.ones(fin.size)])
    return fin, A


def lp_biconjugate_at(phi: GridFunction, nu, tol: float = simplex.TOL):
    """Primal envelope value ``h**(m_d(nu))`` over the sampled nodes.

    Minimises ``sum w_i phi(nu_i)`` over weights ``w >= 0`` with
    ``sum w_i = 1`` and ``sum w_i m_d(nu_i) = m_d(nu)``, using only nodes
    where ``phi`` is finite.  Returns ``(+inf, empty witness)`` when
    ``m_d(nu)`` lies outside the convex hull of those lifted nodes.
    """
    nu = np.asarray(nu, dtype=float)
    if phi.spec.kind != "nu" or nu.shape != (phi.spec.dim,):
        raise DimensionError("nu does not match the grid dimension")
    fin, A = _lp_columns(phi)
    b = np.concatenate([lift(nu), [1.0]])
    res = simplex.solve(phi.values[fin], A, b, tol=tol)
    if res.status == "infeasible":
        empty = np.zeros((0, phi.spec.dim))
        return np.inf, LPWitness(empty, np.zeros(0, dtype=np.int64), np.zeros(0), np.inf)
    if res.status != "optimal":
        raise simplex.LPIterationError(f"unexpected LP status {res.status}")
    support = np.flatnonzero(res.x > 0)
    idx = fin[support]
    w = res.x[support]
    wit = LPWitness(phi.spec.nodes()[idx], idx, w, float(res.objective))
    return float(res.objective), wit


def lp_supporting_slope(phi: GridFunction, nu, tol: float = simplex.TOL):
    """Slope of a supporting hyperplane of the lifted lower hull at ``nu``.

    Read off the LP dual: ``<beta, m_d(gamma)> - t <= phi(gamma)`` at every
    finite node with equality (up to the LP value) at ``m_d(nu)``.  Returns
    ``None`` when ``m_d(nu)`` is outside the hull.
    """
    fin, A = _lp_columns(phi)
    b = np.concatenate([lift(np.asarray(nu, dtype=float)), [1.0]])
    res = simplex.solve(phi.values[fin], A, b, tol=tol)
    if res.status != "optimal":
        return None
    return res.duals[:-1]


def in_lifted_hull(phi: GridFunction, nu, tol: float = simplex.TOL) -> bool:
    """Is ``m_d(nu)`` a convex combination of lifted finite-valued nodes?"""
    fin, A = _lp_columns(phi)
    b = np.concatenate([lift(np.asarray(nu, dtype=float)), [1.0]])
    return simplex.solve(np.zeros(fin.size), A, b, tol=tol).status == "optimal"


def default_tolerances(nu_grid: GridSpec) -> tuple[float, float]:
    """``(certify_tol, refute_margin) = (5 h^2, 50 h^2)``, h the nu spacing."""
    h = nu_grid.max_spacing()
    certify_tol = 5.0 * h * h
    return certify_tol, 10.0 * certify_tol


def cross_check(phi: GridFunction, config: ConjugationConfig, sample_nodes,
                cross_tol: Optional[float] = None, bias_tol: Optional[float] = None,
                details: Optional[EnvelopeResult] = None) -> dict:
    """Compare the dual-grid envelope with the primal LP value at nodes.

    The dual value can only sit below the LP value (a finite slope grid
    under-approximates the supremum); ``bias_tol`` bounds the opposite
    direction and ``cross_tol`` bounds the absolute disagreement.  Both
    default to multiples of the grid's certification tolerance.
    """
    certify_tol, _ = default_tolerances(config.nu_grid)
    cross_tol = 10.0 * certify_tol if cross_tol is None else cross_tol
    bias_tol = certify_tol if bias_tol is None else bias_tol
    if details is None:
        details = envelope_details(phi, config, require_invariant=False)
    rows, violations = [], []
    for nu in np.atleast_2d(np.asarray(sample_nodes, dtype=float)):
        j = config.nu_grid.index_of(nu)
        dual = float(details.values[j])
        primal, _ = lp_biconjugate_at(phi, config.nu_grid.node_at(j))
        diff = abs(dual - primal) if np.isfinite(primal) else np.inf
        row = {"node": config.nu_grid.node_at(j).tolist(), "dual": dual, "lp": primal, "abs_diff": diff}
        rows.append(row)
        if diff > cross_tol or dual > primal + bias_tol:
            violations.append(row)
    return {
        "cross_tol": cross_tol,
        "bias_tol": bias_tol,
        "max_abs_diff": max((r["abs_diff"] for r in rows), default=0.0),
        "max_dual_excess": max((r["dual"] - r["lp"] for r in rows), default=-np.inf),
        "rows": rows,
        "violations": violations,
    }


# -- slope grid heuristic -----------------------------------------------------

def slope_bounds(phi: GridFunction) -> np.ndarray:
    """Per lifted coordinate, the largest finite-difference slope of ``phi``.

    Each pair of axis-neighbouring finite nodes contributes
    ``|dphi| / |dx_j|`` to every lifted coordinate ``j`` whose change
    ``|dx_j|`` is at least half the largest coordinate change of that pair.
    """
    spec = phi.spec
    k = lifted_dim(spec.dim)
    F = phi.grid_values()
    X = lift(spec.nodes()).reshape(spec.shape + (k,))
    bounds = np.zeros(k)
    for ax in range(spec.ndim):
        lo = [slice(None)] * spec.ndim
        hi = [slice(None)] * spec.ndim
        lo[ax], hi[ax] = slice(0, -1), slice(1, None)
        dF = F[tuple(hi)] - F[tuple(lo)] if np.all(np.isfinite(F)) else None
        if dF is None:
            with np.errstate(invalid="ignore"):
                dF = F[tuple(hi)] - F[tuple(lo)]
        dX = np.abs(X[tuple(hi)] - X[tuple(lo)])
        ok = np.isfinite(dF)
        dom = dX >= 0.5 * dX.max(axis=-1, keepdims=True)
        for j in range(k):
            sel = ok & dom[..., j] & (dX[..., j] > 0)
            if sel.any():
                bounds[j] = max(bounds[j], float(np.max(np.abs(dF[sel]) / dX[..., j][sel])))
    return bounds


def _lifted_blocks(d: int) -> list:
    """Lifted coordinates that the group permutes among each other."""
    if d == 2:
        return [[0, 1], [2]]
    return [[0, 1, 2], [3, 4, 5], [6]]


def adaptive_beta_grid(phi: GridFunction, count: Optional[int] = None, stride: int = 1,
                       min_half_width: float = 1.0, max_ratio: float = 1.25) -> GridSpec:
    """Graded slope grid placed at quantiles of exact supporting slopes.

    The LP dual gives a supporting slope at every sampled finite node (every
    ``stride``-th node of one orbit representative set); per lifted
    coordinate the positive axis nodes are quantiles of the absolute slope
    components, so nodes concentrate where slopes are needed.  Sparse steep
    tails (barrier slopes) are filled geometrically so that consecutive
    nodes above 1 differ by at most ``max_ratio``; such axes end up longer
    than ``count``.  The outermost node covers the largest slope seen.
    Coordinates related by the group share one axis, which keeps the grid
    closed under the induced action and the envelope invariant.
    """
    spec = phi.spec
    d = spec.dim
    if count is None:
        count = 33 if d == 2 else 9
    if count < 3 or count % 2 == 0:
        raise InputError("count must be odd and >= 3")
    nodes = spec.nodes()
    # one representative per orbit: sorted magnitudes, sign on the last entry
    rep = np.all(np.diff(np.abs(nodes), axis=1) <= 0, axis=1)
    rep &= np.all(nodes[:, :-1] >= 0, axis=1)
    cand = np.flatnonzero(rep & phi.finite)[::stride]
    slopes = [s for s in (lp_supporting_slope(phi, nodes[j]) for j in cand) if s is not None]
    if not slopes:
        raise AllInfiniteError("no finite node to take slopes from")
    S = np.abs(np.array(slopes))
    m = count // 2
    axes = [None] * S.shape[1]
    for block in _lifted_blocks(d):
        # orbit images permute the components within a block, so pool them
        col = S[:, block].reshape(-1)
        top = max(float(col.max()), min_half_width)
        qs = np.quantile(col, np.linspace(0.0, 1.0, m + 1)[1:])
        pos = np.unique(np.concatenate([qs[qs > 1e-12], [top]]))
        # fill up to m nodes by splitting the widest gaps
        while len(pos) < m:
            ext = np.concatenate([[0.0], pos])
            k = int(np.argmax(np.diff(ext)))
            pos = np.sort(np.append(pos, 0.5 * (ext[k] + ext[k + 1])))
        # steep tails: geometric fill so that neighbours above 1 differ by <= max_ratio
        fill = []
        for lo, hi in zip(pos[:-1], pos[1:]):
            if lo >= 1.0 and hi / lo > max_ratio:
                n_in = int(np.ceil(np.log(hi / lo) / np.log(max_ratio))) - 1
                fill.extend(lo * (hi / lo) ** (np.arange(1, n_in + 1) / (n_in + 1)))
        axis = symmetric_axis_from_positive(np.concatenate([pos, fill]))
        for j in block:
            axes[j] = axis
    return GridSpec("beta", tuple(axes))


def auto_beta_grid(phi: GridFunction, count: Optional[int] = None, safety: float = 2.0,
                   min_half_width: float = 1.0) -> GridSpec:
    """Uniform slope grid whose per-axis range is ``safety`` x the slope bound.

    Bounds are shared within each block of group-related coordinates so that
    the grid is closed under the induced action on slopes.
    """
    d = phi.spec.dim
    if count is None:
        count = 33 if d == 2 else 9
    bounds = slope_bounds(phi)
    for block in _lifted_blocks(d):
        bounds[block] = bounds[block].max()
    half = np.maximum(safety * bounds, min_half_width)
    return GridSpec("beta", tuple(symmetric_axis(float(h), count) for h in half))
