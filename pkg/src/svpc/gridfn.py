"""Extended-real functions sampled on rectangular origin-symmetric grids.

A :class:`GridSpec` is a tuple of strictly increasing axis node lists; a
:class:`GridFunction` pairs a spec with a flat, row-major value array (the
first axis varies slowest, flat index 0 is the most negative corner).

Values are floats where ``+inf``/``-inf`` stand for the extended reals.  NaN
is never a legal value.  Sampled energies use only reals and ``+inf``;
conjugates may also take ``-inf``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import DimensionError, GridError, InputError
from .lifting import DIM_FROM_LIFTED

# nu: signed singular values, beta: dual slopes, lifted: arguments of g,
# e: arguments of psi (elementary symmetric polynomials), x: anything else.
KINDS = ("nu", "beta", "lifted", "e", "x")

SYMMETRY_RTOL = 1e-12
UNIFORM_RTOL = 1e-9


def symmetric_axis(max_abs: float, count: int) -> np.ndarray:
    """Uniform axis on ``[-max_abs, max_abs]`` that is exactly symmetric.

    ``count`` must be odd so that 0 is a node.
    """
    if count < 1 or count % 2 == 0:
        raise InputError(f"node count must be odd and positive, got {count}")
    if count == 1:
        return np.zeros(1)
    if not (max_abs > 0 and math.isfinite(max_abs)):
        raise InputError(f"axis half-width must be positive and finite, got {max_abs}")
    m = count // 2
    pos = np.array([max_abs * k / m for k in range(m + 1)])
    return np.concatenate([-pos[:0:-1], pos])


def symmetric_axis_from_positive(positive: Sequence[float]) -> np.ndarray:
    """Mirror a set of positive nodes and add 0; useful for graded axes."""
    pos = np.unique(np.asarray(positive, dtype=float))
    if pos.size and (pos[0] <= 0 or not np.all(np.isfinite(pos))):
        raise InputError("positive nodes must be finite and > 0")
    return np.concatenate([-pos[::-1], [0.0], pos])


def parse_axis_descriptor(text: str) -> np.ndarray:
    """Expand ``"min:max:count"`` into a uniform symmetric axis."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"axis descriptor must be min:max:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputError(f"cannot parse axis descriptor {text!r}") from None
    if lo != -hi:
        raise InputError(f"axis must be symmetric about 0, got {lo}:{hi}")
    return symmetric_axis(hi, count)


def _check_axis(axis) -> np.ndarray:
    a = np.array(axis, dtype=float).reshape(-1)
    if a.size == 0:
        raise GridError("empty axis")
    if not np.all(np.isfinite(a)):
        raise GridError("axis nodes must be finite")
    if a.size > 1 and not np.all(np.diff(a) > 0):
        raise GridError("axis nodes must be strictly increasing")
    scale = float(np.max(np.abs(a)))
    if np.max(np.abs(a + a[::-1])) > SYMMETRY_RTOL * max(scale, 1.0):
        raise GridError("axis nodes must be symmetric about 0")
    # snap to exact symmetry so that index mirroring is exact
    a = 0.5 * (a - a[::-1])
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Rectangular grid: a kind tag and one node array per axis."""

    kind: str
    axes: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GridError(f"unknown grid kind {self.kind!r}")
        axes = tuple(_check_axis(a) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        n = len(axes)
        if n == 0:
            raise DimensionError("a grid needs at least one axis")
        if self.kind in ("nu", "e") and n not in (2, 3):
            raise DimensionError(f"{self.kind}-grid must have 2 or 3 axes, got {n}")
        if self.kind in ("beta", "lifted") and n not in DIM_FROM_LIFTED:
            raise DimensionError(f"{self.kind}-grid must have 3 or 7 axes, got {n}")
        if self.kind == "nu":
            first = axes[0]
            for a in axes[1:]:
                if a.shape != first.shape or not np.array_equal(a, first):
                    raise GridError("all axes of a nu-grid must be identical")

    @classmethod
    def uniform(cls, kind: str, ndim: int, max_abs, count) -> "GridSpec":
        """Uniform symmetric grid; ``max_abs``/``count`` may be per-axis lists."""
        if np.ndim(max_abs) == 0:
            max_abs = [max_abs] * ndim
        if np.ndim(count) == 0:
            count = [count] * ndim
        if len(max_abs) != ndim or len(count) != ndim:
            raise DimensionError("per-axis parameters do not match the number of axes")
        return cls(kind, tuple(symmetric_axis(float(m), int(c)) for m, c in zip(max_abs, count)))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def dim(self) -> int:
        """Base dimension d (2 or 3) that this grid belongs to."""
        if self.kind in ("beta", "lifted"):
            return DIM_FROM_LIFTED[self.ndim]
        if self.kind == "x":
            raise GridError("generic grids have no base dimension")
        return self.ndim

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def max_spacing(self) -> float:
        gaps = [np.max(np.diff(a)) for a in self.axes if len(a) > 1]
        return float(max(gaps)) if gaps else 0.0

    def is_uniform(self, axis: Optional[int] = None) -> bool:
        axes = self.axes if axis is None else (self.axes[axis],)
        for a in axes:
            if len(a) > 2:
                d = np.diff(a)
                if np.max(np.abs(d - d[0])) > UNIFORM_RTOL * d[0]:
                    return False
        return True

    def multi_index(self, index):
        return np.unravel_index(index, self.shape)

    def flat_index(self, multi) -> np.ndarray:
        return np.ravel_multi_index(tuple(multi), self.shape)

    def node_at(self, index: int) -> np.ndarray:
        if not 0 <= index < self.size:
            raise IndexError(f"node index {index} out of range [0, {self.size})")
        mi = self.multi_index(index)
        return np.array([a[i] for a, i in zip(self.axes, mi)])

    def nodes(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Coordinates of nodes ``start..stop-1`` as an ``(n, ndim)`` array."""
        stop = self.size if stop is None else min(stop, self.size)
        idx = np.arange(start, stop)
        mi = np.unravel_index(idx, self.shape)
        return np.stack([a[i] for a, i in zip(self.axes, mi)], axis=-1)

    def iter_chunks(self, chunk: int) -> Iterator[tuple[int, int]]:
        for start in range(0, self.size, chunk):
            yield start, min(start + chunk, self.size)

    def boundary_mask(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """True for nodes with at least one coordinate on an axis end."""
        stop = self.size if stop is None else min(stop, self.size)
        mi = np.unravel_index(np.arange(start, stop), self.shape)
        mask = np.zeros(stop - start, dtype=bool)
        for i, n in zip(mi, self.shape):
            if n > 1:
                mask |= (i == 0) | (i == n - 1)
        return mask

    def index_of(self, point, atol: float = 1e-12) -> int:
        """Flat index of the node equal to ``point`` (within ``atol``)."""
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.size != self.ndim:
            raise DimensionError(f"point has {p.size} coordinates, grid has {self.ndim}")
        mi = []
        for a, x in zip(self.axes, p):
            j = int(np.argmin(np.abs(a - x)))
            if abs(a[j] - x) > atol * max(1.0, abs(x)):
                raise GridError(f"point {p.tolist()} is not a grid node")
            mi.append(j)
        return int(np.ravel_multi_index(tuple(mi), self.shape))

    def same_as(self, other: "GridSpec") -> bool:
        return (
            self.kind == other.kind
            and self.shape == other.shape
            and all(np.array_equal(a, b) for a, b in zip(self.axes, other.axes))
        )

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "shape": list(self.shape),
            "ranges": [[float(a[0]), float(a[-1])] for a in self.axes],
            "max_spacing": self.max_spacing(),
        }


def _check_values(values: np.ndarray, allow_neg_inf: bool):
    if np.any(np.isnan(values)):
        raise InputError("grid function values must not be NaN")
    if not allow_neg_inf and np.any(values == -np.inf):
        raise InputError("sampled energies must not take the value -inf")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Extended-real values on the nodes of a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != self.spec.size:
            raise GridError(f"expected {self.spec.size} values, got {v.size}")
        _check_values(v, allow_neg_inf=True)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    def value_at(self, index: int) -> float:
        if not 0 <= index < self.spec.size:
            raise IndexError(f"node index {index} out of range [0, {self.spec.size})")
        return float(self.values[index])

    def grid_values(self) -> np.ndarray:
        return self.values.reshape(self.spec.shape)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.spec, values)


def build(
    spec: GridSpec,
    evaluator: Callable,
    vectorized: bool = False,
    allow_neg_inf: bool = False,
) -> GridFunction:
    """Sample ``evaluator`` at every node of ``spec``.

    With ``vectorized=True`` the evaluator receives the full ``(n, ndim)``
    node array and must return ``n`` values.
    """
    pts = spec.nodes()
    if vectorized:
        vals = np.asarray(evaluator(pts), dtype=float).reshape(-1)
    else:
        vals = np.array([float(evaluator(p)) for p in pts])
    if vals.size != spec.size:
        raise InputError(f"evaluator returned {vals.size} values for {spec.size} nodes")
    _check_values(vals, allow_neg_inf)
    return GridFunction(spec, vals)


def _directions(ndim: int, diagonals: bool) -> list:
    if not diagonals:
        return [tuple(1 if j == i else 0 for j in range(ndim)) for i in range(ndim)]
    dirs = []
    for u in itertools.product((-1, 0, 1), repeat=ndim):
        nz = [x for x in u if x != 0]
        if nz and nz[0] > 0:
            dirs.append(u)
    return dirs


def midpoint_convexity_check(f: GridFunction, tol: float = 1e-12, diagonals: bool = True):
    """Discrete convexity test along axis and diagonal grid directions.

    For every node ``p`` and every direction ``u`` in ``{-1,0,1}^n`` with
    both neighbours ``p ± u`` on the grid, require
    ``f(p) <= (f(p-u) + f(p+u)) / 2 + tol``.  A ``+inf`` neighbour imposes no
    constraint; a ``+inf`` centre between finite neighbours is a violation.

    Returns
    -------
    ok : bool
    worst : float
        Largest value of ``f(p) - (f(p-u) + f(p+u)) / 2`` found (``-inf`` if
        no triple exists).
    where : tuple or None
        ``(node, direction)`` of the worst triple.
    """
    spec = f.spec
    for i in range(spec.ndim):
        if not spec.is_uniform(i):
            raise GridError(f"axis {i} is not uniformly spaced")
    F = f.grid_values()
    worst, where = -np.inf, None
    for u in _directions(spec.ndim, diagonals):
        centre, lo, hi = [], [], []
        for ui, n in zip(u, spec.shape):
            if ui == 0:
                centre.append(slice(0, n))
                lo.append(slice(0, n))
                hi.append(slice(0, n))
            else:
                if n < 3:
                    break
                centre.append(slice(1, n - 1))
                lo.append(slice(0, n - 2) if ui > 0 else slice(2, n))
                hi.append(slice(2, n) if ui > 0 else slice(0, n - 2))
        else:
            c, a, b = F[tuple(centre)], F[tuple(lo)], F[tuple(hi)]
            with np.errstate(invalid="ignore"):
                avg = 0.5 * (a + b)
                avg = np.where((a == np.inf) | (b == np.inf), np.inf, avg)
                gap = np.where(c == -np.inf, -np.inf, c - avg)
                gap = np.where((c == np.inf) & np.isfinite(avg), np.inf, gap)
                gap = np.where((c == np.inf) & (avg == np.inf), -np.inf, gap)
            if gap.size:
                j = int(np.argmax(gap))
                if gap.flat[j] > worst:
                    worst = float(gap.flat[j])
                    mi = np.unravel_index(j, gap.shape)
                    node = tuple(int(m + (1 if ui != 0 else 0)) for m, ui in zip(mi, u))
                    where = (node, u)
    return bool(worst <= tol), worst, where


def interpolate(f: GridFunction, points, method: str = "linear") -> np.ndarray:
    """Nearest-node or multilinear interpolation (diagnostics only).

    Points outside the grid box give NaN.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    spec = f.spec
    F = f.grid_values()
    out = np.full(len(pts), np.nan)
    inside = np.ones(len(pts), dtype=bool)
    for a, x in zip(spec.axes, pts.T):
        inside &= (x >= a[0]) & (x <= a[-1])
    if method == "nearest":
        idx = [np.argmin(np.abs(x[:, None] - a[None, :]), axis=1) for a, x in zip(spec.axes, pts.T)]
        out[inside] = F[tuple(i[inside] for i in idx)]
        return out
    if method != "linear":
        raise InputError(f"unknown interpolation method {method!r}")
    lower, frac = [], []
    for a, x in zip(spec.axes, pts.T):
        if len(a) == 1:
            lower.append(np.zeros(len(x), dtype=int))
            frac.append(np.zeros(len(x)))
            continue
        j = np.clip(np.searchsorted(a, x, side="right") - 1, 0, len(a) - 2)
        lower.append(j)
        frac.append(np.clip((x - a[j]) / (a[j + 1] - a[j]), 0.0, 1.0))
    acc = np.zeros(len(pts))
    for corner in itertools.product((0, 1), repeat=spec.ndim):
        w = np.ones(len(pts))
        idx = []
        for c, j, t, n in zip(corner, lower, frac, spec.shape):
            w *= t if c else (1.0 - t)
            idx.append(np.minimum(j + c, n - 1))
        vals = F[tuple(idx)]
        with np.errstate(invalid="ignore"):
            acc += np.where(w > 0, w * vals, 0.0)
    out[inside] = acc[inside]
    return out


# -- serialization ---------------------------------------------------------

def _encode(x: float) -> str:
    """Shortest round-trip decimal (``repr``) or ``"+inf"``/``"-inf"``."""
    if x == np.inf:
        return "+inf"
    if x == -np.inf:
        return "-inf"
    return repr(float(x))


def _decode(x) -> float:
    if isinstance(x, str):
        if x == "+inf":
            return np.inf
        if x == "-inf":
            return -np.inf
        return float(x)
    return float(x)


def to_json(f: GridFunction) -> str:
    doc = {
        "kind": "gridfn",
        "dim_kind": f.spec.kind,
        "axes": [[_encode(x) for x in a] for a in f.spec.axes],
        "values": [_encode(x) for x in f.values],
    }
    return json.dumps(doc, allow_nan=False)


def from_json(text: str) -> GridFunction:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid grid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("kind") != "gridfn":
        raise InputError("not a gridfn document")
    try:
        spec = GridSpec(doc["dim_kind"], tuple(np.array([_decode(x) for x in a]) for a in doc["axes"]))
        values = np.array([_decode(x) for x in doc["values"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed gridfn document: {exc}") from None
    return GridFunction(spec, values)


def write(f: GridFunction, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(f))
        fh.write("\n")


def read(path) -> GridFunction:
    with open(path, encoding="utf-8") as fh:
        return from_json(fh.read())


def to_csv(f: GridFunction) -> str:
    """One row per node: coordinates, then the value; header row first."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    prefix = {"nu": "nu", "beta": "beta", "lifted": "x", "e": "e", "x": "x"}[f.spec.kind]
    w.writerow([f"{prefix}{i + 1}" for i in range(f.spec.ndim)] + ["value"])
    for node, v in zip(f.spec.nodes(), f.values):
        w.writerow([_encode(x) for x in node] + [_encode(v)])
    return buf.getvalue()
