import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from svpc.errors import DimensionError, GridError, InputError
from svpc.gridfn import (
    GridFunction,
    GridSpec,
    build,
    from_json,
    interpolate,
    midpoint_convexity_check,
    parse_axis_descriptor,
    read,
    symmetric_axis,
    symmetric_axis_from_positive,
    to_csv,
    to_json,
    write,
)
from svpc.symmetry import apply, enumerate_group


def test_axis_helpers():
    a = symmetric_axis(2.0, 5)
    assert a.tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert parse_axis_descriptor("-3:3:31").tolist() == symmetric_axis(3.0, 31).tolist()
    assert np.array_equal(symmetric_axis(0.3, 41), -symmetric_axis(0.3, 41)[::-1])
    with pytest.raises(InputError):
        symmetric_axis(1.0, 4)
    with pytest.raises(InputError):
        parse_axis_descriptor("-1:2:5")
    with pytest.raises(InputError):
        parse_axis_descriptor("1:2")
    assert symmetric_axis_from_positive([2.0, 0.5]).tolist() == [-2.0, -0.5, 0.0, 0.5, 2.0]


def test_spec_validation():
    with pytest.raises(GridError):
        GridSpec("nu", ([-1.0, 0.0, 2.0], [-1.0, 0.0, 2.0]))
    with pytest.raises(GridError):
        GridSpec("nu", ([-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0]))
    with pytest.raises(GridError):
        GridSpec("nu", ([1.0, 0.0, -1.0], [1.0, 0.0, -1.0]))
    with pytest.raises(DimensionError):
        GridSpec.uniform("beta", 4, 1.0, 3)
    with pytest.raises(GridError):
        GridSpec("bogus", ([0.0],))
    assert GridSpec.uniform("beta", 3, [1.0, 2.0, 3.0], [3, 5, 7]).shape == (3, 5, 7)
    assert GridSpec.uniform("beta", 7, 1.0, 3).dim == 3


def test_build_examples():
    g = GridSpec.uniform("nu", 2, 1.0, 3)
    assert np.all(build(g, lambda v: 0.0).values == 0.0)
    f = build(g, lambda v: 0.0 if not v.any() else np.inf)
    assert f.finite.sum() == 1
    assert build(g, lambda v: v[0] * v[1]).values.tolist() == [1, 0, -1, 0, 0, 0, -1, 0, 1]
    with pytest.raises(InputError):
        build(g, lambda v: -np.inf)
    with pytest.raises(InputError):
        build(g, lambda v: np.nan)
    with pytest.raises(GridError):
        GridFunction(g, np.zeros(4))


def test_indexing():
    g = GridSpec.uniform("nu", 3, 2.0, 5)
    assert g.node_at(0).tolist() == [-2, -2, -2]
    assert g.node_at(g.size - 1).tolist() == [2, 2, 2]
    for i in [0, 7, 31, 124]:
        assert g.flat_index(g.multi_index(i)) == i
        assert g.index_of(g.node_at(i)) == i
    assert np.array_equal(g.nodes(3, 9), g.nodes()[3:9])
    with pytest.raises(IndexError):
        g.node_at(g.size)
    with pytest.raises(GridError):
        g.index_of([0.1, 0.0, 0.0])
    f = build(g, lambda v: v.sum())
    assert f.value_at(124) == 6.0
    with pytest.raises(IndexError):
        f.value_at(-1)


@pytest.mark.parametrize("d", [2, 3])
def test_group_maps_nodes_to_nodes(d):
    g = GridSpec("nu", (symmetric_axis_from_positive([0.3, 1.0, 2.5]),) * d)
    for S in enumerate_group(d):
        for p in g.nodes():
            g.index_of(apply(S, p))


def test_convexity_examples():
    g = GridSpec.uniform("x", 2, 2.0, 9)
    assert midpoint_convexity_check(build(g, lambda v: v @ v))[0]
    ok, worst, (node, _) = midpoint_convexity_check(build(g, lambda v: -(v @ v)))
    assert not ok and worst > 0
    ok, worst, (node, u) = midpoint_convexity_check(build(g, lambda v: v[0] * v[1]))
    # second difference along (h, -h) is -2 h^2, i.e. a midpoint gap of h^2
    assert not ok and u == (1, -1)
    assert worst == pytest.approx(0.5**2, rel=1e-12)
    assert midpoint_convexity_check(build(g, lambda v: v[0] * v[1]), diagonals=False)[0]
    with pytest.raises(GridError):
        midpoint_convexity_check(build(GridSpec("x", (symmetric_axis_from_positive([1.0, 3.0]),)), lambda v: 0.0))


def test_convexity_infinite_values():
    g = GridSpec.uniform("x", 1, 2.0, 5)
    assert midpoint_convexity_check(GridFunction(g, [np.inf, 1.0, 0.0, 1.0, np.inf]))[0]
    assert not midpoint_convexity_check(GridFunction(g, [0.0, np.inf, 0.0, 1.0, 2.0]))[0]


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=6))
def test_max_of_affine_is_convex(planes):
    g = GridSpec.uniform("x", 2, 2.0, 7)
    P = np.array(planes)
    f = GridFunction(g, np.max(g.nodes() @ P[:, :2].T + P[:, 2], axis=1))
    assert midpoint_convexity_check(f, tol=1e-12)[0]


def test_json_roundtrip(tmp_path):
    g = GridSpec("nu", (symmetric_axis(0.1, 21),) * 2)
    rng = np.random.default_rng(0)
    vals = rng.normal(size=g.size) * 1e3
    vals[::7] = np.inf
    f = GridFunction(g, vals)
    write(f, tmp_path / "f.json")
    h = read(tmp_path / "f.json")
    assert h.spec.same_as(g)
    assert np.array_equal(h.values, f.values)
    doc = json.loads(to_json(f))
    assert doc["kind"] == "gridfn" and doc["dim_kind"] == "nu"
    assert doc["values"][0] == "+inf" and all(isinstance(x, str) for x in doc["values"])
    neg = GridFunction(GridSpec.uniform("beta", 3, 1.0, 3), [-np.inf] + [0.5] * 26)
    assert from_json(to_json(neg)).values[0] == -np.inf
    with pytest.raises(InputError):
        from_json("{")
    with pytest.raises(InputError):
        from_json('{"kind": "other"}')


def test_csv_export():
    g = GridSpec.uniform("nu", 2, 1.0, 3)
    text = to_csv(GridFunction(g, [np.inf] + [1.5] * 8))
    rows = text.strip().split("\n")
    assert rows[0] == "nu1,nu2,value"
    assert len(rows) == 1 + g.size
    assert rows[1] == "-1.0,-1.0,+inf"


def test_interpolate():
    g = GridSpec.uniform("x", 2, 2.0, 5)
    f = build(g, lambda v: 2 * v[0] - v[1] + 1)
    pts = np.array([[0.3, -1.7], [1.25, 0.5], [3.0, 0.0]])
    out = interpolate(f, pts)
    assert np.allclose(out[:2], 2 * pts[:2, 0] - pts[:2, 1] + 1)
    assert np.isnan(out[2])
    assert interpolate(f, [[0.9, 0.1]], method="nearest")[0] == 3.0
