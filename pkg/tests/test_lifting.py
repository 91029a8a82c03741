import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from svpc.errors import DimensionError, NotInImageError
from svpc.lifting import elementary_symmetric, lift, membership, project, recover
from svpc.matkit import Minors, minors
from svpc.symmetry import apply, enumerate_group

coords = st.floats(-10, 10, allow_nan=False)


def test_lift_examples():
    assert lift([2, 3]).tolist() == [2, 3, 6]
    assert lift([1, 2, 3]).tolist() == [1, 2, 3, 6, 3, 2, 6]
    assert lift([0, 0]).tolist() == [0, 0, 0]
    assert lift(np.ones((5, 3))).shape == (5, 7)
    with pytest.raises(DimensionError):
        lift([1, 2, 3, 4])


def test_project_examples():
    assert project(minors(np.diag([4.0, 5.0]))).tolist() == [4, 5, 20]
    assert project(minors(np.diag([1.0, 2.0, 3.0]))).tolist() == [1, 2, 3, 6, 3, 2, 6]
    assert project(Minors(np.array([[0.0, 5.0], [7.0, 0.0]]), None, 9.0)).tolist() == [0, 0, 9]


@given(st.lists(coords, min_size=2, max_size=3))
def test_project_minors_diag_is_lift(nu):
    assert np.array_equal(project(minors(np.diag(nu))), lift(nu))


def test_membership_examples():
    assert membership([1, 2, 2]) == (True, 0.0)
    ok, res = membership([1, 2, 3])
    assert not ok and res == 1.0
    assert membership(lift([0.3, -1.7, 2.9]))[0]
    assert membership([1, 2, 2.5], tol=1.0)[0]


def test_recover_examples():
    assert recover([2, 3, 6]).tolist() == [2, 3]
    assert recover([1, 2, 3, 6, 3, 2, 6]).tolist() == [1, 2, 3]
    with pytest.raises(NotInImageError) as info:
        recover([1, 2, 3])
    assert info.value.residual == 1.0


@given(st.lists(coords, min_size=2, max_size=3))
def test_recover_inverts_lift(nu):
    assert recover(lift(nu)).tolist() == [float(x) for x in nu]


@given(st.lists(coords, min_size=2, max_size=3))
def test_last_component_invariant(nu):
    v = np.array(nu)
    for S in enumerate_group(len(nu)):
        assert lift(apply(S, v))[-1] == pytest.approx(lift(v)[-1], rel=1e-15, abs=1e-300)


def test_elementary_symmetric_examples():
    assert elementary_symmetric([1, 2, 3]).tolist() == [6, 11, 6]
    assert elementary_symmetric([1.5, 1.5]).tolist() == [3.0, 2.25]
    assert elementary_symmetric([1, -1, 0]).tolist() == [0, -1, 0]


@given(st.lists(coords, min_size=3, max_size=3), st.permutations([0, 1, 2]))
def test_elementary_symmetric_permutation_invariant(nu, perm):
    v = np.array(nu)
    assert np.allclose(elementary_symmetric(v[list(perm)]), elementary_symmetric(v), rtol=1e-12, atol=1e-9)
