import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levellab.fieldlin import ExactMatrix, FieldSpec, Subspace, independent_subset, kernel_basis, rank, rref, solve
from levellab.fieldlin import _kernels
from levellab.fieldlin.matrix import _rref_sparse

FIELDS = [FieldSpec.parse("fp:2"), FieldSpec.parse("fp:5"), FieldSpec.parse("q")]


def random_matrix(F, rows, cols, rng, density=0.5):
    data = [[rng.randint(-3, 3) if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)]
    return ExactMatrix.from_dense(F, data, cols)


def test_parse_and_json():
    F = FieldSpec.parse("fp:7")
    assert F.characteristic == 7
    assert FieldSpec.from_json(F.to_json()) == F
    assert FieldSpec.parse("q").characteristic == 0
    with pytest.raises(ValueError):
        FieldSpec.parse("fp:6")


def test_coercion():
    F = FieldSpec.parse("fp:5")
    assert F("1/2") == 3
    assert F(-1) == 4
    Q = FieldSpec.parse("q")
    assert Q("2/4") == Fraction(1, 2)
    with pytest.raises(ZeroDivisionError):
        F(Fraction(1, 5))


def test_rref_small():
    F = FieldSpec.parse("q")
    m = ExactMatrix.from_dense(F, [[2, 4], [1, 2]])
    R, piv = rref(m)
    assert piv == (0,)
    assert R.to_dense() == [[1, 2]]


def test_rref_mod2():
    F = FieldSpec.parse("fp:2")
    m = ExactMatrix.from_dense(F, [[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert rank(m) == 2
    assert kernel_basis(m) == [[1, 1, 1]]


@pytest.mark.parametrize("F", FIELDS, ids=str)
def test_rank_nullity_random(F):
    rng = random.Random(11)
    for _ in range(100):
        m = random_matrix(F, rng.randint(0, 6), rng.randint(0, 6), rng)
        K = kernel_basis(m)
        assert rank(m) + len(K) == m.cols
        for v in K:
            assert all(x == 0 for x in m.apply(v))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10**6))
def test_solve_roundtrip(rows, cols, seed):
    rng = random.Random(seed)
    F = FieldSpec.parse("fp:3")
    m = random_matrix(F, rows, cols, rng)
    x = [F(rng.randint(0, 2)) for _ in range(cols)]
    b = m.apply(x)
    y = solve(m, b)
    assert y is not None and m.apply(y) == b


def test_solve_inconsistent():
    F = FieldSpec.parse("q")
    m = ExactMatrix.from_dense(F, [[1, 0], [1, 0]])
    assert solve(m, [1, 2]) is None


def test_subspace_quotient():
    F = FieldSpec.parse("q")
    S = Subspace(F, 3, [[1, 1, 0], [2, 2, 0]])
    assert S.dim == 1 and S.codim == 2
    assert S.contains([3, 3, 0])
    assert not S.contains([1, 0, 0])
    v = [5, 2, 7]
    assert S.reduce(v) == S.reduce([v[0] + 1, v[1] + 1, v[2]])


def test_independent_subset_modulo():
    F = FieldSpec.parse("fp:2")
    S = Subspace(F, 3, [[1, 0, 0]])
    vecs = [[1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1]]
    assert independent_subset(F, 3, vecs, modulo=S) == [1, 3]


def test_backends_agree():
    # the numba kernel and the numpy fallback produce the same RREF
    rng = np.random.default_rng(5)
    for p in (2, 3, 101):
        for _ in range(20):
            a = rng.integers(0, p, size=(rng.integers(1, 8), rng.integers(1, 8)))
            r1, p1 = _kernels.rref_mod_p_numpy(a, p)
            r2, p2 = _kernels.rref_mod_p(a, p)
            assert np.array_equal(r1, r2)
            assert list(p1) == list(p2)


def test_dense_and_sparse_paths_agree():
    rng = random.Random(3)
    F = FieldSpec.parse("fp:7")
    for _ in range(30):
        m = random_matrix(F, rng.randint(1, 6), rng.randint(1, 6), rng)
        R, piv = rref(m)
        rows, piv2 = _rref_sparse(m.row_dicts(), F)
        assert tuple(piv) == tuple(piv2)
        dense = [[r.get(j, 0) for j in range(m.cols)] for r in rows]
        assert R.to_dense() == dense


def test_matmul_and_transpose():
    F = FieldSpec.parse("q")
    a = ExactMatrix.from_dense(F, [[1, 2], [0, 1]])
    b = ExactMatrix.from_dense(F, [[1, 0], [3, 1]])
    assert (a @ b).to_dense() == [[7, 2], [3, 1]]
    assert a.transpose().to_dense() == [[1, 0], [2, 1]]
