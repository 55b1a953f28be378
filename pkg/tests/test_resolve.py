import random

import pytest

from levellab.fieldlin import FieldSpec
from levellab.grcalg import Generator, GradedAlgebra, GradedModule, direct_sum
from levellab.resolve import AtLeast, Exact, grade, minimal_free_resolution, projective_dimension, tor_table

Q = FieldSpec.parse("q")
F2 = FieldSpec.parse("fp:2")


def poly(degs, F=Q):
    return GradedAlgebra.polynomial(F, degs)


def test_residue_field_over_polynomial_is_koszul():
    A = poly([2, 2, 2])
    t = tor_table(GradedModule.trivial(A))
    assert t.totals()[:4] == [1, 3, 3, 1]
    assert t.get(2, 4) == 3 and t.get(3, 6) == 1


def test_free_module_has_pd_zero():
    A = poly([2, 4])
    assert projective_dimension(GradedModule.free(A, [0, 3])) == Exact(0, projective_dimension(
        GradedModule.free(A, [0, 3])).caveats)
    assert projective_dimension(GradedModule.free(A, [0])).value == 0


def test_complete_intersection():
    A = poly([2, 2])
    M = GradedModule.cyclic(A, [(2, 0), (0, 3)])
    t = tor_table(M)
    assert t.dims == {(0, 0): 1, (1, 4): 1, (1, 6): 1, (2, 10): 1}
    assert projective_dimension(M).value == 2


def test_zero_module():
    A = poly([2])
    M = GradedModule.cyclic(A, [(0,)])
    assert projective_dimension(M).value == -1
    assert tor_table(M).dims == {}


def test_resolution_is_complex_exact_and_minimal():
    A = poly([2, 2, 2])
    M = GradedModule.cyclic(A, [(1, 1, 0), (0, 1, 1), (1, 0, 1)])
    res = minimal_free_resolution(M)
    assert res.terminated
    assert res.dd_defect() is None
    assert res.exactness_defect() is None
    assert res.unit_entries() == []
    assert [len(g) for g in res.gen_degrees] == [1, 3, 2, 0]


def test_pd_bounded_over_non_regular_ring():
    A = GradedAlgebra(Q, (Generator("x", 2),), ((2,),))
    pd = projective_dimension(GradedModule.trivial(A), n_max=6)
    assert isinstance(pd, AtLeast) and pd.value == 7
    assert any("bounded verification" in c for c in pd.caveats)


def test_divided_power_like_tor_stays_two_dimensional():
    A = GradedAlgebra(Q, (Generator("x", 2),), ((2,),))
    M = direct_sum([GradedModule.trivial(A, 0), GradedModule.trivial(A, 3)])
    t = tor_table(M, n_max=10, d_max=40)
    assert all(t.total(i) == 2 for i in range(11))
    assert projective_dimension(M, n_max=10, d_max=40) == AtLeast(11, projective_dimension(
        M, n_max=10, d_max=40).caveats)


def test_grade_examples():
    A = poly([2, 2, 2])
    assert grade(GradedModule.trivial(A)).value == 3
    assert grade(GradedModule.free(A, [0])).value == 0
    assert grade(GradedModule.cyclic(A, [(1, 0, 0), (0, 1, 0)])).value == 2
    # x*y and x*z: height 1 since x divides both
    assert grade(GradedModule.cyclic(A, [(1, 1, 0), (1, 0, 1)])).value == 1


def test_exterior_algebra_resolution():
    E = GradedAlgebra(F2, (Generator("a", 1), Generator("b", 3)), ())
    t = tor_table(GradedModule.trivial(E), n_max=3, d_max=12)
    # Tor over an exterior algebra is a divided power algebra on two classes
    assert t.totals() == [1, 2, 3, 4]


def test_bounds_validated():
    with pytest.raises(ValueError):
        minimal_free_resolution(GradedModule.trivial(poly([2])), n_max=-1)


def test_to_json_is_stable():
    M = GradedModule.cyclic(poly([2, 2]), [(1, 1)])
    a = minimal_free_resolution(M).to_json()
    b = minimal_free_resolution(M).to_json()
    assert a == b and a["terminated"]


def random_monomial_module(rng, F=Q):
    n = rng.randint(1, 3)
    A = poly([2] * n, F)
    rels = [tuple(rng.randint(0, 2) for _ in range(n)) for _ in range(rng.randint(1, 3))]
    rels = [r for r in rels if any(r)] or [tuple([1] * n)]
    return A, GradedModule.cyclic(A, rels)


@pytest.mark.parametrize("seed", range(15))
def test_random_resolutions(seed):
    rng = random.Random(seed)
    A, M = random_monomial_module(rng, rng.choice([Q, F2]))
    res = minimal_free_resolution(M)
    assert res.dd_defect() is None and res.unit_entries() == []
    assert res.exactness_defect() is None
    pd, g = projective_dimension(M), grade(M)
    assert isinstance(pd, Exact) and pd.value <= A.ngens
    if isinstance(g, Exact):
        assert g.value <= pd.value
