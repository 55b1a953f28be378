import random

import pytest

from levellab.catalog import scenario, solve
from levellab.fieldlin import FieldSpec
from levellab.grcalg import AlgebraMap, Generator, GradedAlgebra, GradedModule, direct_sum, shift
from levellab.koszul import HypothesisError
from levellab.levels import (STRICT_CAVEAT, Bounds, ChainProblem, PullbackProblem, _prov, chain_level_sandwich,
                             combine, fibre_level, formal_fibration_level, level_graded_module,
                             level_one_obstruction, pullback_level_bound, upper_by_homology)
from levellab.resolve import Exact, grade, projective_dimension

Q = FieldSpec.parse("q")


def test_bounds_parse():
    assert Bounds.parse("4,30") == Bounds(4, 30)
    assert Bounds.parse(None) == Bounds()


def test_combine_kinds():
    assert combine([_prov("lower", 2, "a", ""), _prov("upper", 2, "b", "")]).kind == "Exact"
    r = combine([_prov("lower", 1, "a", ""), _prov("upper", 3, "b", "")])
    assert str(r) == "Interval(1, 3)" and r.value is None
    assert combine([_prov("lower", 4, "a", "")]).kind == "LowerOnly"
    with pytest.raises(ArithmeticError):
        combine([_prov("lower", 3, "a", ""), _prov("upper", 2, "b", "")])


def test_graded_module_level_is_pd_plus_one():
    A = GradedAlgebra.polynomial(Q, [2, 2, 2])
    r = level_graded_module(A, GradedModule.trivial(A))
    assert str(r) == "Exact(4)"
    assert r.lower_tags() == ["L7.2"] and r.upper_tags() == ["L7.1"]
    assert level_graded_module(A, GradedModule.free(A, [0, 2])).value == 1


def test_graded_level_over_non_regular_ring_carries_caveat():
    A = GradedAlgebra(Q, (Generator("x", 2),), ((2,),))
    r = level_graded_module(A, GradedModule.trivial(A), Bounds(5, None))
    assert str(r) == "LowerOnly(7)"
    assert STRICT_CAVEAT in r.caveats


def test_module_from_other_algebra_rejected():
    A = GradedAlgebra.polynomial(Q, [2])
    B = GradedAlgebra.polynomial(Q, [4])
    with pytest.raises(ValueError):
        level_graded_module(A, GradedModule.trivial(B))


def test_obstruction():
    A = GradedAlgebra.polynomial(Q, [2])
    obs = level_one_obstruction(A, GradedModule.trivial(A))
    assert obs.obstructed and obs.bidegree == (1, 2)
    assert not level_one_obstruction(A, GradedModule.free(A, [0, 3])).obstructed


def test_upper_by_homology_lower_is_trivial():
    A = GradedAlgebra.polynomial(Q, [2, 4])
    r = upper_by_homology(A, GradedModule.trivial(A))
    assert str(r) == "Interval(1, 3)"


@pytest.mark.parametrize("a,expected", [(1, "Exact(2)"), (0, "Exact(1)"), (3, "Exact(2)")])
def test_pullback_bundle_over_four_sphere(a, expected):
    r = solve(scenario("remark_2_4", {"a": a}))
    assert str(r) == expected
    assert r.lower_tags() and r.upper_tags()


def test_pullback_exact_results_have_both_tags():
    for sc in (scenario("remark_2_4", {"a": 1, "n": 3}), scenario("prop_5_4", {"n": 2, "p": 2, "k": 0})):
        r = solve(sc)
        assert r.kind == "Exact"
        assert r.lower_tags() and r.upper_tags()


def test_fibre_level_flag_manifold():
    r = fibre_level(scenario("prop_5_5", {"n": 2}).problem)
    assert str(r) == "Exact(2)"
    assert "P4.3.2" in r.upper_tags()
    assert any(p.tag == "P4.3.1" for p in r.provenance)


def test_fibre_level_rejects_case_two():
    with pytest.raises(HypothesisError):
        fibre_level(scenario("prop_5_4", {"n": 2, "p": 3, "k": 0}).problem)


def test_formal_fibration_level():
    A = GradedAlgebra.polynomial(Q, [2])
    r = formal_fibration_level(A, GradedModule.trivial(A))
    assert str(r) == "Exact(2)" and r.upper_tags() == ["P5.2"]
    with pytest.raises(HypothesisError):
        formal_fibration_level(A, GradedModule.trivial(A), formal=False)


def test_chain_sandwich_truncated():
    X = GradedAlgebra(Q, (Generator("x", 2),), ((4,),))
    r = chain_level_sandwich(ChainProblem(X, fibre_is_point=True))
    assert str(r) == "Exact(4)"
    assert any("Ecat" in p.detail for p in r.provenance)


def test_chain_sandwich_needs_both_r_and_n():
    X = GradedAlgebra(Q, (Generator("x", 2),), ((2,),))
    with pytest.raises(ValueError):
        ChainProblem(X, GradedAlgebra.polynomial(Q, [1]), None)


def random_module(rng):
    n = rng.randint(1, 3)
    A = GradedAlgebra.polynomial(Q, [rng.choice([2, 4]) for _ in range(n)])
    rels = [tuple(rng.randint(0, 2) for _ in range(n)) for _ in range(rng.randint(1, 3))]
    rels = [r for r in rels if any(r)] or [(1,) * n]
    return A, GradedModule.cyclic(A, rels)


@pytest.mark.parametrize("seed", range(8))
def test_shift_and_sum_invariance(seed):
    rng = random.Random(seed)
    A, M = random_module(rng)
    base = level_graded_module(A, M)
    s = rng.choice([-3, -1, 2, 5])
    assert str(level_graded_module(A, shift(M, s))) == str(base)
    assert str(level_graded_module(A, direct_sum([M, shift(M, s)]))) == str(base)


@pytest.mark.parametrize("seed", range(8))
def test_grade_at_most_pd(seed):
    A, M = random_module(random.Random(50 + seed))
    g, pd = grade(M), projective_dimension(M)
    assert isinstance(pd, Exact)
    if isinstance(g, Exact):
        assert g.value <= pd.value
