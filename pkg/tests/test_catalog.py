import pytest

from levellab.catalog import list_scenarios, scenario, solve, space_algebra, su_restriction, torus_su2
from levellab.fieldlin import FieldSpec
from levellab.levels import torus_reduction_check

Q = FieldSpec.parse("q")


def test_space_algebras():
    assert space_algebra("sphere", {"n": 4}, Q).hilbert_function(8) == [1, 0, 0, 0, 1, 0, 0, 0, 0]
    assert space_algebra("cpn", {"n": 2}, Q).total_dimension() == 3
    assert space_algebra("bsun", {"n": 3}, Q).degrees == (4, 6)
    assert space_algebra("btm", {"m": 2}, Q).degrees == (2, 2)
    with pytest.raises(ValueError):
        space_algebra("klein", {}, Q)


def test_su_restriction_is_symmetric_functions():
    phi = su_restriction(3, Q)
    assert phi.source.degrees == (4, 6)
    assert phi.target.ngens == 2


def test_unknown_scenario():
    with pytest.raises(ValueError):
        scenario("nope")
    with pytest.raises(ValueError):
        scenario("prop_5_4", {"n": 2})


def test_list():
    assert "remark_2_4" in list_scenarios() and "dj" in list_scenarios()


@pytest.mark.parametrize("name,params", [
    ("remark_2_4", {"a": 1, "field": "fp:3"}),
    ("prop_5_4", {"n": 3, "p": 2, "k": 3}),
    ("prop_5_5", {"n": 2}),
    ("example_6_4", {"l": 3}),
    ("example_6_5", {"l": 2}),
    ("remark_7_4", {"n_max": 6}),
    ("dj", {"complex": "two_points"}),
])
def test_scenarios_match_expected(name, params):
    sc = scenario(name, params)
    assert str(solve(sc)) == sc.expected


def test_example_6_4_attaches_loop_homology_over_q():
    sc = scenario("example_6_4", {"l": 3})
    assert sc.problem.loop_homology is not None
    assert scenario("example_6_4", {"l": 1}).problem.loop_homology is None
    r = solve(sc)
    assert any(p.detail.startswith("grade") for p in r.provenance)


@pytest.mark.parametrize("h,k", [("T", "T"), ("G", "T"), ("T", "G"), ("G", "G")])
def test_torus_su2(h, k):
    inst = torus_su2(h, k)
    rep = torus_reduction_check(inst.full, inst.torus, inst.splitting, inst.basis, k_splitting=inst.k_splitting)
    assert rep.equal
    assert rep.full.kind == "Exact"


def test_torus_tt_level_matches_pd_oracle():
    # H*(EG x_T G/T) = k[t] (x)_{k[u]} k[t] is free of rank 2 over k[t]
    from levellab.levels import level_graded_module
    inst = torus_su2("T", "T")
    dt, _ = inst.full.tensor()
    H = dt.homology_module()
    assert sorted(g.degree for g in H.generators) == [0, 2]
    assert str(level_graded_module(inst.full.X_alg, H)) == "Exact(1)"
