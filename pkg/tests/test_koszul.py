import random

import pytest

from levellab.catalog import scenario
from levellab.fieldlin import FieldSpec
from levellab.grcalg import AlgebraMap, Generator, GradedAlgebra, GradedModule
from levellab.koszul import (FiltrationCertificate, HypothesisError, KoszulComplex, check_semifree_filtration,
                             derived_tensor_case_ii, free_filtration, koszul_filtration, koszul_tor,
                             module_as_dg, quotient_module, restrict_scalars_certificate, trivial_action_test,
                             verify_free_basis)
from levellab.resolve import tor_table

Q = FieldSpec.parse("q")
F2 = FieldSpec.parse("fp:2")


def test_koszul_tor_of_residue_field():
    A = GradedAlgebra.polynomial(Q, [2, 4])
    t = koszul_tor(A, GradedModule.trivial(A))
    assert t.dims == {(0, 0): 1, (1, 2): 1, (1, 4): 1, (2, 6): 1}
    assert all(t.complete)


def test_koszul_tor_needs_polynomial_base():
    A = GradedAlgebra(Q, (Generator("x", 2),), ((2,),))
    with pytest.raises(ValueError):
        koszul_tor(A, GradedModule.trivial(A))


def test_koszul_complex_dd_zero_on_non_monomial_module():
    A = GradedAlgebra.polynomial(Q, [2, 2])
    M = GradedModule(A, (Generator("g", 0),), (((0, (1, 0), 1), (0, (0, 1), -1)),))
    K = KoszulComplex(A, M)
    assert K.dd_defect(12) is None
    t = koszul_tor(A, M, d_max=12)
    assert t.dims == {(0, 0): 1, (1, 2): 1}


@pytest.mark.parametrize("seed", range(12))
def test_koszul_agrees_with_resolution(seed):
    rng = random.Random(100 + seed)
    F = rng.choice([Q, F2])
    n = rng.randint(1, 3)
    A = GradedAlgebra.polynomial(F, [rng.choice([2, 4]) for _ in range(n)])
    rels = [tuple(rng.randint(0, 2) for _ in range(n)) for _ in range(rng.randint(1, 3))]
    rels = [r for r in rels if any(r)] or [(1,) * n]
    M = quotient_module(A, GradedAlgebra(F, A.generators, tuple(rels)))
    fast = koszul_tor(A, M)
    slow = tor_table(M, n_max=n + 1, d_max=max(fast.dims, key=lambda k: k[1])[1] + 4)
    assert fast.dims == slow.dims


def test_derived_tensor_nontrivial_bundle():
    dt, gamma = scenario("remark_2_4", {"a": 1}).problem.tensor()
    assert dt.homology_dims() == {0: 1, 7: 1}
    assert not dt.homology_freeness().free
    assert gamma == []
    assert dt.checks()["dd_defect"] is None


def test_derived_tensor_trivial_bundle_is_free():
    dt, gamma = scenario("remark_2_4", {"a": 0}).problem.tensor()
    assert dt.homology_dims() == {0: 1, 3: 1, 4: 1, 7: 1}
    assert dt.homology_freeness().free
    assert len(gamma) == 1


@pytest.mark.parametrize("name,params,cls", [
    ("remark_2_4", {"a": 1}, 1),
    ("remark_2_4", {"a": 0}, 0),
    ("prop_5_5", {"n": 2}, 1),
    ("prop_5_5", {"n": 3}, 2),
])
def test_koszul_filtration_class(name, params, cls):
    dt, _ = scenario(name, params).problem.tensor()
    cert = koszul_filtration(dt)
    assert cert.declared_class == cls
    res = check_semifree_filtration(cert)
    assert res.ok and res.verified_class == cls
    assert res.level_upper == cls + 1


def test_gamma_outside_kernel_rejected():
    dt, _ = scenario("remark_2_4", {"a": 1}).problem.tensor()
    with pytest.raises(HypothesisError):
        koszul_filtration(dt, gamma_basis=[0])


def test_corrupted_certificate_has_witness():
    dt, _ = scenario("remark_2_4", {"a": 1}).problem.tensor()
    cert = koszul_filtration(dt)
    bad = FiltrationCertificate(cert.ambient, (frozenset({()}), frozenset({(0,)})), 1, cert.d_max)
    res = check_semifree_filtration(bad)
    assert not res.ok
    assert res.failure == "delta-image escapes F^1"
    assert res.witness["stage"] == 1


def test_non_exhaustive_certificate_rejected():
    dt, _ = scenario("remark_2_4", {"a": 1}).problem.tensor()
    cert = koszul_filtration(dt)
    bad = FiltrationCertificate(cert.ambient, (frozenset({()}),), 0, cert.d_max)
    res = check_semifree_filtration(bad)
    assert res.failure == "filtration is not exhaustive"


def test_trivial_action():
    k = GradedAlgebra.ground(Q)
    B = GradedAlgebra.polynomial(Q, [2, 4])
    q = AlgebraMap.from_elements(B, k, [{}, {}])
    assert trivial_action_test(q, [], 20) == (True, [])
    T = GradedAlgebra(Q, (Generator("t", 2),), ((3,),))
    q2 = AlgebraMap.from_elements(B, T, [{(1,): Q.one}, {}])
    ok, wit = trivial_action_test(q2, [1], 20)
    assert not ok and wit[0]["generator"] == B.generators[0].name
    ok, _ = trivial_action_test(q2, [0], 20)
    assert ok


def test_restrict_scalars_identity():
    A = GradedAlgebra.polynomial(Q, [2])
    dg = module_as_dg(A.as_module(), 16)
    cert = free_filtration(dg, 16)
    out = restrict_scalars_certificate(cert, AlgebraMap.identity(A), [{(0,): Q.one}])
    res = check_semifree_filtration(out)
    assert res.ok and res.verified_class == 0


def test_restrict_scalars_along_square():
    U = GradedAlgebra.polynomial(Q, [4], ["u"])
    T = GradedAlgebra.polynomial(Q, [2], ["t"])
    phi = AlgebraMap.from_elements(U, T, [{(2,): Q.one}])
    assert verify_free_basis(phi, [{(0,): Q.one}, {(1,): Q.one}], 16) == (True, None)
    assert verify_free_basis(phi, [{(0,): Q.one}], 16)[0] is False
    cert = free_filtration(module_as_dg(T.as_module(), 16), 16)
    res = check_semifree_filtration(restrict_scalars_certificate(cert, phi, [{(0,): Q.one}, {(1,): Q.one}]))
    assert res.ok and sorted(res.ranks[0]) == [0, 2]
    with pytest.raises(HypothesisError):
        restrict_scalars_certificate(cert, phi, [{(0,): Q.one}])


def test_case_two_gamma_literal():
    prob = scenario("prop_5_4", {"n": 2, "p": 3, "k": 1}).problem
    dt, data = derived_tensor_case_ii(prob.B_alg, prob.X_alg, prob.psi_images)
    F3 = FieldSpec.prime(3)
    assert data.gamma_literal == [[F3(-1), F3(1)]]
    assert len(data.gamma_virtual) == 1
    assert dt.homology_dims() == {0: 1, 3: 1, 4: 1, 7: 1}


def test_case_two_gamma_empty_when_k_differs():
    prob = scenario("prop_5_4", {"n": 2, "p": 5, "k": 3}).problem
    dt, data = derived_tensor_case_ii(prob.B_alg, prob.X_alg, prob.psi_images)
    assert data.gamma_literal == []
    assert dt.homology_dims() == {0: 1, 7: 1}
