"""Named cohomology algebras and the worked scenarios, with their expected answers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, List, Optional, Sequence

from levellab.fieldlin import FieldSpec
from levellab.grcalg import AlgebraMap, Element, Generator, GradedAlgebra, GradedModule, direct_sum
from levellab.levels import Bounds, ChainProblem, LevelResult, PullbackProblem
from levellab.simplicial import SimplicialComplex


# algebras

def _single(field: FieldSpec, name: str, degree: int, power: int) -> GradedAlgebra:
    return GradedAlgebra(field, (Generator(name, degree),), ((power,),))


def space_algebra(name: str, params: Optional[dict] = None, field: Optional[FieldSpec] = None) -> GradedAlgebra:
    """Cohomology of a named space: sphere, cpn, btm, bsun, bun, exterior, truncated."""
    params = dict(params or {})
    field = field or FieldSpec.rationals()
    if name == "sphere":
        n = int(params["n"])
        if n < 1:
            raise ValueError("sphere dimension must be positive")
        return _single(field, "x", n, 2)
    if name == "cpn":
        n = int(params["n"])
        return _single(field, "x", 2, n + 1)
    if name == "truncated":
        return _single(field, "x", int(params.get("deg", 2)), int(params["l"]) + 1)
    if name == "btm":
        m = int(params["m"])
        return GradedAlgebra.polynomial(field, [2] * m, [f"t{i}" for i in range(1, m + 1)])
    if name == "bsun":
        n = int(params["n"])
        if n < 2:
            raise ValueError("bsun needs n >= 2")
        return GradedAlgebra.polynomial(field, [2 * i for i in range(2, n + 1)], [f"c{i}" for i in range(2, n + 1)])
    if name == "bun":
        n = int(params["n"])
        return GradedAlgebra.polynomial(field, [2 * i for i in range(1, n + 1)], [f"c{i}" for i in range(1, n + 1)])
    if name == "exterior":
        degs = [int(d) for d in params["degrees"]]
        gens = tuple(Generator(f"x{i}", d) for i, d in enumerate(degs, 1))
        rels = tuple(tuple(2 if j == i else 0 for j in range(len(degs))) for i in range(len(degs)))
        return GradedAlgebra(field, gens, rels)
    raise ValueError(f"unknown space '{name}'")


def _poly_element(F: FieldSpec, terms: Dict[tuple, int]) -> Element:
    out = {}
    for mono, c in terms.items():
        v = F(c)
        if v != 0:
            out[tuple(mono)] = v
    return out


def su_restriction(n: int, field: FieldSpec) -> AlgebraMap:
    """``H*(BSU(n)) -> H*(BT^{n-1})``: ``c_i`` goes to the ``i``-th elementary symmetric
    polynomial in ``t_1..t_{n-1}, t_n = -(t_1 + ... + t_{n-1})``."""
    B = space_algebra("bsun", {"n": n}, field)
    T = space_algebra("btm", {"m": n - 1}, field)
    r = n - 1
    # linear forms as exponent-vector -> coefficient dicts
    lin = [{tuple(1 if j == i else 0 for j in range(r)): 1} for i in range(r)]
    lin.append({tuple(1 if j == i else 0 for j in range(r)): -1 for i in range(r)})

    def mul(a, b):
        out: Dict[tuple, int] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                key = tuple(x + y for x, y in zip(ma, mb))
                out[key] = out.get(key, 0) + ca * cb
        return {k: v for k, v in out.items() if v}

    images = []
    for i in range(2, n + 1):
        total: Dict[tuple, int] = {}
        for combo in itertools.combinations(range(n), i):
            prod = {tuple([0] * r): 1}
            for j in combo:
                prod = mul(prod, lin[j])
            for k, v in prod.items():
                total[k] = total.get(k, 0) + v
        images.append(_poly_element(field, total))
    return AlgebraMap.from_elements(B, T, images)


# scenarios

@dataclass
class Scenario:
    name: str
    params: Dict[str, object]
    kind: str  # "pullback", "fibre", "chain", "graded", "simplicial"
    problem: object
    expected: Optional[str] = None  # e.g. "Exact(2)"
    source: str = ""  # provenance tag of the expected answer
    notes: List[str] = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "params": self.params, "kind": self.kind,
                "expected": self.expected, "source": self.source, "notes": self.notes}


def _field(params: dict) -> FieldSpec:
    f = params.get("field")
    if isinstance(f, FieldSpec):
        return f
    if f is None and "p" in params:
        return FieldSpec.prime(int(params["p"]))
    return FieldSpec.parse(f or "q")


def remark_2_4(params: dict) -> Scenario:
    """A ``G``-bundle over ``S^4``, ``G = SU(n)``, classified by ``phi`` with ``phi*(c_2) = a x``."""
    F = _field(params)
    n = int(params.get("n", 2))
    a = F(params.get("a", 1))
    B = space_algebra("bsun", {"n": n}, F)
    X = space_algebra("sphere", {"n": 4}, F)
    k = GradedAlgebra.ground(F)
    phi = AlgebraMap.from_elements(B, X, [{(1,): a} if a != 0 else {}] + [{}] * (n - 2))
    q = AlgebraMap.from_elements(B, k, [{}] * (n - 1))
    prob = PullbackProblem(k, B, X, q, phi)
    return Scenario("remark_2_4", {"n": n, "a": str(a), "field": str(F)}, "pullback", prob,
                    "Exact(2)" if a != 0 else "Exact(1)", "T2.2")


def prop_5_4(params: dict) -> Scenario:
    """Pullback of the free path fibration of ``BSU(n)`` along ``(1 x phi_k) Delta`` from ``S^4``."""
    n = int(params.get("n", 2))
    k_ = int(params.get("k", 0))
    if "p" not in params and "field" not in params:
        raise ValueError("prop_5_4 needs p (or a field)")
    F = _field(params)
    B = space_algebra("bsun", {"n": n}, F)
    X = space_algebra("sphere", {"n": 4}, F)
    zero = [{}] * (n - 2)
    psi = [{(1,): F.one}] + zero + [_poly_element(F, {(1,): k_})] + zero
    prob = PullbackProblem(None, B, X, case="ii", psi_images=psi)
    p = F.characteristic
    divisible = (1 - k_) == 0 if p == 0 else (1 - k_) % p == 0
    return Scenario("prop_5_4", {"n": n, "p": p, "k": k_}, "pullback", prob,
                    "Exact(1)" if divisible else "Exact(2)", "P5.4",
                    ["psi*(c2 x 1) = x, psi*(1 x c2) = k x; higher classes vanish on S^4"])


def prop_5_5(params: dict) -> Scenario:
    """``SU(n)/T`` as the fibre of ``BT -> BSU(n)``."""
    F = _field(params)
    n = int(params.get("n", 2))
    phi = su_restriction(n, F)
    k = GradedAlgebra.ground(F)
    q = AlgebraMap.from_elements(phi.source, k, [{}] * (n - 1))
    prob = PullbackProblem(k, phi.source, phi.target, q, phi)
    return Scenario("prop_5_5", {"n": n, "field": str(F)}, "fibre", prob, f"Exact({n})", "P5.5")


def example_6_4(params: dict) -> Scenario:
    """``H*(X) = k[x]/(x^{l+1})`` with the trivial fibre.

    Over Q with ``l >= 2`` and ``deg x = 2`` the loop homology
    ``Lambda(a_1) (x) k[b_{2l}]`` of ``CP^l`` is attached as well.
    """
    F = _field(params)
    l = int(params.get("l", 2))
    deg = int(params.get("deg", 2))
    X = space_algebra("truncated", {"deg": deg, "l": l}, F)
    R = N = None
    if F.characteristic == 0 and l >= 2 and deg == 2:
        R = GradedAlgebra(F, (Generator("a", 1), Generator("b", 2 * l)), ((2, 0),))
        N = GradedModule.trivial(R)
    prob = ChainProblem(X, R, N, fibre_is_point=True)
    return Scenario("example_6_4", {"l": l, "deg": deg, "field": str(F)}, "chain", prob,
                    f"Exact({l + 1})", "T6.1")


def example_6_5(params: dict) -> Scenario:
    """A rational H-space with ``H* = Lambda(x_1..x_l)``, ``R = Q[y_i]``, ``N = Q``."""
    F = _field(params)
    l = int(params.get("l", 2))
    degs = [int(d) for d in params.get("degrees", [2 * i + 1 for i in range(1, l + 1)])]
    if len(degs) != l or any(d % 2 == 0 for d in degs):
        raise ValueError("example_6_5 needs l odd degrees")
    X = space_algebra("exterior", {"degrees": degs}, F)
    R = GradedAlgebra.polynomial(F, [d - 1 for d in degs], [f"y{i}" for i in range(1, l + 1)])
    prob = ChainProblem(X, R, GradedModule.trivial(R), fibre_is_point=True)
    return Scenario("example_6_5", {"l": l, "degrees": degs, "field": str(F)}, "chain", prob,
                    f"Exact({l + 1})", "T6.1")


def remark_7_4(params: dict) -> Scenario:
    """``H*(S^3)`` over ``H*(S^2)`` along the Hopf map: ``k (+) Sigma^3 k`` over ``k[x_2]/(x_2^2)``."""
    F = _field(params)
    A = space_algebra("sphere", {"n": 2}, F)
    M = direct_sum([GradedModule.trivial(A, 0), GradedModule.trivial(A, 3)])
    n_max = int(params.get("n_max", 10))
    return Scenario("remark_7_4", {"n_max": n_max, "field": str(F)}, "graded", (A, M),
                    f"LowerOnly({n_max + 2})", "L7.1",
                    ["the cochain-type level of the Hopf instance is 2; the graded-module level is not"])


DJ_COMPLEXES: Dict[str, Callable[[], SimplicialComplex]] = {
    "simplex": lambda: SimplicialComplex.simplex(3),
    "two_points": lambda: SimplicialComplex.discrete(2),
    "4cycle": lambda: SimplicialComplex.cycle(4),
}
DJ_EXPECTED = {"simplex": 1, "two_points": 2, "4cycle": 3}


def dj(params: dict) -> Scenario:
    F = _field(params)
    which = str(params.get("complex", "4cycle"))
    if which not in DJ_COMPLEXES:
        raise ValueError(f"unknown complex '{which}'")
    s = DJ_COMPLEXES[which]()
    return Scenario("dj", {"complex": which, "field": str(F)}, "simplicial", s,
                    f"Exact({DJ_EXPECTED[which]})", "P5.1")


SCENARIOS: Dict[str, Callable[[dict], Scenario]] = {
    "remark_2_4": remark_2_4,
    "prop_5_4": prop_5_4,
    "prop_5_5": prop_5_5,
    "example_6_4": example_6_4,
    "example_6_5": example_6_5,
    "remark_7_4": remark_7_4,
    "dj": dj,
}


def scenario(name: str, params: Optional[dict] = None) -> Scenario:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario '{name}'")
    return SCENARIOS[name](dict(params or {}))


def solve(sc: Scenario, bounds: Bounds = Bounds()) -> LevelResult:
    """Run the levels engine on a scenario."""
    from levellab import levels
    from levellab.simplicial import dj_level, hochster_tor
    if sc.kind == "pullback":
        return levels.pullback_level_bound(sc.problem, bounds)
    if sc.kind == "fibre":
        return levels.fibre_level(sc.problem, bounds)
    if sc.kind == "chain":
        return levels.chain_level_sandwich(sc.problem, bounds)
    if sc.kind == "graded":
        A, M = sc.problem
        n_max = sc.params.get("n_max") if bounds.n_max is None else bounds.n_max
        return levels.level_graded_module(A, M, Bounds(n_max, bounds.d_max))
    if sc.kind == "simplicial":
        F = FieldSpec.parse(sc.params["field"])
        v = dj_level(sc.problem, F)
        tab = hochster_tor(sc.problem, F)
        detail = f"largest Tor index {v - 1} by Hochster's formula"
        return levels.combine([levels._prov("lower", v, "P5.1", detail), levels._prov("upper", v, "P5.1", detail),
                               levels._prov("note", None, "P5.2", f"{len(tab.dims)} nonzero Tor bidegrees")])
    raise ValueError(f"unknown scenario kind '{sc.kind}'")


def list_scenarios() -> List[str]:
    return sorted(SCENARIOS)


@dataclass
class TorusInstance:
    full: PullbackProblem
    torus: PullbackProblem
    splitting: AlgebraMap
    basis: List[Element]
    k_splitting: Optional[tuple] = None
    expected: Optional[str] = None


def torus_su2(h: str = "T", k: str = "T", field: Optional[FieldSpec] = None) -> TorusInstance:
    """``EG x_H G/K`` over ``BH`` against ``EG x_{T_H} G/T_K`` over ``BT_H`` for ``G = SU(2)``.

    ``h`` and ``k`` are ``"T"`` (maximal torus) or ``"G"``.
    """
    F = field or FieldSpec.rationals()
    r = su_restriction(2, F)
    BG, BT = r.source, r.target
    if h not in ("T", "G") or k not in ("T", "G"):
        raise ValueError("subgroups must be 'T' or 'G'")
    ident_g = AlgebraMap.identity(BG)

    def side(sub):
        # cohomology of BH, map from BG, splitting into BT
        if sub == "T":
            return BT, r, AlgebraMap.identity(BT), [{(0,): F.one}]
        return BG, ident_g, r, [{(0,): F.one}, {(1,): F.one}]

    BH, phi, split_h, basis_h = side(h)
    BK, q, split_k, basis_k = side(k)
    full = PullbackProblem(BK, BG, BH, q, phi)
    torus = PullbackProblem(BT, BG, BT, r, r)
    return TorusInstance(full, torus, split_h, basis_h, (split_k, basis_k), "Exact(1)")
