"""The level engine: exact values or certified intervals with provenance.

Each endpoint of a ``LevelResult`` records the statement it comes from as a
short tag (``T2.2``, ``L7.1`` and so on), the bounds used and any caveats.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

from levellab.grcalg import AlgebraMap, Element, GradedAlgebra, GradedModule
from levellab.koszul import (BOUNDED_FLAG, DerivedTensor, FiltrationCheck, HypothesisError, adapt_generators,
                             check_semifree_filtration, derived_tensor, derived_tensor_case_ii, gamma_case_i,
                             koszul_filtration, trivial_action_test, verify_free_basis)
from levellab.resolve import AtLeast, Exact, default_n_max, grade, projective_dimension, tor_table

STRICT_CAVEAT = ("graded-module level; the cochain-type level of the Hopf instance is 2 "
                 "and is NOT this quantity")
TOR_FINITE_CAVEAT = "pd upper bound assumes Tor-finiteness, checked only within bounds"


@dataclass(frozen=True)
class Bounds:
    n_max: Optional[int] = None
    d_max: Optional[int] = None

    @classmethod
    def parse(cls, text: Optional[str]) -> "Bounds":
        if not text:
            return cls()
        n, d = text.split(",")
        return cls(int(n), int(d))

    def to_json(self) -> dict:
        return {"n_max": self.n_max, "d_max": self.d_max}


@dataclass(frozen=True)
class Provenance:
    endpoint: str  # "lower", "upper" or "note"
    value: Optional[int]
    tag: str
    detail: str
    bounds: Tuple[Tuple[str, Optional[int]], ...] = ()
    caveats: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"endpoint": self.endpoint, "value": self.value, "tag": self.tag, "detail": self.detail,
                "bounds": dict(self.bounds), "caveats": list(self.caveats)}


def _prov(endpoint, value, tag, detail, bounds: Optional[dict] = None, caveats=()) -> Provenance:
    return Provenance(endpoint, value, tag, detail, tuple(sorted((bounds or {}).items())), tuple(caveats))


@dataclass(frozen=True)
class LevelResult:
    kind: str  # "Exact", "Interval" or "LowerOnly"
    lower: int
    upper: Optional[int]
    provenance: Tuple[Provenance, ...] = ()

    @property
    def value(self) -> Optional[int]:
        return self.lower if self.kind == "Exact" else None

    @property
    def caveats(self) -> Tuple[str, ...]:
        out: List[str] = []
        for p in self.provenance:
            for c in p.caveats:
                if c not in out:
                    out.append(c)
        return tuple(out)

    def lower_tags(self) -> List[str]:
        return [p.tag for p in self.provenance if p.endpoint == "lower" and p.value == self.lower]

    def upper_tags(self) -> List[str]:
        return [p.tag for p in self.provenance if p.endpoint == "upper" and p.value == self.upper]

    def __str__(self) -> str:
        if self.kind == "Exact":
            return f"Exact({self.lower})"
        if self.kind == "LowerOnly":
            return f"LowerOnly({self.lower})"
        return f"Interval({self.lower}, {self.upper})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper, "display": str(self),
                "provenance": [p.to_json() for p in self.provenance]}

    def format_text(self) -> str:
        lines = [f"level = {self}"]
        for p in self.provenance:
            v = "" if p.value is None else f" {p.value}"
            lines.append(f"  {p.endpoint}{v} [{p.tag}] {p.detail}")
            for c in p.caveats:
                lines.append(f"    caveat: {c}")
        return "\n".join(lines)


def combine(provenance: Sequence[Provenance]) -> LevelResult:
    """Best lower and upper endpoints among ``provenance``; Exact when they meet."""
    lows = [p.value for p in provenance if p.endpoint == "lower" and p.value is not None]
    ups = [p.value for p in provenance if p.endpoint == "upper" and p.value is not None]
    lo = max(lows, default=0)
    hi = min(ups) if ups else None
    if hi is not None and lo > hi:
        raise ArithmeticError(f"inconsistent bounds: lower {lo} > upper {hi}")
    if hi is None:
        kind = "LowerOnly"
    elif lo == hi:
        kind = "Exact"
    else:
        kind = "Interval"
    return LevelResult(kind, lo, hi, tuple(provenance))


def _bounds_dict(res) -> dict:
    out = {}
    for c in getattr(res, "caveats", ()):
        if "internal degree" in c:
            # "... internal degree D, homological index N"
            tail = c.split("internal degree ")[1]
            d, n = tail.split(", homological index ")
            out = {"d_max": int(d), "n_max": int(n)}
    return out


# graded modules

def level_graded_module(a: GradedAlgebra, m: GradedModule, bounds: Bounds = Bounds()) -> LevelResult:
    """``pd + 1`` when the resolution terminates (both bounds pinch), otherwise a lower bound."""
    if m.algebra != a:
        raise ValueError("module is not over the given algebra")
    n_max = default_n_max(m) if bounds.n_max is None else bounds.n_max
    pd = projective_dimension(m, n_max, bounds.d_max)
    b = _bounds_dict(pd)
    if isinstance(pd, Exact):
        v = pd.value + 1
        return combine([
            _prov("lower", v, "L7.2", f"pd = {pd.value} from a terminated minimal resolution", b, pd.caveats),
            _prov("upper", v, "L7.1", f"pd = {pd.value} from a terminated minimal resolution", b, pd.caveats),
        ])
    caveats = pd.caveats
    if not a.is_polynomial:
        caveats = caveats + (STRICT_CAVEAT,)
    return combine([
        _prov("lower", pd.value + 1, "L7.2", f"resolution does not stop by index {pd.value}", b, caveats),
    ])


def upper_by_homology(a: GradedAlgebra, homology: GradedModule, bounds: Bounds = Bounds()) -> LevelResult:
    """An upper bound for a DG module from its homology; the lower endpoint is only ``1``."""
    res = level_graded_module(a, homology, bounds)
    provs = [p for p in res.provenance if p.endpoint == "upper"]
    caveats = ("upper bound for the DG module; its level may be strictly smaller",)
    if res.kind == "LowerOnly":
        caveats += ("no finite upper bound within bounds",)
    nonzero = homology.min_degree is not None
    provs.append(_prov("lower", 1 if nonzero else 0, "def", "nonzero homology" if nonzero else "zero module",
                       caveats=caveats))
    return combine(provs)


@dataclass(frozen=True)
class Obstruction:
    obstructed: bool
    index: Optional[int] = None
    bidegree: Optional[Tuple[int, int]] = None
    caveats: Tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"Obstructed({self.index})" if self.obstructed else "ConsistentWithOne"

    def to_json(self) -> dict:
        out = {"result": "Obstructed" if self.obstructed else "ConsistentWithOne", "caveats": list(self.caveats)}
        if self.obstructed:
            out["index"] = self.index
            out["bidegree"] = list(self.bidegree)
        return out


def level_one_obstruction(a: GradedAlgebra, m: GradedModule, bounds: Bounds = Bounds()) -> Obstruction:
    """Least ``i > 0`` with ``Tor_i(m, k) != 0``; any such ``i`` rules out level one."""
    n_max = 1 if bounds.n_max is None else max(1, bounds.n_max)
    tab = tor_table(m, n_max, bounds.d_max)
    note = f"{BOUNDED_FLAG}: Tor computed through internal degree {tab.d_max}, index {n_max}"
    for i in range(1, n_max + 1):
        hits = sorted(j for (ii, j), d in tab.dims.items() if ii == i and d)
        if hits:
            return Obstruction(True, i, (i, hits[0]), (note,))
    return Obstruction(False, caveats=(note,))


# pullbacks

@dataclass
class PullbackProblem:
    """``H*(E) -> H*(B) <- H*(X)`` in case (i), or ``psi*: H*(B' x B') -> H*(X)`` in case (ii).

    For case (ii) ``E_alg``/``q_star`` are unused; ``B_alg`` is ``H*(B')``
    and ``psi_images`` lists the images of ``z_i (x) 1`` then ``1 (x) z_i``.
    """

    E_alg: Optional[GradedAlgebra]
    B_alg: GradedAlgebra
    X_alg: GradedAlgebra
    q_star: Optional[AlgebraMap] = None
    phi_star: Optional[AlgebraMap] = None
    case: str = "i"
    psi_images: Optional[List[Element]] = None
    d_max: Optional[int] = None

    @property
    def m(self) -> int:
        return self.B_alg.ngens

    def tensor(self, d_max: Optional[int] = None) -> Tuple[DerivedTensor, List[List]]:
        """The derived tensor and a Gamma basis (coefficient vectors over its base generators)."""
        d_max = d_max if d_max is not None else self.d_max
        if self.case == "ii":
            dt, data = derived_tensor_case_ii(self.B_alg, self.X_alg, self.psi_images, d_max)
            return dt, data.gamma_virtual
        dt = derived_tensor(self.E_alg, self.B_alg, self.X_alg, self.q_star, self.phi_star, d_max)
        return dt, gamma_case_i(self.phi_star)

    def to_json(self) -> dict:
        out = {"case": self.case, "B": self.B_alg.to_json(), "X": self.X_alg.to_json()}
        if self.case == "ii":
            out["psi_star"] = [[[str(c), list(mono)] for mono, c in sorted(x.items())] for x in self.psi_images]
        else:
            out["E"] = self.E_alg.to_json()
            out["q_star"] = self.q_star.to_json()
            out["phi_star"] = self.phi_star.to_json()
        if self.d_max is not None:
            out["d_max"] = self.d_max
        return out


def _phi_is_zero(dt: DerivedTensor) -> bool:
    return dt.phi_star.is_zero()


def pullback_level_bound(p: PullbackProblem, bounds: Bounds = Bounds()) -> LevelResult:
    """Upper endpoints from the Koszul filtration and from the homology; lower from the Tor obstruction."""
    dt, gamma = p.tensor(bounds.d_max)
    b = {"d_max": dt.d_max}
    checks = dt.checks()
    if checks["dd_defect"] is not None or checks["linearity_defect"] is not None:
        raise ArithmeticError(f"derived tensor failed its self-checks: {checks}")
    cert = koszul_filtration(dt, gamma)
    chk = check_semifree_filtration(cert)
    if not chk.ok:
        raise ArithmeticError(f"Koszul filtration rejected: {chk.failure}")
    s = cert.notes["gamma_dim"]
    provs = [_prov("upper", chk.verified_class + 1, "T2.2",
                   f"semi-free filtration of class m - dim Gamma = {p.m} - {s}", b, chk.caveats)]
    H = dt.homology_module()
    free = dt.homology_freeness()
    if H.min_degree is None:
        return combine([_prov("lower", 0, "def", "derived tensor is acyclic", b),
                        _prov("upper", 0, "def", "derived tensor is acyclic", b)])
    if _phi_is_zero(dt) and free.free:
        provs.append(_prov("upper", 1, "T2.2", "phi* is zero and the homology is free", b,
                           (f"{BOUNDED_FLAG}: freeness checked through degree {dt.d_max}",)))
    hom = level_graded_module(p.X_alg, H, Bounds(bounds.n_max, dt.d_max))
    if hom.upper is not None:
        provs.append(_prov("upper", hom.upper, "L7.1", "pd of the homology over H*(X), plus one", b,
                           hom.caveats))
    provs.append(_prov("lower", 1, "def", "nonzero homology", b))
    obs = level_one_obstruction(p.X_alg, H, Bounds(1, dt.d_max))
    if obs.obstructed:
        provs.append(_prov("lower", 2, "P2.3", f"Tor_{obs.index} of the homology is nonzero at {obs.bidegree}",
                           b, obs.caveats))
    res = combine(provs)
    if res.kind == "Interval":
        provs.append(_prov("note", None, "T2.2", "interval left open; the bound may be strict"))
        res = combine(provs)
    return res


def fibre_level(p: PullbackProblem, bounds: Bounds = Bounds()) -> LevelResult:
    """Reduce to the fibre problem when the action is trivial, then count generators if ``X`` is polynomial."""
    if p.case != "i":
        raise HypothesisError("fibre_level handles case (i) problems")
    dt, gamma = p.tensor(bounds.d_max)
    d_max = dt.d_max
    adapted, gidx = adapt_generators(dt, gamma)
    trivial, witnesses = trivial_action_test(adapted.q_star, gidx, d_max)
    provs: List[Provenance] = []
    b = {"d_max": d_max}
    if not trivial:
        res = pullback_level_bound(p, bounds)
        note = _prov("note", None, "P4.3.1", "action not trivial; reduction to the fibre unavailable", b,
                     (f"witnesses: {witnesses}",))
        return combine(list(res.provenance) + [note])
    k = GradedAlgebra.ground(p.B_alg.field)
    fibre = PullbackProblem(k, p.B_alg, p.X_alg, AlgebraMap.from_elements(p.B_alg, k, [{}] * p.m),
                            p.phi_star, d_max=d_max)
    provs.append(_prov("note", None, "P4.3.1", "trivial action verified; level equals that of the fibre problem", b,
                       (f"{BOUNDED_FLAG}: action checked through degree {d_max}",)))
    fdt, _ = fibre.tensor(d_max)
    if p.X_alg.is_polynomial and fdt.homology_finite_within_bounds():
        v = p.X_alg.ngens + 1
        H = fdt.homology_module()
        pd = projective_dimension(H, p.X_alg.ngens + 1, d_max)
        caveats = (f"{BOUNDED_FLAG}: fibre homology finiteness checked through degree {d_max}",)
        if isinstance(pd, Exact) and pd.value + 1 != v:
            raise ArithmeticError(f"fibre homology pd {pd.value} disagrees with generator count {p.X_alg.ngens}")
        detail = f"H*(X) polynomial on {p.X_alg.ngens} generators, finite fibre homology (pd oracle {pd})"
        provs.append(_prov("lower", v, "P4.3.2", detail, b, caveats))
        provs.append(_prov("upper", v, "P4.3.2", detail, b, caveats))
        return combine(provs)
    res = pullback_level_bound(fibre, Bounds(bounds.n_max, d_max))
    return combine(provs + list(res.provenance))


def formal_fibration_level(base: GradedAlgebra, total: GradedModule, bounds: Bounds = Bounds(),
                           formal: bool = True) -> LevelResult:
    """Level of ``E`` over ``B`` read off ``H*(E)`` as an ``H*(B)``-module, given formalizability."""
    if not formal:
        raise HypothesisError("formal_fibration_level needs the formalizability hypothesis asserted")
    res = level_graded_module(base, total, bounds)
    provs = [Provenance(p.endpoint, p.value, "P5.2", f"{p.detail} (via {p.tag})", p.bounds,
                        p.caveats + ("formalizability asserted by the caller",)) for p in res.provenance]
    return combine(provs)


# chain-type sandwich

@dataclass
class ChainProblem:
    """Loop-space homology ``R``, fibre homology ``N`` over ``R`` and ``H*(X)``.

    ``R``/``N`` may be omitted when ``fibre_is_point``; then only the
    cup-length and dimension endpoints are used.
    """

    total_cohomology: GradedAlgebra
    loop_homology: Optional[GradedAlgebra] = None
    fibre_homology: Optional[GradedModule] = None
    fibre_is_point: bool = False

    def __post_init__(self):
        if (self.loop_homology is None) != (self.fibre_homology is None):
            raise ValueError("loop and fibre homology must be given together")
        if self.fibre_homology is not None and self.fibre_homology.algebra != self.loop_homology:
            raise ValueError("fibre homology must be a module over the loop homology")


def chain_level_sandwich(p: ChainProblem, bounds: Bounds = Bounds()) -> LevelResult:
    X = p.total_cohomology
    provs = [_prov("lower", 1, "def", "nonzero module")]
    if p.loop_homology is not None:
        R, N = p.loop_homology, p.fibre_homology
        n_max = default_n_max(N) if bounds.n_max is None else bounds.n_max
        g = grade(N, n_max, bounds.d_max)
        pd = projective_dimension(N, n_max, bounds.d_max)
        if isinstance(g, Exact):
            provs.append(_prov("lower", g.value + 1, "T6.1", f"grade = {g.value}", _bounds_dict(g), g.caveats))
        if isinstance(pd, Exact):
            provs.append(_prov("upper", pd.value + 1, "T6.1", f"pd = {pd.value}", _bounds_dict(pd),
                               pd.caveats + (TOR_FINITE_CAVEAT,)))
            if isinstance(g, Exact) and g.value > pd.value:
                raise ArithmeticError("grade exceeds projective dimension")
    if p.fibre_is_point:
        if X.is_finite_dimensional:
            c = X.cup_length()
            provs.append(_prov("lower", c + 1, "T6.1", f"cup length {c} (trivial module)"))
    if X.is_finite_dimensional:
        dim = X.total_dimension()
        provs.append(_prov("upper", dim, "T6.1", f"dim H*(X) = {dim}"))
    provs.append(_prov("note", None, "T6.1", "Ecat sits between the endpoints and is not computed"))
    return combine(provs)


# torus reduction

@dataclass(frozen=True)
class TorusReport:
    equal: bool
    full: LevelResult
    torus: LevelResult
    witnesses: Dict[str, object] = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"equal": self.equal, "full": self.full.to_json(), "torus": self.torus.to_json(),
                "witnesses": self.witnesses}


def torus_reduction_check(full: PullbackProblem, torus: PullbackProblem, splitting: AlgebraMap,
                          splitting_basis: Sequence[Element], bounds: Bounds = Bounds(),
                          k_splitting: Optional[Tuple[AlgebraMap, Sequence[Element]]] = None) -> TorusReport:
    """Compare the full and torus problems after verifying the splitting ``H*(BT_H) = H*(BH) (x) H*(H/T_H)``."""
    d_max = bounds.d_max
    if d_max is None:
        d_max = max(_default_d(full), _default_d(torus))
    ok, bad = verify_free_basis(splitting, splitting_basis, d_max)
    if not ok:
        raise HypothesisError("splitting witness fails", witness={"degree": bad})
    wit: Dict[str, object] = {"splitting_checked_through": d_max}
    if k_splitting is not None:
        ok, bad = verify_free_basis(k_splitting[0], k_splitting[1], d_max)
        if not ok:
            raise HypothesisError("splitting witness for K fails", witness={"degree": bad})
        wit["k_splitting_checked_through"] = d_max
    b = Bounds(bounds.n_max, d_max)
    r1 = pullback_level_bound(full, b)
    r2 = pullback_level_bound(torus, b)
    equal = (r1.lower, r1.upper) == (r2.lower, r2.upper)
    return TorusReport(equal, r1, r2, wit)


def _default_d(p: PullbackProblem) -> int:
    dt, _ = p.tensor()
    return dt.d_max
