"""Koszul complexes, the derived tensor of a pullback, and semi-free filtrations.

The derived tensor ``H*(E) (x)^L_{H*(B)} H*(X)`` for a polynomial ``H*(B)``
is modelled by the Koszul carrier ``H*(E) (x) E[su_1..su_m] (x) H*(X)`` with
``delta(su_i) = q*u_i (x) 1 - 1 (x) phi*u_i``.  All complexes here are
cochain complexes of finite-dimensional pieces, built degree by degree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

from levellab.fieldlin import ExactMatrix, FieldSpec, Scalar, Subspace, independent_subset, kernel_basis, rank, rref
from levellab.grcalg import (AlgebraMap, Element, Generator, GradedAlgebra, GradedModule, Monomial,
                             minimal_generators, present_degreewise)
from levellab.resolve import TorTable, default_d_max

BOUNDED_FLAG = "bounded-verification"

Word = Tuple[int, ...]


class HypothesisError(ValueError):
    """An input violates a stated hypothesis; ``witness`` says where."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def tensor_algebra(a: GradedAlgebra, b: GradedAlgebra, suffixes=("_1", "_2")) -> GradedAlgebra:
    """``a (x) b`` with generators of ``a`` first."""
    if a.field != b.field:
        raise ValueError("tensor factors over different fields")
    gens = tuple(Generator(g.name + suffixes[0], g.degree) for g in a.generators)
    gens += tuple(Generator(g.name + suffixes[1], g.degree) for g in b.generators)
    na, nb = a.ngens, b.ngens
    rels = tuple(tuple(r) + (0,) * nb for r in a.relations) + tuple((0,) * na + tuple(r) for r in b.relations)
    allow = a.char2_odd_square_allowed and b.char2_odd_square_allowed
    if a.char2_odd_square_allowed != b.char2_odd_square_allowed:
        raise ValueError("tensor factors disagree on the odd-square override")
    return GradedAlgebra(a.field, gens, rels, allow)


def _require_polynomial(b: GradedAlgebra, what: str = "Koszul path requires polynomial base; use resolve"):
    if not b.is_polynomial:
        raise HypothesisError(what, witness=str(b))


# Koszul complexes of modules over a polynomial algebra

def _words(m: int, size: Optional[int] = None) -> List[Word]:
    sizes = range(m + 1) if size is None else [size]
    return [w for k in sizes for w in itertools.combinations(range(m), k)]


class KoszulComplex:
    """``M (x) E[su_1..su_m]`` over a polynomial base, homological index = word length.

    In internal degree ``j`` the chains of index ``i`` are
    ``(+)_{|W|=i} M^{j - deg W}`` with ``deg W = sum |u_w|``, and
    ``d(x (x) su_W) = sum_r (-1)^r u_{w_r} x (x) su_{W - w_r}``.
    """

    def __init__(self, base: GradedAlgebra, module: GradedModule):
        _require_polynomial(base)
        if module.algebra != base:
            raise ValueError("coefficient module must live over the base")
        self.base = base
        self.module = module
        self.m = base.ngens

    def word_degree(self, w: Word) -> int:
        return sum(self.base.degrees[i] for i in w)

    def basis(self, i: int, j: int) -> List[Tuple[Word, int]]:
        out = []
        for w in _words(self.m, i):
            a = j - self.word_degree(w)
            out.extend((w, k) for k in range(self.module.dim(a)))
        return out

    def matrix(self, i: int, j: int) -> ExactMatrix:
        """``d_i : C_i -> C_{i-1}`` in internal degree ``j``."""
        F = self.base.field
        src = self.basis(i, j)
        tgt = self.basis(i - 1, j) if i >= 1 else []
        tidx = {x: n for n, x in enumerate(tgt)}
        entries: Dict[Tuple[int, int], Scalar] = {}
        for col, (w, k) in enumerate(src):
            a = j - self.word_degree(w)
            for r, u in enumerate(w):
                rest = w[:r] + w[r + 1:]
                act = self.module.act_matrix(u, a)
                for (row, c), v in act.entries.items():
                    if c != k:
                        continue
                    key = (tidx[(rest, row)], col)
                    val = v if r % 2 == 0 else F.neg(v)
                    entries[key] = F.add(entries.get(key, F.zero), val)
        return ExactMatrix(F, len(tgt), len(src), entries)

    def homology_dims(self, d_max: int) -> Dict[Tuple[int, int], int]:
        lo = self.module.min_degree
        if lo is None:
            return {}
        out = {}
        for j in range(lo, d_max + 1):
            ranks = {}
            for i in range(self.m + 2):
                ranks[i] = rank(self.matrix(i, j)) if 1 <= i <= self.m else 0
            for i in range(self.m + 1):
                n = len(self.basis(i, j))
                h = n - ranks[i] - ranks[i + 1]
                if h:
                    out[(i, j)] = h
        return out

    def dd_defect(self, d_max: int) -> Optional[Tuple[int, int]]:
        lo = self.module.min_degree or 0
        for j in range(lo, d_max + 1):
            for i in range(2, self.m + 1):
                if not (self.matrix(i - 1, j) @ self.matrix(i, j)).is_zero():
                    return (i, j)
        return None


def _monomial_cyclic(m: GradedModule) -> Optional[List[Monomial]]:
    """Relations of ``m`` as monomials when ``m = A / (monomials)`` on one generator."""
    if len(m.generators) != 1:
        return None
    out = []
    for rel in m.relations:
        if len(rel) != 1:
            return None
        out.append(rel[0][1])
    return out


def _multigraded_tor(base: GradedAlgebra, m: GradedModule, monos: List[Monomial]) -> TorTable:
    """Koszul homology of a monomial quotient, one multidegree at a time.

    A multidegree ``a`` with ``a_i`` above every relation exponent of ``x_i``
    gives a cone (pair ``W`` with ``W + {i}``), hence contributes nothing;
    the remaining box of multidegrees is finite, so the table is complete.
    """
    F = base.field
    n = base.ngens
    caps = [max((r[i] for r in monos), default=0) for i in range(n)]
    g0 = m.generators[0].degree

    def standard(e) -> bool:
        return all(x >= 0 for x in e) and not any(all(r[i] <= e[i] for i in range(n)) for r in monos)

    dims: Dict[Tuple[int, int], int] = {}
    for a in itertools.product(*(range(c + 1) for c in caps)):
        supp = [i for i in range(n) if a[i]]
        j = g0 + sum(x * d for x, d in zip(a, base.degrees))
        chains: Dict[int, List[Word]] = {}
        for k in range(len(supp) + 1):
            for w in itertools.combinations(supp, k):
                e = list(a)
                for i in w:
                    e[i] -= 1
                if standard(e):
                    chains.setdefault(k, []).append(w)
        if not chains:
            continue
        ranks = {}
        for k in chains:
            if k == 0 or k - 1 not in chains:
                ranks[k] = 0
                continue
            tidx = {w: t for t, w in enumerate(chains[k - 1])}
            entries = {}
            for col, w in enumerate(chains[k]):
                for r, _ in enumerate(w):
                    rest = w[:r] + w[r + 1:]
                    t = tidx.get(rest)
                    if t is not None:
                        entries[(t, col)] = 1 if r % 2 == 0 else -1
            ranks[k] = rank(ExactMatrix(F, len(chains[k - 1]), len(chains[k]), entries))
        for k, ws in chains.items():
            h = len(ws) - ranks[k] - ranks.get(k + 1, 0)
            if h:
                dims[(k, j)] = dims.get((k, j), 0) + h
    return TorTable(dims, n, None, (True,) * (n + 1))


def koszul_tor(base: GradedAlgebra, m: GradedModule, d_max: Optional[int] = None) -> TorTable:
    """``Tor^{base}(m, k)`` as homology of ``m (x) E[su_1..su_m]``.

    Monomial quotients ``base / (monomials)`` take an exact multigraded
    route and come back complete; anything else is computed through
    ``d_max``.
    """
    _require_polynomial(base)
    if m.algebra != base:
        raise ValueError("module must live over the base algebra")
    monos = _monomial_cyclic(m)
    if monos is not None and all(d > 0 for d in base.degrees):
        return _multigraded_tor(base, m, monos)
    d_max = default_d_max(m) if d_max is None else d_max
    K = KoszulComplex(base, m)
    return TorTable(K.homology_dims(d_max), base.ngens, d_max, (False,) * (base.ngens + 1))


def quotient_module(base: GradedAlgebra, quotient: GradedAlgebra) -> GradedModule:
    """A monomial quotient of ``base`` (same generators) as a cyclic ``base``-module."""
    if base.degrees != quotient.degrees or base.field != quotient.field:
        raise ValueError("quotient must have the same generators as the base")
    return GradedModule.cyclic(base, quotient.relations)


# generic DG modules

class DGModule:
    """A cochain complex of finite-dimensional pieces with a left action of ``ground``.

    ``basis_fn(n)`` lists hashable labels of degree ``n``; ``diff_fn(n)``
    returns ``{label: {label': coeff}}`` for the differential
    ``C^n -> C^{n+1}``; ``act_fn(g, label)`` returns ``{label': coeff}``
    for generator ``g`` of ``ground``.  Pieces vanish below ``lo``.
    ``word_fn`` tags labels with a filtration word (defaults to ``()``).
    """

    def __init__(self, ground: GradedAlgebra, lo: int, basis_fn: Callable[[int], Sequence[Hashable]],
                 diff_fn: Callable[[Hashable], Dict[Hashable, Scalar]],
                 act_fn: Callable[[int, Hashable], Dict[Hashable, Scalar]],
                 word_fn: Optional[Callable[[Hashable], Word]] = None,
                 degree_fn: Optional[Callable[[Hashable], int]] = None):
        self.ground = ground
        self.field = ground.field
        self.lo = lo
        self._basis_fn = basis_fn
        self._diff_fn = diff_fn
        self._act_fn = act_fn
        self.word_of = word_fn or (lambda label: ())
        self._degree_fn = degree_fn
        self._basis: Dict[int, Tuple] = {}
        self._index: Dict[int, Dict] = {}
        self._diff: Dict[int, ExactMatrix] = {}
        self._act: Dict[Tuple[int, int], ExactMatrix] = {}
        self._hom: Dict[int, "_Homology"] = {}

    def basis(self, n: int) -> Tuple:
        b = self._basis.get(n)
        if b is None:
            b = tuple(self._basis_fn(n)) if n >= self.lo else ()
            self._basis[n] = b
            self._index[n] = {x: i for i, x in enumerate(b)}
        return b

    def index(self, n: int) -> Dict:
        self.basis(n)
        return self._index[n]

    def dim(self, n: int) -> int:
        return len(self.basis(n))

    def diff(self, n: int) -> ExactMatrix:
        mat = self._diff.get(n)
        if mat is None:
            F = self.field
            tidx = self.index(n + 1)
            entries = {}
            for col, lab in enumerate(self.basis(n)):
                for t, c in self._diff_fn(lab).items():
                    if c != 0:
                        entries[(tidx[t], col)] = c
            mat = ExactMatrix(F, len(tidx), self.dim(n), entries)
            self._diff[n] = mat
        return mat

    def act(self, g: int, n: int) -> ExactMatrix:
        key = (g, n)
        mat = self._act.get(key)
        if mat is None:
            e = self.ground.degrees[g]
            tidx = self.index(n + e)
            entries = {}
            for col, lab in enumerate(self.basis(n)):
                for t, c in self._act_fn(g, lab).items():
                    if c != 0:
                        entries[(tidx[t], col)] = c
            mat = ExactMatrix(self.field, len(tidx), self.dim(n), entries)
            self._act[key] = mat
        return mat

    # checks

    def dd_defect(self, d_max: int) -> Optional[int]:
        for n in range(self.lo, d_max + 1):
            if not (self.diff(n + 1) @ self.diff(n)).is_zero():
                return n
        return None

    def linearity_defect(self, d_max: int) -> Optional[Tuple[int, int]]:
        """First ``(g, n)`` where ``delta(a x) != (-1)^{|a|} a delta(x)``."""
        F = self.field
        for g, e in enumerate(self.ground.degrees):
            for n in range(self.lo, d_max + 1):
                lhs = self.diff(n + e) @ self.act(g, n)
                rhs = self.act(g, n + 1) @ self.diff(n)
                if e % 2:
                    rhs = ExactMatrix(F, rhs.rows, rhs.cols, {k: F.neg(v) for k, v in rhs.entries.items()})
                if lhs != rhs:
                    return (g, n)
        return None

    # homology

    def homology(self, n: int) -> "_Homology":
        h = self._hom.get(n)
        if h is None:
            h = _Homology(self, n)
            self._hom[n] = h
        return h

    def homology_dim(self, n: int) -> int:
        return self.homology(n).dim

    def homology_dims(self, d_max: int) -> Dict[int, int]:
        return {n: self.homology_dim(n) for n in range(self.lo, d_max + 1) if self.homology_dim(n)}

    def homology_act(self, g: int, n: int) -> ExactMatrix:
        src = self.homology(n)
        e = self.ground.degrees[g]
        tgt = self.homology(n + e)
        mat = self.act(g, n)
        cols = [tgt.coords(mat.apply(r)) for r in src.reps]
        return ExactMatrix.from_columns(self.field, tgt.dim, cols)

    def homology_module(self, d_max: int, names: str = "h") -> GradedModule:
        """``H`` presented over ``ground`` by generators and relations found through ``d_max``."""
        pres, _ = present_degreewise(self.ground, self.lo, d_max, self.homology_dim, self.homology_act, names)
        return pres

    def homology_freeness(self, d_max: int) -> "FreenessReport":
        """Whether ``H`` is free over ``ground`` through ``d_max`` (Hilbert function test)."""
        gens = minimal_generators(self.ground, self.lo, d_max, self.homology_dim, self.homology_act)
        degs = [d for d, _ in gens]
        for n in range(self.lo, d_max + 1):
            expect = sum(self.ground.dim(n - g) for g in degs)
            got = self.homology_dim(n)
            if got != expect:
                return FreenessReport(False, tuple(degs), n, got, expect)
        return FreenessReport(True, tuple(degs), None, None, None)

    # restriction

    def restricted(self, keep: Callable[[Hashable], bool]) -> "DGModule":
        """The piece spanned by labels satisfying ``keep`` with projected differential and action.

        Only meaningful when that span is a subquotient of subcomplexes.
        """
        parent = self

        def basis(n):
            return [x for x in parent.basis(n) if keep(x)]

        def diff(lab):
            return {t: c for t, c in parent._diff_fn(lab).items() if keep(t)}

        def act(g, lab):
            return {t: c for t, c in parent._act_fn(g, lab).items() if keep(t)}

        return DGModule(self.ground, self.lo, basis, diff, act, self.word_of)

    def over(self, phi: AlgebraMap) -> "DGModule":
        """The same complex viewed over ``phi.source`` (action through ``phi``)."""
        if phi.target != self.ground:
            raise ValueError("map does not land in the ground algebra")
        parent = self
        T = self.ground
        F = self.field
        ground_deg = T.degrees

        def act(g, lab):
            out: Dict[Hashable, Scalar] = {}
            for mono, c in phi.image(g).items():
                vec = {lab: F.one}
                for gi in range(T.ngens - 1, -1, -1):
                    for _ in range(mono[gi]):
                        nxt: Dict[Hashable, Scalar] = {}
                        for l2, v in vec.items():
                            for l3, w in parent._act_fn(gi, l2).items():
                                nxt[l3] = F.add(nxt.get(l3, F.zero), F.mul(v, w))
                        vec = {k: v for k, v in nxt.items() if v != 0}
                for l2, v in vec.items():
                    out[l2] = F.add(out.get(l2, F.zero), F.mul(c, v))
            return {k: v for k, v in out.items() if v != 0}

        del ground_deg
        return DGModule(phi.source, self.lo, self._basis_fn, self._diff_fn, act, self.word_of)


class _Homology:
    """``H^n`` with representative cycles and a coordinate map on cycles."""

    def __init__(self, dg: DGModule, n: int):
        F = dg.field
        N = dg.dim(n)
        self.n = n
        self.field = F
        prev = dg.diff(n - 1) if dg.dim(n - 1) else ExactMatrix(F, N, 0)
        bvecs = [[prev[(i, j)] for i in range(N)] for j in range(prev.cols)] if prev.cols and N else []
        self.boundaries = Subspace(F, N, bvecs)
        Z = kernel_basis(dg.diff(n)) if N else []
        reduced = [self.boundaries.reduce(z) for z in Z]
        keep = independent_subset(F, N, reduced) if reduced else []
        rows = [reduced[i] for i in keep]
        if rows:
            R, piv = rref(ExactMatrix.from_dense(F, rows, N))
            self.reps = [[R[(i, j)] for j in range(N)] for i in range(R.rows)]
            self.pivots = piv
        else:
            self.reps, self.pivots = [], ()

    @property
    def dim(self) -> int:
        return len(self.reps)

    def coords(self, cycle: Sequence) -> List[Scalar]:
        r = self.boundaries.reduce(cycle)
        return [r[p] for p in self.pivots]


@dataclass(frozen=True)
class FreenessReport:
    free: bool
    generator_degrees: Tuple[int, ...]
    witness_degree: Optional[int]
    found: Optional[int]
    expected: Optional[int]

    def to_json(self) -> dict:
        out = {"free": self.free, "generator_degrees": list(self.generator_degrees)}
        if not self.free:
            out["witness"] = {"degree": self.witness_degree, "dim": self.found, "free_dim": self.expected}
        return out


# the derived tensor

Label = Tuple[Monomial, Word, Monomial]


@dataclass
class DerivedTensor:
    """``(H*(E) (x) E[su_1..su_m] (x) H*(X), delta)`` as a DG module over ``H*(X)``.

    Requires ``H*(B)`` polynomial on generators of even degree (any degree in
    characteristic 2).  ``case`` is ``"i"`` or ``"ii"``; for case (ii) the
    base is the virtual polynomial algebra on ``w_i = z_i (x) 1 - 1 (x) z_i``
    and ``E = k``.
    """

    E_alg: GradedAlgebra
    B_alg: GradedAlgebra
    X_alg: GradedAlgebra
    q_star: AlgebraMap
    phi_star: AlgebraMap
    d_max: int
    case: str = "i"
    notes: Dict[str, object] = dc_field(default_factory=dict)
    _dg: Optional[DGModule] = dc_field(default=None, repr=False)

    def __post_init__(self):
        B = self.B_alg
        _require_polynomial(B, "derived tensor needs a polynomial base algebra")
        if B.field.characteristic != 2 and any(d % 2 for d in B.degrees):
            raise HypothesisError("base generators must have even degree outside characteristic 2",
                                  witness=[g.name for g in B.generators if g.degree % 2])
        if self.q_star.source != B or self.q_star.target != self.E_alg:
            raise ValueError("q_star must map H*(B) to H*(E)")
        if self.phi_star.source != B or self.phi_star.target != self.X_alg:
            raise ValueError("phi_star must map H*(B) to H*(X)")

    @property
    def m(self) -> int:
        return self.B_alg.ngens

    @property
    def field(self) -> FieldSpec:
        return self.X_alg.field

    def word_degree(self, w: Word) -> int:
        return sum(self.B_alg.degrees[i] - 1 for i in w)

    @property
    def dg(self) -> DGModule:
        if self._dg is None:
            self._dg = self._build()
        return self._dg

    def _build(self) -> DGModule:
        E, B, X = self.E_alg, self.B_alg, self.X_alg
        F = self.field
        words = _words(self.m)
        wdeg = {w: self.word_degree(w) for w in words}
        qimg = [self.q_star.image(i) for i in range(self.m)]
        pimg = [self.phi_star.image(i) for i in range(self.m)]
        lo = min(0, min(wdeg.values()))

        def basis(n):
            out = []
            for w in words:
                r = n - wdeg[w]
                for a in range(0, r + 1):
                    for e in E.basis(a):
                        for x in X.basis(r - a):
                            out.append((e, w, x))
            return out

        def diff(lab):
            e, w, x = lab
            out: Dict[Label, Scalar] = {}
            sign_e = E.monomial_degree(e) % 2
            acc = 0
            for r, u in enumerate(w):
                rest = w[:r] + w[r + 1:]
                eps = -1 if (sign_e + acc) % 2 else 1
                for mono, c in qimg[u].items():
                    p = E.mul(e, mono)
                    if p is not None:
                        key = (p[1], rest, x)
                        out[key] = F.add(out.get(key, F.zero), F.mul(c, F.sign(eps * p[0])))
                for mono, c in pimg[u].items():
                    p = X.mul(mono, x)
                    if p is not None:
                        key = (e, rest, p[1])
                        out[key] = F.add(out.get(key, F.zero), F.mul(c, F.sign(-eps * p[0])))
                acc += B.degrees[u] - 1
            return {k: v for k, v in out.items() if v != 0}

        def act(g, lab):
            e, w, x = lab
            p = X.mul(X.gen_monomial(g), x)
            if p is None:
                return {}
            s = p[0]
            if (X.degrees[g] * (E.monomial_degree(e) + wdeg[w])) % 2:
                s = -s
            return {(e, w, p[1]): F.sign(s)}

        return DGModule(X, lo, basis, diff, act, word_fn=lambda lab: lab[1])

    # homology

    def homology_dims(self) -> Dict[int, int]:
        return self.dg.homology_dims(self.d_max)

    def homology_module(self) -> GradedModule:
        return self.dg.homology_module(self.d_max)

    def homology_freeness(self) -> FreenessReport:
        return self.dg.homology_freeness(self.d_max)

    def checks(self) -> Dict[str, object]:
        return {"dd_defect": self.dg.dd_defect(self.d_max),
                "linearity_defect": self.dg.linearity_defect(self.d_max)}

    def total_homology_dim(self) -> int:
        return sum(self.homology_dims().values())

    def homology_finite_within_bounds(self) -> bool:
        """Homology vanishes in the top stretch of the window (a bounded heuristic, caveated)."""
        dims = self.homology_dims()
        if not dims:
            return True
        span = max(list(self.X_alg.degrees) + list(self.E_alg.degrees) + [1]) + max(self.B_alg.degrees + (1,))
        return max(dims) <= self.d_max - span

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "E": self.E_alg.to_json(),
            "B": self.B_alg.to_json(),
            "X": self.X_alg.to_json(),
            "q_star": self.q_star.to_json(),
            "phi_star": self.phi_star.to_json(),
            "d_max": self.d_max,
        }


def default_tensor_d_max(E: GradedAlgebra, B: GradedAlgebra, X: GradedAlgebra) -> int:
    degs = list(E.degrees) + list(B.degrees) + list(X.degrees)
    top = max(degs, default=0)
    return sum(d - 1 for d in B.degrees) + 2 * top + 20


def derived_tensor(E_alg: GradedAlgebra, B_alg: GradedAlgebra, X_alg: GradedAlgebra,
                   q_star: AlgebraMap, phi_star: AlgebraMap, d_max: Optional[int] = None) -> DerivedTensor:
    if d_max is None:
        d_max = default_tensor_d_max(E_alg, B_alg, X_alg)
    return DerivedTensor(E_alg, B_alg, X_alg, q_star, phi_star, d_max)


def _subspace_intersection(F: FieldSpec, n: int, a: List[List[Scalar]], b: List[List[Scalar]]) -> List[List[Scalar]]:
    """Basis of ``span(a) & span(b)`` inside ``F^n``."""
    if not a or not b:
        return []
    # solve sum x_i a_i = sum y_j b_j
    cols = [list(v) for v in a] + [[F.neg(x) for x in v] for v in b]
    K = kernel_basis(ExactMatrix.from_columns(F, n, cols))
    out = []
    for k in K:
        v = [F.zero] * n
        for coef, vec in zip(k[:len(a)], a):
            if coef != 0:
                v = [F.add(s, F.mul(coef, t)) for s, t in zip(v, vec)]
        out.append(v)
    keep = independent_subset(F, n, out) if out else []
    return [out[i] for i in keep]


def gamma_case_i(phi_star: AlgebraMap) -> List[List[Scalar]]:
    """``Ker phi* & QH*(B)``, as coefficient vectors over the generators of ``H*(B)``.

    ``QH*(B)`` is identified with the span of the given generators.
    """
    B, X = phi_star.source, phi_star.target
    F = B.field
    out = []
    for d in sorted(set(B.degrees)):
        idx = [i for i, e in enumerate(B.degrees) if e == d]
        cols = [X.to_vector(phi_star.image(i), d) for i in idx]
        for k in kernel_basis(ExactMatrix.from_columns(F, X.dim(d), cols)):
            v = [F.zero] * B.ngens
            for i, c in zip(idx, k):
                v[i] = c
            out.append(v)
    return out


def _combine(alg: GradedAlgebra, images: Sequence[Element], coeffs: Sequence[Scalar]) -> Element:
    out: Element = {}
    for im, c in zip(images, coeffs):
        if c != 0:
            out = alg.elem_add(out, im, c)
    return out


def adapt_generators(dt: DerivedTensor, gamma: Sequence[Sequence[Scalar]]) -> Tuple[DerivedTensor, List[int]]:
    """Change generators of ``H*(B)`` within each degree so that ``gamma`` spans the last ones.

    Returns the rebuilt derived tensor and the indices of the Gamma generators.
    """
    B = dt.B_alg
    F = B.field
    m = B.ngens
    gamma = [[F(x) for x in v] for v in gamma]
    for v in gamma:
        degs = {B.degrees[i] for i, c in enumerate(v) if c != 0}
        if len(degs) != 1:
            raise HypothesisError("each Gamma vector must be a nonzero combination of equal-degree generators",
                                  witness=[str(c) for c in v])
    keep = independent_subset(F, m, gamma) if gamma else []
    gamma = [gamma[i] for i in keep]
    S = Subspace(F, m, gamma)
    units = [[F.one if j == i else F.zero for j in range(m)] for i in range(m)]
    comp = independent_subset(F, m, units, modulo=S)
    new_vecs = [units[i] for i in comp] + gamma
    names = [B.generators[i].name for i in comp]
    names += [f"gamma{k + 1}" for k in range(len(gamma))]
    if all(sum(1 for c in v if c != 0) == 1 and v[i] == F.one for v in gamma for i in [next(j for j, c in enumerate(v) if c)]):
        names = [B.generators[next(j for j, c in enumerate(v) if c)].name for v in new_vecs]
    degs = [B.degrees[next(j for j, c in enumerate(v) if c)] for v in new_vecs]
    newB = GradedAlgebra.polynomial(F, degs, names, char2_odd_square_allowed=B.char2_odd_square_allowed)
    qim = [dt.q_star.image(i) for i in range(m)]
    pim = [dt.phi_star.image(i) for i in range(m)]
    q2 = AlgebraMap.from_elements(newB, dt.E_alg, [_combine(dt.E_alg, qim, v) for v in new_vecs])
    p2 = AlgebraMap.from_elements(newB, dt.X_alg, [_combine(dt.X_alg, pim, v) for v in new_vecs])
    out = DerivedTensor(dt.E_alg, newB, dt.X_alg, q2, p2, dt.d_max, dt.case, dict(dt.notes))
    out.notes["generator_change"] = [[str(c) for c in v] for v in new_vecs]
    s = len(gamma)
    return out, list(range(m - s, m))


@dataclass
class CaseTwoData:
    """Inputs of case (ii): ``psi*: H*(B' x B') -> H*(X)`` with ``H*(B')`` polynomial."""

    B_prime: GradedAlgebra
    X_alg: GradedAlgebra
    psi_star: AlgebraMap
    product: GradedAlgebra
    diagonal: AlgebraMap
    gamma_literal: List[List[Scalar]]
    gamma_virtual: List[List[Scalar]]


def derived_tensor_case_ii(B_prime: GradedAlgebra, X_alg: GradedAlgebra, psi_images: Sequence[Element],
                           d_max: Optional[int] = None) -> Tuple[DerivedTensor, CaseTwoData]:
    """The carrier ``E[sz_1..sz_m] (x) H*(X)`` with ``d(sz_i) = psi*(z_i (x) 1 - 1 (x) z_i)``.

    ``psi_images`` lists images of ``z_1 (x) 1 .. z_m (x) 1`` then ``1 (x) z_1 .. 1 (x) z_m``.
    Gamma is computed literally as ``Ker(Delta*|Q) & Ker psi*`` inside the
    span of the ``2m`` product generators, then rewritten on ``w_i``.
    """
    _require_polynomial(B_prime, "case (ii) needs a polynomial H*(B')")
    F = B_prime.field
    m = B_prime.ngens
    P = tensor_algebra(B_prime, B_prime)
    psi = AlgebraMap.from_elements(P, X_alg, list(psi_images))
    diag = AlgebraMap.from_elements(P, B_prime, [{B_prime.gen_monomial(i): F.one} for i in range(m)] * 2)
    literal = []
    for d in sorted(set(B_prime.degrees)):
        idx = [i for i, e in enumerate(P.degrees) if e == d]
        cols_d = [B_prime.to_vector(diag.image(i), d) for i in idx]
        cols_p = [X_alg.to_vector(psi.image(i), d) for i in idx]
        ker_d = kernel_basis(ExactMatrix.from_columns(F, B_prime.dim(d), cols_d))
        ker_p = kernel_basis(ExactMatrix.from_columns(F, X_alg.dim(d), cols_p))
        for v in _subspace_intersection(F, len(idx), ker_d, ker_p):
            full = [F.zero] * P.ngens
            for i, c in zip(idx, v):
                full[i] = c
            literal.append(full)
    # Ker(Delta*|Q) is spanned by w_i; read each literal vector in that basis
    virtual = []
    for v in literal:
        coeffs = v[:m]
        if any(F.add(v[i], v[m + i]) != 0 for i in range(m)):
            raise ArithmeticError("Gamma vector is not in the span of the w_i")
        virtual.append(coeffs)
    W = GradedAlgebra.polynomial(F, B_prime.degrees, [f"w{i + 1}" for i in range(m)],
                                 char2_odd_square_allowed=B_prime.char2_odd_square_allowed)
    k = GradedAlgebra.ground(F)
    q = AlgebraMap.from_elements(W, k, [{} for _ in range(m)])
    phi_imgs = []
    for i in range(m):
        w = X_alg.elem_add(psi.image(i), psi.image(m + i), -1)
        phi_imgs.append({mono: F.neg(c) for mono, c in w.items()})
    phi = AlgebraMap.from_elements(W, X_alg, phi_imgs)
    if d_max is None:
        d_max = default_tensor_d_max(k, W, X_alg)
    dt = DerivedTensor(k, W, X_alg, q, phi, d_max, "ii")
    data = CaseTwoData(B_prime, X_alg, psi, P, diag, literal, virtual)
    dt.notes["gamma_literal"] = [[str(c) for c in v] for v in literal]
    return dt, data


# semi-free filtrations

@dataclass
class FiltrationCertificate:
    """Stages ``F^0 <= ... <= F^l`` of a DG module, each the span of labels whose word lies in ``stages[n]``."""

    ambient: DGModule
    stages: Tuple[FrozenSet[Word], ...]
    declared_class: int
    d_max: int
    notes: Dict[str, object] = dc_field(default_factory=dict)
    caveats: Tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return len(self.stages)

    def stage_of_word(self, w: Word) -> Optional[int]:
        for n, s in enumerate(self.stages):
            if w in s:
                return n
        return None

    def to_json(self) -> dict:
        return {
            "declared_class": self.declared_class,
            "stages": [sorted(list(w) for w in s) for s in self.stages],
            "d_max": self.d_max,
            "caveats": list(self.caveats),
            "notes": {k: v for k, v in sorted(self.notes.items())},
        }


def tor_over_gamma_finite(dt: DerivedTensor, gamma_idx: Sequence[int]) -> Tuple[bool, bool, Dict[int, int]]:
    """``Tor^Lambda(H*(E), k)`` via ``H(H*(E) (x) E[s gamma])``: (finite?, certified?, dims)."""
    E, B = dt.E_alg, dt.B_alg
    g = list(gamma_idx)
    kos = koszul_on_e(dt.q_star, g)
    dims = kos.homology_dims(dt.d_max)
    if E.is_finite_dimensional:
        return True, True, dims
    if not dims:
        return True, False, dims
    span = max(list(E.degrees) + [B.degrees[i] for i in g] + [1])
    return max(dims) <= dt.d_max - span, False, dims


def koszul_on_e(q_star: AlgebraMap, gamma_idx: Sequence[int]) -> DGModule:
    """``H*(E) (x) E[s u_i : i in gamma_idx]`` as a DG module over ``H*(B)`` (acting through ``q*``)."""
    B, E = q_star.source, q_star.target
    F = E.field
    g = list(gamma_idx)
    words = [tuple(g[i] for i in w) for w in _words(len(g))]
    wdeg = {w: sum(B.degrees[i] - 1 for i in w) for w in words}
    lo = min(0, min(wdeg.values()))

    def basis(n):
        return [(e, w) for w in words for e in E.basis(n - wdeg[w])]

    def diff(lab):
        e, w = lab
        out = {}
        acc = E.monomial_degree(e)
        for r, u in enumerate(w):
            rest = w[:r] + w[r + 1:]
            eps = -1 if acc % 2 else 1
            for mono, c in q_star.image(u).items():
                p = E.mul(e, mono)
                if p is not None:
                    key = (p[1], rest)
                    out[key] = F.add(out.get(key, F.zero), F.mul(c, F.sign(eps * p[0])))
            acc += B.degrees[u] - 1
        return {k: v for k, v in out.items() if v != 0}

    def act_e(gi, lab):
        e, w = lab
        p = E.mul(E.gen_monomial(gi), e)
        if p is None:
            return {}
        return {(p[1], w): F.sign(p[0])}

    over_e = DGModule(E, lo, basis, diff, act_e, word_fn=lambda lab: lab[1])
    return over_e.over(q_star)


def koszul_filtration(dt: DerivedTensor, gamma_basis=None) -> FiltrationCertificate:
    """The filtration by number of exterior letters outside Gamma.

    ``gamma_basis`` may be generator indices or coefficient vectors over the
    generators of ``H*(B)``; ``None`` means all of ``Ker phi* & QH*(B)``.
    Generators are adapted first so that Gamma is spanned by the last ``s``.
    """
    B = dt.B_alg
    F = B.field
    if gamma_basis is None:
        gamma = gamma_case_i(dt.phi_star)
    else:
        gamma = []
        for v in gamma_basis:
            if isinstance(v, int):
                vec = [F.zero] * B.ngens
                vec[v] = F.one
                gamma.append(vec)
            else:
                gamma.append([F(x) for x in v])
    for v in gamma:
        img = _combine(dt.X_alg, [dt.phi_star.image(i) for i in range(B.ngens)], v)
        if img:
            raise HypothesisError("gamma_basis not in the kernel of phi*", witness=[str(c) for c in v])
    adapted, gidx = adapt_generators(dt, gamma)
    m, s = adapted.m, len(gidx)
    gset = set(gidx)
    words = _words(m)
    stages = []
    for l in range(m - s + 1):
        stages.append(frozenset(w for w in words if sum(1 for i in w if i not in gset) <= l))
    finite, certified, dims = tor_over_gamma_finite(adapted, gidx)
    caveats = []
    if not certified:
        caveats.append(f"{BOUNDED_FLAG}: Tor over Lambda checked through degree {dt.d_max}")
    if not finite:
        caveats.append("Tor over Lambda does not vanish near the top of the window; finiteness unverified")
    cert = FiltrationCertificate(adapted.dg, tuple(stages), m - s, dt.d_max,
                                 notes={"gamma_dim": s, "m": m, "gamma_indices": gidx,
                                        "tor_lambda_dims": {str(k): v for k, v in sorted(dims.items())},
                                        "generators": [g.name for g in adapted.B_alg.generators]},
                                 caveats=tuple(caveats))
    cert.notes["tor_lambda_finite"] = finite
    cert.adapted = adapted  # type: ignore[attr-defined]
    return cert


@dataclass(frozen=True)
class FiltrationCheck:
    ok: bool
    verified_class: Optional[int]
    ranks: Tuple[Tuple[int, ...], ...] = ()
    failure: Optional[str] = None
    witness: Optional[dict] = None
    caveats: Tuple[str, ...] = ()

    @property
    def level_upper(self) -> Optional[int]:
        return None if self.verified_class is None else self.verified_class + 1

    def to_json(self) -> dict:
        out = {"ok": self.ok, "verified_class": self.verified_class,
               "subquotient_shifts": [list(r) for r in self.ranks], "caveats": list(self.caveats)}
        if not self.ok:
            out["failure"] = self.failure
            out["witness"] = self.witness
        return out


def _fmt_label(lab) -> str:
    return repr(lab)


def check_semifree_filtration(cert: FiltrationCertificate, d_max: Optional[int] = None) -> FiltrationCheck:
    """Verify a certificate stage by stage; report the class or a failure witness."""
    dg = cert.ambient
    d_max = cert.d_max if d_max is None else d_max
    caveats = (f"{BOUNDED_FLAG}: checked through degree {d_max}",) + tuple(cert.caveats)
    stages = cert.stages
    if not stages:
        return FiltrationCheck(False, None, failure="empty filtration", caveats=caveats)

    def level_of(lab) -> Optional[int]:
        return cert.stage_of_word(dg.word_of(lab))

    # closure under the differential and the action
    for n, stage in enumerate(stages):
        for deg in range(dg.lo, d_max + 1):
            for lab in dg.basis(deg):
                if dg.word_of(lab) not in stage:
                    continue
                for t in dg._diff_fn(lab):
                    if dg.word_of(t) not in stage:
                        return FiltrationCheck(False, None, failure=f"delta-image escapes F^{n}",
                                               witness={"stage": n, "element": _fmt_label(lab),
                                                        "escaping_term": _fmt_label(t), "degree": deg},
                                               caveats=caveats)
                for g in range(dg.ground.ngens):
                    for t in dg._act_fn(g, lab):
                        if dg.word_of(t) not in stage:
                            return FiltrationCheck(False, None, failure=f"action escapes F^{n}",
                                                   witness={"stage": n, "element": _fmt_label(lab),
                                                            "generator": g, "degree": deg}, caveats=caveats)
    for n in range(1, len(stages)):
        if not stages[n - 1] <= stages[n]:
            missing = sorted(stages[n - 1] - stages[n])[0]
            return FiltrationCheck(False, None, failure=f"F^{n - 1} is not contained in F^{n}",
                                   witness={"stage": n, "word": list(missing)}, caveats=caveats)
    # exhaustive
    for deg in range(dg.lo, d_max + 1):
        for lab in dg.basis(deg):
            if dg.word_of(lab) not in stages[-1]:
                return FiltrationCheck(False, None, failure="filtration is not exhaustive",
                                       witness={"element": _fmt_label(lab), "degree": deg}, caveats=caveats)
    # subquotients have free homology
    ranks = []
    for n, stage in enumerate(stages):
        below = stages[n - 1] if n else frozenset()
        piece = dg.restricted(lambda lab, s=stage, b=below: dg.word_of(lab) in s and dg.word_of(lab) not in b)
        rep = piece.homology_freeness(d_max)
        if not rep.free:
            return FiltrationCheck(False, None, failure=f"subquotient F^{n}/F^{n - 1} is not free",
                                   witness={"stage": n, **rep.to_json()["witness"]}, caveats=caveats)
        ranks.append(rep.generator_degrees)
    return FiltrationCheck(True, len(stages) - 1, tuple(ranks), caveats=caveats)


def trivial_action_test(q_star: AlgebraMap, gamma_idx: Sequence[int], d_max: int) -> Tuple[bool, List[dict]]:
    """Do the generators of ``H*(B)`` outside Gamma act by zero on ``H(H*(E) (x) E[s Gamma])``?

    ``gamma_idx`` indexes generators of ``q_star.source`` (adapt first if
    Gamma is not spanned by generators).  Bounded check through ``d_max``.
    """
    B = q_star.source
    dg = koszul_on_e(q_star, gamma_idx)
    witnesses = []
    gset = set(gamma_idx)
    for g in range(B.ngens):
        if g in gset:
            continue
        e = B.degrees[g]
        for n in range(dg.lo, d_max - e + 1):
            if dg.homology_dim(n) == 0:
                continue
            if not dg.homology_act(g, n).is_zero():
                witnesses.append({"generator": B.generators[g].name, "degree": n})
                break
    return (not witnesses), witnesses


def verify_free_basis(phi: AlgebraMap, basis: Sequence[Element], d_max: int) -> Tuple[bool, Optional[int]]:
    """Is ``phi.target`` free over ``phi.source`` on ``basis``, degreewise through ``d_max``?"""
    S, T = phi.source, phi.target
    F = T.field
    degs = [T.elem_degree(b) for b in basis]
    if any(d is None for d in degs):
        return False, 0
    for d in range(d_max + 1):
        cols = []
        for b, bd in zip(basis, degs):
            for mono in S.basis(d - bd):
                cols.append(T.to_vector(T.elem_mul(phi.apply_monomial(mono), b), d))
        n = T.dim(d)
        if len(cols) != n or (n and rank(ExactMatrix.from_columns(F, n, cols)) != n):
            return False, d
    return True, None


def restrict_scalars_certificate(cert: FiltrationCertificate, phi: AlgebraMap,
                                 basis: Sequence[Element], d_max: Optional[int] = None) -> FiltrationCertificate:
    """The same filtration read over ``phi.source`` once ``phi.target`` is verified free on ``basis``."""
    d_max = cert.d_max if d_max is None else d_max
    ok, bad = verify_free_basis(phi, basis, d_max)
    if not ok:
        raise HypothesisError("freeness witness fails", witness={"degree": bad})
    out = FiltrationCertificate(cert.ambient.over(phi), cert.stages, cert.declared_class, d_max,
                                dict(cert.notes), cert.caveats)
    out.notes["restricted_along"] = str(phi.source)
    return out


def free_filtration(module: DGModule, d_max: int) -> FiltrationCertificate:
    """A one-stage certificate ``F^0 = everything``."""
    words = set()
    for n in range(module.lo, d_max + 1):
        for lab in module.basis(n):
            words.add(module.word_of(lab))
    return FiltrationCertificate(module, (frozenset(words),), 0, d_max)


def module_as_dg(m: GradedModule, d_max: int) -> DGModule:
    """A graded module with zero differential, labels ``(degree, index)``."""
    lo = m.min_degree if m.min_degree is not None else 0
    F = m.field

    def basis(n):
        return [(n, i) for i in range(m.dim(n))]

    def act(g, lab):
        n, i = lab
        mat = m.act_matrix(g, n)
        e = m.algebra.degrees[g]
        return {(n + e, r): v for (r, c), v in mat.entries.items() if c == i}

    return DGModule(m.algebra, lo, basis, lambda lab: {}, act)
