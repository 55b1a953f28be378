"""Graded-commutative monomial algebras and finitely presented modules over them.

Degrees are cohomological: algebra generators sit in degree >= 1, module
generators in any integer degree.  ``Sigma`` lowers degrees by one,
``(Sigma M)^n = M^(n+1)``.

An algebra element is a dict ``{monomial: coefficient}``; a monomial is an
exponent tuple.  Products of monomials follow the Koszul sign rule
``xy = (-1)^{|x||y|} yx``; unless the field has characteristic 2 and the
override flag is set, odd generators square to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from levellab.fieldlin import ExactMatrix, FieldSpec, Scalar, Subspace, independent_subset, kernel_basis

Monomial = Tuple[int, ...]
Element = Dict[Monomial, Scalar]
# module term: (generator index, monomial, coefficient)
ModuleTerm = Tuple[int, Monomial, Scalar]


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int


def _divides(r: Monomial, m: Monomial) -> bool:
    return all(a <= b for a, b in zip(r, m))


@dataclass(frozen=True)
class GradedAlgebra:
    """``k[x_1..x_n] / (monomials)`` with graded-commutative signs."""

    field: FieldSpec
    generators: Tuple[Generator, ...]
    relations: Tuple[Monomial, ...] = ()
    char2_odd_square_allowed: bool = False

    def __post_init__(self):
        gens = tuple(g if isinstance(g, Generator) else Generator(*g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        n = len(gens)
        for g in gens:
            if g.degree < 1:
                raise ValueError(f"generator {g.name} has degree {g.degree}; algebra generators need degree >= 1")
        if len({g.name for g in gens}) != n:
            raise ValueError("generator names must be distinct")
        rels = []
        for r in self.relations:
            r = tuple(int(e) for e in r)
            if len(r) != n:
                raise ValueError(f"relation {r} has length {len(r)}, expected {n}")
            if any(e < 0 for e in r) or not any(r):
                raise ValueError(f"relation {r} must be a nonconstant monomial")
            rels.append(r)
        # keep only minimal generators of the monomial ideal, in a canonical order
        minimal = sorted({r for r in rels if not any(s != r and _divides(s, r) for s in rels)},
                         key=lambda r: (sum(r), tuple(-e for e in r)))
        object.__setattr__(self, "relations", tuple(minimal))
        if self.char2_odd_square_allowed and self.field.characteristic != 2:
            raise ValueError("odd squares may only be allowed in characteristic 2")

    # construction helpers

    @classmethod
    def polynomial(cls, field: FieldSpec, degrees: Sequence[int], names: Optional[Sequence[str]] = None,
                   **kw) -> "GradedAlgebra":
        names = names or [f"x{i + 1}" for i in range(len(degrees))]
        return cls(field, tuple(Generator(n, d) for n, d in zip(names, degrees)), **kw)

    @classmethod
    def ground(cls, field: FieldSpec) -> "GradedAlgebra":
        return cls(field, ())

    # basic data

    @property
    def ngens(self) -> int:
        return len(self.generators)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(g.degree for g in self.generators)

    @property
    def odd_nilpotent(self) -> bool:
        return not self.char2_odd_square_allowed

    def unit(self) -> Monomial:
        return (0,) * self.ngens

    def gen_monomial(self, i: int) -> Monomial:
        return tuple(1 if j == i else 0 for j in range(self.ngens))

    def monomial_degree(self, m: Monomial) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))

    def is_standard(self, m: Monomial) -> bool:
        if self.odd_nilpotent:
            for e, d in zip(m, self.degrees):
                if d % 2 and e > 1:
                    return False
        return not any(_divides(r, m) for r in self.relations)

    @property
    def is_polynomial(self) -> bool:
        """No relations at all, odd nilpotence included."""
        if self.relations:
            return False
        return not (self.odd_nilpotent and any(d % 2 for d in self.degrees))

    def power_bounds(self) -> List[Optional[int]]:
        """Per generator, the least ``k`` with ``x^k = 0``, or ``None``."""
        out: List[Optional[int]] = []
        for i, d in enumerate(self.degrees):
            k = 2 if (self.odd_nilpotent and d % 2) else None
            for r in self.relations:
                if all(e == 0 for j, e in enumerate(r) if j != i):
                    k = r[i] if k is None else min(k, r[i])
            out.append(k)
        return out

    @property
    def is_finite_dimensional(self) -> bool:
        return all(k is not None for k in self.power_bounds())

    def top_degree(self) -> Optional[int]:
        """An upper bound for the top nonzero degree, when finite-dimensional."""
        bounds = self.power_bounds()
        if any(k is None for k in bounds):
            return None
        return sum((k - 1) * d for k, d in zip(bounds, self.degrees))

    # bases

    @lru_cache(maxsize=None)
    def basis(self, d: int) -> Tuple[Monomial, ...]:
        """Standard monomials of degree ``d``, graded-lex by generator index (x1^2 before x1 x2)."""
        if d < 0:
            return ()
        degs = self.degrees
        n = len(degs)
        caps = self.power_bounds()
        out: List[Monomial] = []
        prefix: List[int] = []

        def rec(i: int, remaining: int):
            if i == n:
                if remaining == 0:
                    m = tuple(prefix)
                    if self.is_standard(m):
                        out.append(m)
                return
            top = remaining // degs[i]
            if caps[i] is not None:
                top = min(top, caps[i] - 1)
            for e in range(top, -1, -1):
                prefix.append(e)
                rec(i + 1, remaining - e * degs[i])
                prefix.pop()

        rec(0, d)
        return tuple(out)

    @lru_cache(maxsize=None)
    def index(self, d: int) -> Dict[Monomial, int]:
        return {m: i for i, m in enumerate(self.basis(d))}

    def dim(self, d: int) -> int:
        return len(self.basis(d))

    def hilbert_function(self, d_max: int) -> List[int]:
        return [self.dim(d) for d in range(d_max + 1)]

    def total_dimension(self) -> int:
        top = self.top_degree()
        if top is None:
            raise ValueError("algebra is infinite-dimensional")
        return sum(self.dim(d) for d in range(top + 1))

    # products

    @lru_cache(maxsize=None)
    def mul(self, a: Monomial, b: Monomial) -> Optional[Tuple[int, Monomial]]:
        """``a * b`` as ``(sign, monomial)``, or ``None`` when the product vanishes."""
        m = tuple(x + y for x, y in zip(a, b))
        if not self.is_standard(m):
            return None
        # moving b's odd letters left past a's later odd letters
        swaps = 0
        odd_b_before = 0
        for i, d in enumerate(self.degrees):
            if d % 2:
                swaps += a[i] * odd_b_before
                odd_b_before += b[i]
        return (-1 if swaps % 2 else 1), m

    def elem_mul(self, x: Element, y: Element) -> Element:
        F = self.field
        out: Element = {}
        for ma, ca in x.items():
            for mb, cb in y.items():
                r = self.mul(ma, mb)
                if r is None:
                    continue
                s, m = r
                c = F.mul(F.mul(ca, cb), F.sign(s))
                nv = F.add(out.get(m, F.zero), c)
                if nv == 0:
                    out.pop(m, None)
                else:
                    out[m] = nv
        return out

    def elem_add(self, x: Element, y: Element, scale: Scalar = 1) -> Element:
        F = self.field
        scale = F(scale)
        out = dict(x)
        for m, c in y.items():
            nv = F.add(out.get(m, F.zero), F.mul(scale, c))
            if nv == 0:
                out.pop(m, None)
            else:
                out[m] = nv
        return out

    def element(self, terms) -> Element:
        """Build an element from ``[(coeff, exponents), ...]``, reducing to standard monomials."""
        F = self.field
        out: Element = {}
        for c, m in terms:
            m = tuple(int(e) for e in m)
            if len(m) != self.ngens:
                raise ValueError(f"monomial {m} has wrong length")
            c = F(c)
            if c == 0 or not self.is_standard(m):
                continue
            nv = F.add(out.get(m, F.zero), c)
            if nv == 0:
                out.pop(m, None)
            else:
                out[m] = nv
        return out

    def elem_degree(self, x: Element) -> Optional[int]:
        """Common degree of a homogeneous element (``None`` for zero)."""
        degs = {self.monomial_degree(m) for m in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError(f"element is not homogeneous (degrees {sorted(degs)})")
        return degs.pop()

    def to_vector(self, x: Element, d: int) -> List[Scalar]:
        idx = self.index(d)
        v = [self.field.zero] * len(idx)
        for m, c in x.items():
            v[idx[m]] = c
        return v

    def from_vector(self, v: Sequence, d: int) -> Element:
        return {m: c for m, c in zip(self.basis(d), v) if c != 0}

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for g, e in zip(self.generators, m):
            if e == 1:
                parts.append(g.name)
            elif e > 1:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) or "1"

    def format_element(self, x: Element) -> str:
        if not x:
            return "0"
        return " + ".join(f"{c}*{self.format_monomial(m)}" for m, c in sorted(x.items(), reverse=True))

    # structure

    def indecomposables(self, d_max: int) -> Dict[int, Tuple[int, List[Monomial]]]:
        """``dim (QA)^d`` and monomial lifts, for ``1 <= d <= d_max``.

        A^+ A^+ is spanned by the standard monomials of length >= 2, so the
        indecomposables are exactly the generators that survive the relations.
        """
        out: Dict[int, Tuple[int, List[Monomial]]] = {}
        for d in range(1, d_max + 1):
            lifts = [m for m in self.basis(d) if sum(m) == 1]
            out[d] = (len(lifts), lifts)
        return out

    def indecomposable_dim(self) -> int:
        return sum(1 for i in range(self.ngens) if self.is_standard(self.gen_monomial(i)))

    def cup_length(self) -> int:
        """Largest ``n`` with ``(A^+)^n != 0``."""
        top = self.top_degree()
        if top is None:
            raise ValueError("cup length undefined without finiteness")
        best = 0
        for d in range(1, top + 1):
            for m in self.basis(d):
                best = max(best, sum(m))
        return best

    def as_module(self) -> "GradedModule":
        return GradedModule(self, (Generator("1", 0),), ())

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "generators": [{"name": g.name, "degree": g.degree} for g in self.generators],
            "relations": [list(r) for r in self.relations],
            **({"char2_odd_square_allowed": True} if self.char2_odd_square_allowed else {}),
        }

    @classmethod
    def from_json(cls, data: dict, field: Optional[FieldSpec] = None) -> "GradedAlgebra":
        if field is None:
            field = FieldSpec.from_json(data["field"])
        gens = tuple(Generator(g["name"], int(g["degree"])) for g in data.get("generators", []))
        rels = tuple(tuple(r) for r in data.get("relations", []))
        return cls(field, gens, rels, bool(data.get("char2_odd_square_allowed", False)))

    def __str__(self) -> str:
        gens = ", ".join(f"{g.name}:{g.degree}" for g in self.generators)
        rels = ", ".join(self.format_monomial(r) for r in self.relations)
        return f"{self.field}[{gens}]" + (f"/({rels})" if rels else "")


def sign_rule_defect(a: GradedAlgebra, d_max: int) -> Optional[Tuple[Monomial, Monomial]]:
    """First basis pair ``x, y`` with ``xy != (-1)^{|x||y|} yx`` in degrees <= d_max."""
    F = a.field
    for d1 in range(d_max + 1):
        for d2 in range(d_max + 1 - d1):
            for x in a.basis(d1):
                for y in a.basis(d2):
                    xy = a.elem_mul({x: F.one}, {y: F.one})
                    yx = a.elem_mul({y: F.one}, {x: F.one})
                    s = -1 if (d1 * d2) % 2 else 1
                    if a.elem_add(xy, yx, F.neg(F.sign(s))):
                        return x, y
    return None


class FreeModule:
    """The free module ``(+)_k Sigma^{-g_k} A`` with generators in degrees ``g_k``.

    Degree-``d`` basis: pairs ``(k, m)`` with ``m`` a standard monomial of
    degree ``d - g_k``, ordered by ``k`` then monomial order.
    """

    def __init__(self, algebra: GradedAlgebra, degrees: Sequence[int]):
        self.algebra = algebra
        self.degrees = tuple(degrees)
        self._basis: Dict[int, Tuple[Tuple[int, Monomial], ...]] = {}
        self._index: Dict[int, Dict[Tuple[int, Monomial], int]] = {}

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def basis(self, d: int) -> Tuple[Tuple[int, Monomial], ...]:
        b = self._basis.get(d)
        if b is None:
            b = tuple((k, m) for k, g in enumerate(self.degrees) for m in self.algebra.basis(d - g))
            self._basis[d] = b
            self._index[d] = {x: i for i, x in enumerate(b)}
        return b

    def index(self, d: int) -> Dict[Tuple[int, Monomial], int]:
        self.basis(d)
        return self._index[d]

    def dim(self, d: int) -> int:
        return len(self.basis(d))

    def generator_vector(self, k: int) -> List[Scalar]:
        d = self.degrees[k]
        F = self.algebra.field
        v = [F.zero] * self.dim(d)
        v[self.index(d)[(k, self.algebra.unit())]] = F.one
        return v

    def times_monomial(self, mono: Monomial, d: int, vec: Sequence) -> List[Scalar]:
        """``mono * vec`` for ``vec`` in degree ``d``."""
        A = self.algebra
        F = A.field
        e = A.monomial_degree(mono)
        idx = self.index(d + e)
        out = [F.zero] * len(idx)
        for (k, m), c in zip(self.basis(d), vec):
            if c == 0:
                continue
            r = A.mul(mono, m)
            if r is None:
                continue
            s, m2 = r
            j = idx[(k, m2)]
            out[j] = F.add(out[j], c if s > 0 else F.neg(c))
        return out

    def times_element(self, x: Element, d: int, vec: Sequence) -> List[Scalar]:
        A = self.algebra
        F = A.field
        e = A.elem_degree(x)
        if e is None:
            return [F.zero] * self.dim(d)
        out = [F.zero] * self.dim(d + e)
        for mono, c in x.items():
            part = self.times_monomial(mono, d, vec)
            out = [F.add(a, F.mul(c, b)) for a, b in zip(out, part)]
        return out

    def gen_action_matrix(self, g: int, d: int) -> ExactMatrix:
        A = self.algebra
        mono = A.gen_monomial(g)
        e = A.degrees[g]
        idx = self.index(d + e)
        entries = {}
        for col, (k, m) in enumerate(self.basis(d)):
            r = A.mul(mono, m)
            if r is not None:
                entries[(idx[(k, r[1])], col)] = r[0]
        return ExactMatrix(A.field, len(idx), self.dim(d), entries)

    def map_matrix(self, images: Sequence[Sequence], target: "FreeModule", d: int) -> ExactMatrix:
        """Matrix in degree ``d`` of the map sending generator ``k`` to ``images[k]``."""
        A = self.algebra
        F = A.field
        tidx = target.index(d)
        tbasis_cache: Dict[int, Tuple] = {}
        entries: Dict[Tuple[int, int], Scalar] = {}
        for col, (k, mono) in enumerate(self.basis(d)):
            g = self.degrees[k]
            tb = tbasis_cache.get(g)
            if tb is None:
                tb = target.basis(g)
                tbasis_cache[g] = tb
            for (l, m), c in zip(tb, images[k]):
                if c == 0:
                    continue
                r = A.mul(mono, m)
                if r is None:
                    continue
                s, m2 = r
                key = (tidx[(l, m2)], col)
                nv = F.add(entries.get(key, F.zero), c if s > 0 else F.neg(c))
                if nv == 0:
                    entries.pop(key, None)
                else:
                    entries[key] = nv
        m = ExactMatrix(F, len(tidx), self.dim(d))
        m._entries = entries
        return m


def _normalize_terms(field: FieldSpec, algebra: GradedAlgebra, terms) -> Tuple[ModuleTerm, ...]:
    acc: Dict[Tuple[int, Monomial], Scalar] = {}
    for k, m, c in terms:
        m = tuple(int(e) for e in m)
        c = field(c)
        if c == 0 or not algebra.is_standard(m):
            continue
        nv = field.add(acc.get((k, m), field.zero), c)
        if nv == 0:
            acc.pop((k, m), None)
        else:
            acc[(k, m)] = nv
    return tuple(sorted(((k, m, c) for (k, m), c in acc.items()), key=lambda t: (t[0], tuple(-e for e in t[1]))))


@dataclass(frozen=True)
class GradedModule:
    """A finitely presented graded module ``(free on generators) / (relations)``.

    ``truncated_at`` records, for presentations extracted degreewise, the
    degree through which the relations are known to be complete.
    """

    algebra: GradedAlgebra
    generators: Tuple[Generator, ...]
    relations: Tuple[Tuple[ModuleTerm, ...], ...] = ()
    truncated_at: Optional[int] = None
    _cache: dict = dc_field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        gens = tuple(g if isinstance(g, Generator) else Generator(*g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        A = self.algebra
        rels = []
        for rel in self.relations:
            terms = _normalize_terms(A.field, A, rel)
            if not terms:
                continue
            degs = set()
            for k, m, _ in terms:
                if not 0 <= k < len(gens):
                    raise ValueError(f"relation refers to generator {k}, module has {len(gens)}")
                degs.add(gens[k].degree + A.monomial_degree(m))
            if len(degs) != 1:
                raise ValueError(f"relation {rel} is not homogeneous")
            rels.append(terms)
        object.__setattr__(self, "relations", tuple(rels))

    def __hash__(self):
        return hash((self.algebra, self.generators, self.relations, self.truncated_at))

    # constructors

    @classmethod
    def free(cls, algebra: GradedAlgebra, degrees: Sequence[int]) -> "GradedModule":
        return cls(algebra, tuple(Generator(f"e{i}", d) for i, d in enumerate(degrees)))

    @classmethod
    def trivial(cls, algebra: GradedAlgebra, degree: int = 0) -> "GradedModule":
        """The residue field ``k`` placed in ``degree``."""
        rels = tuple(((0, algebra.gen_monomial(i), 1),) for i in range(algebra.ngens))
        return cls(algebra, (Generator("k", degree),), rels)

    @classmethod
    def cyclic(cls, algebra: GradedAlgebra, monomials: Iterable[Sequence[int]], degree: int = 0) -> "GradedModule":
        """``A / (monomials)`` as a module, generator in ``degree``."""
        rels = tuple(((0, tuple(m), 1),) for m in monomials)
        return cls(algebra, (Generator("1", degree),), rels)

    # degreewise structure

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    @property
    def min_degree(self) -> Optional[int]:
        return min((g.degree for g in self.generators), default=None)

    @property
    def max_presentation_degree(self) -> int:
        degs = [g.degree for g in self.generators]
        degs += [self.relation_degree(r) for r in self.relations]
        return max(degs, default=0)

    def relation_degree(self, rel: Tuple[ModuleTerm, ...]) -> int:
        k, m, _ = rel[0]
        return self.generators[k].degree + self.algebra.monomial_degree(m)

    @property
    def presentation_free(self) -> FreeModule:
        f = self._cache.get("free")
        if f is None:
            f = FreeModule(self.algebra, [g.degree for g in self.generators])
            self._cache["free"] = f
        return f

    def relation_vector(self, rel: Tuple[ModuleTerm, ...]) -> List[Scalar]:
        P = self.presentation_free
        d = self.relation_degree(rel)
        idx = P.index(d)
        v = [self.field.zero] * len(idx)
        for k, m, c in rel:
            v[idx[(k, m)]] = c
        return v

    def relation_subspace(self, d: int) -> Subspace:
        key = ("rel", d)
        S = self._cache.get(key)
        if S is None:
            P = self.presentation_free
            A = self.algebra
            vecs = []
            for rel in self.relations:
                rd = self.relation_degree(rel)
                if rd > d:
                    continue
                rv = self.relation_vector(rel)
                for mono in A.basis(d - rd):
                    vecs.append(P.times_monomial(mono, rd, rv))
            S = Subspace(self.field, P.dim(d), vecs)
            self._cache[key] = S
        return S

    def dim(self, d: int) -> int:
        return self.relation_subspace(d).codim

    def hilbert_function(self, d_max: int, d_min: int = 0) -> List[int]:
        return [self.dim(d) for d in range(d_min, d_max + 1)]

    def act_matrix(self, g: int, d: int) -> ExactMatrix:
        """Action of generator ``g`` of the algebra, ``M^d -> M^{d+|g|}``, in quotient coordinates."""
        key = ("act", g, d)
        mat = self._cache.get(key)
        if mat is None:
            P = self.presentation_free
            src = self.relation_subspace(d)
            e = self.algebra.degrees[g]
            tgt = self.relation_subspace(d + e)
            mono = self.algebra.gen_monomial(g)
            cols = []
            F = self.field
            for j in src.free:
                v = [F.zero] * P.dim(d)
                v[j] = F.one
                cols.append(tgt.quotient_coords(P.times_monomial(mono, d, v)))
            mat = ExactMatrix.from_columns(F, tgt.codim, cols)
            self._cache[key] = mat
        return mat

    def monomial_action(self, mono: Monomial, d: int, vec: Sequence) -> List[Scalar]:
        """``mono * vec`` in quotient coordinates (rightmost letters act first)."""
        A = self.algebra
        v = list(vec)
        deg = d
        for g in range(A.ngens - 1, -1, -1):
            for _ in range(mono[g]):
                v = self.act_matrix(g, deg).apply(v)
                deg += A.degrees[g]
        return v

    # operations

    def shift(self, s: int) -> "GradedModule":
        """``Sigma^s M``: every degree drops by ``s``."""
        gens = tuple(Generator(g.name, g.degree - s) for g in self.generators)
        return GradedModule(self.algebra, gens, self.relations,
                            None if self.truncated_at is None else self.truncated_at - s)

    def to_json(self) -> dict:
        return {
            **self.algebra.to_json(),
            "module_generators": [{"name": g.name, "degree": g.degree} for g in self.generators],
            "module_relations": [
                [{"gen": k, "mono": list(m), "coeff": str(c)} for k, m, c in rel] for rel in self.relations
            ],
            **({"truncated_at": self.truncated_at} if self.truncated_at is not None else {}),
        }

    @classmethod
    def from_json(cls, data: dict, field: Optional[FieldSpec] = None,
                  algebra: Optional[GradedAlgebra] = None) -> "GradedModule":
        A = algebra if algebra is not None else GradedAlgebra.from_json(data, field)
        gens = tuple(Generator(g["name"], int(g["degree"])) for g in data.get("module_generators", []))
        names = {g.name: i for i, g in enumerate(gens)}
        rels = []
        for rel in data.get("module_relations", []):
            terms = []
            for t in rel:
                if isinstance(t, dict):
                    k = t["gen"]
                    k = names[k] if isinstance(k, str) else int(k)
                    terms.append((k, tuple(t["mono"]), A.field(t.get("coeff", 1))))
                else:
                    c, k, m = t
                    k = names[k] if isinstance(k, str) else int(k)
                    terms.append((k, tuple(m), A.field(c)))
            rels.append(tuple(terms))
        return cls(A, gens, tuple(rels), data.get("truncated_at"))

    def __str__(self) -> str:
        gens = ", ".join(f"{g.name}:{g.degree}" for g in self.generators)
        return f"module over {self.algebra} on [{gens}] with {len(self.relations)} relations"


def shift(m: GradedModule, s: int) -> GradedModule:
    return m.shift(s)


def direct_sum(modules: Sequence[GradedModule]) -> GradedModule:
    if not modules:
        raise ValueError("direct_sum needs at least one summand")
    A = modules[0].algebra
    if any(m.algebra != A for m in modules):
        raise ValueError("summands live over different algebras")
    gens: List[Generator] = []
    rels = []
    for i, m in enumerate(modules):
        off = len(gens)
        gens.extend(Generator(f"{g.name}_{i}", g.degree) for g in m.generators)
        rels.extend(tuple((k + off, mono, c) for k, mono, c in rel) for rel in m.relations)
    truncs = [m.truncated_at for m in modules if m.truncated_at is not None]
    return GradedModule(A, tuple(gens), tuple(rels), min(truncs) if truncs else None)


def hilbert_function(x, d_max: int) -> List[int]:
    return x.hilbert_function(d_max)


def monomial_basis(a: GradedAlgebra, d: int) -> Tuple[Monomial, ...]:
    if d < 0:
        raise ValueError("degree must be non-negative")
    return a.basis(d)


def indecomposables(a: GradedAlgebra, d_max: int):
    return a.indecomposables(d_max)


def cup_length(a: GradedAlgebra) -> int:
    return a.cup_length()


@dataclass(frozen=True)
class AlgebraMap:
    """A map of graded algebras given by the images of the source generators."""

    source: GradedAlgebra
    target: GradedAlgebra
    images: Tuple[Tuple[Tuple[Monomial, Scalar], ...], ...]

    def __post_init__(self):
        S, T = self.source, self.target
        if S.field != T.field:
            raise ValueError("algebra map between different fields")
        if len(self.images) != S.ngens:
            raise ValueError(f"need {S.ngens} generator images, got {len(self.images)}")
        imgs = []
        for g, im in zip(S.generators, self.images):
            x = T.element([(c, m) for m, c in (im.items() if isinstance(im, dict) else im)])
            d = T.elem_degree(x)
            if d is not None and d != g.degree:
                raise ValueError(f"image of {g.name} has degree {d}, expected {g.degree}")
            imgs.append(tuple(sorted(x.items(), reverse=True)))
        object.__setattr__(self, "images", tuple(imgs))
        for r in S.relations:
            if self.apply_monomial(r):
                raise ValueError(f"relation {S.format_monomial(r)} does not map to zero")
        if S.odd_nilpotent:
            for i, d in enumerate(S.degrees):
                if d % 2:
                    sq = tuple(2 if j == i else 0 for j in range(S.ngens))
                    if self.apply_monomial(sq):
                        raise ValueError(f"square of odd generator {S.generators[i].name} does not map to zero")

    @classmethod
    def identity(cls, a: GradedAlgebra) -> "AlgebraMap":
        return cls(a, a, tuple(((a.gen_monomial(i), a.field.one),) for i in range(a.ngens)))

    @classmethod
    def from_elements(cls, source: GradedAlgebra, target: GradedAlgebra, images: Sequence[Element]) -> "AlgebraMap":
        return cls(source, target, tuple(tuple(x.items()) for x in images))

    def image(self, i: int) -> Element:
        return dict(self.images[i])

    def apply_monomial(self, m: Monomial) -> Element:
        T = self.target
        out: Element = {T.unit(): T.field.one}
        for i, e in enumerate(m):
            for _ in range(e):
                out = T.elem_mul(out, self.image(i))
                if not out:
                    return out
        return out

    def apply(self, x: Element) -> Element:
        T = self.target
        out: Element = {}
        for m, c in x.items():
            out = T.elem_add(out, self.apply_monomial(m), c)
        return out

    def matrix(self, d: int) -> ExactMatrix:
        S, T = self.source, self.target
        cols = [T.to_vector(self.apply_monomial(m), d) for m in S.basis(d)]
        return ExactMatrix.from_columns(T.field, T.dim(d), cols)

    def is_zero(self) -> bool:
        return all(not im for im in self.images)

    def to_json(self) -> list:
        return [[[str(c), list(m)] for m, c in im] for im in self.images]


def minimal_generators(algebra: GradedAlgebra, d_lo: int, d_hi: int,
                       dim_fn: Callable[[int], int],
                       act_fn: Callable[[int, int], ExactMatrix]) -> List[Tuple[int, List[Scalar]]]:
    """Minimal generators, degree by degree, of a module given by its action matrices.

    In each degree the generators are unit vectors on the columns left free
    by the decomposables ``sum_g x_g M^{d-|g|}``.
    """
    F = algebra.field
    out: List[Tuple[int, List[Scalar]]] = []
    for d in range(d_lo, d_hi + 1):
        n = dim_fn(d)
        if n == 0:
            continue
        dec = []
        for g, e in enumerate(algebra.degrees):
            if d - e < d_lo:
                continue
            dec.extend(act_fn(g, d - e).transpose().row_dicts())
        vecs = []
        for row in dec:
            if row:
                v = [F.zero] * n
                for j, x in row.items():
                    v[j] = x
                vecs.append(v)
        S = Subspace(F, n, vecs)
        for j in S.free:
            v = [F.zero] * n
            v[j] = F.one
            out.append((d, v))
    return out


def kernel_generators(free: FreeModule, d_lo: int, d_hi: int,
                      matrix_fn: Callable[[int], ExactMatrix]) -> List[Tuple[int, List[Scalar]]]:
    """Minimal generators of the kernel of a degreewise map out of ``free``.

    ``matrix_fn(d)`` is the map on ``free`` in degree ``d``.  Kernel vectors
    already in ``A^+ * (kernel in lower degrees)`` are stripped.
    """
    A = free.algebra
    F = A.field
    kernels: Dict[int, List[List[Scalar]]] = {}
    out: List[Tuple[int, List[Scalar]]] = []
    for d in range(d_lo, d_hi + 1):
        n = free.dim(d)
        if n == 0:
            continue
        K = kernel_basis(matrix_fn(d))
        kernels[d] = K
        if not K:
            continue
        dec = []
        for g, e in enumerate(A.degrees):
            for z in kernels.get(d - e, ()):
                dec.append(free.times_monomial(A.gen_monomial(g), d - e, z))
        S = Subspace(F, n, dec)
        for i in independent_subset(F, n, K, modulo=S):
            out.append((d, S.reduce(K[i])))
    return out


def mono_action(algebra: GradedAlgebra, act_fn: Callable[[int, int], ExactMatrix],
                mono: Monomial, d: int, v: List[Scalar]) -> List[Scalar]:
    """``mono * v`` through generator action matrices (rightmost letters act first)."""
    deg = d
    for g in range(algebra.ngens - 1, -1, -1):
        for _ in range(mono[g]):
            v = act_fn(g, deg).apply(v)
            deg += algebra.degrees[g]
    return v


def present_degreewise(algebra: GradedAlgebra, d_lo: int, d_hi: int,
                       dim_fn: Callable[[int], int],
                       act_fn: Callable[[int, int], ExactMatrix],
                       names: str = "g") -> Tuple[GradedModule, List[Tuple[int, List[Scalar]]]]:
    """Minimal presentation, through degree ``d_hi``, of a degreewise module.

    ``dim_fn(d)`` gives ``dim M^d``; ``act_fn(g, d)`` the action of algebra
    generator ``g`` as a matrix ``M^d -> M^{d+|g|}``; ``M^d = 0`` for
    ``d < d_lo``.  Returns the presentation and the chosen generators as
    ``(degree, vector in M)`` pairs.
    """
    F = algebra.field
    gens_v = minimal_generators(algebra, d_lo, d_hi, dim_fn, act_fn)
    gens = tuple(Generator(f"{names}{i}", d) for i, (d, _) in enumerate(gens_v))
    free = FreeModule(algebra, [d for d, _ in gens_v])

    def eps(d: int) -> ExactMatrix:
        cols = [mono_action(algebra, act_fn, m, gens_v[k][0], gens_v[k][1]) for k, m in free.basis(d)]
        return ExactMatrix.from_columns(F, dim_fn(d), cols)

    rels = []
    for d, z in kernel_generators(free, d_lo, d_hi, eps):
        rels.append(tuple((k, m, c) for (k, m), c in zip(free.basis(d), z) if c != 0))
    return GradedModule(algebra, gens, tuple(rels), d_hi), gens_v


def restrict_module(phi: AlgebraMap, m: GradedModule, d_max: int) -> GradedModule:
    """``m`` viewed over ``phi.source``, presented through degree ``d_max``."""
    if m.algebra != phi.target:
        raise ValueError("module does not live over the map's target")
    S = phi.source
    lo = m.min_degree if m.min_degree is not None else 0

    def act(g: int, d: int) -> ExactMatrix:
        x = phi.image(g)
        e = S.degrees[g]
        n_src, n_tgt = m.dim(d), m.dim(d + e)
        cols = []
        for j in range(n_src):
            v = [m.field.zero] * n_src
            v[j] = m.field.one
            acc = [m.field.zero] * n_tgt
            for mono, c in x.items():
                part = m.monomial_action(mono, d, v)
                acc = [m.field.add(a, m.field.mul(c, b)) for a, b in zip(acc, part)]
            cols.append(acc)
        return ExactMatrix.from_columns(m.field, n_tgt, cols)

    pres, _ = present_degreewise(S, lo, d_max, m.dim, act)
    return pres
