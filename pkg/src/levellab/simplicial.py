"""Simplicial complexes, Stanley-Reisner rings and Hochster's formula.

Vertices are ``1..m``.  The complex with no facets is ``{empty face}``,
whose reduced cohomology is ``k`` in degree ``-1``.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from levellab.fieldlin import ExactMatrix, FieldSpec, rank
from levellab.grcalg import Generator, GradedAlgebra, GradedModule
from levellab.resolve import TorTable

Face = Tuple[int, ...]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LEVELLAB_THREADS", "1")))
    except ValueError:
        return 1


class SimplicialComplex:
    """A simplicial complex on ``[m]`` given by facets (normalized to the maximal ones)."""

    def __init__(self, vertex_count: int, facets: Iterable[Iterable[int]] = ()):
        if vertex_count < 0:
            raise ValueError("vertex count must be nonnegative")
        self.m = int(vertex_count)
        fs = set()
        for f in facets:
            face = tuple(sorted(set(int(v) for v in f)))
            for v in face:
                if not 1 <= v <= self.m:
                    raise ValueError(f"vertex {v} out of range 1..{self.m}")
            fs.add(face)
        sets = [frozenset(f) for f in fs]
        # the empty face is always present, so it is never listed
        maximal = [f for f in fs if f and not any(frozenset(f) < s for s in sets)]
        self.facets: Tuple[Face, ...] = tuple(sorted(maximal, key=lambda f: (len(f), f)))

    @classmethod
    def simplex(cls, m: int) -> "SimplicialComplex":
        return cls(m, [range(1, m + 1)])

    @classmethod
    def boundary_of_simplex(cls, m: int) -> "SimplicialComplex":
        return cls(m, [c for c in itertools.combinations(range(1, m + 1), m - 1)])

    @classmethod
    def cycle(cls, m: int) -> "SimplicialComplex":
        return cls(m, [(i, i % m + 1) for i in range(1, m + 1)])

    @classmethod
    def discrete(cls, m: int) -> "SimplicialComplex":
        return cls(m, [(i,) for i in range(1, m + 1)])

    @classmethod
    def from_json(cls, data: dict) -> "SimplicialComplex":
        return cls(int(data["vertices"]), data.get("facets", []))

    def to_json(self) -> dict:
        return {"vertices": self.m, "facets": [list(f) for f in self.facets]}

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and (self.m, self.facets) == (other.m, other.facets)

    def __hash__(self) -> int:
        return hash((self.m, self.facets))

    def __repr__(self) -> str:
        return f"SimplicialComplex({self.m}, {[list(f) for f in self.facets]})"

    @property
    def dimension(self) -> int:
        return max((len(f) for f in self.facets), default=0) - 1

    def is_face(self, sigma: Iterable[int]) -> bool:
        s = set(sigma)
        return not s or any(s <= set(f) for f in self.facets)

    def faces(self, k: int) -> List[Face]:
        """Faces of dimension ``k`` (``k = -1`` gives the empty face)."""
        if k == -1:
            return [()]
        out = set()
        for f in self.facets:
            if len(f) >= k + 1:
                out.update(itertools.combinations(f, k + 1))
        return sorted(out)

    def f_vector(self) -> List[int]:
        return [len(self.faces(k)) for k in range(-1, self.dimension + 1)]

    def minimal_nonfaces(self) -> List[Face]:
        out = []
        top = self.dimension + 2
        for size in range(1, min(top, self.m) + 1):
            for sigma in itertools.combinations(range(1, self.m + 1), size):
                if self.is_face(sigma):
                    continue
                if all(self.is_face(sigma[:i] + sigma[i + 1:]) for i in range(size)):
                    out.append(sigma)
        return out


def full_subcomplex(s: SimplicialComplex, omega: Iterable[int]) -> SimplicialComplex:
    """The induced complex on ``omega``, keeping the vertex labels of ``s``."""
    om = set(int(v) for v in omega)
    for v in om:
        if not 1 <= v <= s.m:
            raise ValueError(f"vertex {v} out of range 1..{s.m}")
    return SimplicialComplex(s.m, [tuple(v for v in f if v in om) for f in s.facets])


def _coboundary(s: SimplicialComplex, field: FieldSpec, k: int) -> ExactMatrix:
    """``C^k -> C^{k+1}`` on oriented faces in increasing vertex order."""
    src = s.faces(k)
    tgt = s.faces(k + 1)
    idx = {f: i for i, f in enumerate(src)}
    entries = {}
    for row, g in enumerate(tgt):
        for r in range(len(g)):
            f = g[:r] + g[r + 1:]
            entries[(row, idx[f])] = field.sign(-1 if r % 2 else 1)
    return ExactMatrix(field, len(tgt), len(src), entries)


def reduced_cohomology(s: SimplicialComplex, field: FieldSpec, up_to: Optional[int] = None) -> Dict[int, int]:
    """Nonzero dimensions of reduced cohomology, degrees ``-1..up_to``."""
    top = s.dimension if up_to is None else min(up_to, s.dimension)
    ranks = {k: rank(_coboundary(s, field, k)) for k in range(-1, top + 1)}
    out = {}
    for k in range(-1, top + 1):
        h = len(s.faces(k)) - ranks[k] - ranks.get(k - 1, 0)
        if h:
            out[k] = h
    return out


def euler_defect(s: SimplicialComplex, field: FieldSpec) -> int:
    """``sum (-1)^k dim H~^k - sum (-1)^k f_k`` over ``k >= -1``; always zero."""
    h = reduced_cohomology(s, field)
    lhs = sum((-1) ** (k % 2) * d for k, d in h.items())
    rhs = sum((-1) ** ((k - 1) % 2) * f for k, f in enumerate(s.f_vector()))
    return lhs - rhs


def stanley_reisner(s: SimplicialComplex, field: FieldSpec) -> GradedAlgebra:
    """``k[t_1..t_m] / (minimal non-faces)`` with ``deg t_i = 2``."""
    rels = []
    for sigma in s.minimal_nonfaces():
        e = [0] * s.m
        for v in sigma:
            e[v - 1] = 1
        rels.append(tuple(e))
    gens = tuple(Generator(f"t{i}", 2) for i in range(1, s.m + 1))
    return GradedAlgebra(field, gens, tuple(rels))


def stanley_reisner_module(s: SimplicialComplex, field: FieldSpec) -> Tuple[GradedAlgebra, GradedModule]:
    """``K[S]`` as a cyclic module over the polynomial ring on its vertices."""
    ring = stanley_reisner(s, field)
    base = GradedAlgebra.polynomial(field, [2] * s.m, [f"t{i}" for i in range(1, s.m + 1)])
    return base, GradedModule.cyclic(base, ring.relations)


def _omega_contribution(s: SimplicialComplex, field: FieldSpec, omega: Face) -> List[Tuple[Tuple[int, int], int]]:
    h = reduced_cohomology(full_subcomplex(s, omega), field)
    n = len(omega)
    return [((n - 1 - k, 2 * n), d) for k, d in sorted(h.items())]


def hochster_tor(s: SimplicialComplex, field: FieldSpec) -> TorTable:
    """``Tor^{k[t]}(K[S], k)`` by summing reduced cohomology of all full subcomplexes.

    Exact, but enumerates all ``2^m`` subsets.  With ``LEVELLAB_THREADS > 1``
    subsets are farmed out to a thread pool; the table is assembled in
    subset order either way.
    """
    subsets = [w for k in range(s.m + 1) for w in itertools.combinations(range(1, s.m + 1), k)]
    threads = _threads()
    if threads > 1 and len(subsets) > 64:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda w: _omega_contribution(s, field, w), subsets))
    else:
        parts = [_omega_contribution(s, field, w) for w in subsets]
    dims: Dict[Tuple[int, int], int] = {}
    for part in parts:
        for key, d in part:
            dims[key] = dims.get(key, 0) + d
    return TorTable(dims, s.m, None, (True,) * (s.m + 1))


def dj_level(s: SimplicialComplex, field: FieldSpec) -> int:
    """One more than the largest homological index with nonzero Tor."""
    tab = hochster_tor(s, field)
    return max(i for (i, _), d in tab.dims.items() if d) + 1


def moment_angle_cohomology(s: SimplicialComplex, field: FieldSpec) -> Dict[int, int]:
    """Tor reindexed by total degree ``2|omega| - i``."""
    out: Dict[int, int] = {}
    for (i, j), d in hochster_tor(s, field).dims.items():
        out[j - i] = out.get(j - i, 0) + d
    return dict(sorted(out.items()))


RP2_6 = SimplicialComplex(6, [(1, 2, 4), (1, 2, 6), (1, 3, 5), (1, 3, 6), (1, 4, 5),
                              (2, 3, 4), (2, 3, 5), (2, 5, 6), (3, 4, 6), (4, 5, 6)])
