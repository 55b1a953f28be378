"""Minimal graded free resolutions, computed degree by degree.

Everything is exact but bounded: a resolution is known through internal
degree ``d_max`` and homological index ``n_max``, and every derived answer
carries those bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

from levellab.fieldlin import ExactMatrix, Scalar, rank
from levellab.grcalg import (FreeModule, GradedAlgebra, GradedModule, kernel_generators,
                             minimal_generators)

BOUNDED = "bounded verification: computed through internal degree {d_max}, homological index {n_max}"


@dataclass(frozen=True)
class Exact:
    value: int
    caveats: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"kind": "Exact", "value": self.value, "caveats": list(self.caveats)}

    def __str__(self) -> str:
        return f"Exact({self.value})"


@dataclass(frozen=True)
class AtLeast:
    value: int
    caveats: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"kind": "AtLeast", "value": self.value, "caveats": list(self.caveats)}

    def __str__(self) -> str:
        return f"AtLeast({self.value})"


def default_d_max(m: GradedModule) -> int:
    degs = [abs(g.degree) for g in m.generators] + [abs(m.relation_degree(r)) for r in m.relations]
    degs += list(m.algebra.degrees)
    return 2 * max(degs, default=0) + 20


def default_n_max(m: GradedModule) -> int:
    return max(m.algebra.ngens, 1) + 2


@dataclass
class TorTable:
    """Bigraded dimensions ``dims[(i, j)]``: homological index ``i``, internal degree ``j``.

    ``complete[i]`` is true when row ``i`` is known in every internal degree,
    not just through ``d_max``.
    """

    dims: Dict[Tuple[int, int], int]
    n_max: int
    d_max: Optional[int]
    complete: Tuple[bool, ...] = ()

    def __post_init__(self):
        self.dims = {k: v for k, v in sorted(self.dims.items()) if v}

    def get(self, i: int, j: int) -> int:
        return self.dims.get((i, j), 0)

    def total(self, i: int) -> int:
        return sum(v for (a, _), v in self.dims.items() if a == i)

    def totals(self) -> List[int]:
        return [self.total(i) for i in range(self.n_max + 1)]

    def max_index(self) -> int:
        return max((i for i, _ in self.dims), default=-1)

    def restricted(self, n_max: int, d_max: int) -> Dict[Tuple[int, int], int]:
        return {(i, j): v for (i, j), v in self.dims.items() if i <= n_max and j <= d_max}

    def to_json(self) -> dict:
        return {
            "entries": [{"i": i, "j": j, "dim": v} for (i, j), v in sorted(self.dims.items())],
            "n_max": self.n_max,
            "d_max": self.d_max,
            "complete": list(self.complete),
        }

    def format_text(self) -> str:
        if not self.dims:
            return "(all zero)"
        js = sorted({j for _, j in self.dims})
        rows = sorted({i for i, _ in self.dims})
        width = max(len(str(j)) for j in js) + 1
        head = "i\\j " + "".join(str(j).rjust(width) for j in js)
        lines = [head]
        for i in rows:
            lines.append(f"{i:<4}" + "".join(str(self.get(i, j) or ".").rjust(width) for j in js))
        return "\n".join(lines)


@dataclass
class ResolutionData:
    """A minimal free resolution ``... -> F_1 -> F_0 -> M``.

    ``gen_degrees[i]`` lists the generator degrees of ``F_i``;
    ``images[i][k]`` is the image of generator ``k`` of ``F_i`` as a vector
    in ``F_{i-1}`` (for ``i = 0``: a vector in ``M``'s quotient coordinates).
    """

    module: GradedModule
    n_max: int
    d_max: int
    gen_degrees: List[List[int]]
    images: List[List[List[Scalar]]]
    terminated: bool
    _free: Dict[int, FreeModule] = dc_field(default_factory=dict, repr=False)

    @property
    def algebra(self) -> GradedAlgebra:
        return self.module.algebra

    @property
    def length(self) -> int:
        """Number of computed steps."""
        return len(self.gen_degrees)

    def free(self, i: int) -> FreeModule:
        f = self._free.get(i)
        if f is None:
            f = FreeModule(self.algebra, self.gen_degrees[i])
            self._free[i] = f
        return f

    def differential(self, i: int, d: int) -> ExactMatrix:
        """``F_i -> F_{i-1}`` in internal degree ``d`` (``i >= 1``)."""
        return self.free(i).map_matrix(self.images[i], self.free(i - 1), d)

    def augmentation(self, d: int) -> ExactMatrix:
        F0 = self.free(0)
        m = self.module
        cols = []
        for k, mono in F0.basis(d):
            cols.append(m.monomial_action(mono, self.gen_degrees[0][k], self.images[0][k]))
        return ExactMatrix.from_columns(m.field, m.dim(d), cols)

    @property
    def steps(self) -> List[Tuple[List[int], Dict[int, ExactMatrix]]]:
        lo = self.module.min_degree or 0
        out = []
        for i in range(self.length):
            blocks = {}
            if i >= 1:
                for d in range(lo, self.d_max + 1):
                    mat = self.differential(i, d)
                    if mat.rows and mat.cols:
                        blocks[d] = mat
            out.append((list(self.gen_degrees[i]), blocks))
        return out

    def tor_table(self) -> TorTable:
        dims: Dict[Tuple[int, int], int] = {}
        for i, degs in enumerate(self.gen_degrees):
            for j in degs:
                dims[(i, j)] = dims.get((i, j), 0) + 1
        n = self.length - 1
        # nothing is known above d_max, so no row is certified complete
        return TorTable(dims, n, self.d_max, (False,) * (n + 1))

    def dd_defect(self) -> Optional[Tuple[int, int]]:
        """First ``(i, d)`` where two consecutive maps fail to compose to zero."""
        lo = self.module.min_degree or 0
        for d in range(lo, self.d_max + 1):
            if self.length >= 2:
                if not (self.augmentation(d) @ self.differential(1, d)).is_zero():
                    return (1, d)
            for i in range(2, self.length):
                if not (self.differential(i - 1, d) @ self.differential(i, d)).is_zero():
                    return (i, d)
        return None

    def exactness_defect(self) -> Optional[Tuple[int, int]]:
        """First ``(i, d)`` where homology of the augmented complex is nonzero.

        The last computed step is skipped since its kernel was never resolved.
        """
        lo = self.module.min_degree or 0
        for d in range(lo, self.d_max + 1):
            if rank(self.augmentation(d)) != self.module.dim(d):
                return (-1, d)
            prev = self.augmentation(d)
            for i in range(1, self.length):
                cur = self.differential(i, d)
                if self.free(i - 1).dim(d) - rank(prev) != rank(cur):
                    return (i - 1, d)
                prev = cur
        return None

    def unit_entries(self) -> List[Tuple[int, int, int]]:
        """Differential entries with a nonzero constant coefficient (none when minimal)."""
        bad = []
        unit = self.algebra.unit()
        for i in range(1, self.length):
            tgt = self.free(i - 1)
            for k, (deg, img) in enumerate(zip(self.gen_degrees[i], self.images[i])):
                for (l, mono), c in zip(tgt.basis(deg), img):
                    if c != 0 and mono == unit:
                        bad.append((i, k, l))
        return bad

    def to_json(self) -> dict:
        steps = []
        for i, (degs, blocks) in enumerate(self.steps):
            steps.append({
                "index": i,
                "generator_degrees": degs,
                "blocks": [
                    {"degree": d, "rows": m.rows, "cols": m.cols,
                     "entries": [[r, c, str(v)] for (r, c), v in sorted(m.entries.items())]}
                    for d, m in sorted(blocks.items())
                ],
            })
        return {"n_max": self.n_max, "d_max": self.d_max, "terminated": self.terminated, "steps": steps}


def _check_bounds(n_max: int, d_max: int):
    if n_max < 0 or d_max is None:
        raise ValueError("bounds must satisfy n_max >= 0 and d_max set")


def minimal_free_resolution(m: GradedModule, n_max: Optional[int] = None,
                            d_max: Optional[int] = None) -> ResolutionData:
    """Minimal resolution of ``m`` through homological index ``n_max`` and internal degree ``d_max``."""
    n_max = default_n_max(m) if n_max is None else n_max
    d_max = default_d_max(m) if d_max is None else d_max
    _check_bounds(n_max, d_max)
    A = m.algebra
    F = A.field
    lo = m.min_degree
    if lo is None or lo > d_max:
        return ResolutionData(m, n_max, d_max, [[]], [[]], True)
    gens0 = minimal_generators(A, lo, d_max, m.dim, m.act_matrix)
    gen_degrees = [[d for d, _ in gens0]]
    images: List[List[List[Scalar]]] = [[v for _, v in gens0]]
    res = ResolutionData(m, n_max, d_max, gen_degrees, images, False)
    if not gens0:
        res.terminated = True
        return res
    for i in range(1, n_max + 1):
        src = res.free(i - 1)
        if i == 1:
            matrix_fn = res.augmentation
        else:
            def matrix_fn(d, i=i):
                return res.differential(i - 1, d)
        new = kernel_generators(src, lo, d_max, matrix_fn)
        gen_degrees.append([d for d, _ in new])
        images.append([v for _, v in new])
        if not new:
            res.terminated = True
            break
    return res


def tor_table(m: GradedModule, n_max: Optional[int] = None, d_max: Optional[int] = None) -> TorTable:
    """``Tor^A_{i,j}(m, k)`` as generator counts of the minimal resolution."""
    res = minimal_free_resolution(m, n_max, d_max)
    t = res.tor_table()
    return TorTable(t.dims, res.n_max, res.d_max, (False,) * (res.n_max + 1))


def projective_dimension(m: GradedModule, n_max: Optional[int] = None,
                         d_max: Optional[int] = None) -> Exact | AtLeast:
    """``Exact(k)`` when the resolution stops at ``F_k`` within bounds, else ``AtLeast(n_max + 1)``.

    One extra step is computed so that ``AtLeast(n_max + 1)`` is witnessed by
    a nonzero ``F_{n_max+1}``.  The zero module gets ``Exact(-1)``.
    """
    n_max = default_n_max(m) if n_max is None else n_max
    res = minimal_free_resolution(m, n_max + 1, d_max)
    note = BOUNDED.format(d_max=res.d_max, n_max=n_max + 1)
    if res.terminated:
        return Exact(res.length - 2, (note,))
    return AtLeast(n_max + 1, (note,))


def _hom_block(res: ResolutionData, i: int, e: int):
    """Basis data of ``Hom_A(F_i, A)^e``: per generator, the target component ``A^{g+e}``."""
    A = res.algebra
    slots = []
    for k, g in enumerate(res.gen_degrees[i]):
        for mono in A.basis(g + e):
            slots.append((k, mono))
    return slots


def _dual_matrix(res: ResolutionData, i: int, e: int) -> ExactMatrix:
    """``Hom(F_i, A)^e -> Hom(F_{i+1}, A)^e``, ``f |-> f o d``."""
    A = res.algebra
    F = A.field
    src = _hom_block(res, i, e)
    tgt = _hom_block(res, i + 1, e)
    tidx = {x: n for n, x in enumerate(tgt)}
    Fi = res.free(i)
    entries: Dict[Tuple[int, int], Scalar] = {}
    for col, (k, mono_f) in enumerate(src):
        # f sends generator k to mono_f, other generators to zero
        for h, (hdeg, img) in enumerate(zip(res.gen_degrees[i + 1], res.images[i + 1])):
            for (l, mono_d), c in zip(Fi.basis(hdeg), img):
                if c == 0 or l != k:
                    continue
                r = A.mul(mono_d, mono_f)
                if r is None:
                    continue
                s, prod = r
                if (A.monomial_degree(mono_d) * e) % 2:
                    s = -s
                key = (tidx[(h, prod)], col)
                val = F.add(entries.get(key, F.zero), c if s > 0 else F.neg(c))
                if val == 0:
                    entries.pop(key, None)
                else:
                    entries[key] = val
    return ExactMatrix(F, len(tgt), len(src), entries)


def ext_dims(res: ResolutionData, k: int) -> Dict[int, int]:
    """Nonzero ``dim Ext^k(M, A)^e`` over the internal-degree window the resolution supports."""
    degs = res.gen_degrees[k]
    if not degs:
        return {}
    out = {}
    for e in range(-max(degs), res.d_max - min(degs) + 1):
        n = len(_hom_block(res, k, e))
        if n == 0:
            continue
        z = n - rank(_dual_matrix(res, k, e)) if k + 1 < res.length else n
        b = rank(_dual_matrix(res, k - 1, e)) if k >= 1 else 0
        if z - b:
            out[e] = z - b
    return out


def grade(m: GradedModule, n_max: Optional[int] = None, d_max: Optional[int] = None) -> Exact | AtLeast:
    """Least ``k`` with ``Ext^k_A(m, A) != 0``, found by dualizing the minimal resolution."""
    n_max = default_n_max(m) if n_max is None else n_max
    res = minimal_free_resolution(m, n_max + 1, d_max)
    note = BOUNDED.format(d_max=res.d_max, n_max=n_max)
    top = min(n_max, res.length - 1)
    for k in range(top + 1):
        if ext_dims(res, k):
            return Exact(k, (note,))
    return AtLeast(top + 1, (note,))
