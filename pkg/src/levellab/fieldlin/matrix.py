"""Sparse exact matrices and the elimination routines built on them."""

from __future__ import annotations

from types import MappingProxyType
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from levellab.fieldlin import _kernels
from levellab.fieldlin.field import FieldSpec, Scalar

# dense F_p elimination is skipped above this many cells
_DENSE_CELL_LIMIT = 40_000_000


class ExactMatrix:
    """A ``rows x cols`` matrix over an exact field, stored as nonzero triplets.

    Treated as immutable: ``entries`` is a read-only view and no method
    mutates in place.
    """

    __slots__ = ("field", "rows", "cols", "_entries", "_array")

    def __init__(self, field: FieldSpec, rows: int, cols: int, entries=None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        clean: Dict[Tuple[int, int], Scalar] = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
                v = field(v)
                if v != 0:
                    clean[(i, j)] = v
        self.field = field
        self.rows = rows
        self.cols = cols
        self._entries = clean
        self._array = None

    # construction

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "ExactMatrix":
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "ExactMatrix":
        return cls(field, n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def from_dense(cls, field: FieldSpec, data: Sequence[Sequence], cols: Optional[int] = None) -> "ExactMatrix":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        entries = {}
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ValueError("ragged matrix")
            for j, v in enumerate(row):
                if v != 0:
                    entries[(i, j)] = v
        return cls(field, rows, cols, entries)

    @classmethod
    def from_columns(cls, field: FieldSpec, rows: int, columns: Sequence[Sequence]) -> "ExactMatrix":
        entries = {}
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise ValueError("column length mismatch")
            for i, v in enumerate(col):
                if v != 0:
                    entries[(i, j)] = v
        return cls(field, rows, len(columns), entries)

    @classmethod
    def from_array(cls, field: FieldSpec, arr: np.ndarray) -> "ExactMatrix":
        rows, cols = arr.shape
        nz = np.nonzero(arr)
        entries = {(int(i), int(j)): int(arr[i, j]) for i, j in zip(*nz)}
        return cls(field, rows, cols, entries)

    # access

    @property
    def entries(self):
        return MappingProxyType(self._entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def __getitem__(self, key: Tuple[int, int]) -> Scalar:
        return self._entries.get(key, self.field.zero)

    def to_dense(self) -> List[List[Scalar]]:
        out = [[self.field.zero] * self.cols for _ in range(self.rows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def to_array(self) -> np.ndarray:
        if self.field.p is None:
            raise TypeError("to_array is only defined over prime fields")
        if self._array is None:
            arr = np.zeros((self.rows, self.cols), dtype=np.int64)
            for (i, j), v in self._entries.items():
                arr[i, j] = v
            self._array = arr
        return self._array

    def row_dicts(self) -> List[Dict[int, Scalar]]:
        out: List[Dict[int, Scalar]] = [dict() for _ in range(self.rows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    # algebra

    def transpose(self) -> "ExactMatrix":
        m = ExactMatrix(self.field, self.cols, self.rows)
        m._entries = {(j, i): v for (i, j), v in self._entries.items()}
        return m

    def apply(self, vec: Sequence) -> List[Scalar]:
        if len(vec) != self.cols:
            raise ValueError(f"vector of length {len(vec)} for {self.rows}x{self.cols} matrix")
        F = self.field
        out = [F.zero] * self.rows
        for (i, j), v in self._entries.items():
            x = vec[j]
            if x != 0:
                out[i] = F.add(out[i], F.mul(v, x))
        return out

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        if self.field != other.field:
            raise ValueError("matrices over different fields")
        F = self.field
        by_row: Dict[int, List[Tuple[int, Scalar]]] = {}
        for (k, j), v in other._entries.items():
            by_row.setdefault(k, []).append((j, v))
        acc: Dict[Tuple[int, int], Scalar] = {}
        for (i, k), a in self._entries.items():
            for j, b in by_row.get(k, ()):
                key = (i, j)
                acc[key] = F.add(acc.get(key, F.zero), F.mul(a, b))
        m = ExactMatrix(self.field, self.rows, other.cols)
        m._entries = {k: v for k, v in acc.items() if v != 0}
        return m

    def is_zero(self) -> bool:
        return not self._entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and self._entries == other._entries)

    def __repr__(self) -> str:
        return f"ExactMatrix({self.field}, {self.rows}x{self.cols}, nnz={self.nnz})"


def _rref_sparse(rows: List[Dict[int, Scalar]], F: FieldSpec):
    """Gauss-Jordan on dict rows.  Pivot row: fewest nonzeros, then lowest index."""
    active = [(i, r) for i, r in enumerate(rows) if r]
    echelon: List[Tuple[int, Dict[int, Scalar]]] = []
    while active:
        c = min(min(r) for _, r in active)
        cands = [(len(r), i, r) for i, r in active if c in r]
        _, pi, prow = min(cands, key=lambda t: (t[0], t[1]))
        inv = F.inv(prow[c])
        prow = {j: F.mul(v, inv) for j, v in prow.items()}
        nxt = []
        for i, r in active:
            if i == pi:
                continue
            f = r.get(c)
            if f is not None:
                r = dict(r)
                for j, v in prow.items():
                    nv = F.sub(r.get(j, F.zero), F.mul(f, v))
                    if nv == 0:
                        r.pop(j, None)
                    else:
                        r[j] = nv
            if r:
                nxt.append((i, r))
        active = nxt
        echelon.append((c, prow))
    # back substitution
    for k in range(len(echelon) - 1, -1, -1):
        c, prow = echelon[k]
        for t in range(k):
            c2, r = echelon[t]
            f = r.get(c)
            if f is not None:
                r = dict(r)
                for j, v in prow.items():
                    nv = F.sub(r.get(j, F.zero), F.mul(f, v))
                    if nv == 0:
                        r.pop(j, None)
                    else:
                        r[j] = nv
                echelon[t] = (c2, r)
    pivots = tuple(c for c, _ in echelon)
    return [r for _, r in echelon], pivots


def _use_dense(m: ExactMatrix) -> bool:
    p = m.field.p
    return (p is not None and p <= _kernels.MAX_DENSE_PRIME
            and m.rows * m.cols <= _DENSE_CELL_LIMIT)


def rref(m: ExactMatrix) -> Tuple[ExactMatrix, Tuple[int, ...]]:
    """Reduced row echelon form: the ``rank x cols`` nonzero block and its pivot columns."""
    if m.rows == 0 or m.cols == 0 or m.nnz == 0:
        return ExactMatrix(m.field, 0, m.cols), ()
    if _use_dense(m):
        arr, piv = _kernels.rref_mod_p(m.to_array(), m.field.p)
        r = len(piv)
        out = ExactMatrix.from_array(m.field, arr[:r])
        return out, tuple(int(c) for c in piv)
    rows, piv = _rref_sparse(m.row_dicts(), m.field)
    out = ExactMatrix(m.field, len(rows), m.cols)
    out._entries = {(i, j): v for i, r in enumerate(rows) for j, v in r.items()}
    return out, piv


def rank(m: ExactMatrix) -> int:
    return len(rref(m)[1])


def kernel_basis(m: ExactMatrix) -> List[List[Scalar]]:
    """Basis of ``{x : m x = 0}``, one vector per non-pivot column, in column order."""
    F = m.field
    R, piv = rref(m)
    pivset = set(piv)
    free = [j for j in range(m.cols) if j not in pivset]
    if not free:
        return []
    rows = R.row_dicts()
    basis = []
    for f in free:
        v = [F.zero] * m.cols
        v[f] = F.one
        for i, pc in enumerate(piv):
            x = rows[i].get(f)
            if x is not None:
                v[pc] = F.neg(x)
        basis.append(v)
    return basis


def solve(m: ExactMatrix, b: Sequence) -> Optional[List[Scalar]]:
    """Some ``x`` with ``m x = b`` (free variables set to zero), or ``None``."""
    if len(b) != m.rows:
        raise ValueError(f"right-hand side has length {len(b)}, matrix has {m.rows} rows")
    F = m.field
    entries = dict(m._entries)
    for i, v in enumerate(b):
        v = F(v)
        if v != 0:
            entries[(i, m.cols)] = v
    aug = ExactMatrix(F, m.rows, m.cols + 1)
    aug._entries = entries
    R, piv = rref(aug)
    if piv and piv[-1] == m.cols:
        return None
    x = [F.zero] * m.cols
    for i, pc in enumerate(piv):
        x[pc] = R[(i, m.cols)]
    if m.apply(x) != [F(v) for v in b]:
        raise ArithmeticError("solve: back-substitution check failed")
    return x


class Subspace:
    """A subspace of ``F^n`` held in reduced echelon form.

    ``reduce`` gives the canonical representative of a coset; the
    non-pivot columns index a basis of the quotient ``F^n / self``.
    """

    def __init__(self, field: FieldSpec, n: int, vectors: Iterable[Sequence] = ()):
        vectors = list(vectors)
        self.field = field
        self.n = n
        entries = {}
        for i, v in enumerate(vectors):
            if len(v) != n:
                raise ValueError("vector length mismatch")
            for j, x in enumerate(v):
                if x != 0:
                    entries[(i, j)] = x
        m = ExactMatrix(field, len(vectors), n)
        m._entries = entries
        R, piv = rref(m)
        self.pivots = piv
        self._rows = R.row_dicts()
        pivset = set(piv)
        self.free = tuple(j for j in range(n) if j not in pivset)
        self._free_index = {j: k for k, j in enumerate(self.free)}

    @property
    def dim(self) -> int:
        return len(self.pivots)

    @property
    def codim(self) -> int:
        return self.n - len(self.pivots)

    def basis(self) -> List[List[Scalar]]:
        F = self.field
        out = []
        for r in self._rows:
            v = [F.zero] * self.n
            for j, x in r.items():
                v[j] = x
            out.append(v)
        return out

    def reduce(self, v: Sequence) -> List[Scalar]:
        F = self.field
        v = list(v)
        for pc, r in zip(self.pivots, self._rows):
            f = v[pc]
            if f != 0:
                for j, x in r.items():
                    v[j] = F.sub(v[j], F.mul(f, x))
        return v

    def contains(self, v: Sequence) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def quotient_coords(self, v: Sequence) -> List[Scalar]:
        r = self.reduce(v)
        return [r[j] for j in self.free]

    def quotient_matrix(self) -> ExactMatrix:
        """The ``codim x n`` matrix of ``F^n -> F^n / self`` in non-pivot coordinates."""
        F = self.field
        entries = {}
        for j in self.free:
            entries[(self._free_index[j], j)] = F.one
        for pc, r in zip(self.pivots, self._rows):
            for j, x in r.items():
                if j != pc:
                    entries[(self._free_index[j], pc)] = F.neg(x)
        m = ExactMatrix(F, len(self.free), self.n)
        m._entries = entries
        return m

    def lift(self, coords: Sequence) -> List[Scalar]:
        """Section of the quotient map: place coordinates on the non-pivot columns."""
        F = self.field
        v = [F.zero] * self.n
        for j, x in zip(self.free, coords):
            v[j] = x
        return v


def independent_subset(field: FieldSpec, n: int, vectors: Sequence[Sequence],
                       modulo: Optional[Subspace] = None) -> List[int]:
    """Indices of the greedy (leftmost) basis of ``span(vectors)`` modulo ``modulo``."""
    if not vectors:
        return []
    cols = [modulo.reduce(v) if modulo is not None else list(v) for v in vectors]
    m = ExactMatrix.from_columns(field, n, cols)
    return list(rref(m)[1])
