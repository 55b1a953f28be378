"""Exact fields and exact linear algebra over them."""

from levellab.fieldlin._kernels import BACKEND
from levellab.fieldlin.field import FieldSpec, Scalar, is_prime
from levellab.fieldlin.matrix import (
    ExactMatrix,
    Subspace,
    independent_subset,
    kernel_basis,
    rank,
    rref,
    solve,
)

__all__ = [
    "BACKEND",
    "ExactMatrix",
    "FieldSpec",
    "Scalar",
    "Subspace",
    "independent_subset",
    "is_prime",
    "kernel_basis",
    "rank",
    "rref",
    "solve",
]
