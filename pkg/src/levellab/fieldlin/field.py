"""Exact coefficient fields: prime fields F_p and the rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

Scalar = Union[int, Fraction]


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A prime field ``F_p`` (``p`` set) or the rationals (``p is None``).

    Elements of ``F_p`` are plain ints in ``[0, p)``; rationals are
    :class:`fractions.Fraction`.  Nothing here ever touches floats.
    """

    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None:
            if not isinstance(self.p, int) or not is_prime(self.p):
                raise ValueError(f"field characteristic must be prime, got {self.p!r}")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(p)

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Parse ``"fp:P"``, ``"q"`` (also ``"Q"``, ``"rationals"``)."""
        t = text.strip().lower()
        if t in ("q", "qq", "rationals"):
            return cls(None)
        if t.startswith("fp:"):
            return cls(int(t[3:]))
        if t.startswith("gf(") and t.endswith(")"):
            return cls(int(t[3:-1]))
        raise ValueError(f"unrecognized field {text!r}; use fp:P or q")

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    @property
    def is_prime_field(self) -> bool:
        return self.p is not None

    def __str__(self) -> str:
        return "Q" if self.p is None else f"F_{self.p}"

    def to_json(self) -> dict:
        if self.p is None:
            return {"kind": "rationals"}
        return {"kind": "prime", "p": self.p}

    @classmethod
    def from_json(cls, data) -> "FieldSpec":
        if isinstance(data, str):
            return cls.parse(data)
        kind = data.get("kind")
        if kind == "rationals":
            return cls(None)
        if kind == "prime":
            return cls(int(data["p"]))
        raise ValueError(f"bad field spec {data!r}")

    # element arithmetic

    def __call__(self, x) -> Scalar:
        """Coerce an int, Fraction or ``"a/b"`` string into the field."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in {self}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    @property
    def zero(self) -> Scalar:
        return 0 if self.p is not None else Fraction(0)

    @property
    def one(self) -> Scalar:
        return 1 if self.p is not None else Fraction(1)

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        return (a + b) % self.p if self.p is not None else a + b

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        return (a - b) % self.p if self.p is not None else a - b

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        return (a * b) % self.p if self.p is not None else a * b

    def neg(self, a: Scalar) -> Scalar:
        return (-a) % self.p if self.p is not None else -a

    def inv(self, a: Scalar) -> Scalar:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.p is not None:
            return pow(int(a), -1, self.p)
        return 1 / Fraction(a)

    def div(self, a: Scalar, b: Scalar) -> Scalar:
        return self.mul(a, self.inv(b))

    def sign(self, s: int) -> Scalar:
        """Image of +1 / -1."""
        return self.one if s > 0 else self.neg(self.one)

    def format(self, a: Scalar) -> str:
        return str(a)
