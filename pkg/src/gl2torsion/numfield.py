"""Number fields Q[x]/(f), prime decomposition and lambda-adic valuations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence

from . import arith
from .arith import (
    ArithmeticArgumentError,
    InfiniteValuation,
    ModPoly,
    int_valuation,
    resultant,
    trim,
)

INITIAL_PRECISION = 8
MAX_PRECISION = 512


class InvalidFieldError(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    """A check that cannot fail on correct input failed (precision or grouping bug)."""


@dataclass(frozen=True)
class NumberField:
    defining_poly: tuple

    def __post_init__(self):
        f = self.defining_poly
        if len(f) < 2 or f[-1] != 1:
            raise InvalidFieldError(f"defining polynomial {list(f)} is not monic of degree >= 1")
        if len(f) > 2:
            # squarefree iff Res(f, f') != 0
            if resultant(f, arith.poly_derivative(f)) == 0:
                raise InvalidFieldError(f"defining polynomial {list(f)} is not squarefree")

    @property
    def degree(self) -> int:
        return len(self.defining_poly) - 1

    def element(self, num: Sequence[int], den: int = 1) -> "FieldElement":
        return FieldElement.make(self, num, den)

    def from_rational(self, c) -> "FieldElement":
        c = Fraction(c)
        return FieldElement.make(self, (c.numerator,), c.denominator)

    def gen(self) -> "FieldElement":
        return self.element((0, 1))


def make_field(f: Sequence[int]) -> NumberField:
    return NumberField(trim(f))


@dataclass(frozen=True)
class FieldElement:
    """(sum num[i] theta^i) / den, canonical: den > 0, gcd(content, den) = 1."""

    field: NumberField
    num: tuple
    den: int = 1

    @classmethod
    def make(cls, K: NumberField, num, den=1) -> "FieldElement":
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        num = trim(num)
        if len(num) > K.degree:
            _, num = arith.poly_divmod_monic(num, K.defining_poly)
        if den < 0:
            num, den = tuple(-c for c in num), -den
        g = gcd(arith.poly_content(num), den) if num else den
        return cls(K, tuple(c // g for c in num), den // g)

    def _check(self, other: "FieldElement"):
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise ArithmeticArgumentError("elements belong to different fields")

    def __add__(self, other):
        self._check(other)
        den = self.den * other.den
        return FieldElement.make(
            self.field,
            arith.poly_add(arith.poly_scale(self.num, other.den), arith.poly_scale(other.num, self.den)),
            den,
        )

    def __sub__(self, other):
        self._check(other)
        return self + FieldElement(self.field, tuple(-c for c in other.num), other.den)

    def __neg__(self):
        return FieldElement(self.field, tuple(-c for c in self.num), self.den)

    def __mul__(self, other):
        self._check(other)
        return FieldElement.make(self.field, arith.poly_mul(self.num, other.num), self.den * other.den)

    def is_zero(self) -> bool:
        return not self.num

    def is_rational(self) -> bool:
        return len(self.num) <= 1

    def __repr__(self):
        return f"FieldElement({list(self.num)}/{self.den})"


def element_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    ops = {"add": FieldElement.__add__, "sub": FieldElement.__sub__, "mul": FieldElement.__mul__}
    if op not in ops:
        raise ArithmeticArgumentError(f"unknown operation {op!r}")
    return ops[op](a, b)


def norm(K: NumberField, a: FieldElement) -> Fraction:
    """Norm_{K/Q}(a) = prod a(theta) over the roots theta of the defining polynomial."""
    if a.field != K:
        raise ArithmeticArgumentError("element belongs to a different field")
    if a.is_zero():
        return Fraction(0)
    return Fraction(resultant(K.defining_poly, a.num), a.den**K.degree)


# ---------------------------------------------------------------------------
# primes


@dataclass(frozen=True)
class LocalPrime:
    ell: int
    residue_factor: ModPoly
    e: int
    f: int
    lifted_block: ModPoly
    precision: int
    # sibling residue blocks g_i^e_i and our position among them, for re-lifting
    blocks: tuple = field(default=(), repr=False, compare=False)
    index: int = field(default=0, repr=False, compare=False)

    def relifted(self, K: NumberField, precision: int) -> "LocalPrime":
        lifted = _lift(K.defining_poly, self.blocks, precision)[self.index]
        return LocalPrime(self.ell, self.residue_factor, self.e, self.f, lifted, precision, self.blocks, self.index)


@lru_cache(maxsize=4096)
def _lift(f: tuple, blocks: tuple, precision: int) -> tuple:
    return tuple(arith.hensel_lift_blocks(f, blocks, precision))


@dataclass(frozen=True)
class PrimeDecomposition:
    ell: int
    primes: tuple
    maximal_at_ell: bool


def dedekind_criterion(f: Sequence[int], ell: int, factors) -> bool:
    """True iff ell does not divide the index [O_K : Z[theta]]."""
    g = (1,)
    h = (1,)
    for fac, mult in factors:
        g = arith.poly_mul(g, fac.coeffs)
        for _ in range(mult - 1):
            h = arith.poly_mul(h, fac.coeffs)
    diff = arith.poly_sub(arith.poly_mul(g, h), f)
    if any(c % ell for c in diff):
        raise InternalConsistencyError("residue factorization does not reproduce f")
    F = arith.trim([c // ell for c in diff])
    F_bar = arith._red(F, ell)
    for fac, mult in factors:
        if mult >= 2 and not arith._rem(F_bar, fac.coeffs, ell):
            return False
    return True


def decompose_prime(K: NumberField, ell: int, precision: int = INITIAL_PRECISION, seed: int = 0) -> PrimeDecomposition:
    f = K.defining_poly
    factors = arith.factor_mod_ell(f, ell, seed=seed)
    if not dedekind_criterion(f, ell, factors):
        return PrimeDecomposition(ell, (), False)
    blocks = tuple(fac**mult for fac, mult in factors)
    lifted = _lift(f, blocks, precision)
    primes = tuple(
        LocalPrime(ell, fac, mult, fac.degree, lift, precision, blocks, i)
        for i, ((fac, mult), lift) in enumerate(zip(factors, lifted))
    )
    return PrimeDecomposition(ell, primes, True)


def _local_norm_valuation(lam: LocalPrime, a: FieldElement) -> int | None:
    """v_ell of Res(lifted block, numerator), or None when precision is insufficient."""
    res = resultant(lam.lifted_block.coeffs, a.num)
    if res == 0:
        return None
    v = int_valuation(res, lam.ell)
    if v >= lam.precision - 1:
        return None
    return v


def lambda_valuation(K: NumberField, lam: LocalPrime, a: FieldElement) -> int:
    """Integer-normalized valuation of a at lam, so that v(ell) = e(lam).

    Read off from the ell-adic valuation of the local norm
    Res(lifted block, numerator), re-lifting at doubled precision until
    that valuation sits safely below the precision.
    """
    if a.is_zero():
        raise InfiniteValuation("valuation of 0")
    ell = lam.ell
    block_deg = lam.e * lam.f
    while True:
        v = _local_norm_valuation(lam, a)
        if v is not None:
            break
        if lam.precision * 2 > MAX_PRECISION:
            raise InternalConsistencyError(f"valuation at {ell} did not stabilize below precision {MAX_PRECISION}")
        lam = lam.relifted(K, lam.precision * 2)
    v -= block_deg * int_valuation(a.den, ell)
    q, r = divmod(v, lam.f)
    if r:
        raise InternalConsistencyError(f"local norm valuation {v} not divisible by residue degree {lam.f}")
    return q


def lambda_valuations(K: NumberField, dec: PrimeDecomposition, a: FieldElement) -> list[int]:
    if not dec.maximal_at_ell:
        raise ArithmeticArgumentError(f"decomposition of {dec.ell} is unresolved")
    return [lambda_valuation(K, lam, a) for lam in dec.primes]
