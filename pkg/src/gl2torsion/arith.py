"""Exact integer and polynomial arithmetic.

Integer polynomials are tuples of ints, lowest degree first, with no
trailing zeros (the zero polynomial is ``()``). Polynomials over Z/m are
wrapped in :class:`ModPoly` at module boundaries; the helpers prefixed with
``_`` work on raw coefficient tuples and a modulus.

Rationals are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby
from typing import Sequence

IntPoly = tuple


class ArithmeticArgumentError(ValueError):
    """Invalid argument to an arithmetic routine."""


class LiftingError(ArithmeticError):
    """Hensel lifting was asked to lift blocks that are not coprime mod ell."""


class InfiniteValuation(ArithmeticError):
    """Valuation of zero requested."""


# ---------------------------------------------------------------------------
# integers

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24, which covers every use here."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def prime_divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        raise ArithmeticArgumentError("prime divisors of 0")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def int_valuation(n: int, ell: int) -> int:
    """Largest k with ell**k dividing n."""
    if n == 0:
        raise InfiniteValuation(f"v_{ell}(0) is infinite")
    n = abs(n)
    k = 0
    while n % ell == 0:
        n //= ell
        k += 1
    return k


# ---------------------------------------------------------------------------
# integer polynomials


def trim(coeffs: Sequence[int]) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def degree(f: Sequence) -> int:
    return len(f) - 1


def poly_add(f, g) -> tuple:
    n = max(len(f), len(g))
    return trim([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)])


def poly_sub(f, g) -> tuple:
    n = max(len(f), len(g))
    return trim([(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)])


def poly_mul(f, g) -> tuple:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim(out)


def poly_scale(f, c) -> tuple:
    return trim([c * a for a in f])


def poly_derivative(f) -> tuple:
    return trim([i * f[i] for i in range(1, len(f))])


def poly_divmod_monic(f, g) -> tuple[tuple, tuple]:
    """Division of integer polynomials by a monic integer polynomial."""
    if not g or g[-1] != 1:
        raise ArithmeticArgumentError("divisor must be monic")
    r = list(f)
    dg = len(g) - 1
    if len(r) <= dg:
        return (), trim(r)
    q = [0] * (len(r) - dg)
    for i in range(len(r) - 1, dg - 1, -1):
        c = r[i]
        if c:
            q[i - dg] = c
            for j in range(dg + 1):
                r[i - dg + j] -= c * g[j]
    return trim(q), trim(r[:dg])


def poly_content(f) -> int:
    from math import gcd

    c = 0
    for a in f:
        c = gcd(c, a)
    return c


def _qpoly_rem(f: list, g: list) -> list:
    r = list(f)
    dg = len(g) - 1
    lead = g[-1]
    while len(r) - 1 >= dg and r:
        c = r[-1] / lead
        shift = len(r) - 1 - dg
        for j in range(dg + 1):
            r[shift + j] -= c * g[j]
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return r


def resultant(f, g) -> int:
    """Res(f, g) = lc(f)^deg(g) * prod g(theta) over roots theta of f.

    Euclidean remainder sequence over Q; exact.
    """
    f, g = trim(f), trim(g)
    if not f or not g:
        raise ArithmeticArgumentError("resultant of a zero polynomial")
    a = [Fraction(c) for c in f]
    b = [Fraction(c) for c in g]
    acc = Fraction(1)
    while True:
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            acc *= b[0] ** da
            break
        if da == 0:
            acc *= a[0] ** db
            break
        r = _qpoly_rem(a, b)
        if not r:
            return 0
        # Res(a, b) = (-1)^(da db) Res(b, a);  Res(b, a) = lc(b)^(da - dr) Res(b, r)
        if da * db % 2:
            acc = -acc
        acc *= b[-1] ** (da - (len(r) - 1))
        a, b = b, r
    assert acc.denominator == 1
    return int(acc)


# ---------------------------------------------------------------------------
# polynomials over Z/m


@dataclass(frozen=True)
class ModPoly:
    """Polynomial with coefficients reduced into [0, modulus), lowest degree first."""

    coeffs: tuple
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ArithmeticArgumentError(f"bad modulus {self.modulus}")
        if any(not 0 <= c < self.modulus for c in self.coeffs):
            raise ArithmeticArgumentError("coefficient out of range")
        if self.coeffs and self.coeffs[-1] == 0:
            raise ArithmeticArgumentError("trailing zero coefficient")

    @classmethod
    def reduce(cls, coeffs: Sequence[int], modulus: int) -> "ModPoly":
        return cls(_red(coeffs, modulus), modulus)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __mul__(self, other: "ModPoly") -> "ModPoly":
        if self.modulus != other.modulus:
            raise ArithmeticArgumentError("modulus mismatch")
        return ModPoly(_mul(self.coeffs, other.coeffs, self.modulus), self.modulus)

    def __pow__(self, e: int) -> "ModPoly":
        out = ModPoly((1,), self.modulus)
        for _ in range(e):
            out = out * self
        return out

    def lift(self) -> tuple:
        """Canonical integer representative."""
        return self.coeffs

    def __repr__(self):
        return f"ModPoly({list(self.coeffs)} mod {self.modulus})"


def _red(f, m) -> tuple:
    return trim([c % m for c in f])


def _add(f, g, m) -> tuple:
    return _red(poly_add(f, g), m)


def _sub(f, g, m) -> tuple:
    return _red(poly_sub(f, g), m)


def _mul(f, g, m) -> tuple:
    return _red(poly_mul(f, g), m)


def _divmod(f, g, m) -> tuple[tuple, tuple]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(g[-1], -1, m)
    r = list(f)
    dg = len(g) - 1
    if len(r) <= dg:
        return (), _red(r, m)
    q = [0] * (len(r) - dg)
    for i in range(len(r) - 1, dg - 1, -1):
        c = r[i] * inv % m
        if c:
            q[i - dg] = c
            for j in range(dg + 1):
                r[i - dg + j] = (r[i - dg + j] - c * g[j]) % m
    return _red(q, m), _red(r[:dg], m)


def _rem(f, g, m) -> tuple:
    return _divmod(f, g, m)[1]


def _monic(f, p) -> tuple:
    if not f:
        return f
    inv = pow(f[-1], -1, p)
    return _red([c * inv for c in f], p)


def _gcd(f, g, p) -> tuple:
    """Monic gcd over the prime field F_p."""
    while g:
        f, g = g, _rem(f, g, p)
    return _monic(f, p)


def _gcdex(f, g, p) -> tuple[tuple, tuple, tuple]:
    """(d, s, t) with s f + t g = d monic over F_p."""
    r0, r1 = f, g
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = _divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _sub(s0, _mul(q, s1, p), p)
        t0, t1 = t1, _sub(t0, _mul(q, t1, p), p)
    inv = pow(r0[-1], -1, p)
    return (
        _red([c * inv for c in r0], p),
        _red([c * inv for c in s0], p),
        _red([c * inv for c in t0], p),
    )


def _powmod(base, e, mod, m) -> tuple:
    result = (1,)
    base = _rem(base, mod, m)
    while e:
        if e & 1:
            result = _rem(_mul(result, base, m), mod, m)
        e >>= 1
        if e:
            base = _rem(_mul(base, base, m), mod, m)
    return result


def _derivative(f, p) -> tuple:
    return _red(poly_derivative(f), p)


# ---------------------------------------------------------------------------
# factorization over F_ell


def _squarefree(f, p) -> list[tuple[tuple, int]]:
    out = []
    i = 1
    c = _gcd(f, _derivative(f, p), p)
    w = _divmod(f, c, p)[0]
    while len(w) > 1:
        y = _gcd(w, c, p)
        fac = _divmod(w, y, p)[0]
        if len(fac) > 1:
            out.append((fac, i))
        w = y
        c = _divmod(c, y, p)[0]
        i += 1
    if len(c) > 1:
        root = tuple(c[k] for k in range(0, len(c), p))
        out.extend((g, j * p) for g, j in _squarefree(root, p))
    return out


def _distinct_degree(f, p) -> list[tuple[tuple, int]]:
    out = []
    h = (0, 1)
    d = 0
    while len(f) - 1 >= 2 * (d + 1):
        d += 1
        h = _powmod(h, p, f, p)
        g = _gcd(_sub(h, (0, 1), p), f, p)
        if len(g) > 1:
            out.append((g, d))
            f = _divmod(f, g, p)[0]
            h = _rem(h, f, p)
    if len(f) > 1:
        out.append((f, len(f) - 1))
    return out


def _equal_degree(f, d, p, rng: random.Random) -> list[tuple]:
    n = len(f) - 1
    if n == d:
        return [f]
    while True:
        a = _red([rng.randrange(p) for _ in range(n)], p)
        if len(a) < 2:
            continue
        if p == 2:
            t, acc = a, a
            for _ in range(d - 1):
                t = _rem(_mul(t, t, p), f, p)
                acc = _add(acc, t, p)
            b = acc
        else:
            b = _sub(_powmod(a, (p**d - 1) // 2, f, p), (1,), p)
        g = _gcd(b, f, p)
        if 1 < len(g) < len(f):
            break
    return _equal_degree(g, d, p, rng) + _equal_degree(_divmod(f, g, p)[0], d, p, rng)


def factor_mod_ell(f, ell: int, seed: int = 0) -> list[tuple[ModPoly, int]]:
    """Factor a monic integer polynomial over F_ell.

    Returns (irreducible monic factor, multiplicity) pairs sorted by degree,
    then by coefficient list.
    """
    f = trim(f)
    if not is_prime(ell):
        raise ArithmeticArgumentError(f"{ell} is not prime")
    if not f or f[-1] != 1:
        raise ArithmeticArgumentError("polynomial must be monic")
    fp = _red(f, ell)
    rng = random.Random(seed)
    out = []
    for part, mult in _squarefree(fp, ell):
        for block, d in _distinct_degree(part, ell):
            for g in _equal_degree(block, d, ell, rng):
                out.append((ModPoly(g, ell), mult))
    out.sort(key=lambda pair: (pair[0].degree, pair[0].coeffs))
    return out


# ---------------------------------------------------------------------------
# Hensel lifting


def _hensel_step(f, g, h, s, t, m):
    """One quadratic step: f = g h, s g + t h = 1 mod m  ->  same mod m^2 (h monic)."""
    m2 = m * m
    e = _sub(f, _mul(g, h, m2), m2)
    q, r = _divmod(_mul(s, e, m2), h, m2)
    g1 = _add(g, _add(_mul(t, e, m2), _mul(q, g, m2), m2), m2)
    h1 = _add(h, r, m2)
    b = _sub(_add(_mul(s, g1, m2), _mul(t, h1, m2), m2), (1,), m2)
    c, d = _divmod(_mul(s, b, m2), h1, m2)
    s1 = _sub(s, d, m2)
    t1 = _sub(t, _add(_mul(t, b, m2), _mul(c, g1, m2), m2), m2)
    return g1, h1, s1, t1


def _lift_pair(f, g, h, ell, target):
    d, s, t = _gcdex(g, h, ell)
    if d != (1,):
        raise LiftingError(f"blocks share a factor mod {ell}")
    m = ell
    while m < target:
        g, h, s, t = _hensel_step(f, g, h, s, t, m)
        m *= m
    return _red(g, target), _red(h, target)


def _product(blocks, m) -> tuple:
    out = (1,)
    for b in blocks:
        out = _mul(out, b, m)
    return out


def _lift_tree(f, blocks, ell, target):
    if len(blocks) == 1:
        return [_red(f, target)]
    half = len(blocks) // 2
    left, right = blocks[:half], blocks[half:]
    g, h = _lift_pair(f, _product(left, ell), _product(right, ell), ell, target)
    return _lift_tree(g, left, ell, target) + _lift_tree(h, right, ell, target)


def hensel_lift_blocks(f, blocks: Sequence[ModPoly], m: int) -> list[ModPoly]:
    """Lift a coprime factorization of monic f mod ell to one mod ell**m."""
    f = trim(f)
    if m < 1:
        raise ArithmeticArgumentError("precision must be >= 1")
    if not blocks:
        raise ArithmeticArgumentError("no blocks")
    ell = blocks[0].modulus
    if any(b.modulus != ell or not b.is_monic() for b in blocks):
        raise ArithmeticArgumentError("blocks must be monic with a common prime modulus")
    if _product([b.coeffs for b in blocks], ell) != _red(f, ell):
        raise ArithmeticArgumentError(f"blocks do not multiply to f mod {ell}")
    target = ell**m
    lifted = _lift_tree(f, [b.coeffs for b in blocks], ell, target)
    return [ModPoly(c, target) for c in lifted]
