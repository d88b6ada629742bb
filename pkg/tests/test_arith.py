import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gl2torsion.arith import (
    ArithmeticArgumentError,
    InfiniteValuation,
    LiftingError,
    ModPoly,
    factor_mod_ell,
    hensel_lift_blocks,
    int_valuation,
    is_prime,
    poly_mul,
    primes_up_to,
    resultant,
)

X = sympy.Symbol("x")
SMALL_PRIMES = primes_up_to(97)


def expand_mod(factors, m):
    out = (1,)
    for fac, mult in factors:
        for _ in range(mult):
            out = poly_mul(out, fac.coeffs)
    return tuple(c % m for c in out)


def reduce_mod(f, m):
    return tuple(c % m for c in f)


monic_polys = st.integers(1, 8).flatmap(
    lambda d: st.lists(st.integers(-50, 50), min_size=d, max_size=d).map(lambda c: tuple(c) + (1,))
)


def test_is_prime_matches_sieve():
    sieve = set(primes_up_to(10000))
    assert all(is_prime(n) == (n in sieve) for n in range(-5, 10001))


@pytest.mark.parametrize(
    "f, ell, expected",
    [
        ((-1, -1, 1), 5, [((2, 1), 2)]),
        ((1, 0, 1), 2, [((1, 1), 2)]),
        ((-1, -1, 1), 11, [((7, 1), 1), ((3, 1), 1)]),
    ],
)
def test_factor_mod_ell_examples(f, ell, expected):
    got = factor_mod_ell(f, ell)
    # x - 4 = x + 7 and x - 8 = x + 3 mod 11; output sorted by coefficients
    assert sorted((g.coeffs, m) for g, m in got) == sorted(expected)
    assert [g.coeffs for g, _ in got] == sorted(g.coeffs for g, _ in got)


def test_factor_mod_ell_errors():
    with pytest.raises(ArithmeticArgumentError):
        factor_mod_ell((-1, -1, 1), 9)
    with pytest.raises(ArithmeticArgumentError):
        factor_mod_ell((-1, -1, 2), 5)


@settings(max_examples=200, deadline=None)
@given(monic_polys, st.sampled_from(SMALL_PRIMES), st.integers(0, 5))
def test_factor_round_trip(f, ell, seed):
    factors = factor_mod_ell(f, ell, seed=seed)
    assert expand_mod(factors, ell) == reduce_mod(f, ell)
    polys = [g.coeffs for g, _ in factors]
    assert len(set(polys)) == len(polys)
    for g, _ in factors:
        assert g.is_monic()
        assert sympy.Poly(list(reversed(g.coeffs)), X, modulus=ell).is_irreducible


@settings(max_examples=50, deadline=None)
@given(monic_polys, st.sampled_from([2, 3, 5, 7]))
def test_factor_output_independent_of_seed(f, ell):
    assert factor_mod_ell(f, ell, seed=0) == factor_mod_ell(f, ell, seed=12345)


@pytest.mark.parametrize(
    "f, blocks, ell, m, expected",
    [
        # roots 37 and 1 - 37 = -36 = 85 mod 121 (Vieta)
        ((-1, -1, 1), [(7, 1), (3, 1)], 11, 2, [(121 - 37, 1), (121 - 85, 1)]),
        ((1, 0, 1), [(3, 1), (2, 1)], 5, 2, [(25 - 7, 1), (25 - 18, 1)]),
    ],
)
def test_hensel_examples(f, blocks, ell, m, expected):
    lifted = hensel_lift_blocks(f, [ModPoly(b, ell) for b in blocks], m)
    assert [b.coeffs for b in lifted] == expected
    assert all(b.modulus == ell**m for b in lifted)


def test_hensel_single_block_is_f():
    f = (3, 0, -7, 2, 1)
    assert hensel_lift_blocks(f, [ModPoly.reduce(f, 7)], 5) == [ModPoly.reduce(f, 7**5)]


def test_hensel_rejects_non_coprime_blocks():
    # x^2 + 1 = (x + 1)^2 mod 2
    with pytest.raises(LiftingError):
        hensel_lift_blocks((1, 0, 1), [ModPoly((1, 1), 2), ModPoly((1, 1), 2)], 3)


@settings(max_examples=100, deadline=None)
@given(monic_polys, st.sampled_from(SMALL_PRIMES), st.integers(1, 12))
def test_hensel_round_trip(f, ell, m):
    blocks = [g**mult for g, mult in factor_mod_ell(f, ell)]
    lifted = hensel_lift_blocks(f, blocks, m)
    M = ell**m
    assert [b.degree for b in lifted] == [b.degree for b in blocks]
    assert expand_mod([(b, 1) for b in lifted], M) == reduce_mod(f, M)
    assert [ModPoly.reduce(b.coeffs, ell) for b in lifted] == blocks


@pytest.mark.parametrize(
    "f, g, expected",
    [
        ((-2, 0, 1), (-3, 1), 7),
        ((-1, -1, 1), (-1, 2), -5),
        ((5, 0, 3, 1), (1,), 1),
    ],
)
def test_resultant_examples(f, g, expected):
    assert resultant(f, g) == expected


def test_resultant_zero_input():
    with pytest.raises(ArithmeticArgumentError):
        resultant((), (1, 1))


int_polys = st.lists(st.integers(-20, 20), min_size=1, max_size=7).filter(lambda c: c[-1] != 0).map(tuple)


def sylvester_resultant(f, g):
    """Determinant of the Sylvester matrix (coefficients highest degree first)."""
    m, n = len(f) - 1, len(g) - 1
    a, b = list(reversed(f)), list(reversed(g))
    rows = [[0] * i + a + [0] * (n - 1 - i) for i in range(n)]
    rows += [[0] * i + b + [0] * (m - 1 - i) for i in range(m)]
    return int(sympy.Matrix(rows).det())


@settings(max_examples=150, deadline=None)
@given(int_polys, int_polys)
def test_resultant_matches_sylvester(f, g):
    if len(f) == 1 and len(g) == 1:
        return
    assert resultant(f, g) == sylvester_resultant(f, g)


@settings(max_examples=100, deadline=None)
@given(monic_polys, int_polys, int_polys)
def test_resultant_multiplicative(f, g, h):
    assert resultant(f, poly_mul(g, h)) == resultant(f, g) * resultant(f, h)


@pytest.mark.parametrize("n, ell, k", [(56, 2, 3), (56, 7, 1), (1331, 11, 3), (-12, 3, 1), (5, 2, 0)])
def test_int_valuation(n, ell, k):
    assert int_valuation(n, ell) == k


def test_int_valuation_zero():
    with pytest.raises(InfiniteValuation):
        int_valuation(0, 3)


nonzero = st.integers(-10**12, 10**12).filter(bool)


@given(nonzero, nonzero, st.sampled_from(SMALL_PRIMES))
def test_int_valuation_additive(a, b, ell):
    assert int_valuation(a * b, ell) == int_valuation(a, ell) + int_valuation(b, ell)


def test_equal_degree_characteristic_two():
    # x^4 + x + 1 is irreducible over F_2; x^6 + x^5 + x^4 + x^3 + x^2 + x + 1 = product of
    # two cubics x^3 + x + 1 and x^3 + x^2 + 1
    assert factor_mod_ell((1, 1, 0, 0, 1), 2) == [(ModPoly((1, 1, 0, 0, 1), 2), 1)]
    got = factor_mod_ell((1,) * 7, 2)
    assert [(g.coeffs, m) for g, m in got] == [((1, 0, 1, 1), 1), ((1, 1, 0, 1), 1)]


def test_factor_random_high_multiplicity():
    rng = random.Random(7)
    for ell in (2, 3, 5):
        for _ in range(20):
            g = (rng.randrange(ell), 1)
            f = poly_mul(poly_mul(g, g), poly_mul(g, (1, 0, 1)))
            assert expand_mod(factor_mod_ell(f, ell), ell) == reduce_mod(f, ell)
