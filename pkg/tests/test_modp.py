import itertools
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from dynirr.errors import BadReduction, DegreeCapExceeded, EvenModulus
from dynirr.exactalg import IntPoly, iterate, iterate_resultant, resultant
from dynirr.modp import (
    Eliminated,
    ModPoly,
    Reason,
    SurvivedToDepth,
    _mul,
    is_bad_prime,
    iter_resultant_chars,
    iterate_mod_p,
    jacobi,
    rabin_irreducible,
    reduce_mod_p,
    required_sign,
    res_mod_p,
    stability_scan_single,
)
from dynirr.sieve import primes_in

X = sympy.symbols("x")
F = IntPoly((1, 0, 1))
QUARTIC = IntPoly((2, 0, 0, -2, 1))


def euler_jacobi(a, v):
    """Product of Euler-criterion Legendre symbols over the factorisation of v."""
    out = 1
    for q, e in sympy.factorint(abs(v)).items():
        r = pow(a % q, (q - 1) // 2, q)
        s = 0 if a % q == 0 else (1 if r == 1 else -1)
        out *= s**e
    return out


def brute_irreducible(coeffs, p):
    """Trial division by every monic polynomial of degree <= D/2."""
    D = len(coeffs) - 1
    for dd in range(1, D // 2 + 1):
        for tail in itertools.product(range(p), repeat=dd):
            m = list(tail) + [1]
            r = list(coeffs)
            while len(r) - 1 >= dd:
                c = r[-1] * pow(m[-1], -1, p) % p
                s = len(r) - 1 - dd
                for j in range(dd + 1):
                    r[s + j] = (r[s + j] - c * m[j]) % p
                r.pop()
            if not any(r):
                return False
    return True


def sympy_irreducible(fp: ModPoly) -> bool:
    return sympy.Poly(list(reversed(fp.coeffs)), X, domain=sympy.GF(fp.p)).is_irreducible


# --- Jacobi ----------------------------------------------------------------------


def test_jacobi_examples():
    assert jacobi(2, 7) == 1
    assert jacobi(5, 21) == 1
    for v in (3, 5, 9, 15, 101):
        assert jacobi(1, v) == 1
    assert jacobi(7, 1) == 1
    assert jacobi(7, -1) == 1
    assert jacobi(3, -7) == jacobi(3, 7)


def test_jacobi_even_modulus():
    with pytest.raises(EvenModulus):
        jacobi(3, 10)


def test_jacobi_matches_euler_oracle():
    rng = random.Random(7)
    for _ in range(2000):
        v = rng.randrange(1, 5000) | 1
        a = rng.randrange(-10**5, 10**5)
        assert jacobi(a, v) == euler_jacobi(a, v), (a, v)
        assert jacobi(a, v) == sympy.jacobi_symbol(a % v, v)


@settings(max_examples=1000, deadline=None)
@given(st.integers(-10**9, 10**9), st.integers(-10**9, 10**9), st.integers(0, 10**9))
def test_jacobi_multiplicative(a, b, k):
    v = 2 * k + 1
    assert jacobi(a * b, v) == jacobi(a, v) * jacobi(b, v)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**12), st.integers(1, 10**12))
def test_reciprocity(m, n):
    m, n = 2 * m + 1, 2 * n + 1
    if sympy.gcd(m, n) != 1:
        return
    assert jacobi(m, n) * jacobi(n, m) == (-1) ** (((m - 1) // 2) * ((n - 1) // 2))


def test_jacobi_big():
    p = 2**127 - 1
    for a in (2, 3, 5, 10**30 + 7):
        assert jacobi(a, p) == (1 if pow(a, (p - 1) // 2, p) == 1 else -1)


# --- reduction -----------------------------------------------------------------


def test_reduce_examples():
    r = reduce_mod_p(F, 5)
    assert r.poly.coeffs == (1, 0, 1) and not r.degree_dropped
    r = reduce_mod_p(IntPoly((5, 0, 0, 4, 3)), 3)
    assert r.poly.coeffs == (2, 0, 0, 1) and r.degree_dropped
    r = reduce_mod_p(QUARTIC, 7)
    assert r.poly.coeffs == (2, 0, 0, 5, 1)


def test_iterate_mod_p_matches_exact():
    for p in (3, 7, 101):
        for n in range(1, 5):
            want = ModPoly(p, iterate(QUARTIC, n).coeffs)
            assert iterate_mod_p(QUARTIC, p, n) == want


# --- multiplication --------------------------------------------------------------


@pytest.mark.parametrize("p", [3, 65537, 2**31 - 1, 2**61 - 1])
def test_mul_against_schoolbook(p):
    rng = random.Random(p)
    for la, lb in ((5, 7), (40, 33), (300, 1)):
        a = [rng.randrange(p) for _ in range(la)]
        b = [rng.randrange(p) for _ in range(lb)]
        want = [0] * (la + lb - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                want[i + j] = (want[i + j] + x * y) % p
        got = _mul(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64), p)
        assert [int(c) for c in got] == want


# --- Rabin -----------------------------------------------------------------------


def test_rabin_examples():
    assert rabin_irreducible(ModPoly(3, (1, 0, 1)))
    assert not rabin_irreducible(ModPoly(5, (1, 0, 1)))
    assert rabin_irreducible(ModPoly(3, (2, 0, 2, 0, 1)))
    assert brute_irreducible((2, 0, 2, 0, 1), 3)


def test_rabin_linear_and_cap():
    assert rabin_irreducible(ModPoly(7, (3, 2)))
    with pytest.raises(DegreeCapExceeded):
        rabin_irreducible(ModPoly(3, (1,) * 20), cap=10)


def test_rabin_matches_brute_force():
    rng = random.Random(11)
    for _ in range(400):
        p = rng.choice([3, 5, 7, 11])
        D = rng.randint(2, 6)
        c = [rng.randrange(p) for _ in range(D)] + [rng.randrange(1, p)]
        assert rabin_irreducible(ModPoly(p, c)) == brute_irreducible(c, p), (c, p)


@pytest.mark.parametrize("p", [10007, 2**31 - 1, 2**61 - 1])
def test_rabin_matches_sympy_large_p(p):
    rng = random.Random(p)
    for _ in range(30):
        D = rng.randint(2, 12)
        c = [rng.randrange(p) for _ in range(D)] + [1]
        fp = ModPoly(p, c)
        assert rabin_irreducible(fp) == sympy_irreducible(fp), (c, p)
    g = ModPoly(p, (rng.randrange(p), rng.randrange(p), 1))
    h = ModPoly(p, (rng.randrange(p), 1, 0, 1))
    prod = _mul(np.array(g.coeffs), np.array(h.coeffs), p)
    assert not rabin_irreducible(ModPoly(p, tuple(int(c) for c in prod)))


def test_rabin_product_of_equal_degree_factors():
    # X^(p^6) = X mod a product of two distinct cubics; the gcd at 6/2 catches it
    p = 5
    cubics = [c for c in itertools.product(range(p), repeat=3) if brute_irreducible(list(c) + [1], p)]
    a, b = cubics[0], cubics[1]
    prod = _mul(np.array(list(a) + [1]), np.array(list(b) + [1]), p)
    assert not rabin_irreducible(ModPoly(p, tuple(int(c) for c in prod)))
    sq = _mul(np.array(list(a) + [1]), np.array(list(a) + [1]), p)
    assert not rabin_irreducible(ModPoly(p, tuple(int(c) for c in sq)))


def test_rabin_high_degree_iterate():
    # x^2+1 mod 3 stays irreducible; degree 512
    assert rabin_irreducible(iterate_mod_p(F, 3, 9))


def test_rabin_large_degree_matches_sympy():
    p = 7
    rng = random.Random(3)
    for _ in range(4):
        c = [rng.randrange(p) for _ in range(60)] + [1]
        fp = ModPoly(p, c)
        assert rabin_irreducible(fp) == sympy_irreducible(fp)


# --- resultant characters ----------------------------------------------------------


def test_res_mod_p_matches_exact():
    rng = random.Random(5)
    for _ in range(200):
        a = IntPoly([rng.randint(-9, 9) for _ in range(rng.randint(1, 6))] + [rng.randint(1, 9)])
        b = IntPoly([rng.randint(-9, 9) for _ in range(rng.randint(1, 6))] + [rng.randint(1, 9)])
        p = rng.choice([3, 5, 7, 11, 13, 101])
        if a.lc % p == 0 or b.lc % p == 0:
            continue
        assert res_mod_p(a.coeffs, b.coeffs, p) == resultant(a, b) % p


def test_chars_x2p1_p3():
    assert iter_resultant_chars(F, 3, 4) == {2: -1, 3: -1, 4: -1}


def test_chars_x2p1_p13_zero_at_4():
    # 13 divides u_4 = 13
    chars = iter_resultant_chars(F, 13, 5)
    assert chars[4] == 0
    assert all(chars[n] != 0 for n in (2, 3, 5))


def test_chars_bad_reduction():
    with pytest.raises(BadReduction):
        iter_resultant_chars(IntPoly((1, 0, 3)), 3, 4)
    with pytest.raises(EvenModulus):
        iter_resultant_chars(F, 2, 4)


@pytest.mark.parametrize("f", [F, IntPoly((2, -2, 1)), QUARTIC, IntPoly((1, 0, -3, 2)),
                               IntPoly((3, 1, -2, 5)), IntPoly((-1, 2, 0, 1, 3))])
def test_chars_match_exact_resultants(f):
    exact = {n: f.lc * iterate_resultant(f, n) for n in range(2, 6)}
    for p in primes_in(3, 200):
        if f.lc % p == 0 or f.derivative().lc % p == 0:
            continue
        chars = iter_resultant_chars(f, p, 5)
        for n in range(2, 6):
            assert chars[n] == jacobi(exact[n] % p, p), (f, p, n)


# --- stability certificate --------------------------------------------------------------


def test_scan_single_examples():
    assert stability_scan_single(F, 5, 10).outcome == Eliminated(1, Reason.DISC_SQUARE)
    v = stability_scan_single(F, 3, 10)
    assert v.outcome == SurvivedToDepth(10) and v.survived
    assert v.rabin_checked_to == 10


def test_scan_single_p13():
    # -4 = 3^2 mod 13, so the discriminant test fires first; the n = 4 symbol is 0 as well
    v = stability_scan_single(F, 13, 10)
    assert v.outcome == Eliminated(1, Reason.DISC_SQUARE)
    assert iter_resultant_chars(F, 13, 4)[4] == 0


def test_scan_single_shared_root():
    # a zero symbol needs f(gamma) to be a root of an earlier iterate, which
    # Rabin at n = 1 already rules out; with the cap below d only the
    # character path runs
    f = IntPoly((-2, -2, -2, -1, 1))
    assert iterate_resultant(f, 2) % 19 == 0
    v = stability_scan_single(f, 19, 6, rabin_cap=3)
    assert v.outcome == Eliminated(2, Reason.SHARED_ROOT)
    assert v.rabin_checked_to == 0
    assert stability_scan_single(f, 19, 6).outcome == Eliminated(1, Reason.RABIN_REDUCIBLE)


def test_bad_reduction_verdict():
    f = IntPoly((1, 0, 3))  # 2 f_d lc(f') Disc = 2 * 2 * (-12)
    assert is_bad_prime(f, 3)
    v = stability_scan_single(f, 3, 5)
    assert v.bad_reduction and v.outcome is None
    assert v.record() == {"p": 3, "verdict": "bad_reduction", "n": None, "reason": None}


def test_record_schema():
    assert stability_scan_single(F, 5, 10).record() == {
        "p": 5, "verdict": "eliminated", "n": 1, "reason": "disc_square"}
    assert stability_scan_single(F, 3, 4).record() == {
        "p": 3, "verdict": "survived", "n": None, "reason": None}


def test_required_sign():
    assert required_sign(F, 7) == -1
    cubic = IntPoly((3, 1, -2, 5))
    for p in (7, 11, 13, 17):
        assert required_sign(cubic, p) == jacobi(-1, p)


@pytest.mark.parametrize("f", [F, IntPoly((2, -2, 1)), QUARTIC, IntPoly((3, 1, -2, 5))])
def test_depth_monotone(f):
    for p in primes_in(3, 400):
        if is_bad_prime(f, p):
            continue
        shallow = stability_scan_single(f, p, 4)
        deep = stability_scan_single(f, p, 8)
        if isinstance(shallow.outcome, Eliminated):
            assert deep.outcome == shallow.outcome
        if deep.survived:
            assert shallow.survived


def test_survivors_are_rabin_irreducible():
    # within the cap a survivor has every iterate irreducible
    for p in primes_in(3, 300):
        v = stability_scan_single(QUARTIC, p, 4)
        if v.survived:
            for n in range(1, 5):
                assert rabin_irreducible(iterate_mod_p(QUARTIC, p, n))


def test_parity_bridge():
    # f_d^k Res and f_d Res share a square class when k = d-1 is odd (d even);
    # for d odd the exponent (n-1)k+1 is odd
    for d in (2, 4, 6):
        assert (d - 1) % 2 == 1
    for d in (3, 5, 7):
        for n in range(1, 10):
            assert ((n - 1) * (d - 1) + 1) % 2 == 1
