import math
from dataclasses import replace
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from dynirr.errors import BudgetExceeded, SquareModulus, ZeroResultant
from dynirr.exactalg import IntPoly, res_decompose
from dynirr.modp import iter_resultant_chars
from dynirr.sieve import (
    abs_weight_mass,
    build_window_sets,
    compute_S,
    compute_T,
    default_level,
    default_t,
    flipped_character,
    inner_square,
    pair_sum_T,
    prime_char_sum,
    prime_count,
    primes_in,
    pv_progression_sum,
    selberg_weights,
    sieve_indicator_sum,
    sifted_sum,
    weighted_progression_sum,
)

F = IntPoly((1, 0, 1))
QUARTIC = IntPoly((2, 0, 0, -2, 1))


def selberg_oracle(z):
    """Lambda_r straight from mobius/totient, no shared code with the module."""
    sqf = [r for r in range(1, z + 1) if sympy.mobius(r) != 0]
    G = sum(Fraction(1, sympy.totient(t)) for t in sqf)
    out = {}
    for r in sqf:
        acc = sum(Fraction(1, sympy.totient(t)) for t in sqf if t <= z // r and math.gcd(t, r) == 1)
        out[r] = int(sympy.mobius(r)) * Fraction(r, sympy.totient(r)) * acc / G
    return out


# --- primes ---------------------------------------------------------------------------


def test_primes_in_examples():
    assert primes_in(10, 20) == [11, 13, 17, 19]
    assert primes_in(14, 16) == []
    assert primes_in(2, 2) == [2]
    assert primes_in(0, 10) == [2, 3, 5, 7]


def test_prime_count_million():
    assert prime_count(2, 10**6) == 78498


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 600_000), st.integers(0, 300_000))
def test_primes_in_matches_sympy(lo, width):
    assert primes_in(lo, lo + width) == list(sympy.primerange(lo, lo + width + 1))


# --- Selberg weights -------------------------------------------------------------------


def test_weights_z2():
    W = selberg_weights(2)
    assert W.inner == {1: 1, 2: -1}
    assert W.combined == {1: 1, 2: -1}
    assert W.exact


def test_weights_z3():
    W = selberg_weights(3)
    assert W.inner == {1: 1, 2: Fraction(-4, 5), 3: Fraction(-3, 5)}
    assert W.combined == {1: 1, 2: Fraction(-24, 25), 3: Fraction(-21, 25), 6: Fraction(24, 25)}


@pytest.mark.parametrize("z", [2, 5, 10, 17, 30])
def test_weights_match_oracle(z):
    assert selberg_weights(z).inner == selberg_oracle(z)


@pytest.mark.parametrize("z", [2, 3, 7, 10, 30, 64])
def test_weight_invariants(z):
    W = selberg_weights(z)
    assert W.inner[1] == 1
    assert all(abs(v) <= 1 for v in W.inner.values())
    for e in W.combined:
        assert e <= z * z
        assert sympy.mobius(e) != 0
        assert max(sympy.primefactors(e), default=1) <= z


def test_weights_level_check():
    with pytest.raises(ValueError):
        selberg_weights(1)


def test_indicator_examples():
    W3 = selberg_weights(3)
    assert sieve_indicator_sum(5, W3) == 1
    assert sieve_indicator_sum(6, W3) == Fraction(4, 25)
    assert sieve_indicator_sum(4, selberg_weights(2)) == 0
    with pytest.raises(ValueError):
        sieve_indicator_sum(0, W3)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 40), st.integers(1, 10**7))
def test_quadratic_form(z, q):
    W = selberg_weights(z)
    s = sieve_indicator_sum(q, W)
    assert s == inner_square(q, W)
    assert s >= 0
    if all(q % p for p in W.primes):
        assert s == 1


def test_float_weights_track_exact():
    exact = selberg_weights(30)
    approx = selberg_weights(30, exact=False)
    assert not approx.exact
    for q in range(1, 5001):
        assert abs(sieve_indicator_sum(q, approx) - sieve_indicator_sum(q, exact)) <= 1e-9


@pytest.mark.parametrize("Z", [10**4, 10**5])
def test_sifted_count(Z):
    W = selberg_weights(default_level(Z))
    assert W.z == math.isqrt(math.isqrt(Z))
    total = sifted_sum(Z, 2 * Z, W)
    assert total <= 3 * Z / math.log(Z)
    assert total >= prime_count(Z, 2 * Z)


def test_sifted_sum_matches_pointwise():
    W = selberg_weights(5)
    assert sifted_sum(100, 400, W) == sum(sieve_indicator_sum(q, W) for q in range(100, 401))


def test_abs_mass_shrinks_against_z_squared():
    ratios = [float(abs_weight_mass(selberg_weights(z))) / z**2 for z in (10, 30, 100)]
    assert all(math.isfinite(r) for r in ratios)
    assert ratios[0] > ratios[1] > ratios[2]


def test_default_t():
    assert default_t(2) == 12
    assert default_t(4) == 5
    assert default_t(200) == 1


def test_default_level():
    assert default_level(10**4) == 10
    assert default_level(10) == 2


# --- window sets -------------------------------------------------------------------------


def test_window_sets_x2p1():
    ws = build_window_sets(F, 2, 3)
    assert [(ws.decomp[n].nu, ws.decomp[n].u) for n in range(2, 6)] == [(5, 1), (8, 5), (17, 13), (32, 677)]
    # classes (u mod 4, nu mod 2): (1,1) -> {2,4}, (1,0) -> {3,5}; tie goes to the lower index
    assert ws.N_set == (3, 5)
    assert ws.M_set == (3, 5) and ws.sign == 1
    assert ws.residue_class == (1, 0)


def test_window_budget():
    with pytest.raises(BudgetExceeded):
        build_window_sets(F, 2, 20)
    with pytest.raises(ValueError):
        build_window_sets(F, 1, 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.sampled_from([-2, -1, 1, 2, 3]), st.integers(1, 6))
def test_window_sets_are_largest_class(c0, c1, c2, t):
    f = IntPoly((c0, c1, c2))
    try:
        ws = build_window_sets(f, 2, t)
    except ZeroResultant:  # degenerate f
        return
    sizes = {}
    for n in range(2, 3 + t):
        rd = ws.decomp[n]
        sizes.setdefault((rd.u % 4, rd.nu % 2), []).append(n)
    assert len(ws.N_set) == max(len(v) for v in sizes.values())
    assert 4 * len(ws.N_set) >= t
    assert set(ws.M_set) <= set(ws.N_set)
    assert all(ws.decomp[n].u * ws.sign > 0 for n in ws.M_set)
    for r in ws.N_set:
        for s in ws.N_set:
            if r < s:
                for m in range(3, 100, 2):
                    e = ((ws.decomp[r].u + ws.decomp[s].u - 2) // 2) * ((m - 1) // 2) \
                        + (ws.decomp[r].nu + ws.decomp[s].nu) * (m * m - 1) // 8
                    assert e % 2 == 0


# --- S and T -------------------------------------------------------------------------------


def test_compute_S_example():
    ws = build_window_sets(F, 2, 3)
    ws = replace(ws, N_set=(3, 4), M_set=(3, 4))
    res = compute_S(F, 3, 3, ws)
    assert res.per_prime == {3: -2}
    assert res.S == 4
    assert compute_S(F, 3, 3, ws, "flipped").per_prime == {3: -2}


def test_compute_S_empty_range():
    ws = build_window_sets(F, 2, 3)
    assert compute_S(F, 14, 16, ws).S == 0


def test_compute_S_skips_bad_primes():
    f = IntPoly((3, 0, 1))  # Disc = -12
    ws = build_window_sets(f, 2, 2)
    res = compute_S(f, 2, 10, ws)
    assert res.skipped == (3,)
    assert 3 not in res.per_prime


def test_compute_S_mode_check():
    ws = build_window_sets(F, 2, 3)
    with pytest.raises(ValueError):
        compute_S(F, 3, 10, ws, "sideways")


@settings(max_examples=30, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5), st.sampled_from([-3, -1, 1, 2]))
def test_flip_matches_direct_termwise(c0, c1, c2):
    f = IntPoly((c0, c1, c2))
    try:
        ws = build_window_sets(f, 2, 3)
    except ZeroResultant:  # degenerate f
        return
    direct = compute_S(f, 3, 400, ws, "direct")
    flipped = compute_S(f, 3, 400, ws, "flipped")
    assert direct.per_prime == flipped.per_prime


def test_flipped_character_matches_symbol():
    for n in range(2, 5):
        rd = res_decompose(QUARTIC, n)
        for p in sympy.primerange(3, 300):
            chars = iter_resultant_chars(QUARTIC, p, n)
            assert flipped_character(rd, p) == chars[n] or chars[n] == 0


def brute_T(q_lo, q_hi, u1, u2, W):
    # triple sum over ordered pairs, written out term by term
    total = 0
    for a, b in ((u1, u2), (u2, u1)):
        for e, lam in W.combined.items():
            for q in range(q_lo, q_hi + 1):
                if q % e == 0:
                    total += lam * sympy.jacobi_symbol(q, a * b)
    return total


def test_compute_T_example():
    W = selberg_weights(2)
    one_pair = sum(sympy.jacobi_symbol(q, 15) for q in range(8, 17)) \
        - sum(sympy.jacobi_symbol(q, 15) for q in range(8, 17, 2))
    assert weighted_progression_sum(8, 16, 15, W) == one_pair
    assert pair_sum_T(8, 16, [3, 5], W) == 2 * one_pair == brute_T(8, 16, 3, 5, W)
    assert pair_sum_T(8, 16, [5, 3], W) == pair_sum_T(8, 16, [3, 5], W)


def test_compute_T_brute_force():
    W = selberg_weights(3)
    ws = build_window_sets(QUARTIC, 2, 2)
    us = [ws.decomp[n].u for n in ws.M_set]
    want = sum(brute_T(50, 200, us[i], us[j], W) for i in range(len(us)) for j in range(i + 1, len(us)))
    assert compute_T(QUARTIC, 50, 200, ws, W) == want


def test_compute_T_singleton_and_sign():
    W = selberg_weights(3)
    ws = replace(build_window_sets(F, 2, 3), M_set=(3,))
    assert compute_T(F, 100, 200, ws, W) == 0
    with pytest.raises(ValueError):
        pair_sum_T(1, 10, [3, -5], W)


# --- Polya-Vinogradov and prime sums --------------------------------------------------------


def test_pv_examples():
    assert pv_progression_sum(1, 101, 101) == 0
    assert pv_progression_sum(3, 1000, 15) == 0
    want = sympy.jacobi_symbol(2, 15) * sum(sympy.jacobi_symbol(m, 15) for m in range(1, 16))
    assert pv_progression_sum(2, 30, 15) == want
    assert pv_progression_sum(2, 30, 15) == sum(sympy.jacobi_symbol(k, 15) for k in range(2, 31, 2))


def test_pv_errors():
    with pytest.raises(SquareModulus):
        pv_progression_sum(1, 10, 9)
    with pytest.raises(ValueError):
        pv_progression_sum(1, 10, 14)
    with pytest.raises(ValueError):
        pv_progression_sum(0, 10, 15)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 20), st.integers(1, 3000), st.integers(1, 500).map(lambda k: 2 * k + 1))
def test_pv_brute(e, K, v):
    if math.isqrt(v) ** 2 == v:
        return
    assert pv_progression_sum(e, K, v) == sum(sympy.jacobi_symbol(k, v) for k in range(e, K + 1, e))


def test_prime_char_sum():
    assert prime_char_sum(3, 10) == -1
    assert prime_char_sum(3, 1) == 0
    with pytest.raises(SquareModulus):
        prime_char_sum(49, 100)
    for q in (5, 21, 101):
        assert abs(prime_char_sum(q, 1000)) <= prime_count(2, 1000)
